import cmath
import csv
import io
import json
import math

import numpy as np
import pytest

from randmodels import random_passive
from slhnet.errors import InvalidModel, SingularAtPoint
from slhnet.linear import (
    LinearPassiveModel,
    abcd,
    cavity_lqss,
    closed_loop_generator,
    delay_loop_omega,
    delay_sweep,
    linear_concat,
    linear_feedback,
    linear_series,
    lqss_to_slh,
    rect_grid,
    sweep_columns,
    sweep_to_csv,
    sweep_to_json,
    zero_delay_omega,
)
from slhnet.network import close_all_loops, concat, feedback_reduce, series
from slhnet.operators import destroy


def test_abcd_single_cavity():
    w, g, phi = 1.2, 0.5, 0.8
    ss = abcd(cavity_lqss(w, g, phi))
    assert ss.A[0, 0] == pytest.approx(-g / 2 - 1j * w)
    assert ss.B[0, 0] == pytest.approx(-math.sqrt(g) * cmath.exp(1j * phi))
    assert ss.D[0, 0] == pytest.approx(cmath.exp(1j * phi))


def test_abcd_uncoupled():
    model = LinearPassiveModel(np.diag([1.0, 2.0]), np.zeros((1, 2)), [[1j]])
    ss = abcd(model)
    assert np.allclose(ss.A, -1j * np.diag([1.0, 2.0]))
    assert np.allclose(ss.B, 0)


def test_abcd_two_modes_blockwise():
    Omega = np.diag([0.3, -0.7])
    C = np.array([[0.4, 1.1], [0.2, -0.5j]])
    S = np.array([[0, 1], [1j, 0]])
    ss = abcd(LinearPassiveModel(Omega, C, S))
    for j in range(2):
        for k in range(2):
            expected = -0.5 * sum(np.conj(C[p, j]) * C[p, k] for p in range(2)) - 1j * Omega[j, k]
            assert ss.A[j, k] == pytest.approx(expected)
    assert np.allclose(ss.B, -C.conj().T @ S)


def test_invalid_models():
    with pytest.raises(InvalidModel):
        LinearPassiveModel([[1, 1j], [0, 1]], np.zeros((1, 2)), [[1]])
    with pytest.raises(InvalidModel):
        LinearPassiveModel([[1]], [[1]], [[2]])


def test_zero_delay_cavity_matches_shifted_frequency():
    w, g = 1.0, 0.6
    model = cavity_lqss(w, g, math.pi / 2)
    for s in (0.1, 1j, -0.3 + 2j):
        assert delay_loop_omega(model, 0.0, s)[0, 0] == pytest.approx(w + g / 2)
    assert zero_delay_omega(model)[0, 0] == pytest.approx(w + g / 2)


def test_uncoupled_delay_is_trivial():
    model = LinearPassiveModel([[0.7]], [[0.0]], [[1j]])
    assert np.allclose(delay_loop_omega(model, 1.0, 0.3 + 0.2j), [[0.7]])


@pytest.mark.parametrize("tau", [0.0, 0.3, 1.0])
def test_generator_identity(tau):
    rng = np.random.default_rng(11)
    for _ in range(10):
        model = random_passive(rng, 2, 2)
        s = complex(rng.uniform(-1, 1), rng.uniform(-3, 3))
        assert np.allclose(closed_loop_generator(model, tau, s), -1j * delay_loop_omega(model, tau, s), atol=1e-10)


def test_zero_delay_hermitian():
    rng = np.random.default_rng(12)
    model = random_passive(rng, 3, 2)
    W = zero_delay_omega(model)
    assert np.allclose(W, W.conj().T)


def test_continuity_in_tau():
    rng = np.random.default_rng(13)
    model = random_passive(rng, 2, 2)
    s = 0.4 + 0.9j
    base = delay_loop_omega(model, 0.0, s)
    gaps = [np.abs(delay_loop_omega(model, t, s) - base).max() for t in (1e-2, 5e-3, 2.5e-3)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert 1.8 < gaps[0] / gaps[1] < 2.2


def test_imaginary_axis_periodicity():
    model = cavity_lqss(1.0, 0.5, 0.4)
    tau = 1.0
    for w in (0.1, 0.7, 2.0):
        a = delay_loop_omega(model, tau, 1j * w)
        b = delay_loop_omega(model, tau, 1j * (w + 2 * math.pi / tau))
        assert np.allclose(a, b)


def test_negative_tau_rejected():
    with pytest.raises(ValueError):
        delay_loop_omega(cavity_lqss(1, 1, 0.4), -0.1, 0j)


def test_sweep_flags_singular_points():
    model = cavity_lqss(1.0, 0.5, 0.0)  # I - S = 0 at tau = 0
    points = delay_sweep(model, 0.0, [0.0, 1j])
    assert all(p.singular and p.omega is None for p in points)
    with pytest.raises(SingularAtPoint):
        delay_loop_omega(model, 0.0, 0.0)
    rows = list(csv.reader(io.StringIO(sweep_to_csv(points, 1))))
    assert rows[0] == sweep_columns(1)
    assert rows[1][-1] == "1" and rows[1][2] == "nan"


def test_sweep_single_point_and_zero_delay_constant():
    model = cavity_lqss(1.0, 0.5, 1.0)
    grid = rect_grid(-0.5, 0.5, 3, -2, 2, 4)
    assert len(grid) == 12 and grid[1] == complex(-0.5, -2 + 4 / 3)
    pts = delay_sweep(model, 0.0, grid)
    assert all(np.allclose(p.omega, pts[0].omega) for p in pts)
    one = delay_sweep(model, 0.5, [0.2j])[0]
    assert np.allclose(one.omega, delay_loop_omega(model, 0.5, 0.2j))
    data = json.loads(json.dumps(sweep_to_json(pts, 0.0, ["a"])))
    assert data["type"] == "delay_sweep" and len(data["points"]) == 12


def test_lqss_to_slh_single_mode():
    model = cavity_lqss(0.9, 0.4, 0.3, mode="a")
    G = lqss_to_slh(model, [3])
    assert np.allclose(G.H, 0.9 * np.diag([0, 1, 2]))
    assert np.allclose(G.L, math.sqrt(0.4) * destroy("a", 3).matrix)


def test_lqss_to_slh_off_diagonal():
    k = 0.3 - 0.2j
    model = LinearPassiveModel([[0, k], [np.conj(k), 0]], np.zeros((1, 2)), [[1]], ("a", "b"))
    G = lqss_to_slh(model, [3, 2])
    a, b = destroy("a", 3), destroy("b", 2)
    assert np.allclose(G.H, (k * (a.dag() @ b) + np.conj(k) * (b.dag() @ a)).matrix)


def test_zero_delay_loop_matches_fock_closure_below_edge():
    rng = np.random.default_rng(14)
    model = random_passive(rng, 2, 2)
    model = LinearPassiveModel(model.Omega, model.C, model.S, ("a", "b"))
    dims = [4, 4]
    closed = close_all_loops(lqss_to_slh(model, dims)).H
    W = zero_delay_omega(model)
    expected = lqss_to_slh(LinearPassiveModel(W, np.zeros((1, 2)), [[1]], ("a", "b")), dims).H
    # drop basis states touching the top Fock level of either mode
    keep = [i * 4 + j for i in range(3) for j in range(3)]
    assert np.allclose(closed[np.ix_(keep, keep)], expected[np.ix_(keep, keep)], atol=1e-10)


def test_linear_composition_mirrors_slh():
    c1 = cavity_lqss(1.0, 0.5, 0.3, mode="a", port="a.0")
    c2 = cavity_lqss(-0.4, 0.8, 1.1, mode="b", port="b.0")
    lin = linear_series(c2, c1)
    slh = series(lqss_to_slh(c2, [3]), lqss_to_slh(c1, [3]))
    assert np.allclose(lqss_to_slh(lin, [3, 3]).H, slh.H)
    both = linear_concat([c1, c2])
    assert both.ports == ("a.0", "b.0") and both.modes == ("a", "b")
    fb = linear_feedback(both, ["b.0"])
    ref = feedback_reduce(concat([lqss_to_slh(c1, [3]), lqss_to_slh(c2, [3])]), ["b.0"])
    assert np.allclose(lqss_to_slh(fb, [3, 3]).H, ref.H)
