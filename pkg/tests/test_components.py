import math

import numpy as np
import pytest

from slhnet.components import make_beamsplitter, make_cavity, make_phase_shifter, make_qubit_coupler
from slhnet.errors import BadParam
from slhnet.operators import is_unitary, sigma_minus, sigma_z


def test_trivial_cavity():
    G = make_cavity(1.0, 0.0, 0.0, dim=2)
    assert np.allclose(G.S, np.eye(2))
    assert np.allclose(G.L, 0)
    assert np.allclose(G.H, np.diag([0, 1]))
    assert G.ports == ("a.0",)


@pytest.mark.parametrize("kwargs", [{"dim": 1}, {"dim": 2.5}, {"gamma": -1.0}])
def test_cavity_bad_params(kwargs):
    args = {"omega": 1.0, "gamma": 0.5, "dim": 4} | kwargs
    with pytest.raises(BadParam):
        make_cavity(**args)


def test_two_port_cavity():
    G = make_cavity(0.0, 4.0, 0.3, dim=3, name="c", kappa=9.0)
    assert G.n == 2
    assert np.allclose(G.coupling("c.1").matrix, 3.0 * np.diag([0, 1, 2]))
    assert np.allclose(G.S, np.exp(0.3j) * np.eye(6))


def test_phase_shifter():
    G = make_phase_shifter(0.0, 2)
    assert np.allclose(G.S, np.eye(2)) and np.allclose(G.L, 0) and np.allclose(G.H, 0)
    with pytest.raises(BadParam):
        make_phase_shifter(0.1, 0)


def test_beamsplitter_full_transmission():
    assert np.allclose(make_beamsplitter(1.0).S, [[0, -1], [1, 0]])


@pytest.mark.parametrize("t", [1e-6, 0.1, 0.5, 0.99, 1.0])
def test_beamsplitter_unitary(t):
    G = make_beamsplitter(t, 3)
    assert G.n == 6 and is_unitary(G.S)
    assert np.allclose(G.S[:3, :3], math.sqrt(1 - t * t) * np.eye(3))


@pytest.mark.parametrize("t", [0.0, -0.2, 1.2])
def test_beamsplitter_bad_t(t):
    with pytest.raises(BadParam):
        make_beamsplitter(t)


def test_qubit_coupler():
    G = make_qubit_coupler(1.0, 0.0)
    assert G.n == 2 and G.dim == 2
    assert G.coupling("q.0").close_to(sigma_minus("q"))
    assert np.allclose(G.coupling("q.1").matrix, 0)
    G = make_qubit_coupler(0.0, 4.0, 1.0)
    assert G.coupling("q.1").close_to(2 * sigma_z("q"))
    with pytest.raises(BadParam):
        make_qubit_coupler(-1.0, 0.0)
