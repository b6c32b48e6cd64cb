"""Composition and reduction of SLH networks.

Series product, concatenation, feedback reduction (Ito and Stratonovich
routes, optional unitary gain in the loop), isolated-loop Hamiltonians, the
beam-splitter loop family and the two-component loop decomposition used to
engineer inter-system couplings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import BadParam, DimensionMismatch, DuplicatePortLabel, IllPosedNetwork, PortCountMismatch, UnknownLabel
from .operators import EPS, Operator, block, im_matrix, inverse_matrix, merge_layouts
from .slh import SLHModel, StratonovichModel


def _common(*models: SLHModel) -> list[SLHModel]:
    layout = merge_layouts(G.layout for G in models)
    return [G.to(layout) for G in models]


def series(G2: SLHModel, G1: SLHModel) -> SLHModel:
    """``G2 <| G1``: the outputs of ``G1`` drive the inputs of ``G2`` channel by channel.

    The composite keeps the port labels of ``G1``.
    """
    if G1.n != G2.n:
        raise PortCountMismatch(f"series of {G2.n}-port and {G1.n}-port models")
    G1, G2 = _common(G1, G2)
    S = G2.S @ G1.S
    L = G2.L + G2.S @ G1.L
    H = G1.H + G2.H + im_matrix(G2.L.conj().T @ G2.S @ G1.L)
    return SLHModel(G1.ports, G1.layout, S, L, H)


def series_chain(*models: SLHModel) -> SLHModel:
    """``series_chain(Gn, ..., G1) = Gn <| ... <| G1``."""
    out = models[-1]
    for G in reversed(models[:-1]):
        out = series(G, out)
    return out


def concat(models: Sequence[SLHModel]) -> SLHModel:
    """Parallel assembly: block-diagonal ``S``, stacked ``L``, summed ``H``."""
    models = list(models)
    if not models:
        raise ValueError("concat needs at least one model")
    ports = [p for G in models for p in G.ports]
    if len(set(ports)) != len(ports):
        raise DuplicatePortLabel(f"concat would duplicate port labels: {ports}")
    models = _common(*models)
    d = models[0].dim
    S = np.zeros((len(ports) * d,) * 2, dtype=complex)
    off = 0
    for G in models:
        k = G.n * d
        S[off:off + k, off:off + k] = G.S
        off += k
    L = np.vstack([G.L for G in models])
    H = sum(G.H for G in models)
    return SLHModel(tuple(ports), models[0].layout, S, L, H)


@dataclass(frozen=True)
class FeedbackPlan:
    """Which ports to close, and an optional unitary gain ``eta`` in the loop.

    Output ``j`` of an internal port is fed back as ``b_in = eta b_out`` over
    the internal ports in the listed order.  ``gain`` may be an ``m x m``
    scalar array or an ``(m d)``-square operator block array; ``None`` is the
    identity (each output returns to the same-labeled input).
    """

    internal_ports: tuple[str, ...]
    gain: np.ndarray | None = None

    def __post_init__(self):
        ports = tuple(self.internal_ports)
        if not ports:
            raise ValueError("feedback plan needs at least one internal port")
        if len(set(ports)) != len(ports):
            raise DuplicatePortLabel(f"repeated internal ports {ports}")
        object.__setattr__(self, "internal_ports", ports)


def _split(G: SLHModel, internal: Sequence[str]) -> tuple[list[int], list[int]]:
    for p in internal:
        if p not in G.ports:
            raise UnknownLabel(f"no port {p!r} in {G.ports}")
    i_idx = [G.index(p) for p in internal]
    e_idx = [k for k, p in enumerate(G.ports) if p not in internal]
    return e_idx, i_idx


def _gain_matrix(gain, m: int, d: int) -> np.ndarray:
    g = np.asarray(gain, dtype=complex)
    if g.shape == (m, m):
        g = np.kron(g, np.eye(d))
    if g.shape != (m * d, m * d):
        raise DimensionMismatch(f"gain has shape {g.shape}, expected {(m, m)} or {(m * d, m * d)}")
    dev = np.max(np.abs(g.conj().T @ g - np.eye(m * d)), initial=0.0)
    if dev > EPS:
        raise ValueError(f"feedback gain is not unitary (deviation {dev:.3g})")
    return g


def feedback_reduce(G: SLHModel, plan: FeedbackPlan | Sequence[str], fast_path: bool = True) -> SLHModel:
    """Eliminate the internal ports of ``G`` by feeding their outputs back in.

    Uses the general reduction with ``K = (eta^-1 - S_ii)^-1``::

        S_fb = S_ee + S_ei K S_ie
        L_fb = L_e + S_ei K L_i
        H_fb = H + L_i^dag Im{S_ii K} L_i + Im{L_e^dag S_ei K L_i}

    When there is no gain and the loop is isolated (``S_ei = S_ie = 0``) the
    shortcut ``H_fb = H + L_i^dag Z_i L_i`` is taken instead, unless
    ``fast_path`` is False.
    """
    if not isinstance(plan, FeedbackPlan):
        plan = FeedbackPlan(tuple(plan))
    e, i = _split(G, plan.internal_ports)
    d = G.dim
    S_ee, S_ei = block(G.S, d, e, e), block(G.S, d, e, i)
    S_ie, S_ii = block(G.S, d, i, e), block(G.S, d, i, i)
    L_e, L_i = block(G.L, d, e, [0]), block(G.L, d, i, [0])
    ports = tuple(G.ports[k] for k in e)

    if plan.gain is None:
        isolated = fast_path and max(
            np.max(np.abs(S_ei), initial=0.0), np.max(np.abs(S_ie), initial=0.0)
        ) <= EPS
        if isolated:
            H = G.H + isolated_loop_hamiltonian(S_ii, L_i)
            return SLHModel(ports, G.layout, S_ee, L_e, H)
        eta_inv = np.eye(len(i) * d)
        context = "I - S_ii"
    else:
        eta = _gain_matrix(plan.gain, len(i), d)
        eta_inv = eta.conj().T
        context = "eta^-1 - S_ii"

    K = inverse_matrix(eta_inv - S_ii, context, error=IllPosedNetwork)
    S = S_ee + S_ei @ K @ S_ie
    L = L_e + S_ei @ K @ L_i
    H = G.H + L_i.conj().T @ im_matrix(S_ii @ K) @ L_i + im_matrix(L_e.conj().T @ S_ei @ K @ L_i)
    return SLHModel(ports, G.layout, S, L, H)


def schur_complement(X: np.ndarray, keep: Sequence[int], short: Sequence[int], d: int, context: str = "X_bb") -> np.ndarray:
    """``X_aa - X_ab X_bb^-1 X_ba`` over ``d x d`` blocks, shortening ``short``."""
    X_aa, X_ab = block(X, d, keep, keep), block(X, d, keep, short)
    X_ba, X_bb = block(X, d, short, keep), block(X, d, short, short)
    return X_aa - X_ab @ inverse_matrix(X_bb, context, error=IllPosedNetwork) @ X_ba


def feedback_reduce_strat(E: StratonovichModel, internal_ports: Sequence[str]) -> StratonovichModel:
    """Feedback reduction in Stratonovich form: the Schur complement shortening the internal block."""
    internal = list(internal_ports)
    for p in internal:
        if p not in E.ports:
            raise UnknownLabel(f"no port {p!r} in {E.ports}")
    short = [E.ports.index(p) + 1 for p in internal]
    keep = [0] + [k + 1 for k, p in enumerate(E.ports) if p not in internal]
    Efb = schur_complement(E.E, keep, short, E.layout.dim, "E_ii")
    ports = tuple(p for p in E.ports if p not in internal)
    return StratonovichModel(ports, E.layout, 0.5 * (Efb + Efb.conj().T))


def loop_z(S_ii) -> np.ndarray:
    """``Z = Im{(I - S_ii)^-1}``, the loop kernel of an isolated feedback loop.

    For unitary ``S_ii`` this equals ``Im{S_ii (I - S_ii)^-1}`` and
    ``(1/2i)(I + S_ii)(I - S_ii)^-1``.
    """
    S = np.atleast_2d(np.asarray(S_ii.matrix if isinstance(S_ii, Operator) else S_ii, dtype=complex))
    K = inverse_matrix(np.eye(S.shape[0]) - S, "I - S_ii", error=IllPosedNetwork)
    return im_matrix(K)


def isolated_loop_hamiltonian(S_ii, L_i) -> np.ndarray:
    """``V_loop = L_i^dag Z_i L_i`` for an isolated loop."""
    L = np.asarray(L_i.matrix if isinstance(L_i, Operator) else L_i, dtype=complex)
    Z = loop_z(S_ii)
    if Z.shape[0] != L.shape[0]:
        raise DimensionMismatch(f"S_ii is {Z.shape}, L_i has {L.shape[0]} rows")
    return L.conj().T @ Z @ L


def close_all_loops(G: SLHModel) -> SLHModel:
    """Feed every output back into its own input: ``(-, -, H + L^dag Z L)``."""
    return feedback_reduce(G, FeedbackPlan(G.ports))


def beamsplitter_loop_family(G0: SLHModel, t: float) -> SLHModel:
    """Model of ``G0`` placed in a loop closed through a beam splitter of transmission ``t``.

    With ``r = sqrt(1 - t^2)``::

        S(t) = r I - t^2 (S0^-1 - r I)^-1
        L(t) = -t (I - r S0)^-1 L0
        H(t) = H0 + Im{L0^dag (I - r S0)^-1 L0}

    ``t = 1`` routes the field once through ``G0`` and a sign flip, giving
    ``(-S0, -L0, H0)``; ``t -> 0`` gives ``(I, 0, H0 + L0^dag Z L0)``.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmission t={t} outside [0, 1]")
    r = math.sqrt(max(0.0, 1.0 - t * t))
    N = G0.S.shape[0]
    eye = np.eye(N)
    R = inverse_matrix(eye - r * G0.S, "S0^-1 - sqrt(1-t^2) I", error=IllPosedNetwork)
    # (S0^-1 - r I)^-1 = (I - r S0)^-1 S0
    S = r * eye - t * t * (R @ G0.S)
    L = -t * R @ G0.L
    H = G0.H + im_matrix(G0.L.conj().T @ R @ G0.L)
    return SLHModel(G0.ports, G0.layout, S, L, H)


@dataclass(frozen=True)
class LoopDecomposition:
    H1_tilde: Operator
    H2_tilde: Operator
    V12: Operator

    @property
    def total(self) -> Operator:
        return self.H1_tilde + self.H2_tilde + self.V12


def series_loop_decompose(G1: SLHModel, G2: SLHModel) -> LoopDecomposition:
    """Split the Hamiltonian of the closed loop ``G2 <| G1`` into dressed parts and a coupling.

    ``H1~ = H1 + Im{L1^dag (I - S1 S2)^-1 L1}``, ``H2~`` likewise with 1 and
    2 swapped, and ``V12 = Im{L1^dag S1 (I - S2 S1)^-1 L2} + Im{L2^dag S2 (I - S1 S2)^-1 L1}``.
    """
    if G1.n != G2.n:
        raise PortCountMismatch(f"loop of {G1.n}-port and {G2.n}-port models")
    G1, G2 = _common(G1, G2)
    S1, S2, L1, L2 = G1.S, G2.S, G1.L, G2.L
    eye = np.eye(S1.shape[0])
    K21 = inverse_matrix(eye - S2 @ S1, "I - S2 S1", error=IllPosedNetwork)
    K12 = inverse_matrix(eye - S1 @ S2, "I - S1 S2", error=IllPosedNetwork)
    H1 = G1.H + im_matrix(L1.conj().T @ K12 @ L1)
    H2 = G2.H + im_matrix(L2.conj().T @ K21 @ L2)
    V = im_matrix(L1.conj().T @ S1 @ K21 @ L2) + im_matrix(L2.conj().T @ S2 @ K12 @ L1)
    lay = G1.layout
    return LoopDecomposition(Operator(lay, H1), Operator(lay, H2), Operator(lay, V))


def scalar_coupling_lambda(phi1: float, phi2: float, eps: float = EPS) -> float:
    """``lambda = (sin phi1 + sin phi2) / (1 - cos(phi1 + phi2))``."""
    den = 1.0 - math.cos(phi1 + phi2)
    if abs(den) <= eps:
        raise IllPosedNetwork(f"1 - cos(phi1 + phi2) at phi1={phi1}, phi2={phi2}", abs(den))
    return (math.sin(phi1) + math.sin(phi2)) / den


def solve_phase_for_lambda(target: float, phi2: float, n_grid: int = 4096, tol: float = 1e-8) -> float:
    """Find ``phi1`` in ``[0, 2 pi)`` with ``scalar_coupling_lambda(phi1, phi2) == target``.

    Brackets sign changes of ``lambda - target`` on a uniform grid (skipping the
    pole at ``phi1 = -phi2 mod 2 pi``) and refines the first one with Brent's
    method.

    Raises
    ------
    BadParam
        If no grid cell brackets the target, or the refined root misses it by
        more than ``tol``.  The message reports the range of ``lambda`` seen.
    """
    pole = (-phi2) % (2 * math.pi)
    grid = np.linspace(0.0, 2 * math.pi, n_grid + 1)

    def g(x: float) -> float:
        try:
            return scalar_coupling_lambda(x, phi2) - target
        except IllPosedNetwork:
            return math.nan

    values = np.array([g(x) for x in grid])
    for k in range(n_grid):
        a, b, ga, gb = grid[k], grid[k + 1], values[k], values[k + 1]
        if a <= pole <= b or not (math.isfinite(ga) and math.isfinite(gb)):
            continue
        if abs(ga) <= tol:
            return float(a)
        if ga * gb < 0:
            root = brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            if abs(g(root)) <= tol:
                return float(root)
    finite = values[np.isfinite(values)] + target
    raise BadParam(
        f"lambda = {target} not reached for phi2 = {phi2}; "
        f"lambda ranges over [{finite.min():.6g}, {finite.max():.6g}] on the grid"
    )


def coupling_f(phi1: float, phi2: float, eps: float = EPS) -> complex:
    """``f = (e^{i phi1} - e^{-i phi2}) / (1 - cos(phi1 + phi2))``."""
    den = 1.0 - math.cos(phi1 + phi2)
    if abs(den) <= eps:
        raise IllPosedNetwork(f"1 - cos(phi1 + phi2) at phi1={phi1}, phi2={phi2}", abs(den))
    return (complex(math.cos(phi1), math.sin(phi1)) - complex(math.cos(phi2), -math.sin(phi2))) / den


def _phase_channel(op: Operator, phi: float, port: str) -> SLHModel:
    return SLHModel.build([[complex(math.cos(phi), math.sin(phi))]], [op], 0 * op, ports=[port])


def multi_loop_coupling(A: Sequence[Operator], B: Sequence[Operator], phases: Sequence[tuple[float, float]]) -> Operator:
    """Coupling engineered by one isolated loop per channel.

    Channel ``k`` couples ``A[k]`` (phase ``phases[k][0]``) to ``B[k]``
    (phase ``phases[k][1]``).  For Hermitian ``A``, ``B`` on disjoint factors
    the result is ``sum_k lambda_k A_k B_k``.
    """
    if not (len(A) == len(B) == len(phases)):
        raise DimensionMismatch("A, B and phases must have equal length")
    for phi1, phi2 in phases:
        coupling_f(phi1, phi2)
    G1 = concat([_phase_channel(a, p[0], f"ch{k}") for k, (a, p) in enumerate(zip(A, phases))])
    G2 = concat([_phase_channel(b, p[1], f"ch{k}") for k, (b, p) in enumerate(zip(B, phases))])
    return series_loop_decompose(G1, G2).V12


def shifted_frequency(omega: float, gamma: float, phi: float) -> float:
    """Frequency of a cavity closed on itself through a phase ``phi``."""
    den = 1.0 - math.cos(phi)
    if abs(den) <= EPS:
        raise IllPosedNetwork(f"1 - cos(phi) at phi={phi}", abs(den))
    return omega + 0.5 * gamma * math.sin(phi) / den


def two_cavity_kappa(gamma1: float, gamma2: float, phi1: float, phi2: float) -> complex:
    """Coefficient of ``a1^dag a2`` for two looped cavities."""
    return math.sqrt(gamma1 * gamma2) / 2j * coupling_f(phi1, phi2)


def jaynes_cummings_terms(X: Operator, Y: Operator, gamma: float, kappa: float, phi1: float, phi2: float) -> tuple[Operator, Operator]:
    """``(V_plus, V_z)`` of the mode-qubit coupling with ``L1 = [X; Y]``, ``L2 = [sqrt(g) s-; sqrt(k) s_z]``.

    ``V_plus = sqrt(gamma) f X^dag / 2i`` multiplies ``sigma_-`` and
    ``V_z = sqrt(kappa) (f Y^dag - f* Y) / 2i`` multiplies ``sigma_z``; the
    ``sigma_+`` term is ``V_plus^dag``.
    """
    f = coupling_f(phi1, phi2)
    V_plus = (math.sqrt(gamma) * f / 2j) * X.dag()
    V_z = (math.sqrt(kappa) / 2j) * (f * Y.dag() - f.conjugate() * Y)
    return V_plus, V_z
