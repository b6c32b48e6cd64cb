"""Linear passive quantum stochastic systems and delayed loops in the Laplace domain.

A passive model on ``m`` modes and ``n`` ports has ``H = a^dag Omega a``,
``L = C a`` and a constant scattering matrix ``S``.  Its state-space form is
``A = -C^dag C / 2 - i Omega``, ``B = -C^dag S``, ``C``, ``D = S``.

Closing all ports on themselves through a loop with delay ``tau`` gives the
Laplace-domain generator ``A_fb(s) = A + B (e^{-s tau} I - D)^-1 C``, written
as ``-i Omega_fb(s)`` with::

    Omega_fb(s) = Omega - i C^dag (1/2 + S (e^{-s tau} I - S)^-1) C

Note the sign convention: the loop factor is ``e^{-s tau}`` inside the
resolvent, i.e. the loop relation is taken as ``b_in[s] = e^{s tau} b_out[s]``.
A strictly causal delay ``b_in(t) = b_out(t - tau)`` is the same formula with
``tau`` replaced by ``-tau``.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, DuplicatePortLabel, IllPosedNetwork, InvalidModel, PortCountMismatch, SingularAtPoint
from .operators import EPS, SpaceLayout, destroy, embed, hermiticity_deviation, im_matrix, inverse_matrix, unitarity_deviation
from .slh import SLHModel


@dataclass(frozen=True, eq=False)
class LinearPassiveModel:
    """``(Omega, C, S)`` with optional mode and port labels."""

    Omega: np.ndarray
    C: np.ndarray
    S: np.ndarray
    modes: tuple[str, ...] = ()
    ports: tuple[str, ...] = ()

    def __post_init__(self):
        Omega = np.atleast_2d(np.asarray(self.Omega, dtype=complex)) if np.size(self.Omega) else np.zeros((0, 0), complex)
        S = np.atleast_2d(np.asarray(self.S, dtype=complex))
        n, m = S.shape[0], Omega.shape[0]
        C = np.asarray(self.C, dtype=complex).reshape(n, m)
        if Omega.shape != (m, m) or S.shape != (n, n):
            raise DimensionMismatch(f"Omega {Omega.shape}, C {C.shape}, S {S.shape} are inconsistent")
        if hermiticity_deviation(Omega) > EPS:
            raise InvalidModel(f"Omega not Hermitian, deviation {hermiticity_deviation(Omega):.3g}")
        if unitarity_deviation(S) > EPS:
            raise InvalidModel(f"S not unitary, deviation {unitarity_deviation(S):.3g}")
        modes = tuple(self.modes) or tuple(f"a{k + 1}" for k in range(m))
        ports = tuple(self.ports) or tuple(str(k) for k in range(n))
        if len(modes) != m or len(ports) != n:
            raise DimensionMismatch("mode/port labels do not match Omega/S sizes")
        if len(set(modes)) != m or len(set(ports)) != n:
            raise DuplicatePortLabel("mode and port labels must be unique")
        for name, value in (("Omega", Omega), ("C", C), ("S", S), ("modes", modes), ("ports", ports)):
            if isinstance(value, np.ndarray):
                value.flags.writeable = False
            object.__setattr__(self, name, value)

    @property
    def m(self) -> int:
        return self.Omega.shape[0]

    @property
    def n(self) -> int:
        return self.S.shape[0]


@dataclass(frozen=True, eq=False)
class StateSpaceRealization:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray


def abcd(model: LinearPassiveModel) -> StateSpaceRealization:
    C = model.C
    A = -0.5 * C.conj().T @ C - 1j * model.Omega
    B = -C.conj().T @ model.S
    return StateSpaceRealization(A, B, C.copy(), model.S.copy())


def _loop_resolvent(S: np.ndarray, tau: float, s: complex) -> np.ndarray:
    n = S.shape[0]
    return inverse_matrix(cmath.exp(-s * tau) * np.eye(n) - S, f"e^(-s tau) I - S at s={s}", error=SingularAtPoint)


def delay_loop_omega(model: LinearPassiveModel, tau: float, s: complex) -> np.ndarray:
    """Effective frequency matrix ``Omega_fb(s)`` of the delay-closed loop."""
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    R = _loop_resolvent(model.S, tau, s)
    C = model.C
    return model.Omega - 1j * C.conj().T @ (0.5 * np.eye(model.n) + model.S @ R) @ C


def closed_loop_generator(model: LinearPassiveModel, tau: float, s: complex) -> np.ndarray:
    """``A_fb(s) = A + B (e^{-s tau} I - D)^-1 C`` from the state-space realization."""
    ss = abcd(model)
    return ss.A + ss.B @ _loop_resolvent(ss.D, tau, s) @ ss.C


def zero_delay_omega(model: LinearPassiveModel) -> np.ndarray:
    """``Omega + (1/2i) C^dag (I + S)(I - S)^-1 C``."""
    eye = np.eye(model.n)
    K = inverse_matrix(eye - model.S, "I - S", error=IllPosedNetwork)
    return model.Omega + model.C.conj().T @ ((eye + model.S) @ K) @ model.C / 2j


@dataclass(frozen=True, eq=False)
class SweepPoint:
    s: complex
    omega: np.ndarray | None
    singular: bool = False
    message: str = field(default="", compare=False)


def delay_sweep(model: LinearPassiveModel, tau: float, s_grid: Iterable[complex]) -> list[SweepPoint]:
    """Evaluate ``Omega_fb`` on every grid point; singular points are flagged, not raised."""
    out = []
    for s in s_grid:
        s = complex(s)
        try:
            out.append(SweepPoint(s, delay_loop_omega(model, tau, s)))
        except SingularAtPoint as err:
            out.append(SweepPoint(s, None, True, str(err)))
    return out


def rect_grid(re0: float, re1: float, nre: int, im0: float, im1: float, nim: int) -> list[complex]:
    """Row-major rectangular grid of Laplace points (imaginary part varies fastest)."""
    if nre < 1 or nim < 1:
        raise ValueError("grid sizes must be >= 1")
    res = np.linspace(re0, re1, nre)
    ims = np.linspace(im0, im1, nim)
    return [complex(r, i) for r in res for i in ims]


def sweep_columns(m: int) -> list[str]:
    cols = ["re_s", "im_s"]
    for j in range(m):
        for k in range(m):
            cols += [f"re_omega_{j}_{k}", f"im_omega_{j}_{k}"]
    return cols + ["singular"]


def sweep_to_csv(points: Sequence[SweepPoint], m: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(sweep_columns(m))
    for p in points:
        row = [repr(p.s.real), repr(p.s.imag)]
        if p.omega is None:
            row += ["nan"] * (2 * m * m)
        else:
            for z in p.omega.reshape(-1):
                row += [repr(float(z.real)), repr(float(z.imag))]
        row.append(int(p.singular))
        writer.writerow(row)
    return buf.getvalue()


def sweep_to_json(points: Sequence[SweepPoint], tau: float, modes: Sequence[str]) -> dict:
    from .serialize import matrix_to_json

    return {
        "type": "delay_sweep",
        "tau": tau,
        "modes": list(modes),
        "points": [
            {
                "s": [p.s.real, p.s.imag],
                "omega_fb": None if p.omega is None else matrix_to_json(p.omega),
                "singular": p.singular,
            }
            for p in points
        ],
    }


def lqss_to_slh(model: LinearPassiveModel, fock_dims: Sequence[int]) -> SLHModel:
    """Second-quantize on truncated Fock spaces: ``H = sum Omega_jk a_j^dag a_k``, ``L_p = sum C_pj a_j``."""
    if len(fock_dims) != model.m:
        raise DimensionMismatch(f"need {model.m} Fock dimensions, got {len(fock_dims)}")
    if any(int(d) < 2 for d in fock_dims):
        raise ValueError("every Fock dimension must be >= 2")
    layout = SpaceLayout(tuple(zip(model.modes, (int(d) for d in fock_dims))))
    D = layout.dim
    a = [embed(destroy(label, dim), layout).matrix for label, dim in layout.factors]
    H = np.zeros((D, D), complex)
    for j in range(model.m):
        for k in range(model.m):
            if model.Omega[j, k] != 0:
                H += model.Omega[j, k] * a[j].conj().T @ a[k]
    L = [sum((model.C[p, j] * a[j] for j in range(model.m)), np.zeros((D, D), complex)) for p in range(model.n)]
    S = np.kron(model.S, np.eye(D))
    Lm = np.vstack(L) if L else np.zeros((0, D))
    return SLHModel(model.ports, layout, S, Lm, H)


# Composition at the level of (Omega, C, S); mirrors the SLH rules with L = C a.

def _merge_modes(*models: LinearPassiveModel) -> tuple[str, ...]:
    out: list[str] = []
    for G in models:
        out += [m for m in G.modes if m not in out]
    return tuple(out)


def _lift(G: LinearPassiveModel, modes: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    idx = [modes.index(m) for m in G.modes]
    Omega = np.zeros((len(modes),) * 2, complex)
    Omega[np.ix_(idx, idx)] = G.Omega
    C = np.zeros((G.n, len(modes)), complex)
    C[:, idx] = G.C
    return Omega, C


def linear_series(G2: LinearPassiveModel, G1: LinearPassiveModel) -> LinearPassiveModel:
    if G1.n != G2.n:
        raise PortCountMismatch(f"series of {G2.n}-port and {G1.n}-port models")
    modes = _merge_modes(G1, G2)
    O1, C1 = _lift(G1, modes)
    O2, C2 = _lift(G2, modes)
    Omega = O1 + O2 + im_matrix(C2.conj().T @ G2.S @ C1)
    return LinearPassiveModel(Omega, C2 + G2.S @ C1, G2.S @ G1.S, modes, G1.ports)


def linear_concat(models: Sequence[LinearPassiveModel]) -> LinearPassiveModel:
    modes = _merge_modes(*models)
    ports = tuple(p for G in models for p in G.ports)
    if len(set(ports)) != len(ports):
        raise DuplicatePortLabel(f"concat would duplicate port labels: {ports}")
    lifted = [_lift(G, modes) for G in models]
    Omega = sum(o for o, _ in lifted)
    C = np.vstack([c for _, c in lifted])
    n = len(ports)
    S = np.zeros((n, n), complex)
    off = 0
    for G in models:
        S[off:off + G.n, off:off + G.n] = G.S
        off += G.n
    return LinearPassiveModel(Omega, C, S, modes, ports)


def linear_feedback(G: LinearPassiveModel, internal: Sequence[str], gain=None) -> LinearPassiveModel:
    """Instantaneous feedback on the listed ports (same formulas as for SLH models)."""
    i = [G.ports.index(p) for p in internal]
    e = [k for k, p in enumerate(G.ports) if p not in internal]
    S = G.S
    eta_inv = np.eye(len(i)) if gain is None else np.asarray(gain, complex).conj().T
    K = inverse_matrix(eta_inv - S[np.ix_(i, i)], "I - S_ii" if gain is None else "eta^-1 - S_ii", error=IllPosedNetwork)
    S_ei, S_ii = S[np.ix_(e, i)], S[np.ix_(i, i)]
    C_e, C_i = G.C[e], G.C[i]
    Omega = G.Omega + C_i.conj().T @ im_matrix(S_ii @ K) @ C_i + im_matrix(C_e.conj().T @ S_ei @ K @ C_i)
    return LinearPassiveModel(
        Omega, C_e + S_ei @ K @ C_i, S[np.ix_(e, e)] + S_ei @ K @ S[np.ix_(i, e)], G.modes, tuple(G.ports[k] for k in e)
    )


def cavity_lqss(omega: float, gamma: float, phi: float = 0.0, mode: str = "a", port: str = "0") -> LinearPassiveModel:
    return LinearPassiveModel([[omega]], [[math.sqrt(gamma)]], [[cmath.exp(1j * phi)]], (mode,), (port,))
