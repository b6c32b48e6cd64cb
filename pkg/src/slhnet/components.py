"""Constructors for the primitive components used in example networks."""
from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import BadParam
from .operators import SpaceLayout, destroy, number, sigma_minus, sigma_z
from .slh import SLHModel


def _ports(name: str, n: int) -> list[str]:
    return [f"{name}.{k}" for k in range(n)]


def _check_nonneg(**params):
    for key, value in params.items():
        if not math.isfinite(value) or value < 0:
            raise BadParam(f"{key} must be a finite number >= 0, got {value}")


def make_cavity(omega: float, gamma: float, phi: float = 0.0, dim: int = 8, name: str = "a", kappa: float | None = None) -> SLHModel:
    """Cavity mode in series with a phase shifter: ``(e^{i phi}, sqrt(gamma) a, omega a^dag a)``.

    With ``kappa`` the cavity gets a second port coupling ``sqrt(kappa) a^dag a``
    and ``S = e^{i phi} I_2``.  The Fock factor and the ports are labeled by
    ``name``.
    """
    if int(dim) != dim or dim < 2:
        raise BadParam(f"cavity dim must be an integer >= 2, got {dim}")
    _check_nonneg(gamma=gamma, **({} if kappa is None else {"kappa": kappa}))
    dim = int(dim)
    a = destroy(name, dim)
    n_op = number(name, dim)
    phase = cmath.exp(1j * phi)
    if kappa is None:
        return SLHModel.build([[phase]], [math.sqrt(gamma) * a], omega * n_op, ports=_ports(name, 1))
    return SLHModel.build(
        [[phase, 0], [0, phase]],
        [math.sqrt(gamma) * a, math.sqrt(kappa) * n_op],
        omega * n_op,
        ports=_ports(name, 2),
    )


def make_phase_shifter(phi: float, n: int = 1, name: str = "phase") -> SLHModel:
    """Static ``(e^{i phi} I_n, 0, 0)`` on the trivial space."""
    if int(n) != n or n < 1:
        raise BadParam(f"phase shifter needs n >= 1 ports, got {n}")
    n = int(n)
    S = cmath.exp(1j * phi) * np.eye(n)
    return SLHModel(tuple(_ports(name, n)), SpaceLayout(), S, np.zeros((n, 1)), np.zeros((1, 1)))


def beamsplitter_matrix(t: float, n: int = 1) -> np.ndarray:
    r = math.sqrt(1.0 - t * t)
    eye = np.eye(n)
    return np.block([[r * eye, -t * eye], [t * eye, r * eye]]).astype(complex)


def make_beamsplitter(t: float, n: int = 1, name: str = "bs") -> SLHModel:
    """Static ``2n``-port splitter ``S = [[r I, -t I], [t I, r I]]``, ``r = sqrt(1 - t^2)``.

    Ports ``0..n-1`` form the first arm, ``n..2n-1`` the second.
    """
    if not (0.0 < t <= 1.0):
        raise BadParam(f"beam-splitter transmission must lie in (0, 1], got {t}")
    if int(n) != n or n < 1:
        raise BadParam(f"beam splitter needs n >= 1, got {n}")
    n = int(n)
    return SLHModel(
        tuple(_ports(name, 2 * n)), SpaceLayout(), beamsplitter_matrix(t, n), np.zeros((2 * n, 1)), np.zeros((1, 1))
    )


def make_qubit_coupler(gamma: float, kappa: float, phi: float = 0.0, name: str = "q") -> SLHModel:
    """Two-level system with ``L = [sqrt(gamma) sigma_-; sqrt(kappa) sigma_z]`` and ``S = e^{i phi} I_2``."""
    _check_nonneg(gamma=gamma, kappa=kappa)
    phase = cmath.exp(1j * phi)
    sm, sz = sigma_minus(name), sigma_z(name)
    return SLHModel.build(
        [[phase, 0], [0, phase]],
        [math.sqrt(gamma) * sm, math.sqrt(kappa) * sz],
        0 * sz,
        ports=_ports(name, 2),
    )
