"""SLH triples, Stratonovich E-matrices and the Cayley transform between them.

Block arrays are stored as single dense matrices in port-major order: for
ports ``k = (p_1, ..., p_n)`` on a layout of dimension ``d``, ``S`` is an
``(n d) x (n d)`` matrix whose ``(j, k)`` block of size ``d x d`` is the
operator entry ``S_jk``; ``L`` is ``(n d) x d``.  Closed systems have no ports,
so ``S`` is ``0 x 0`` and ``L`` is ``0 x d``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, DuplicatePortLabel, InvalidModel, NoStratonovichForm, UnknownLabel
from .operators import (
    EPS,
    Operator,
    SpaceLayout,
    block,
    embed_blocks,
    hermiticity_deviation,
    im_matrix,
    inverse_matrix,
    merge_layouts,
    unitarity_deviation,
)


def _check_ports(ports) -> tuple[str, ...]:
    ports = tuple(str(p) for p in ports)
    if len(set(ports)) != len(ports):
        raise DuplicatePortLabel(f"duplicate port labels in {ports}")
    return ports


def _frozen(m) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class SLHModel:
    """Hudson-Parthasarathy parameters ``(S, L, H)`` on a set of labeled ports."""

    ports: tuple[str, ...]
    layout: SpaceLayout
    S: np.ndarray
    L: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        ports = _check_ports(self.ports)
        d = self.layout.dim
        n = len(ports)
        S, L, H = _frozen(self.S), _frozen(self.L), _frozen(self.H)
        if S.shape != (n * d, n * d):
            raise DimensionMismatch(f"S has shape {S.shape}, expected {(n * d, n * d)}")
        if L.shape != (n * d, d):
            raise DimensionMismatch(f"L has shape {L.shape}, expected {(n * d, d)}")
        if H.shape != (d, d):
            raise DimensionMismatch(f"H has shape {H.shape}, expected {(d, d)}")
        object.__setattr__(self, "ports", ports)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "H", H)

    @classmethod
    def build(cls, S, L, H, ports: Sequence[str] | None = None, layout: SpaceLayout | None = None) -> "SLHModel":
        """Assemble a model from operator entries.

        ``S`` is an ``n x n`` nested list whose entries may be Operators or
        scalars (scalars are multiplied by the identity), or a plain ``n x n``
        numeric array.  ``L`` is a length-``n`` list of Operators or scalars,
        ``H`` an Operator or scalar.  Ports default to ``"0", "1", ...``.
        """
        S_rows = [list(row) for row in (S if S is not None else [])]
        L_list = list(L) if L is not None else []
        n = len(S_rows) if S_rows else len(L_list)
        ops = [x for row in S_rows for x in row] + L_list + [H]
        if layout is None:
            layout = merge_layouts(x.layout for x in ops if isinstance(x, Operator))
        d = layout.dim
        if not L_list:
            L_list = [0] * n
        if not S_rows:
            S_rows = [[1 if j == k else 0 for k in range(n)] for j in range(n)]
        if len(L_list) != n or any(len(row) != n for row in S_rows):
            raise DimensionMismatch("S must be n x n and L length n")

        def lift(x):
            if isinstance(x, Operator):
                return embed_blocks(x.matrix, x.layout, layout, 1, 1)
            return complex(x) * np.eye(d)

        Sm = np.block([[lift(x) for x in row] for row in S_rows]) if n else np.zeros((0, 0))
        Lm = np.vstack([lift(x) for x in L_list]) if n else np.zeros((0, d))
        if ports is None:
            ports = [str(k) for k in range(n)]
        return cls(tuple(ports), layout, Sm, Lm, lift(H))

    @classmethod
    def closed(cls, H: Operator) -> "SLHModel":
        """The closed system ``(-, -, H)``."""
        return cls((), H.layout, np.zeros((0, 0)), np.zeros((0, H.dim)), H.matrix)

    @property
    def n(self) -> int:
        return len(self.ports)

    @property
    def dim(self) -> int:
        return self.layout.dim

    @property
    def is_closed(self) -> bool:
        return not self.ports

    def index(self, port: str) -> int:
        try:
            return self.ports.index(port)
        except ValueError:
            raise UnknownLabel(f"no port {port!r} in {self.ports}") from None

    def scattering(self, j: str, k: str) -> Operator:
        d = self.dim
        return Operator(self.layout, block(self.S, d, [self.index(j)], [self.index(k)]))

    def coupling(self, j: str) -> Operator:
        d = self.dim
        return Operator(self.layout, block(self.L, d, [self.index(j)], [0]))

    @property
    def hamiltonian(self) -> Operator:
        return Operator(self.layout, self.H)

    def to(self, layout: SpaceLayout) -> "SLHModel":
        """Embed every operator entry into a larger layout."""
        if layout == self.layout:
            return self
        n = self.n
        return SLHModel(
            self.ports,
            layout,
            embed_blocks(self.S, self.layout, layout, n, n),
            embed_blocks(self.L, self.layout, layout, n, 1),
            embed_blocks(self.H, self.layout, layout, 1, 1),
        )

    def relabel(self, ports: Sequence[str]) -> "SLHModel":
        if len(ports) != self.n:
            raise DimensionMismatch(f"need {self.n} port labels, got {len(ports)}")
        return SLHModel(tuple(ports), self.layout, self.S, self.L, self.H)

    def reorder(self, ports: Sequence[str]) -> "SLHModel":
        """Permute the ports into the given order."""
        idx = [self.index(p) for p in ports]
        if sorted(idx) != list(range(self.n)):
            raise DimensionMismatch(f"{ports} is not a permutation of {self.ports}")
        d = self.dim
        return SLHModel(tuple(ports), self.layout, block(self.S, d, idx, idx), block(self.L, d, idx, [0]), self.H)

    def close_to(self, other: "SLHModel", eps: float = EPS) -> bool:
        if self.ports != other.ports:
            return False
        layout = self.layout.merge(other.layout)
        a, b = self.to(layout), other.to(layout)
        return max_deviation(a, b) <= eps


def max_deviation(a: SLHModel, b: SLHModel) -> float:
    return max(
        float(np.max(np.abs(x - y), initial=0.0)) for x, y in ((a.S, b.S), (a.L, b.L), (a.H, b.H))
    )


@dataclass(frozen=True, eq=False)
class StratonovichModel:
    """Hermitian block array ``E`` indexed by ``{0} + ports``.

    Stored as one ``((n+1) d)``-square matrix; block row/column 0 is the
    system index.
    """

    ports: tuple[str, ...]
    layout: SpaceLayout
    E: np.ndarray

    def __post_init__(self):
        ports = _check_ports(self.ports)
        size = (len(ports) + 1) * self.layout.dim
        E = _frozen(self.E)
        if E.shape != (size, size):
            raise DimensionMismatch(f"E has shape {E.shape}, expected {(size, size)}")
        object.__setattr__(self, "ports", ports)
        object.__setattr__(self, "E", E)

    @classmethod
    def from_blocks(cls, E00, Ek0, Ekk, ports: Sequence[str], layout: SpaceLayout) -> "StratonovichModel":
        """Build from ``E00``, the column ``Ek0`` and ``Ekk``; ``E0k = Ek0^dag``."""
        E00 = np.asarray(E00, dtype=complex)
        Ek0 = np.asarray(Ek0, dtype=complex)
        Ekk = np.asarray(Ekk, dtype=complex)
        E = np.block([[E00, Ek0.conj().T], [Ek0, Ekk]])
        return cls(tuple(ports), layout, E)

    @property
    def n(self) -> int:
        return len(self.ports)

    @property
    def E00(self) -> np.ndarray:
        d = self.layout.dim
        return self.E[:d, :d]

    @property
    def E0k(self) -> np.ndarray:
        d = self.layout.dim
        return self.E[:d, d:]

    @property
    def Ek0(self) -> np.ndarray:
        d = self.layout.dim
        return self.E[d:, :d]

    @property
    def Ekk(self) -> np.ndarray:
        d = self.layout.dim
        return self.E[d:, d:]

    def entry(self, alpha: str | int, beta: str | int) -> Operator:
        """Operator ``E_{alpha beta}``; index ``0`` (int) denotes the system row."""
        d = self.layout.dim
        a = 0 if alpha == 0 else self.ports.index(alpha) + 1
        b = 0 if beta == 0 else self.ports.index(beta) + 1
        return Operator(self.layout, block(self.E, d, [a], [b]))

    def hermiticity_deviation(self) -> float:
        return hermiticity_deviation(self.E)


def strat_to_slh(E: StratonovichModel) -> SLHModel:
    """Convert an E-matrix to ``(S, L, H)``.

    ``S = (I - i Ekk/2)(I + i Ekk/2)^-1``, ``L = -i (I + i Ekk/2)^-1 Ek0`` and
    ``H = E00 + 1/2 E0k Im{(I + i Ekk/2)^-1} Ek0``.
    """
    N = E.Ekk.shape[0]
    eye = np.eye(N)
    M = inverse_matrix(eye + 0.5j * E.Ekk, "I + iEkk/2")
    S = (eye - 0.5j * E.Ekk) @ M
    L = -1j * M @ E.Ek0
    H = E.E00 + 0.5 * E.E0k @ im_matrix(M) @ E.Ek0
    return SLHModel(E.ports, E.layout, S, L, _hermitize(H))


def slh_to_strat(G: SLHModel) -> StratonovichModel:
    """Inverse Cayley transform; raises :class:`NoStratonovichForm` if ``I + S`` is singular."""
    N = G.S.shape[0]
    eye = np.eye(N)
    P = inverse_matrix(eye + G.S, "I + S", error=NoStratonovichForm)
    Ekk = _hermitize(-2j * (eye - G.S) @ P)
    R = eye + 0.5j * Ekk
    Ek0 = 1j * R @ G.L
    M = inverse_matrix(R, "I + iEkk/2")
    E00 = G.H - 0.5 * Ek0.conj().T @ im_matrix(M) @ Ek0
    return StratonovichModel.from_blocks(_hermitize(E00), Ek0, Ekk, G.ports, G.layout)


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


class Violation(NamedTuple):
    invariant: str
    deviation: float

    def __str__(self) -> str:
        return f"{self.invariant}, deviation {self.deviation:.6g}"


def validate(G: SLHModel, eps: float = EPS) -> list[Violation]:
    """Check the SLH invariants; an empty list means the model is valid."""
    report = []
    du = unitarity_deviation(G.S)
    if du > eps:
        report.append(Violation("S not unitary", du))
    dh = hermiticity_deviation(G.H)
    if dh > eps:
        report.append(Violation("H not Hermitian", dh))
    for x, name in ((G.S, "S"), (G.L, "L"), (G.H, "H")):
        if not np.all(np.isfinite(x)):
            report.append(Violation(f"{name} has non-finite entries", float("inf")))
    return report


def ensure_valid(G: SLHModel, eps: float = EPS) -> SLHModel:
    report = validate(G, eps)
    if report:
        raise InvalidModel("; ".join(map(str, report)))
    return G


__all__ = [
    "SLHModel",
    "StratonovichModel",
    "Violation",
    "ensure_valid",
    "max_deviation",
    "slh_to_strat",
    "strat_to_slh",
    "validate",
]
