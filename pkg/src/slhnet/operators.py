"""Dense operators on labeled tensor-product Hilbert spaces.

A :class:`SpaceLayout` is an ordered list of ``(label, dimension)`` factors.
An :class:`Operator` pairs a layout with a dense complex matrix.  Operators on
different layouts are promoted to the merged layout before arithmetic, so
``destroy("a1", 4).dag() @ destroy("a2", 4)`` is the two-mode operator
``a1^dag a2`` on ``[("a1", 4), ("a2", 4)]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NumericalError, SingularMatrix, UnknownLabel

#: Absolute tolerance for equality and structural predicates (max-abs entry).
EPS = 1e-10
#: Matrices whose reciprocal condition estimate falls below this are singular.
RCOND_CUTOFF = 1e-12
#: Inverses must reproduce the identity to this max-abs residual.
INVERSE_RESIDUAL = 1e-8


@dataclass(frozen=True)
class SpaceLayout:
    factors: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise DimensionMismatch(f"duplicate factor labels in layout {labels}")
        for label, dim in factors:
            if dim < 1:
                raise DimensionMismatch(f"factor {label!r} has dimension {dim} < 1")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, *factors: tuple[str, int]) -> "SpaceLayout":
        return cls(tuple(factors))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def dim_of(self, label: str) -> int:
        for lab, dim in self.factors:
            if lab == label:
                return dim
        raise UnknownLabel(f"no factor labeled {label!r} in {self.labels}")

    def merge(self, *others: "SpaceLayout") -> "SpaceLayout":
        """Union of factors in order of first appearance."""
        out = dict(self.factors)
        for other in others:
            for label, dim in other.factors:
                if label in out and out[label] != dim:
                    raise DimensionMismatch(
                        f"factor {label!r} has dimension {out[label]} and {dim}"
                    )
                out.setdefault(label, dim)
        return SpaceLayout(tuple(out.items()))

    def __str__(self) -> str:
        return "(" + " x ".join(f"{label}:{dim}" for label, dim in self.factors) + ")"


def merge_layouts(layouts: Iterable[SpaceLayout]) -> SpaceLayout:
    return reduce(lambda a, b: a.merge(b), layouts, SpaceLayout())


def embedding_index(source: SpaceLayout, target: SpaceLayout) -> tuple[np.ndarray, int]:
    """Index map realizing ``X -> X (x) I_rest`` reordered into ``target``.

    Returns ``(perm, rest)`` such that the embedding of a source matrix ``X`` is
    ``np.kron(X, np.eye(rest))[np.ix_(perm, perm)]``.
    """
    for label, dim in source.factors:
        if target.dim_of(label) != dim:
            raise DimensionMismatch(
                f"factor {label!r}: dimension {dim} in source, {target.dim_of(label)} in target"
            )
    rest = [f for f in target.factors if f[0] not in source.labels]
    order = list(source.factors) + rest
    shape = [dim for _, dim in order] or [1]
    axis_of = {label: k for k, (label, _) in enumerate(order)}
    idx = np.arange(target.dim).reshape(shape)
    if target.factors:
        idx = idx.transpose([axis_of[label] for label in target.labels])
    rest_dim = int(np.prod([dim for _, dim in rest], dtype=np.int64)) if rest else 1
    return idx.reshape(-1), rest_dim


def embed_blocks(
    matrix: np.ndarray, source: SpaceLayout, target: SpaceLayout, rows: int, cols: int
) -> np.ndarray:
    """Embed every block of a ``rows x cols`` block array of source operators."""
    if source == target:
        return matrix
    perm, rest = embedding_index(source, target)
    big = np.kron(matrix, np.eye(rest))
    d = target.dim
    row_idx = (np.arange(rows)[:, None] * d + perm[None, :]).reshape(-1)
    col_idx = (np.arange(cols)[:, None] * d + perm[None, :]).reshape(-1)
    return big[np.ix_(row_idx, col_idx)]


class Operator:
    """Immutable dense operator on a :class:`SpaceLayout`."""

    __slots__ = ("layout", "matrix")
    __array_priority__ = 1000

    def __init__(self, layout: SpaceLayout, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim == 0:
            m = m * np.eye(layout.dim)
        if m.shape != (layout.dim, layout.dim):
            raise DimensionMismatch(
                f"matrix shape {m.shape} does not match layout {layout} (dim {layout.dim})"
            )
        m.flags.writeable = False
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def __repr__(self) -> str:
        return f"Operator(layout={self.layout}, matrix=\n{self.matrix})"

    @property
    def dim(self) -> int:
        return self.layout.dim

    def dag(self) -> "Operator":
        return Operator(self.layout, self.matrix.conj().T)

    def to(self, layout: SpaceLayout) -> "Operator":
        return embed(self, layout)

    def close_to(self, other, eps: float = EPS) -> bool:
        a, b = _align(self, other)
        return bool(np.max(np.abs(a.matrix - b.matrix), initial=0.0) <= eps)

    def __add__(self, other):
        a, b = _align(self, other)
        return Operator(a.layout, a.matrix + b.matrix)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = _align(self, other)
        return Operator(a.layout, a.matrix - b.matrix)

    def __rsub__(self, other):
        a, b = _align(self, other)
        return Operator(a.layout, b.matrix - a.matrix)

    def __neg__(self):
        return Operator(self.layout, -self.matrix)

    def __mul__(self, other):
        if isinstance(other, Operator):
            return self @ other
        return Operator(self.layout, self.matrix * complex(other))

    def __rmul__(self, other):
        return Operator(self.layout, complex(other) * self.matrix)

    def __truediv__(self, other):
        return Operator(self.layout, self.matrix / complex(other))

    def __matmul__(self, other):
        a, b = _align(self, other)
        return Operator(a.layout, a.matrix @ b.matrix)

    def __rmatmul__(self, other):
        a, b = _align(self, other)
        return Operator(a.layout, b.matrix @ a.matrix)


def _align(a: Operator, b) -> tuple[Operator, Operator]:
    if not isinstance(b, Operator):
        return a, Operator(a.layout, b)
    if a.layout == b.layout:
        return a, b
    layout = a.layout.merge(b.layout)
    return embed(a, layout), embed(b, layout)


def embed(op: Operator, target: SpaceLayout) -> Operator:
    """Tensor ``op`` with the identity on every factor of ``target`` it lacks."""
    for label in op.layout.labels:
        if label not in target.labels:
            raise UnknownLabel(f"factor {label!r} of {op.layout} not in target {target}")
    return Operator(target, embed_blocks(op.matrix, op.layout, target, 1, 1))


def identity(layout: SpaceLayout) -> Operator:
    return Operator(layout, np.eye(layout.dim))


def zero(layout: SpaceLayout) -> Operator:
    return Operator(layout, np.zeros((layout.dim, layout.dim)))


def destroy(label: str, dim: int) -> Operator:
    """Truncated annihilation operator, ``a|n> = sqrt(n)|n-1>``."""
    return Operator(SpaceLayout.of((label, dim)), np.diag(np.sqrt(np.arange(1, dim)), 1))


def create(label: str, dim: int) -> Operator:
    return destroy(label, dim).dag()


def number(label: str, dim: int) -> Operator:
    return Operator(SpaceLayout.of((label, dim)), np.diag(np.arange(dim, dtype=float)))


# Two-level basis: index 0 is the excited state, so sigma_z = diag(1, -1).
def sigma_minus(label: str) -> Operator:
    return Operator(SpaceLayout.of((label, 2)), [[0, 0], [1, 0]])


def sigma_plus(label: str) -> Operator:
    return Operator(SpaceLayout.of((label, 2)), [[0, 1], [0, 0]])


def sigma_z(label: str) -> Operator:
    return Operator(SpaceLayout.of((label, 2)), [[1, 0], [0, -1]])


def im_matrix(x: np.ndarray) -> np.ndarray:
    """``(X - X^dag) / 2i`` for a plain matrix; exactly Hermitian."""
    return (x - x.conj().T) / 2j


def im_part(x: Operator) -> Operator:
    """The Hermitian "imaginary part" ``(X - X^dag) / 2i``."""
    return Operator(x.layout, im_matrix(x.matrix))


def rcond(m: np.ndarray) -> float:
    """Reciprocal condition estimate ``s_min / max(s_max, 1)``.

    The unit floor on ``s_max`` makes a tiny scalar such as ``1 - e^{i 1e-17}``
    count as singular: every loop matrix built from unitaries has unit scale.
    """
    if m.size == 0:
        return 1.0
    if not np.all(np.isfinite(m)):
        return 0.0
    s = np.linalg.svd(m, compute_uv=False)
    return float(s[-1] / max(s[0], 1.0))


def inverse_matrix(m: np.ndarray, context: str = "matrix", error=SingularMatrix) -> np.ndarray:
    """Invert ``m`` or raise ``error(context)`` when it is singular.

    Raises :class:`NumericalError` if the computed inverse misses the identity
    by more than ``INVERSE_RESIDUAL``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"cannot invert {context} of shape {m.shape}")
    if m.size == 0:
        return m.copy()
    rc = rcond(m)
    if rc < RCOND_CUTOFF:
        raise error(context, rc)
    inv = np.linalg.inv(m)
    resid = np.max(np.abs(m @ inv - np.eye(m.shape[0])))
    if resid > INVERSE_RESIDUAL:
        raise NumericalError(f"inverse of {context} has residual {resid:.3g}")
    return inv


def invert(x: Operator, context: str = "operator") -> Operator:
    return Operator(x.layout, inverse_matrix(x.matrix, context))


def unitarity_deviation(m) -> float:
    m = m.matrix if isinstance(m, Operator) else np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def hermiticity_deviation(m) -> float:
    m = m.matrix if isinstance(m, Operator) else np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def is_unitary(x, eps: float = EPS) -> bool:
    return unitarity_deviation(x) <= eps


def is_hermitian(x, eps: float = EPS) -> bool:
    return hermiticity_deviation(x) <= eps


def tensor(*ops: Operator) -> Operator:
    """Product of operators acting on disjoint factors."""
    layout = merge_layouts(op.layout for op in ops)
    return reduce(lambda a, b: a @ b, (embed(op, layout) for op in ops), identity(layout))


def as_matrix(x, dim: int | None = None) -> np.ndarray:
    """Coerce an Operator, array or scalar to a complex matrix."""
    if isinstance(x, Operator):
        return x.matrix
    m = np.asarray(x, dtype=complex)
    if m.ndim == 0:
        return m * np.eye(dim if dim is not None else 1)
    if m.ndim == 1:
        return m.reshape(-1, 1)
    return m


def block(matrix: np.ndarray, d: int, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Sub-array of a block matrix with ``d x d`` blocks, selecting block indices."""
    r = np.concatenate([np.arange(j * d, (j + 1) * d) for j in rows]) if len(rows) else np.zeros(0, int)
    c = np.concatenate([np.arange(k * d, (k + 1) * d) for k in cols]) if len(cols) else np.zeros(0, int)
    return matrix[np.ix_(r, c)]
