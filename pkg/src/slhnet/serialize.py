"""JSON encoding of operators and models.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists of such pairs.  Block arrays keep their operator structure: ``S`` is an
``n x n`` list of matrices, ``L`` a list of ``n`` matrices.
"""
from __future__ import annotations

import json
from typing import Any

import jsonschema
import numpy as np

from .operators import Operator, SpaceLayout, block
from .slh import SLHModel, StratonovichModel

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_matrix = {"type": "array", "items": {"type": "array", "items": _complex}}
_layout = {
    "type": "array",
    "items": {
        "type": "array",
        "prefixItems": [{"type": "string"}, {"type": "integer", "minimum": 1}],
        "minItems": 2,
        "maxItems": 2,
    },
}
_ports = {"type": "array", "items": {"type": "string"}, "uniqueItems": True}

SLH_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "SLHModel",
    "type": "object",
    "required": ["type", "ports", "layout", "S", "L", "H"],
    "properties": {
        "type": {"const": "slh"},
        "ports": _ports,
        "layout": _layout,
        "S": {"type": "array", "items": {"type": "array", "items": _matrix}},
        "L": {"type": "array", "items": _matrix},
        "H": _matrix,
    },
}

STRAT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "StratonovichModel",
    "type": "object",
    "required": ["type", "ports", "layout", "E00", "E0k", "Ek0", "Ekk"],
    "properties": {
        "type": {"const": "stratonovich"},
        "ports": _ports,
        "layout": _layout,
        "E00": _matrix,
        "E0k": {"type": "array", "items": _matrix},
        "Ek0": {"type": "array", "items": _matrix},
        "Ekk": {"type": "array", "items": {"type": "array", "items": _matrix}},
    },
}


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.size == 0:
        return np.zeros((0, 0), complex)
    return a[..., 0] + 1j * a[..., 1]


def layout_to_json(layout: SpaceLayout) -> list:
    return [[label, dim] for label, dim in layout.factors]


def operator_to_json(op: Operator) -> dict:
    return {"layout": layout_to_json(op.layout), "matrix": matrix_to_json(op.matrix)}


def slh_to_json(G: SLHModel) -> dict:
    d, n = G.dim, G.n
    return {
        "type": "slh",
        "ports": list(G.ports),
        "layout": layout_to_json(G.layout),
        "S": [[matrix_to_json(block(G.S, d, [j], [k])) for k in range(n)] for j in range(n)],
        "L": [matrix_to_json(block(G.L, d, [j], [0])) for j in range(n)],
        "H": matrix_to_json(G.H),
    }


def strat_to_json(E: StratonovichModel) -> dict:
    d, n = E.layout.dim, E.n
    blk = lambda a, b: matrix_to_json(block(E.E, d, [a], [b]))  # noqa: E731
    return {
        "type": "stratonovich",
        "ports": list(E.ports),
        "layout": layout_to_json(E.layout),
        "E00": blk(0, 0),
        "E0k": [blk(0, k + 1) for k in range(n)],
        "Ek0": [blk(k + 1, 0) for k in range(n)],
        "Ekk": [[blk(j + 1, k + 1) for k in range(n)] for j in range(n)],
    }


def _layout_from_json(data) -> SpaceLayout:
    return SpaceLayout(tuple((label, dim) for label, dim in data))


def _assemble(blocks: list[list[Any]], d: int) -> np.ndarray:
    if not blocks:
        return np.zeros((0, 0), complex)
    return np.block([[matrix_from_json(b).reshape(d, d) for b in row] for row in blocks])


def slh_from_json(data: dict) -> SLHModel:
    jsonschema.validate(data, SLH_SCHEMA)
    layout = _layout_from_json(data["layout"])
    d = layout.dim
    S = _assemble(data["S"], d)
    L = _assemble([[b] for b in data["L"]], d) if data["L"] else np.zeros((0, d), complex)
    return SLHModel(tuple(data["ports"]), layout, S, L, matrix_from_json(data["H"]).reshape(d, d))


def strat_from_json(data: dict) -> StratonovichModel:
    jsonschema.validate(data, STRAT_SCHEMA)
    layout = _layout_from_json(data["layout"])
    d = layout.dim
    n = len(data["ports"])
    rows = [[data["E00"]] + list(data["E0k"])] + [[data["Ek0"][j]] + list(data["Ekk"][j]) for j in range(n)]
    return StratonovichModel(tuple(data["ports"]), layout, _assemble(rows, d))


def model_from_json(data: dict) -> SLHModel | StratonovichModel:
    kind = data.get("type")
    if kind == "slh":
        return slh_from_json(data)
    if kind == "stratonovich":
        return strat_from_json(data)
    raise ValueError(f"unknown model type {kind!r}")


def dumps(data: Any) -> str:
    """Deterministic JSON text; floats use the shortest round-trip repr."""
    return json.dumps(data, allow_nan=False) + "\n"
