"""Line-oriented netlist language for SLH networks.

One declaration or statement per line; ``#`` starts a comment::

    cavity c omega=1 gamma=0.5 phi=1.5707963267948966 dim=6
    phase p phi=0.3
    series c p -> cp          # c drives p
    concat cp q -> both
    feedback both cp.0:cp.0 gain g
    loop both                 # close every remaining port
    output both

Component kinds and their parameters (defaults in brackets):

========== ====================================================
cavity     omega, gamma, phi [0], dim [8], kappa [none]
phase      phi, n [1]
beamsplitter t, n [1]
qubit_coupler gamma, kappa, phi [0]
custom     file (quoted path to an SLH JSON model)
========== ====================================================

Ports of a component ``x`` are labeled ``x.0, x.1, ...``.  ``series a b -> c``
feeds the outputs of ``a`` into ``b`` and keeps the port labels of ``a``;
``concat`` keeps every label.  ``feedback x o:i ...`` routes output ``o`` to
input ``i``; the pairs must permute the chosen ports.  ``loop x`` closes all
ports of ``x``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from . import components as comp
from .errors import BadParam, DuplicateName, NetspecError, NetspecSyntaxError, SLHError, UndefinedName
from .linear import LinearPassiveModel, cavity_lqss, linear_concat, linear_feedback, linear_series
from .network import FeedbackPlan, close_all_loops, concat, feedback_reduce, series
from .serialize import slh_from_json
from .slh import SLHModel

KINDS = ("cavity", "phase", "beamsplitter", "qubit_coupler", "custom")
KEYWORDS = ("series", "concat", "feedback", "loop", "output")

_PARAMS = {
    "cavity": ({"omega", "gamma"}, {"phi", "dim", "kappa"}),
    "phase": ({"phi"}, {"n"}),
    "beamsplitter": ({"t"}, {"n"}),
    "qubit_coupler": ({"gamma", "kappa"}, {"phi"}),
    "custom": ({"file"}, set()),
}

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_PORT = re.compile(r"[A-Za-z0-9_.]+\Z")
_TOKEN = re.compile(r'[^\s"#]*"[^"]*"[^\s#]*|[^\s#]+|#.*')

Value = Union[float, str]


@dataclass(frozen=True)
class ComponentDecl:
    name: str
    kind: str
    params: tuple[tuple[str, Value], ...]
    line: int = field(default=0, compare=False)

    def param(self, key: str, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class Series:
    first: str
    second: str
    target: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Concat:
    names: tuple[str, ...]
    target: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Feedback:
    name: str
    pairs: tuple[tuple[str, str], ...]
    gain: str | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Loop:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Output:
    name: str
    line: int = field(default=0, compare=False)


Statement = Union[Series, Concat, Feedback, Loop, Output]


@dataclass(frozen=True)
class NetworkSpec:
    components: tuple[ComponentDecl, ...]
    statements: tuple[Statement, ...]

    @property
    def output(self) -> str:
        return next(s.name for s in self.statements if isinstance(s, Output))


def _tokens(text: str) -> list[tuple[str, int]]:
    out = []
    for m in _TOKEN.finditer(text):
        if m.group().startswith("#"):
            break
        out.append((m.group(), m.start() + 1))
    return out


def _parse_value(raw: str, line: int, col: int) -> Value:
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    try:
        value = float(raw)
    except ValueError:
        raise NetspecSyntaxError(f"expected a number, got {raw!r}", line, col) from None
    if not math.isfinite(value):
        raise NetspecSyntaxError(f"non-finite number {raw!r}", line, col)
    return value


def parse_netspec(text: str) -> NetworkSpec:
    """Parse netlist text; errors carry 1-based line and column numbers."""
    components: list[ComponentDecl] = []
    statements: list[Statement] = []
    defined: set[str] = set()
    outputs = 0

    def name_at(tok: tuple[str, int], lineno: int) -> str:
        word, col = tok
        if not _NAME.match(word) or word in KEYWORDS or word in KINDS or word == "gain":
            raise NetspecSyntaxError(f"invalid name {word!r}", lineno, col)
        return word

    def use(tok, lineno) -> str:
        name = name_at(tok, lineno)
        if name not in defined:
            raise UndefinedName(f"{name!r} is not defined", lineno, tok[1])
        return name

    def define(tok, lineno) -> str:
        name = name_at(tok, lineno)
        if name in defined:
            raise DuplicateName(f"{name!r} is already defined", lineno, tok[1])
        defined.add(name)
        return name

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        toks = _tokens(raw_line)
        if not toks:
            continue
        head, col = toks[0]
        rest = toks[1:]
        if head in KINDS:
            if not rest:
                raise NetspecSyntaxError(f"{head} needs a name", lineno, col + len(head))
            name = define(rest[0], lineno)
            params = []
            required, optional = _PARAMS[head]
            seen = set()
            for word, pcol in rest[1:]:
                key, eq, raw = word.partition("=")
                if not eq or not key or not raw:
                    raise NetspecSyntaxError(f"expected key=value, got {word!r}", lineno, pcol)
                if key not in required | optional:
                    raise NetspecSyntaxError(f"unknown parameter {key!r} for {head}", lineno, pcol)
                if key in seen:
                    raise NetspecSyntaxError(f"repeated parameter {key!r}", lineno, pcol)
                seen.add(key)
                value = _parse_value(raw, lineno, pcol + len(key) + 1)
                if (key == "file") != isinstance(value, str):
                    raise NetspecSyntaxError(f"bad value for {key!r}", lineno, pcol)
                params.append((key, value))
            missing = sorted(required - seen)
            if missing:
                raise NetspecSyntaxError(f"{head} {name} is missing {', '.join(missing)}", lineno, col)
            components.append(ComponentDecl(name, head, tuple(params), lineno))
        elif head == "series":
            if len(rest) != 4 or rest[2][0] != "->":
                raise NetspecSyntaxError("expected: series NAME NAME -> NAME", lineno, col)
            a, b = use(rest[0], lineno), use(rest[1], lineno)
            statements.append(Series(a, b, define(rest[3], lineno), lineno))
        elif head == "concat":
            arrow = [k for k, t in enumerate(rest) if t[0] == "->"]
            if len(arrow) != 1 or arrow[0] == 0 or arrow[0] != len(rest) - 2:
                raise NetspecSyntaxError("expected: concat NAME+ -> NAME", lineno, col)
            names = tuple(use(t, lineno) for t in rest[: arrow[0]])
            statements.append(Concat(names, define(rest[-1], lineno), lineno))
        elif head == "feedback":
            if not rest:
                raise NetspecSyntaxError("expected: feedback NAME PAIR+ [gain NAME]", lineno, col)
            name = use(rest[0], lineno)
            body = rest[1:]
            gain = None
            if len(body) >= 2 and body[-2][0] == "gain":
                gain = use(body[-1], lineno)
                body = body[:-2]
            if not body:
                raise NetspecSyntaxError("feedback needs at least one OUT:IN port pair", lineno, col)
            pairs = []
            for word, pcol in body:
                out, sep, inp = word.partition(":")
                if not sep or not _PORT.match(out or "-") or not _PORT.match(inp or "-"):
                    raise NetspecSyntaxError(f"expected OUT:IN port pair, got {word!r}", lineno, pcol)
                pairs.append((out, inp))
            statements.append(Feedback(name, tuple(pairs), gain, lineno))
        elif head in ("loop", "output"):
            if len(rest) != 1:
                raise NetspecSyntaxError(f"expected: {head} NAME", lineno, col)
            name = use(rest[0], lineno)
            if head == "output":
                outputs += 1
                if outputs > 1:
                    raise NetspecSyntaxError("more than one output statement", lineno, col)
                statements.append(Output(name, lineno))
            else:
                statements.append(Loop(name, lineno))
        else:
            raise NetspecSyntaxError(f"unknown keyword {head!r}", lineno, col)
    if outputs == 0:
        raise NetspecSyntaxError("missing output statement")
    return NetworkSpec(tuple(components), tuple(statements))


def _format_value(value: Value) -> str:
    return f'"{value}"' if isinstance(value, str) else repr(float(value))


def format_statement(stmt: Statement | ComponentDecl) -> str:
    if isinstance(stmt, ComponentDecl):
        params = " ".join(f"{k}={_format_value(v)}" for k, v in stmt.params)
        return f"{stmt.kind} {stmt.name}" + (f" {params}" if params else "")
    if isinstance(stmt, Series):
        return f"series {stmt.first} {stmt.second} -> {stmt.target}"
    if isinstance(stmt, Concat):
        return f"concat {' '.join(stmt.names)} -> {stmt.target}"
    if isinstance(stmt, Feedback):
        pairs = " ".join(f"{o}:{i}" for o, i in stmt.pairs)
        return f"feedback {stmt.name} {pairs}" + (f" gain {stmt.gain}" if stmt.gain else "")
    if isinstance(stmt, Loop):
        return f"loop {stmt.name}"
    return f"output {stmt.name}"


def format_netspec(spec: NetworkSpec) -> str:
    """Canonical text: declarations first, then statements in order."""
    lines = [format_statement(c) for c in spec.components]
    lines += [format_statement(s) for s in spec.statements]
    return "\n".join(lines) + "\n"


def _where(stmt) -> str:
    return f"line {stmt.line}: {format_statement(stmt)}" if stmt.line else format_statement(stmt)


def build_component(decl: ComponentDecl, base_dir: Path | None = None) -> SLHModel:
    p = decl.param
    if decl.kind == "cavity":
        return comp.make_cavity(p("omega"), p("gamma"), p("phi", 0.0), p("dim", 8.0), name=decl.name, kappa=p("kappa"))
    if decl.kind == "phase":
        return comp.make_phase_shifter(p("phi"), p("n", 1.0), name=decl.name)
    if decl.kind == "beamsplitter":
        return comp.make_beamsplitter(p("t"), p("n", 1.0), name=decl.name)
    if decl.kind == "qubit_coupler":
        return comp.make_qubit_coupler(p("gamma"), p("kappa"), p("phi", 0.0), name=decl.name)
    path = Path(p("file"))
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    try:
        data = json.loads(path.read_text())
    except OSError as err:
        raise BadParam(f"cannot read {path}: {err}") from None
    try:
        return slh_from_json(data)
    except Exception as err:  # schema or shape errors in user data
        raise BadParam(f"{path} is not a valid SLH model: {err}") from None


def build_linear_component(decl: ComponentDecl) -> LinearPassiveModel:
    p = decl.param
    if decl.kind == "cavity" and p("kappa") is None:
        if p("gamma") < 0:
            raise BadParam(f"gamma must be >= 0, got {p('gamma')}")
        return cavity_lqss(p("omega"), p("gamma"), p("phi", 0.0), mode=decl.name, port=f"{decl.name}.0")
    if decl.kind in ("phase", "beamsplitter"):
        G = build_component(decl)
        return LinearPassiveModel(np.zeros((0, 0)), np.zeros((G.n, 0)), G.S, (), G.ports)
    raise BadParam(f"{decl.kind} {decl.name} is not a linear passive component")


def _plan(G, stmt: Feedback, gain_model) -> FeedbackPlan:
    outs = [o for o, _ in stmt.pairs]
    ins = [i for _, i in stmt.pairs]
    if sorted(outs) != sorted(ins) or len(set(ins)) != len(ins):
        raise NetspecError("feedback pairs must route a set of outputs onto the same set of inputs")
    m = len(ins)
    perm = np.zeros((m, m))
    for o, i in stmt.pairs:
        perm[ins.index(i), ins.index(o)] = 1.0
    if gain_model is None and np.array_equal(perm, np.eye(m)):
        return FeedbackPlan(tuple(ins))
    eta = perm.astype(complex)
    if gain_model is not None:
        if gain_model.n != m:
            raise NetspecError(f"gain has {gain_model.n} ports but the loop has {m}")
        if np.max(np.abs(gain_model.L), initial=0.0) > 0 or np.max(np.abs(gain_model.H), initial=0.0) > 0:
            raise NetspecError("gain component must be static (L = 0, H = 0)")
        if isinstance(G, SLHModel):
            layout = G.layout.merge(gain_model.layout)
            if layout != G.layout:
                raise NetspecError("gain component acts on factors outside the looped model")
            eta = gain_model.to(layout).S @ np.kron(perm, np.eye(layout.dim))
        else:
            eta = gain_model.S @ perm
    return FeedbackPlan(tuple(ins), eta)


def evaluate(spec: NetworkSpec, base_dir: Path | str | None = None) -> SLHModel:
    """Run the statements in order and return the output model."""
    base = Path(base_dir) if base_dir is not None else None
    env: dict[str, SLHModel] = {}
    decls = {c.name: c for c in spec.components}

    def get(name: str) -> SLHModel:
        if name not in env:
            try:
                env[name] = build_component(decls[name], base)
            except SLHError as err:
                raise err.at(_where(decls[name]))
        return env[name]

    for stmt in spec.statements:
        try:
            if isinstance(stmt, Series):
                env[stmt.target] = series(get(stmt.second), get(stmt.first))
            elif isinstance(stmt, Concat):
                env[stmt.target] = concat([get(n) for n in stmt.names])
            elif isinstance(stmt, Feedback):
                G = get(stmt.name)
                gain = get(stmt.gain) if stmt.gain else None
                env[stmt.name] = feedback_reduce(G, _plan(G, stmt, gain))
            elif isinstance(stmt, Loop):
                G = get(stmt.name)
                env[stmt.name] = close_all_loops(G) if G.n else G
            elif isinstance(stmt, Output):
                return get(stmt.name)
        except SLHError as err:
            if err.location is None:
                err.at(_where(stmt))
            raise
    raise NetspecError("missing output statement")


def evaluate_linear(spec: NetworkSpec) -> LinearPassiveModel:
    """Evaluate at the (Omega, C, S) level and return the open loop to be closed with delay.

    The last ``loop`` applied to the output model marks the delayed loop: the
    model just before it is returned.  Without such a loop the output model
    itself is returned and all its ports are taken as the delayed loop.
    """
    out = spec.output
    delayed = None
    for k, stmt in enumerate(spec.statements):
        if isinstance(stmt, Loop) and stmt.name == out:
            delayed = k
    env: dict[str, LinearPassiveModel] = {}
    decls = {c.name: c for c in spec.components}

    def get(name: str) -> LinearPassiveModel:
        if name not in env:
            try:
                env[name] = build_linear_component(decls[name])
            except SLHError as err:
                raise err.at(_where(decls[name]))
        return env[name]

    for k, stmt in enumerate(spec.statements):
        try:
            if delayed is not None and k > delayed and not isinstance(stmt, Output):
                names = {getattr(stmt, "name", None), getattr(stmt, "first", None), getattr(stmt, "second", None)}
                names |= set(getattr(stmt, "names", ()))
                if out in names:
                    raise NetspecError(f"{out!r} is used after its delayed loop")
            if isinstance(stmt, Series):
                env[stmt.target] = linear_series(get(stmt.second), get(stmt.first))
            elif isinstance(stmt, Concat):
                env[stmt.target] = linear_concat([get(n) for n in stmt.names])
            elif isinstance(stmt, Feedback):
                G = get(stmt.name)
                gain = None
                if stmt.gain:
                    g = get(stmt.gain)
                    if g.m:
                        raise NetspecError("gain component must be static")
                    gain = g
                plan = _plan(G, stmt, _StaticGain(gain) if gain is not None else None)
                env[stmt.name] = linear_feedback(G, plan.internal_ports, plan.gain)
            elif isinstance(stmt, Loop):
                if k == delayed:
                    continue
                G = get(stmt.name)
                env[stmt.name] = linear_feedback(G, G.ports) if G.n else G
            elif isinstance(stmt, Output):
                return get(stmt.name)
        except SLHError as err:
            if err.location is None:
                err.at(_where(stmt))
            raise
    raise NetspecError("missing output statement")


class _StaticGain:
    """Adapter giving a static linear model the attributes ``_plan`` reads."""

    def __init__(self, G: LinearPassiveModel):
        self.n = G.n
        self.S = G.S
        self.L = np.zeros((G.n, 1))
        self.H = np.zeros((1, 1))
