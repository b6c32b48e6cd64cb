"""``slhnet`` command line: reduce, delay-sweep and validate netlists.

Exit codes: 0 ok, 1 parse or input error, 2 ill-posed network (a singular
matrix in a feedback, Cayley or resolvent step), 3 numerical failure or an
emitted model that violates unitarity/Hermiticity.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import NumericalError, SingularMatrix, SLHError
from .linear import delay_sweep, rect_grid, sweep_to_csv
from .netspec import evaluate, evaluate_linear, parse_netspec
from .serialize import dumps, slh_to_json, strat_to_json
from .slh import slh_to_strat, validate

EXIT_OK, EXIT_INPUT, EXIT_ILL_POSED, EXIT_NUMERIC = 0, 1, 2, 3


def exit_code_for(err: Exception) -> int:
    if isinstance(err, SingularMatrix):
        return EXIT_ILL_POSED
    if isinstance(err, NumericalError):
        return EXIT_NUMERIC
    return EXIT_INPUT


class InvariantViolation(NumericalError):
    pass


def _load(path: str):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as err:
        raise FileNotFoundError(f"cannot read {path}: {err.strerror}") from None
    return parse_netspec(text), p.parent


def _checked(G):
    problems = validate(G, eps=1e-9)
    if problems:
        raise InvariantViolation("; ".join(str(v) for v in problems))
    return G


def _write(text: str, dest: str | None) -> None:
    if dest is None:
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def cmd_reduce(args) -> int:
    spec, base = _load(args.file)
    G = _checked(evaluate(spec, base))
    data = strat_to_json(slh_to_strat(G)) if args.form == "strat" else slh_to_json(G)
    _write(dumps(data), args.json)
    return EXIT_OK


def _parse_grid(text: str) -> list[complex]:
    parts = text.split(",")
    if len(parts) != 6:
        raise argparse.ArgumentTypeError("grid must be re0,re1,nre,im0,im1,nim")
    try:
        re0, re1, im0, im1 = (float(parts[k]) for k in (0, 1, 3, 4))
        nre, nim = int(parts[2]), int(parts[5])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if nre < 1 or nim < 1:
        raise argparse.ArgumentTypeError("grid sizes must be >= 1")
    return rect_grid(re0, re1, nre, im0, im1, nim)


def cmd_delay(args) -> int:
    spec, _ = _load(args.file)
    model = evaluate_linear(spec)
    if args.tau < 0:
        raise argparse.ArgumentTypeError("tau must be >= 0")
    points = delay_sweep(model, args.tau, args.grid)
    _write(sweep_to_csv(points, model.m), args.csv)
    return EXIT_OK


def cmd_validate(args) -> int:
    spec, base = _load(args.file)
    G = _checked(evaluate(spec, base))
    print(f"ok: {len(spec.components)} components, {G.n} external ports, Hilbert space dimension {G.dim}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slhnet", description="Evaluate SLH feedback-network netlists.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="reduce a netlist to a single SLH model (JSON)")
    p.add_argument("file")
    p.add_argument("--json", metavar="OUT", help="write JSON here instead of stdout")
    p.add_argument("--form", choices=("slh", "strat"), default="slh", help="output parametrization")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("delay", help="sweep the delayed-loop frequency matrix over a Laplace grid (CSV)")
    p.add_argument("file")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--grid", type=_parse_grid, required=True, metavar="re0,re1,nre,im0,im1,nim")
    p.add_argument("--csv", metavar="OUT", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_delay)

    p = sub.add_parser("validate", help="parse, evaluate and check invariants")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except SLHError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return exit_code_for(err)
    except (OSError, argparse.ArgumentTypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
