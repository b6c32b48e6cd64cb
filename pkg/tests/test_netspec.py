import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netspec_corpus import CORPUS
from slhnet.errors import (
    BadParam,
    DuplicateName,
    IllPosedNetwork,
    NetspecError,
    NetspecSyntaxError,
    PortCountMismatch,
    UndefinedName,
)
from slhnet.netspec import (
    ComponentDecl,
    Concat,
    Feedback,
    Loop,
    NetworkSpec,
    Output,
    Series,
    evaluate,
    evaluate_linear,
    format_netspec,
    parse_netspec,
)
from slhnet.components import make_cavity
from slhnet.network import close_all_loops, series
from slhnet.serialize import dumps, slh_to_json


def test_smallest_program():
    spec = parse_netspec("cavity c1 omega=1 gamma=0.5 phi=1.5707963 dim=6\nloop c1\noutput c1")
    assert len(spec.components) == 1
    assert spec.components[0] == ComponentDecl("c1", "cavity", (("omega", 1.0), ("gamma", 0.5), ("phi", 1.5707963), ("dim", 6.0)))
    assert spec.statements == (Loop("c1"), Output("c1"))
    assert spec.output == "c1"


def test_statement_kinds():
    text = (
        "phase p phi=0.1\nphase q phi=0.2 n=1\n"
        "series p q -> pq\nconcat pq p -> both\n"
        "feedback both pq.0:pq.0 gain q\noutput both\n"
    )
    stmts = parse_netspec(text).statements
    assert stmts[0] == Series("p", "q", "pq")
    assert stmts[1] == Concat(("pq", "p"), "both")
    assert stmts[2] == Feedback("both", (("pq.0", "pq.0"),), "q")


@pytest.mark.parametrize(
    "text, error, line, column",
    [
        ("phase p phi=1\nseries p x -> y\noutput y\n", UndefinedName, 2, 10),
        ("phase p phi=1\nphase p phi=2\noutput p\n", DuplicateName, 2, 7),
        ("phase p phi=1\nconcat p -> p\noutput p\n", DuplicateName, 2, 13),
        ("phase p phi=abc\noutput p\n", NetspecSyntaxError, 1, 13),
        ("phase p phi=1 bogus=2\noutput p\n", NetspecSyntaxError, 1, 15),
        ("phase p\noutput p\n", NetspecSyntaxError, 1, 1),
        ("wire p\n", NetspecSyntaxError, 1, 1),
        ("phase p phi=1\noutput p\noutput p\n", NetspecSyntaxError, 3, 1),
        ("phase p phi=1\nseries p p p\noutput p\n", NetspecSyntaxError, 2, 1),
        ("phase p phi=1\nfeedback p p.0\noutput p\n", NetspecSyntaxError, 2, 12),
        ("phase series phi=1\n", NetspecSyntaxError, 1, 7),
        ("output p\n", UndefinedName, 1, 8),
    ],
)
def test_parse_errors_have_location(text, error, line, column):
    with pytest.raises(error) as info:
        parse_netspec(text)
    assert (info.value.line, info.value.column) == (line, column)
    assert f"line {line}, column {column}" in str(info.value)


def test_missing_output():
    with pytest.raises(NetspecSyntaxError):
        parse_netspec("phase p phi=1\n")


@pytest.mark.parametrize("text", CORPUS)
def test_corpus_round_trip(text):
    spec = parse_netspec(text)
    assert parse_netspec(format_netspec(spec)) == spec


_names = st.sampled_from(["a", "b", "c", "x1", "y_2"])
_num = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6)


@st.composite
def programs(draw):
    names = draw(st.lists(_names, min_size=1, max_size=4, unique=True))
    comps = []
    for name in names:
        kind = draw(st.sampled_from(["cavity", "phase", "beamsplitter"]))
        if kind == "cavity":
            params = (("omega", draw(_num)), ("gamma", draw(_num)), ("phi", draw(_num)))
        elif kind == "phase":
            params = (("phi", draw(_num)),)
        else:
            params = (("t", draw(_num)), ("n", float(draw(st.integers(1, 3)))))
        comps.append(ComponentDecl(name, kind, params))
    defined = list(names)
    stmts = []
    for k in range(draw(st.integers(0, 4))):
        op = draw(st.sampled_from(["series", "concat", "feedback", "loop"]))
        if op == "series":
            stmts.append(Series(draw(st.sampled_from(defined)), draw(st.sampled_from(defined)), f"s{k}"))
            defined.append(f"s{k}")
        elif op == "concat":
            stmts.append(Concat(tuple(draw(st.lists(st.sampled_from(defined), min_size=1, max_size=3))), f"t{k}"))
            defined.append(f"t{k}")
        elif op == "feedback":
            stmts.append(Feedback(draw(st.sampled_from(defined)), (("p.0", "p.1"), ("p.1", "p.0")), draw(st.sampled_from([None] + defined))))
        else:
            stmts.append(Loop(draw(st.sampled_from(defined))))
    stmts.append(Output(draw(st.sampled_from(defined))))
    return NetworkSpec(tuple(comps), tuple(stmts))


@settings(max_examples=100, deadline=None)
@given(programs())
def test_generated_round_trip(spec):
    text = format_netspec(spec)
    assert parse_netspec(text) == spec
    assert format_netspec(parse_netspec(text)) == text


def test_evaluate_cavity_loop_quarter_turn():
    G = evaluate(parse_netspec("cavity c omega=1 gamma=0.5 phi=1.5707963267948966 dim=4\nloop c\noutput c\n"))
    assert G.is_closed
    assert G.H[1, 1] == pytest.approx(1.25)


def test_evaluate_two_cavity_coupling():
    text = (
        "cavity c1 omega=1 gamma=0.4 phi=1.5707963267948966 dim=3\n"
        "cavity c2 omega=2 gamma=0.9 phi=1.5707963267948966 dim=3\n"
        "series c1 c2 -> net\nloop net\noutput net\n"
    )
    G = evaluate(parse_netspec(text))
    # <1,0| H |0,1> is the a1^dag a2 coefficient (c1 is the outer factor)
    assert G.H[3, 1] == pytest.approx(math.sqrt(0.4 * 0.9) / 2)


def test_ill_posed_loop_names_statement():
    with pytest.raises(IllPosedNetwork) as info:
        evaluate(parse_netspec("cavity c omega=1 gamma=0.5 phi=0 dim=3\nloop c\noutput c\n"))
    assert info.value.location == "line 2: loop c"


def test_bad_param_names_declaration():
    with pytest.raises(BadParam) as info:
        evaluate(parse_netspec("beamsplitter b t=2\noutput b\n"))
    assert "line 1" in str(info.value)


def test_port_count_mismatch_located():
    with pytest.raises(PortCountMismatch) as info:
        evaluate(parse_netspec("phase p phi=1\nbeamsplitter b t=0.5\nseries p b -> x\noutput x\n"))
    assert info.value.location.startswith("line 3")


def test_feedback_permutation_and_gain():
    text = (
        "cavity c1 omega=1 gamma=0.4 phi=0.5 dim=3\ncavity c2 omega=2 gamma=0.9 phi=1.0 dim=3\n"
        "concat c1 c2 -> both\nfeedback both c1.0:c2.0 c2.0:c1.0\noutput both\n"
    )
    G = evaluate(parse_netspec(text))
    # crossing the two outputs is the same loop as c1 feeding c2 feeding c1
    c1, c2 = make_cavity(1, 0.4, 0.5, dim=3, name="c1"), make_cavity(2, 0.9, 1.0, dim=3, name="c2")
    ref = close_all_loops(series(c2, c1))
    assert G.is_closed and np.allclose(G.H, ref.H)
    with pytest.raises(NetspecError):
        evaluate(parse_netspec("beamsplitter b t=0.5\nfeedback b b.0:b.1\noutput b\n"))


def test_feedback_with_phase_gain():
    G = evaluate(parse_netspec("phase g phi=1.5707963267948966\ncavity c omega=1 gamma=1 dim=3\nfeedback c c.0:c.0 gain g\noutput c\n"))
    ref = close_all_loops(make_cavity(1, 1, math.pi / 2, dim=3, name="c"))
    assert np.allclose(G.H, ref.H)


def test_custom_component(tmp_path):
    model = make_cavity(1.0, 0.5, 2.0, dim=3, name="m")
    (tmp_path / "m.json").write_text(dumps(slh_to_json(model)))
    G = evaluate(parse_netspec('custom m file="m.json"\nloop m\noutput m\n'), tmp_path)
    assert np.allclose(G.H, close_all_loops(model).H)
    with pytest.raises(BadParam):
        evaluate(parse_netspec('custom m file="missing.json"\noutput m\n'), tmp_path)


def test_evaluation_is_deterministic():
    text = CORPUS[6]
    outs = {dumps(slh_to_json(evaluate(parse_netspec(text)))) for _ in range(3)}
    assert len(outs) == 1


def test_evaluate_linear_open_loop():
    text = (
        "cavity c1 omega=1 gamma=0.4 phi=0.3\ncavity c2 omega=2 gamma=0.9 phi=0.1\n"
        "series c1 c2 -> net\nloop net\noutput net\n"
    )
    model = evaluate_linear(parse_netspec(text))
    assert model.m == 2 and model.n == 1 and model.modes == ("c1", "c2")
    with pytest.raises(BadParam):
        evaluate_linear(parse_netspec("qubit_coupler q gamma=1 kappa=1\noutput q\n"))
