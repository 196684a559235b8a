from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastmm.catalog import builtin, builtin_names, classical_triple
from fastmm.composer import kron_compose
from fastmm.executor import execute
from fastmm.graph_ir import (
    STRATEGIES,
    GraphCycleError,
    GraphError,
    GraphIR,
    Ref,
    Statement,
    Term,
    build_bilinear_graph,
    build_classical_graph,
    live_temporaries,
    parse_graph,
    parse_statement,
    peak_live_temporaries,
    pretty_print,
    schedule,
    validate,
)

from oracles import bilinear_apply, interpret_graph, matmul_exact

CLASSICAL_P2 = (
    "CDP[0] << (ADP[0]) * (BDP[0]) + (ADP[1]) * (BDP[2])\n"
    "CDP[1] << (ADP[0]) * (BDP[1]) + (ADP[1]) * (BDP[3])\n"
    "CDP[2] << (ADP[2]) * (BDP[0]) + (ADP[3]) * (BDP[2])\n"
    "CDP[3] << (ADP[2]) * (BDP[1]) + (ADP[3]) * (BDP[3])\n"
)


def all_graphs():
    graphs = [build_classical_graph(p) for p in (1, 2, 3)]
    for name in builtin_names():
        g = build_bilinear_graph(builtin(name))
        graphs += [g] + [schedule(g, s) for s in STRATEGIES]
    return graphs


def test_classical_p1():
    assert pretty_print(build_classical_graph(1)) == "CDP[0] << (ADP[0]) * (BDP[0])\n"


def test_classical_p2_printed_block():
    assert pretty_print(build_classical_graph(2)) == CLASSICAL_P2


def test_classical_p3_counts():
    g = build_classical_graph(3)
    assert len(g.statements) == 9 and g.block_multiplies == 27


def test_strassen_graph(strassen):
    g = build_bilinear_graph(strassen)
    mults = [s for s in g.statements if s.multiplies]
    assert len(mults) == 7
    assert format(g.statements[[str(s.target) for s in g.statements].index("P5")]) == \
        "P5 << (ADP[0]) * (BDP[0])"
    assert sum("*" in line for line in pretty_print(g).splitlines()) == 7


def _output(g, i):
    (s,) = [s for s in g.statements if str(s.target) == f"CDP[{i}]"]
    return s


def test_strassen_output_sums(strassen):
    g = build_bilinear_graph(strassen)
    assert [str(t.left) for t in _output(g, 3).terms] == ["P0", "P6"]
    assert [str(t.left) for t in _output(g, 0).terms] == ["P3", "P5"]


def test_classical_triple_graph_matches_builder():
    a = build_bilinear_graph(classical_triple(2))
    b = build_classical_graph(2)
    assert a.block_multiplies == b.block_multiplies == 8
    A, B = np.arange(16.0).reshape(4, 4), np.arange(16.0).reshape(4, 4)[::-1].copy()
    assert execute(a, A, B)[0].tolist() == execute(b, A, B)[0].tolist()


@pytest.mark.parametrize("g", all_graphs(), ids=lambda g: f"{g.name}-{g.schedule}")
def test_every_graph_validates_and_round_trips(g):
    validate(g)
    text = pretty_print(g)
    again = parse_graph(text, name=g.name)
    assert again.p == g.p
    assert pretty_print(again) == text
    assert again.statements == g.statements


small = st.integers(-8, 8)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(builtin_names()), st.sampled_from((None,) + STRATEGIES), st.data())
def test_graph_equals_formula_on_rationals(name, strategy, data):
    t = builtin(name)
    g = build_bilinear_graph(t)
    if strategy:
        g = schedule(g, strategy)
    entry = st.fractions(min_value=-5, max_value=5, max_denominator=7)
    A = [[data.draw(entry) for _ in range(t.p)] for _ in range(t.p)]
    B = [[data.draw(entry) for _ in range(t.p)] for _ in range(t.p)]
    got = interpret_graph(g, A, B)
    assert got == bilinear_apply(t, A, B) == matmul_exact(A, B)


def test_composed_graph_equals_formula(strassen):
    t = kron_compose(strassen, strassen)
    rng = np.random.default_rng(0)
    A = [[Fraction(int(x), 3) for x in row] for row in rng.integers(-8, 9, (4, 4))]
    B = [[Fraction(int(x), 5) for x in row] for row in rng.integers(-8, 9, (4, 4))]
    g = schedule(build_bilinear_graph(t), "fused")
    assert interpret_graph(g, A, B) == bilinear_apply(t, A, B) == matmul_exact(A, B)


def test_product_major_shape(strassen):
    g = schedule(build_bilinear_graph(strassen), "product-major")
    names = [s.target.name for s in g.statements]
    assert names[-4:] == ["CDP"] * 4
    body = g.statements[:-4]
    # every group ends with its product, which is preceded by that product's operands
    products = [k for k, s in enumerate(body) if s.target.name == "P"]
    assert [body[k].target.index for k in products] == list(range(7))
    start = 0
    for k in products:
        q = body[k].target.index
        assert all(s.target.name in "TS" and s.target.index == q for s in body[start:k])
        start = k + 1
    assert peak_live_temporaries(g) == 7


def test_fused_peak_is_two(strassen):
    g = schedule(build_bilinear_graph(strassen), "fused")
    assert peak_live_temporaries(g) == 2


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_schedule_idempotent(strategy):
    for name in builtin_names():
        once = schedule(build_bilinear_graph(builtin(name)), strategy)
        assert schedule(once, strategy) == once


def test_liveness_excludes_own_target():
    g = parse_graph("T0 << 2 * (ADP[0])\nCDP[0] << (T0) * (BDP[0])\n", p=1)
    assert live_temporaries(g) == [set(), {Ref("T", 0)}]


def test_parse_statement_forms():
    s = parse_statement("T3 << (ADP[0]) - 2 * (ADP[1]) + 1/2 * (ADP[2])")
    assert [t.coef for t in s.terms] == [1, -2, Fraction(1, 2)]
    assert s.scalings == 2 and s.additions == 2
    s = parse_statement("CDP[0] << -1 * (P1)")
    assert s.terms[0].coef == -1


@pytest.mark.parametrize("bad", [
    "CDP[0] << ",
    "CDP[0] << (ADP[0]) *",
    "CDP[0] (ADP[0])",
    "CDP[0] << 2 * (ADP[0]) * (BDP[0])",
    "X1 << (ADP[0])",
])
def test_parse_errors(bad):
    with pytest.raises(GraphError):
        parse_statement(bad)


def test_use_before_definition():
    with pytest.raises(GraphError, match="before definition"):
        parse_graph("CDP[0] << (T0) * (BDP[0])\nT0 << (ADP[0])\n")


def test_missing_output():
    with pytest.raises(GraphError, match="never assigned"):
        parse_graph("CDP[0] << (ADP[0]) * (BDP[0])\n", p=2)


def test_cycle_detected():
    T0, S0 = Ref("T", 0), Ref("S", 0)
    g = GraphIR(1, (
        Statement(T0, (Term(1, Ref("ADP", 0)), Term(1, S0))),
        Statement(S0, (Term(1, T0),)),
        Statement(Ref("CDP", 0), (Term(1, T0, S0),)),
    ))
    with pytest.raises(GraphCycleError):
        schedule(g, "fused")


def test_unknown_strategy(strassen):
    with pytest.raises(GraphError):
        schedule(build_bilinear_graph(strassen), "eager")
