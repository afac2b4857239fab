"""The case-arm delaying pre-pass.

Every case arm gets hidden behind a lambda over the local variables the
arms mention, and the whole case is applied back to those variables, so
evaluation order is unchanged while arm bodies become closed enough to
move between definitions.
"""

import pytest

from conftest import corpus_inputs, corpus_names, corpus_source, run_on
from lumberjack.interp import diff_outcomes
from lumberjack.parser import parse_expr, parse_program
from lumberjack.printer import render_term
from lumberjack.syntax import (
    alpha_eq,
    is_reserved_name,
    iter_subterms,
    program_alpha_eq,
    program_free_vars,
)
from lumberjack.thunking import thunk_program, thunk_term


def test_no_local_captures_means_unit_wrapper():
    t = parse_expr("case x of { Some b -> b ; None -> 0 }")
    expected = parse_expr("(case x of { Some b -> fun u -> b ; None -> fun u -> 0 }) ()")
    assert alpha_eq(thunk_term(t), expected)


def test_captured_local_becomes_arm_parameter():
    t = parse_expr("fun a -> case x of { Some b -> a + b ; None -> a }")
    expected = parse_expr(
        "fun a -> (case x of { Some b -> fun a -> a + b ; None -> fun a -> a }) a"
    )
    assert alpha_eq(thunk_term(t), expected)


def test_captured_locals_are_sorted():
    t = parse_expr("fun c b -> case x of { Some y -> b + y ; None -> c }")
    out = thunk_term(t)
    # Both b and c leak into the arms, so both become parameters, in
    # name order, and the case is applied to them in the same order.
    assert render_term(out) == (
        "fun c b -> (case x of {\n"
        "      Some y -> fun b c -> b + y;\n"
        "      None -> fun b c -> c\n"
        "    }) b c"
    )


def test_binder_collision_takes_fresh_name():
    t = parse_expr("fun a -> case x of { Some a -> a ; None -> a }")
    out = thunk_term(t)
    expected = parse_expr(
        "fun a -> (case x of { Some a -> fun a'1 -> a ; None -> fun a -> a }) a"
    )
    assert alpha_eq(out, expected)


def test_arms_already_lambdas_still_wrapped():
    t = parse_expr("fun c -> case x of { Some b -> fun w -> w + c ; None -> fun w -> w }")
    expected = parse_expr(
        "fun c -> (case x of"
        " { Some b -> fun c -> fun w -> w + c"
        " ; None -> fun c -> fun w -> w }) c"
    )
    assert alpha_eq(thunk_term(t), expected)


def test_top_level_names_are_not_captured():
    # A reference to another definition is globally visible, so arms do
    # not abstract over it.
    p = parse_program("helper x = x + 1\nmain y = case y of { Some b -> helper b ; None -> 0 }")
    q = thunk_program(p)
    expected = parse_program(
        "helper x = x + 1\n"
        "main y = (case y of { Some b -> fun u -> helper b ; None -> fun u -> 0 }) ()"
    )
    assert program_alpha_eq(q, expected)


def test_foo_unit_shape():
    p = parse_program(corpus_source("foo_unit"))
    q = thunk_program(p)
    expected = parse_program(
        "error u = error u\n"
        "foo x y = (if x then fun y -> (case y of { () -> fun u -> error () }) ()"
        " else fun y -> 0) y\n"
        "main x = foo x ()"
    )
    assert program_alpha_eq(q, expected)


@pytest.mark.parametrize("name", corpus_names())
def test_thunked_programs_stay_closed(name):
    q = thunk_program(parse_program(corpus_source(name)))
    for v in program_free_vars(q):
        assert is_reserved_name(v)


@pytest.mark.parametrize("name", corpus_names())
def test_thunked_node_ids_are_unique(name):
    q = thunk_program(parse_program(corpus_source(name)))
    seen = set()
    for d in q.defs:
        for t in iter_subterms(d.body):
            assert t.nid not in seen
            seen.add(t.nid)
    for t in iter_subterms(q.main):
        assert t.nid not in seen
        seen.add(t.nid)


@pytest.mark.parametrize("name", corpus_names())
def test_thunking_preserves_semantics(name):
    p = parse_program(corpus_source(name))
    q = thunk_program(p)
    for args, _expected in corpus_inputs(name):
        a = run_on(p, args, 200_000)
        b = run_on(q, args, 200_000)
        assert diff_outcomes(a, b) in ("match", "inconclusive")


def test_unit_wrappers_cost_one_allocation_per_case():
    # enumerate executes one case per element plus the final one; each
    # gains a unit application, doubling the constructor count.
    p = parse_program(corpus_source("enumerate_sum"))
    q = thunk_program(p)
    for n, orig in [(10, 11), (1000, 1001)]:
        a = run_on(p, str(n), 2_000_000)
        b = run_on(q, str(n), 2_000_000)
        assert a.counters.ctor_allocs == orig
        assert b.counters.ctor_allocs == 2 * orig


def test_variable_wrappers_cost_no_constructor():
    p = parse_program(corpus_source("fig1_map_map"))
    q = thunk_program(p)
    a = run_on(p, "[1, 2, 3]", 200_000)
    b = run_on(q, "[1, 2, 3]", 200_000)
    assert a.counters.ctor_allocs == b.counters.ctor_allocs == 8
    assert b.counters.closure_allocs > a.counters.closure_allocs
