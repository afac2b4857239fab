"""Counting interpreter: values, counters, budgets, and outcome diffing."""

import pytest

from conftest import run_on
from lumberjack.interp import (
    Counters,
    Outcome,
    VCtor,
    VInt,
    diff_outcomes,
    eval_closed,
    render_value,
    run_main,
    values_equal,
)
from lumberjack.parser import parse_args, parse_expr, parse_program

LOOP = "loop x = loop x\nmain y = loop y"


def _run(src, args, budget=1_000_000):
    return run_on(parse_program(src), args, budget)


def test_lambda_allocates_one_closure():
    out = _run("main x = fun y -> y", "0")
    assert out.status == "finished"
    assert out.counters.closure_allocs == 1


def test_sum_of_enumeration_counters():
    # enumerate 3 builds the three element cells plus the nil, sum consumes
    # them without allocating.
    src = (
        "sum l = case l of { [] -> 0 ; x :: xs -> x + sum xs }\n"
        "enumerate n = if n > 0 then n :: enumerate (n - 1) else []\n"
        "main x = sum (enumerate x)"
    )
    out = _run(src, "3")
    assert out.status == "finished"
    assert render_value(out.value) == "6"
    assert out.counters.ctor_allocs == 4
    assert out.counters.closure_allocs == 0

    empty = _run(src, "0")
    assert empty.counters.ctor_allocs == 1


def test_map_map_counters_scale_with_both_passes():
    src = (
        "map f xs = case xs of { [] -> [] ; x :: rest -> f x :: map f rest }\n"
        "double x = x * 2\n"
        "incr x = x + 1\n"
        "main ls = map incr (map double ls)"
    )
    out = _run(src, "[1, 2, 3]")
    assert out.status == "finished"
    assert render_value(out.value) == "3 :: 5 :: 7 :: []"
    # Each pass allocates one cell per element plus a nil.
    assert out.counters.ctor_allocs == 8


def test_runs_are_deterministic():
    a = _run(LOOP.replace("loop x = loop x", "f x = x + 1").replace("loop y", "f y"), "9")
    b = _run(LOOP.replace("loop x = loop x", "f x = x + 1").replace("loop y", "f y"), "9")
    assert a.status == b.status == "finished"
    assert a.counters == b.counters
    assert values_equal(a.value, b.value)


def test_budget_exhaustion_reports_timeout():
    out = _run(LOOP, "1", budget=5_000)
    assert out.status == "timeout"
    assert out.error.startswith("timeout")
    assert out.counters.steps >= 5_000


def test_missing_arm_is_an_error():
    out = _run("main x = case x of { [] -> 0 }", "[1]")
    assert out.status == "error"
    assert out.error == "bad-case: no arm for Cons"


def test_case_on_non_constructor_is_an_error():
    out = _run("main x = case x of { [] -> 0 }", "1")
    assert out.status == "error"
    assert out.error.startswith("bad-case")


def test_prim_on_non_integer_is_an_error():
    out = _run("main x = 1 + x", "True")
    assert out.status == "error"
    assert out.error.startswith("prim-type")


def test_values_equal_structure():
    one = eval_closed(parse_expr("1"))
    pair = eval_closed(parse_expr("Pair 1 2"))
    assert values_equal(one, VInt(1))
    assert not values_equal(one, VInt(2))
    assert values_equal(pair, VCtor("Pair", [VInt(1), VInt(2)]))
    assert not values_equal(pair, VCtor("Pair", [VInt(1), VInt(3)]))
    assert not values_equal(one, pair)


def test_closures_compare_opaquely():
    f = eval_closed(parse_expr("fun x -> x"))
    g = eval_closed(parse_expr("fun x -> x + 1"))
    assert values_equal(f, g)
    assert render_value(f) == "<fun>"


def test_render_value_forms():
    assert render_value(eval_closed(parse_expr("[2, 3, 4]"))) == "2 :: 3 :: 4 :: []"
    assert render_value(eval_closed(parse_expr("[]"))) == "[]"
    assert render_value(eval_closed(parse_expr("Pair 1 2"))) == "Pair 1 2"
    nested = eval_closed(parse_expr("[Pair 1 2]"))
    assert render_value(nested) == "(Pair 1 2) :: []"
    assert render_value(eval_closed(parse_expr("Pair 1 2")), atom=True) == "(Pair 1 2)"


def _outcome(status, value=None, error=None):
    return Outcome(status=status, value=value, error=error, counters=Counters())


def test_diff_outcomes_table():
    fin1 = _outcome("finished", value=VInt(1))
    fin2 = _outcome("finished", value=VInt(2))
    hang = _outcome("timeout", error="timeout: step budget exhausted")
    noarm = _outcome("error", error="bad-case: no arm for Cons")
    nonctor = _outcome("error", error="bad-case: scrutinee is not a constructor")
    primty = _outcome("error", error="prim-type: #add applied to a non-integer")

    assert diff_outcomes(fin1, _outcome("finished", value=VInt(1))) == "match"
    assert diff_outcomes(fin1, fin2) == "mismatch"
    # Original running out of budget proves nothing either way.
    assert diff_outcomes(hang, fin1) == "inconclusive"
    assert diff_outcomes(hang, hang) == "inconclusive"
    assert diff_outcomes(fin1, hang) == "optimized-diverged"
    # Errors agree when the kind prefix agrees.
    assert diff_outcomes(noarm, nonctor) == "match"
    assert diff_outcomes(noarm, primty) == "mismatch"
    assert diff_outcomes(fin1, noarm) == "mismatch"
    assert diff_outcomes(noarm, fin1) == "mismatch"


def test_partial_application_is_a_value():
    out = _run("const a b = a\nmain x = const x", "5")
    assert out.status == "finished"
    assert render_value(out.value) == "<fun>"


def test_deep_recursion_is_iterative():
    # A recursion a hundred thousand deep must not hit the host stack.
    src = "count n = if n > 0 then count (n - 1) else 0\nmain x = count x"
    out = _run(src, "100000", budget=10_000_000)
    assert out.status == "finished"
    assert render_value(out.value) == "0"
