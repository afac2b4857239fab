"""Constraint generation: rule shapes, coverage, and the worklist seed."""

import pytest

from conftest import corpus_names, corpus_source
from lumberjack.duplication import duplicate_defs
from lumberjack.inference import (
    CaseBound,
    CtorBound,
    FunBound,
    TVar,
    infer_program,
)
from lumberjack.parser import parse_expr, parse_program
from lumberjack.syntax import Program, Var, iter_subterms, term_size
from lumberjack.thunking import thunk_program


def _prepped(name):
    p = parse_program(corpus_source(name))
    q, _report = duplicate_defs(thunk_program(p))
    return q


def _program_size(prog):
    return sum(term_size(d.body) for d in prog.defs) + term_size(prog.main)


def _all_nids(prog):
    nids = set()
    for d in prog.defs:
        nids |= {t.nid for t in iter_subterms(d.body)}
    nids |= {t.nid for t in iter_subterms(prog.main)}
    return nids


def test_identity_function_gives_one_constraint():
    res = infer_program(Program([], parse_expr("fun x -> x")))
    assert len(res.constraints) == 1
    lo, up = res.constraints[0]
    assert isinstance(lo, FunBound)
    assert lo.param is lo.result
    assert up is res.root


def test_branching_producer_constraints():
    res = infer_program(parse_program("main y = if y then Some 123 else None"))
    tags = sorted(lo.tag for lo, _up in res.constraints if isinstance(lo, CtorBound))
    assert tags == ["None", "Some"]
    (cb,) = res.case_bounds
    flows = {
        (lo.id, up.id)
        for lo, up in res.constraints
        if isinstance(lo, TVar) and isinstance(up, TVar)
    }
    for arm in cb.arms:
        body_var = res.var_of[arm.body.nid]
        assert (body_var.id, cb.result.id) in flows


def test_application_emits_function_upper_bound():
    res = infer_program(Program([], parse_expr("fun f -> f 1")))
    uppers = [
        (lo, up) for lo, up in res.constraints if isinstance(up, FunBound)
    ]
    assert len(uppers) == 1
    lo, up = uppers[0]
    assert isinstance(lo, TVar)


def test_unbound_variable_is_the_only_failure():
    with pytest.raises(ValueError):
        infer_program(Program([], Var("nope")))


@pytest.mark.parametrize("name", corpus_names())
def test_infer_succeeds_on_prepared_corpus(name):
    res = infer_program(_prepped(name))
    assert res.root is not None
    assert len(res.constraints) > 0


@pytest.mark.parametrize("name", corpus_names())
def test_every_node_gets_a_variable(name):
    prog = _prepped(name)
    res = infer_program(prog)
    assert _all_nids(prog) <= set(res.var_of)


@pytest.mark.parametrize("name", corpus_names())
def test_constraint_count_is_linear_in_size(name):
    prog = _prepped(name)
    res = infer_program(prog)
    assert len(res.constraints) <= 2 * _program_size(prog)


@pytest.mark.parametrize("name", corpus_names())
def test_seed_is_self_contained(name):
    """Every case shape carries its arm bodies' constraints along.

    Concretely: each arm body is a node the var map covers, and the flow
    from the arm body's variable into the case result variable is part
    of the seed, not something the solver has to invent.
    """
    prog = _prepped(name)
    res = infer_program(prog)
    flows = {
        (lo.id, up.id)
        for lo, up in res.constraints
        if isinstance(lo, TVar) and isinstance(up, TVar)
    }
    case_uppers = [up for _lo, up in res.constraints if isinstance(up, CaseBound)]
    assert case_uppers
    for cb in case_uppers:
        for arm in cb.arms:
            assert arm.body.nid in res.var_of
            body_var = res.var_of[arm.body.nid]
            assert (body_var.id, cb.result.id) in flows
            for t in iter_subterms(arm.body):
                assert t.nid in res.var_of
            assert len(arm.field_vars) == len(arm.binders)


def _normal_form(res):
    """Constraint list with variable ids replaced by first-seen indices."""
    dense = {}

    def num(v):
        return dense.setdefault(v.id, len(dense))

    def side(s):
        if isinstance(s, TVar):
            return ("v", num(s))
        if isinstance(s, FunBound):
            return ("fun", num(s.param), num(s.result))
        if isinstance(s, CtorBound):
            return ("ctor", s.tag, tuple(num(f) for f in s.fields))
        assert isinstance(s, CaseBound)
        arms = tuple(
            (a.tag, tuple(num(f) for f in a.field_vars)) for a in s.arms
        )
        return ("case", arms, num(s.result))

    return [(side(lo), side(up)) for lo, up in res.constraints]


@pytest.mark.parametrize("name", corpus_names())
def test_inference_is_deterministic(name):
    a = _normal_form(infer_program(_prepped(name)))
    b = _normal_form(infer_program(_prepped(name)))
    assert a == b


def test_fresh_variables_never_repeat_across_runs():
    # Occurrences of one binder share its variable inside a run, but two
    # runs never hand out the same id twice.
    a = infer_program(_prepped("fig1_map_map"))
    b = infer_program(_prepped("fig1_map_map"))
    ids_a = {v.id for v in a.var_of.values()}
    ids_b = {v.id for v in b.var_of.values()}
    assert not (ids_a & ids_b)
