"""Pre-pass that delays case arms behind lambdas.

Rewrites every ``case s of { c xs -> e }`` into

    (case s of { c xs -> fun a1 .. ak -> e }) a1 .. ak

where a1..ak are the locally bound variables the arms mention besides
their own pattern binders.  Arms with no such variables take a single
ignored unit argument instead.  The rewritten arms only reference their
binders and globally visible names, so a later pass can move an arm
body into another definition without changing what any name means, and
because the extra arguments are plain variables (or unit) the wrapping
preserves strict evaluation order exactly.  The wrapper is reversed by
:func:`lumberjack.simplify.unthunk_program`.

Whether a name counts as local is decided by scope, not by name: a
definition's name shadowed by a lambda parameter is local there and
gets abstracted like any other local.
"""

from __future__ import annotations

from typing import List, Set

from .syntax import (
    App,
    Arm,
    Case,
    Ctor,
    Def,
    Lam,
    LetRec,
    Program,
    Term,
    Var,
    free_vars,
    fresh_name,
)


def thunk_program(prog: Program) -> Program:
    defs = [Def(d.name, _thunk(d.body, set())) for d in prog.defs]
    return Program(defs, _thunk(prog.main, set()))


def thunk_term(term: Term) -> Term:
    return _thunk(term, set())


def _thunk(term: Term, bound: Set[str]) -> Term:
    if isinstance(term, Var):
        return Var(term.name)
    if isinstance(term, Lam):
        return Lam(term.param, _thunk(term.body, bound | {term.param}))
    if isinstance(term, App):
        return App(_thunk(term.fn, bound), _thunk(term.arg, bound))
    if isinstance(term, Ctor):
        return Ctor(term.tag, [_thunk(a, bound) for a in term.args])
    if isinstance(term, LetRec):
        inner = bound | {term.name}
        return LetRec(term.name, _thunk(term.bound, inner), _thunk(term.body, inner))
    if isinstance(term, Case):
        scrut = _thunk(term.scrutinee, bound)
        bodies = [
            _thunk(arm.body, bound | set(arm.binders)) for arm in term.arms
        ]
        shared: Set[str] = set()
        for arm, body in zip(term.arms, bodies):
            shared |= (free_vars(body) - set(arm.binders)) & bound
        params = sorted(shared)
        if params:
            arms = []
            for arm, body in zip(term.arms, bodies):
                # A shared variable can collide with this arm's own
                # pattern binders; the lambda then takes a fresh ignored
                # name so the binder keeps its meaning.
                taken = free_vars(body) | set(arm.binders) | set(params)
                chain = []
                for p in params:
                    if p in arm.binders:
                        fresh = fresh_name(p, taken)
                        taken.add(fresh)
                        chain.append(fresh)
                    else:
                        chain.append(p)
                for p in reversed(chain):
                    body = Lam(p, body)
                arms.append(Arm(arm.tag, list(arm.binders), body))
            out: Term = Case(scrut, arms)
            for p in params:
                out = App(out, Var(p))
            return out
        arms = []
        avoid = set()
        for arm, body in zip(term.arms, bodies):
            avoid |= free_vars(body) | set(arm.binders)
        unit_param = fresh_name("u", avoid)
        for arm, body in zip(term.arms, bodies):
            arms.append(Arm(arm.tag, list(arm.binders), Lam(unit_param, body)))
        return App(Case(scrut, arms), Ctor("Unit", []))
    raise TypeError(f"unknown term node {term!r}")
