"""Worklist constraint solver.

Saturates the collected constraints into a bounds context: concrete
lower bounds flow rightward along variable-to-variable links until they
meet concrete upper bounds, every such meeting is checked by
decomposing the pair (function against function, constructor against
case shape), and linked variables end up sharing their concrete upper
bounds so that a later pass can read a single verdict off any variable
of a group.  A constructor meeting a case shape with no arm for its
tag, or a shape meeting a function, is a clash: the caller falls back
to leaving the program alone.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Set, Tuple, Union

from .inference import (
    CaseBound,
    Constraint,
    CtorBound,
    FunBound,
    TVar,
)

ConcreteLower = Union[FunBound, CtorBound]
ConcreteUpper = Union[FunBound, CaseBound]


class Clash(Exception):
    """An impossible constraint; the whole program is left unoptimized."""


class SolverOverflow(Exception):
    """The rule-firing budget ran out."""


@dataclass(eq=False)
class SolverState:
    lowers: Dict[TVar, List[ConcreteLower]] = field(default_factory=dict)
    uppers: Dict[TVar, List[ConcreteUpper]] = field(default_factory=dict)
    succs: Dict[TVar, List[TVar]] = field(default_factory=dict)
    preds: Dict[TVar, List[TVar]] = field(default_factory=dict)
    vars: List[TVar] = field(default_factory=list)
    checks: Set[Tuple[int, int]] = field(default_factory=set)

    def touch(self, v: TVar) -> None:
        if v not in self.lowers:
            self.lowers[v] = []
            self.uppers[v] = []
            self.succs[v] = []
            self.preds[v] = []
            self.vars.append(v)

    def constraint_set(self) -> Set[Tuple[int, int]]:
        """All registered bounds as (lhs id, rhs id) pairs, for tests."""
        out: Set[Tuple[int, int]] = set()
        for v in self.vars:
            for lo in self.lowers[v]:
                out.add((id(lo), v.id))
            for up in self.uppers[v]:
                out.add((v.id, id(up)))
            for s in self.succs[v]:
                out.add((v.id, s.id))
        return out


def solve(constraints: List[Constraint], budget: int = 1_000_000) -> SolverState:
    state = SolverState()
    seen: Set[Tuple] = set()
    work: Deque[Tuple] = deque()

    for lhs, rhs in constraints:
        work.append(_item(lhs, rhs))

    fired = 0
    while True:
        while work:
            fired += 1
            if fired > budget:
                raise SolverOverflow(f"gave up after {fired} rule firings")
            kind, lhs, rhs = work.popleft()
            key = (kind, _key(lhs), _key(rhs))
            if key in seen:
                continue
            seen.add(key)
            if kind == "vv":
                _add_varvar(state, work, lhs, rhs)
            elif kind == "lo":
                _add_lower(state, work, lhs, rhs)
            elif kind == "up":
                _add_upper(state, work, lhs, rhs)
            else:
                _cross(state, work, lhs, rhs)
        if not _merge_phase(state, seen, work):
            return state


def _item(lhs, rhs) -> Tuple:
    lvar = isinstance(lhs, TVar)
    rvar = isinstance(rhs, TVar)
    if lvar and rvar:
        return ("vv", lhs, rhs)
    if rvar:
        return ("lo", lhs, rhs)
    if lvar:
        return ("up", lhs, rhs)
    return ("xx", lhs, rhs)


def _key(x) -> int:
    return x.id if isinstance(x, TVar) else id(x)


def _add_varvar(state: SolverState, work: Deque, a: TVar, b: TVar) -> None:
    if a is b:
        return
    state.touch(a)
    state.touch(b)
    state.succs[a].append(b)
    state.preds[b].append(a)
    for up in state.uppers[b]:
        work.append(("up", a, up))
    for lo in state.lowers[a]:
        work.append(("lo", lo, b))


def _add_lower(state: SolverState, work: Deque, lo: ConcreteLower, a: TVar) -> None:
    state.touch(a)
    state.lowers[a].append(lo)
    for up in state.uppers[a]:
        work.append(("xx", lo, up))
    for b in state.succs[a]:
        work.append(("lo", lo, b))


def _add_upper(state: SolverState, work: Deque, a: TVar, up: ConcreteUpper) -> None:
    state.touch(a)
    state.uppers[a].append(up)
    for lo in state.lowers[a]:
        work.append(("xx", lo, up))
    for c in state.preds[a]:
        work.append(("up", c, up))


def _cross(state: SolverState, work: Deque, lo: ConcreteLower, up: ConcreteUpper) -> None:
    state.checks.add((id(lo), id(up)))
    if isinstance(lo, FunBound) and isinstance(up, FunBound):
        work.appendleft(("vv", lo.result, up.result))
        work.appendleft(("vv", up.param, lo.param))
        return
    if isinstance(lo, CtorBound) and isinstance(up, CaseBound):
        arm = up.arm(lo.tag)
        if arm is None:
            raise Clash(f"constructor {lo.tag} reaches a case without a {lo.tag} arm")
        if len(arm.field_vars) != len(lo.fields):
            raise Clash(f"constructor {lo.tag} used at two arities")
        for fv, av in reversed(list(zip(lo.fields, arm.field_vars))):
            work.appendleft(("vv", fv, av))
        return
    if isinstance(lo, FunBound) and isinstance(up, CaseBound):
        raise Clash("a function value flows into a case scrutinee")
    raise Clash(f"a {lo.tag} value flows into a function position")


def _merge_phase(state: SolverState, seen: Set[Tuple], work: Deque) -> bool:
    """Queue missing symmetric and componentwise links; True if any."""
    added = False

    def push(kind: str, lhs, rhs) -> None:
        nonlocal added
        key = (kind, _key(lhs), _key(rhs))
        if key not in seen:
            work.append((kind, lhs, rhs))
            added = True

    for a in list(state.vars):
        for b in state.succs[a]:
            push("vv", b, a)
        ups = state.uppers[a]
        for i in range(len(ups)):
            for j in range(i + 1, len(ups)):
                u1, u2 = ups[i], ups[j]
                if isinstance(u1, FunBound) and isinstance(u2, FunBound):
                    push("vv", u1.param, u2.param)
                    push("vv", u1.result, u2.result)
                elif isinstance(u1, CaseBound) and isinstance(u2, CaseBound):
                    if set(u1.tags()) != set(u2.tags()):
                        continue
                    for arm1 in u1.arms:
                        arm2 = u2.arm(arm1.tag)
                        assert arm2 is not None
                        for v1, v2 in zip(arm1.field_vars, arm2.field_vars):
                            push("vv", v1, v2)
    return added


def ordered_context(
    state: SolverState,
) -> Tuple[List[Tuple], List[Tuple], List[Tuple]]:
    """The final context as (lower, var-var, upper) regions, for tests."""
    lowers = [(lo, v) for v in state.vars for lo in state.lowers[v]]
    varvars = [(v, s) for v in state.vars for s in state.succs[v]]
    uppers = [(v, up) for v in state.vars for up in state.uppers[v]]
    return lowers, varvars, uppers


def validate_output(state: SolverState, order: Optional[List[Tuple]] = None) -> bool:
    """Consistency oracle for a solved context; used by tests only.

    Checks the region ordering (upper bounds, then variable links, then
    lower bounds) and that the context is fully merged: variable links
    are symmetric, two function upper bounds of one variable have their
    parameters and results linked, and two case upper bounds of one
    variable over the same tags have their field variables linked.

    The state normally stores the three regions separately, which makes
    the ordering true by construction; `order` lets a test hand in an
    explicit sequence of ("up"|"vv"|"lo", lhs, rhs) entries to exercise
    the ordering clause on misshapen contexts.
    """
    if order is None:
        order = [("up", v, up) for v in state.vars for up in state.uppers[v]]
        order += [("vv", v, s) for v in state.vars for s in state.succs[v]]
        order += [("lo", lo, v) for v in state.vars for lo in state.lowers[v]]
    rank = {"up": 0, "vv": 1, "lo": 2}
    ranks = [rank[kind] for kind, _, _ in order]
    if ranks != sorted(ranks):
        return False

    def linked(a: TVar, b: TVar) -> bool:
        if a is b:
            return True
        return b in state.succs.get(a, ()) and a in state.succs.get(b, ())

    for a in state.vars:
        for b in state.succs[a]:
            if a not in state.succs.get(b, ()):
                return False
        ups = state.uppers[a]
        for i in range(len(ups)):
            for j in range(i + 1, len(ups)):
                u1, u2 = ups[i], ups[j]
                if isinstance(u1, FunBound) and isinstance(u2, FunBound):
                    if not linked(u1.param, u2.param):
                        return False
                    if not linked(u1.result, u2.result):
                        return False
                elif isinstance(u1, CaseBound) and isinstance(u2, CaseBound):
                    if set(u1.tags()) != set(u2.tags()):
                        continue
                    for arm1 in u1.arms:
                        arm2 = u2.arm(arm1.tag)
                        assert arm2 is not None
                        for v1, v2 in zip(arm1.field_vars, arm2.field_vars):
                            if not linked(v1, v2):
                                return False
    return True
