"""Reference bounds solver that really shuffles an ordered context.

The production solver keeps indexed lower/upper/link tables and a
worklist.  This engine instead holds the whole bounds context as one
ordered list and moves entries by adjacent swaps, the slow but obvious
way: a freshly recorded bound starts at an end of the list and bubbles
toward its region, and every time a lower bound and an upper bound of
the same variable pass each other the pair of shapes is checked.  The
two implementations must agree on the final set of recorded bounds, on
the set of shape pairs checked, and on whether solving fails.

Quadratic on purpose; only tests feed it, and only small inputs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Deque, List, Optional, Set, Tuple, Union

from lumberjack.inference import CaseBound, CtorBound, FunBound, TVar
from lumberjack.solver import Clash

Side = Union[TVar, FunBound, CtorBound, CaseBound]


def _skey(x: Side) -> Tuple[str, int]:
    if isinstance(x, TVar):
        return ("v", x.id)
    return ("b", id(x))


@dataclass(eq=False)
class Bound:
    lhs: Side
    rhs: Side

    def key(self) -> Tuple[Tuple[str, int], Tuple[str, int]]:
        return (_skey(self.lhs), _skey(self.rhs))


class LiteralEngine:
    def __init__(self) -> None:
        self.xi: List[Bound] = []
        self.members: Set[Tuple] = set()
        self.checks: Set[Tuple[int, int]] = set()

    # -- context bookkeeping --

    def _insert_left(self, b: Bound) -> None:
        self.xi.insert(0, b)
        self.members.add(b.key())

    def _insert_right(self, b: Bound) -> None:
        self.xi.append(b)
        self.members.add(b.key())

    def _has(self, lhs: Side, rhs: Side) -> bool:
        return (_skey(lhs), _skey(rhs)) in self.members

    # -- the swap rules --

    def _swap_redex(self, same_var: bool) -> Optional[int]:
        """Leftmost adjacent pair (X <= a)(b <= Y) that may commute.

        same_var selects between the two commuting rules: False wants
        a != b and True wants a is b (the checking swap).  Either way
        at least one of X, Y must be a shape rather than a variable.
        """
        for i in range(len(self.xi) - 1):
            b1, b2 = self.xi[i], self.xi[i + 1]
            if not isinstance(b1.rhs, TVar) or not isinstance(b2.lhs, TVar):
                continue
            if (b1.rhs is b2.lhs) != same_var:
                continue
            if isinstance(b1.lhs, TVar) and isinstance(b2.rhs, TVar):
                continue
            return i
        return None

    # -- the merge rules --

    def _varvar_merge(self) -> Optional[List[Bound]]:
        for b in self.xi:
            if isinstance(b.lhs, TVar) and isinstance(b.rhs, TVar):
                if not self._has(b.rhs, b.lhs):
                    return [Bound(b.rhs, b.lhs)]
        return None

    def _upper_pairs(self):
        by_var: dict = {}
        for b in self.xi:
            if isinstance(b.lhs, TVar) and not isinstance(b.rhs, TVar):
                by_var.setdefault(b.lhs.id, []).append(b.rhs)
        for ups in by_var.values():
            for i in range(len(ups)):
                for j in range(i + 1, len(ups)):
                    yield ups[i], ups[j]

    def _fun_merge(self) -> Optional[List[Bound]]:
        for u1, u2 in self._upper_pairs():
            if isinstance(u1, FunBound) and isinstance(u2, FunBound):
                links = [(u1.param, u2.param), (u1.result, u2.result)]
                if any(not self._has(a, b) for a, b in links):
                    return [Bound(a, b) for a, b in links]
        return None

    def _ctor_merge(self) -> Optional[List[Bound]]:
        for u1, u2 in self._upper_pairs():
            if isinstance(u1, CaseBound) and isinstance(u2, CaseBound):
                if set(u1.tags()) != set(u2.tags()):
                    continue
                links = []
                for arm1 in u1.arms:
                    arm2 = u2.arm(arm1.tag)
                    assert arm2 is not None
                    links.extend(zip(arm1.field_vars, arm2.field_vars))
                if any(not self._has(a, b) for a, b in links):
                    return [Bound(a, b) for a, b in links]
        return None

    # -- the driver --

    def solve(self, constraints, budget: int = 500_000) -> "LiteralEngine":
        delta: Deque[Bound] = deque(Bound(lhs, rhs) for lhs, rhs in constraints)
        fired = 0
        while True:
            fired += 1
            if fired > budget:
                raise AssertionError("literal engine did not terminate")
            if delta:
                b = delta.popleft()
                if b.key() in self.members:  # seen this bound already
                    continue
                if isinstance(b.rhs, TVar):  # record at the left end
                    self._insert_left(b)
                elif isinstance(b.lhs, TVar):  # record at the right end
                    self._insert_right(b)
                else:  # two shapes meet: decompose or fail
                    self.checks.add((id(b.lhs), id(b.rhs)))
                    if isinstance(b.lhs, FunBound) and isinstance(b.rhs, FunBound):
                        delta.appendleft(Bound(b.lhs.result, b.rhs.result))
                        delta.appendleft(Bound(b.rhs.param, b.lhs.param))
                    elif isinstance(b.lhs, CtorBound) and isinstance(b.rhs, CaseBound):
                        arm = b.rhs.arm(b.lhs.tag)
                        if arm is None:
                            raise Clash(f"no arm for {b.lhs.tag}")
                        if len(arm.field_vars) != len(b.lhs.fields):
                            raise Clash(f"arity mismatch on {b.lhs.tag}")
                        for pair in reversed(list(zip(b.lhs.fields, arm.field_vars))):
                            delta.appendleft(Bound(*pair))
                    else:
                        raise Clash("no applicable decomposition")
                continue
            i = self._swap_redex(same_var=False)
            if i is not None:
                self.xi[i], self.xi[i + 1] = self.xi[i + 1], self.xi[i]
                continue
            i = self._swap_redex(same_var=True)
            if i is not None:
                b1, b2 = self.xi[i], self.xi[i + 1]
                self.xi[i], self.xi[i + 1] = b2, b1
                delta.append(Bound(b1.lhs, b2.rhs))
                continue
            enqueue = self._varvar_merge() or self._fun_merge() or self._ctor_merge()
            if enqueue:
                delta.extend(enqueue)
                continue
            return self

    # -- comparison views --

    def final_set(self) -> Set[Tuple[int, int]]:
        """Recorded bounds in the production solver's key format."""
        out: Set[Tuple[int, int]] = set()
        for b in self.xi:
            if isinstance(b.lhs, TVar) and isinstance(b.rhs, TVar):
                out.add((b.lhs.id, b.rhs.id))
            elif isinstance(b.rhs, TVar):
                out.add((id(b.lhs), b.rhs.id))
            else:
                out.add((b.lhs.id, id(b.rhs)))
        return out

    def region_kinds(self) -> List[str]:
        """Kind of every context entry, in order."""
        kinds = []
        for b in self.xi:
            if isinstance(b.lhs, TVar) and isinstance(b.rhs, TVar):
                kinds.append("vv")
            elif isinstance(b.rhs, TVar):
                kinds.append("lo")
            else:
                kinds.append("up")
        return kinds


def literal_solve(constraints) -> LiteralEngine:
    return LiteralEngine().solve(constraints)
