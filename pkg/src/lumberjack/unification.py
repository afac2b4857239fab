"""Turn solved bounds into a strategy per type variable.

Each variable's verdict comes from reading off its stored bounds, the
variable links first and then the concrete upper bounds: no bounds at
all means the data is never consumed (keep it, Top); a single case
shape means exactly one consumer (fuse the producer into its arms); two
case shapes mean competing consumers (rebuild the cells, identity); a
function shape keeps calls as calls; anything contradictory degrades to
Top for that variable only.  Strategies form a graph, not a tree:
recursive flows show up as back edges, built here with placeholder
references that are patched once every variable has resolved, and a
cycle that never passes through concrete structure collapses to Bot.

Nodes are cached per underlying shape object, so the producer and the
consumer of one fusion read the very same node; elaboration relies on
that identity to keep the two sides consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Union

from .inference import CaseBound, CtorBound, FunBound, TVar
from .solver import SolverState
from .syntax import Case, Term, alpha_eq


class Strategy:
    """Base class for strategy nodes."""


class STop(Strategy):
    def __repr__(self) -> str:
        return "Top"


class SBot(Strategy):
    def __repr__(self) -> str:
        return "Bot"


TOP = STop()
BOT = SBot()


@dataclass(eq=False)
class SRecRef(Strategy):
    """Placeholder back edge to a variable still being resolved."""

    var: TVar


@dataclass(eq=False)
class SFun(Strategy):
    param: Strategy = TOP
    result: Strategy = TOP


@dataclass(eq=False)
class SCtorId(Strategy):
    """Keep the constructor cells; fields have their own strategies."""

    fields: Dict[str, List[Strategy]] = field(default_factory=dict)


@dataclass(eq=False)
class FuseArm:
    binders: List[str]
    fields: List[Strategy]
    body: Term
    rewritten: Optional[Term] = None  # filled by elaboration


@dataclass(eq=False)
class SCtorFuse(Strategy):
    """Replace producer cells by the consumer's matching arm bodies."""

    case: Case
    arms: Dict[str, FuseArm] = field(default_factory=dict)
    result: Strategy = TOP
    disabled: bool = False


class _Skel:
    """Marker for an identity skeleton made mid-unification."""

    def __init__(self, source: CaseBound):
        self.source = source


_CaseLike = Union[CaseBound, _Skel]


class StrategyTable:
    def __init__(self, state: SolverState):
        self.state = state
        self.of: Dict[int, Strategy] = {}
        self.failed: Set[int] = set()
        self._progress: Set[int] = set()
        self._fun_nodes: Dict[int, SFun] = {}
        self._fuse_nodes: Dict[int, SCtorFuse] = {}
        self._id_nodes: Dict[int, SCtorId] = {}

    # --- resolution ---------------------------------------------------

    def resolve(self, v: TVar) -> Strategy:
        hit = self.of.get(v.id)
        if hit is not None:
            return hit
        if v.id in self._progress:
            return SRecRef(v)
        self._progress.add(v.id)
        bounds: List[Union[TVar, FunBound, CaseBound]] = []
        # Function shapes sit below the variables holding them; they are
        # part of the picture (escape walks descend through them), while
        # constructor shapes below a variable say nothing about how its
        # values get consumed and are left out.
        bounds.extend(
            lo for lo in self.state.lowers.get(v, ()) if isinstance(lo, FunBound)
        )
        bounds.extend(self.state.succs.get(v, ()))
        bounds.extend(self.state.uppers.get(v, ()))
        out = self._unif(bounds)
        if out is None:
            self.failed.add(v.id)
            out = TOP
        self._progress.discard(v.id)
        self.of[v.id] = out
        return out

    def _unif(self, items: List) -> Optional[Strategy]:
        if not items:
            return TOP
        if len(items) == 1:
            x = items[0]
            if isinstance(x, TVar):
                return self.resolve(x)
            return self._node(x)
        a, b = items[0], items[1]
        if isinstance(a, TVar):
            return self._unif(items[1:])
        if isinstance(b, TVar):
            return self._unif([a] + items[2:])
        if isinstance(a, FunBound) and isinstance(b, FunBound):
            return self._unif([a] + items[2:])
        if isinstance(a, (CaseBound, _Skel)) and isinstance(b, (CaseBound, _Skel)):
            if set(_tags(a)) != set(_tags(b)):
                return None
            return self._unif([_skel(a)] + items[2:])
        return None

    def _node(self, shape: Union[FunBound, CaseBound, _Skel]) -> Strategy:
        if isinstance(shape, FunBound):
            node = self._fun_nodes.get(id(shape))
            if node is None:
                node = SFun()
                self._fun_nodes[id(shape)] = node
                node.param = self.resolve(shape.param)
                node.result = self.resolve(shape.result)
            return node
        if isinstance(shape, CaseBound):
            fuse = self._fuse_nodes.get(id(shape))
            if fuse is None:
                fuse = SCtorFuse(case=shape.site)
                self._fuse_nodes[id(shape)] = fuse
                for arm in shape.arms:
                    fuse.arms[arm.tag] = FuseArm(
                        binders=list(arm.binders),
                        fields=[self.resolve(fv) for fv in arm.field_vars],
                        body=arm.body,
                    )
                fuse.result = self.resolve(shape.result)
            return fuse
        source = shape.source
        ident = self._id_nodes.get(id(source))
        if ident is None:
            ident = SCtorId()
            self._id_nodes[id(source)] = ident
            for arm in source.arms:
                ident.fields[arm.tag] = [self.resolve(fv) for fv in arm.field_vars]
        return ident

    # --- back-edge patching --------------------------------------------

    def _deref(self, s: Strategy) -> Strategy:
        seen: Set[int] = set()
        while isinstance(s, SRecRef):
            if s.var.id in seen:
                return BOT
            seen.add(s.var.id)
            nxt = self.of.get(s.var.id)
            if nxt is None:
                return TOP
            s = nxt
        return s

    def finalize(self) -> None:
        """Replace every placeholder reference with its resolved target."""
        for vid, s in list(self.of.items()):
            self.of[vid] = self._deref(s)
        nodes: List[Strategy] = list(self._fun_nodes.values())
        nodes += list(self._fuse_nodes.values())
        nodes += list(self._id_nodes.values())
        for node in nodes:
            if isinstance(node, SFun):
                node.param = self._deref(node.param)
                node.result = self._deref(node.result)
            elif isinstance(node, SCtorFuse):
                for arm in node.arms.values():
                    arm.fields = [self._deref(f) for f in arm.fields]
                node.result = self._deref(node.result)
            elif isinstance(node, SCtorId):
                for tag in node.fields:
                    node.fields[tag] = [self._deref(f) for f in node.fields[tag]]


def _skel(x: _CaseLike) -> _Skel:
    return x if isinstance(x, _Skel) else _Skel(x)


def _tags(x: _CaseLike) -> List[str]:
    source = x.source if isinstance(x, _Skel) else x
    return source.tags()


def unify_all(state: SolverState, vars_: Iterable[TVar]) -> StrategyTable:
    table = StrategyTable(state)
    for v in vars_:
        table.resolve(v)
    for v in list(state.vars):
        table.resolve(v)
    table.finalize()
    return table


def bisimilar(s1: Strategy, s2: Strategy) -> bool:
    """Graph equality of strategies up to unrolling."""
    assumed: Set[tuple] = set()

    def go(a: Strategy, b: Strategy) -> bool:
        if a is b:
            return True
        key = (id(a), id(b))
        if key in assumed:
            return True
        assumed.add(key)
        if isinstance(a, STop) and isinstance(b, STop):
            return True
        if isinstance(a, SBot) and isinstance(b, SBot):
            return True
        if isinstance(a, SFun) and isinstance(b, SFun):
            return go(a.param, b.param) and go(a.result, b.result)
        if isinstance(a, SCtorId) and isinstance(b, SCtorId):
            if set(a.fields) != set(b.fields):
                return False
            return all(
                len(a.fields[t]) == len(b.fields[t])
                and all(go(x, y) for x, y in zip(a.fields[t], b.fields[t]))
                for t in a.fields
            )
        if isinstance(a, SCtorFuse) and isinstance(b, SCtorFuse):
            if set(a.arms) != set(b.arms) or a.disabled != b.disabled:
                return False
            for t in a.arms:
                arm1, arm2 = a.arms[t], b.arms[t]
                if len(arm1.binders) != len(arm2.binders):
                    return False
                if not all(go(x, y) for x, y in zip(arm1.fields, arm2.fields)):
                    return False
                if not alpha_eq(arm1.body, arm2.body):
                    return False
            return go(a.result, b.result)
        return False

    return go(s1, s2)
