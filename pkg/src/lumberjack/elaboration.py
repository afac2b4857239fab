"""Rewrite the program according to the resolved strategies.

Producers fuse: a constructor site whose strategy says it has exactly
one case consuming it is replaced by that case's matching arm body,
with the field values let-bound to the arm's pattern binders.  The
consuming case itself then collapses to its rewritten scrutinee, since
the values reaching it are already the arm results.  Both sides read
the same strategy node, so they can never disagree.

Before any rewriting, strategies reachable from the outside world are
disabled: data returned to or received from the caller, and anything
passing through primitive operations, must keep its concrete shape.
Rewriting can also discover late reasons to back off (an arm body would
escape the scope of a name it needs, or an import chain loops); those
disable the offending node and the whole rewrite restarts, which keeps
producers and consumers in agreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .inference import InferResult, TVar
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
    clone_term,
    free_vars,
    fresh_name,
    is_reserved_name,
    iter_subterms,
    rename_var,
)
from .unification import (
    SBot,
    SCtorFuse,
    SCtorId,
    SFun,
    STop,
    Strategy,
    StrategyTable,
)


@dataclass
class RewriteReport:
    """What happened at each fusion node, for consistency checking."""

    fused_sites: Dict[int, int] = field(default_factory=dict)  # node id -> count
    collapsed_cases: Dict[int, int] = field(default_factory=dict)
    expected_sites: Dict[int, int] = field(default_factory=dict)
    enabled_nodes: int = 0
    disabled_nodes: int = 0
    restarts: int = 0
    skip_reasons: List[str] = field(default_factory=list)

    def validate(self) -> None:
        """Every enabled node's sites and case must have moved together."""
        for node_id, expected in self.expected_sites.items():
            rewritten = self.fused_sites.get(node_id, 0)
            collapsed = self.collapsed_cases.get(node_id, 0)
            if rewritten != expected:
                raise AssertionError(
                    f"node {node_id}: {rewritten} of {expected} producer sites rewritten"
                )
            if collapsed != 1:
                raise AssertionError(
                    f"node {node_id}: case collapsed {collapsed} times"
                )


class _Downgrade(Exception):
    def __init__(self, node: SCtorFuse, reason: str):
        super().__init__(reason)
        self.node = node
        self.reason = reason


def _walk_strategies(table: StrategyTable, start: Strategy, mode: str) -> None:
    """Disable fusion on anything facing the outside world.

    mode "leak": our data flows out to an unknown consumer, so producer
    cells must stay real cells.  mode "external": data comes in from an
    unknown producer, so cases on it must stay cases.  Function types
    swap the two directions across their parameters.
    """
    seen: Set[Tuple[int, str]] = set()
    work: List[Tuple[Strategy, str]] = [(start, mode)]
    while work:
        s, m = work.pop()
        key = (id(s), m)
        if key in seen:
            continue
        seen.add(key)
        if isinstance(s, (STop, SBot)):
            continue
        if isinstance(s, SFun):
            flipped = "external" if m == "leak" else "leak"
            work.append((s.param, flipped))
            work.append((s.result, m))
        elif isinstance(s, SCtorId):
            for fields in s.fields.values():
                for f in fields:
                    work.append((f, m))
        elif isinstance(s, SCtorFuse):
            s.disabled = True
            for arm in s.arms.values():
                for f in arm.fields:
                    work.append((f, m))


def apply_escape_analysis(infer: InferResult, table: StrategyTable) -> None:
    """Disable fusion nodes whose data crosses the program boundary."""
    _walk_strategies(table, table.of[infer.root.id], "leak")
    for v in infer.prim_result_vars:
        _walk_strategies(table, table.of[v.id], "external")
    for v in infer.prim_arg_vars:
        _walk_strategies(table, table.of[v.id], "leak")
    for cb in infer.ctor_bounds:
        site_var = infer.var_of[cb.site.nid]
        if isinstance(table.of[site_var.id], (STop, SBot)):
            for fv in cb.fields:
                _walk_strategies(table, table.of[fv.id], "leak")


class _Rewriter:
    def __init__(self, prog: Program, infer: InferResult, table: StrategyTable):
        self.prog = prog
        self.infer = infer
        self.table = table
        self.report = RewriteReport()
        self.def_names = [d.name for d in prog.defs]
        self.site_def_index = self._index_sites()
        self.node_visibility = self._node_visibility()
        self._arm_stack: List[int] = []
        self._arms_done: Set[int] = set()

    def _index_sites(self) -> Dict[int, int]:
        index: Dict[int, int] = {}
        for i, d in enumerate(self.prog.defs):
            for t in iter_subterms(d.body):
                index[t.nid] = i
        for t in iter_subterms(self.prog.main):
            index[t.nid] = len(self.prog.defs)
        return index

    def _strategy(self, term: Term) -> Strategy:
        v = self.infer.var_of.get(term.nid)
        if v is None:
            return STop()
        return self.table.of.get(v.id, STop())

    def _sites_of(self) -> Dict[int, List[Ctor]]:
        sites: Dict[int, List[Ctor]] = {}
        for cb in self.infer.ctor_bounds:
            s = self._strategy(cb.site)
            if isinstance(s, SCtorFuse) and not s.disabled:
                sites.setdefault(id(s), []).append(cb.site)
        return sites

    def _node_visibility(self) -> Dict[int, Set[str]]:
        """Def names an imported arm body may mention, per fusion node."""
        visibility: Dict[int, Set[str]] = {}
        for node_id, sites in self._sites_of().items():
            lowest = min(self.site_def_index[s.nid] for s in sites)
            visibility[node_id] = set(self.def_names[: lowest + 1])
        return visibility

    # --- arm bodies ----------------------------------------------------

    def ensure_arms(self, node: SCtorFuse) -> None:
        """Transform this node's arm bodies once, depth-first."""
        if id(node) in self._arms_done:
            return
        if id(node) in self._arm_stack:
            raise _Downgrade(node, "import cycle")
        self._arm_stack.append(id(node))
        visible = self.node_visibility.get(id(node), set(self.def_names))
        for arm in node.arms.values():
            rewritten = self.transform(arm.body)
            for term in (arm.body, rewritten):
                for name in free_vars(term) - set(arm.binders):
                    if not is_reserved_name(name) and name not in visible:
                        raise _Downgrade(node, f"arm body needs {name} out of scope")
            arm.rewritten = rewritten
        self._arm_stack.pop()
        self._arms_done.add(id(node))

    # --- terms ----------------------------------------------------------

    def transform(self, t: Term) -> Term:
        if isinstance(t, Var):
            return Var(t.name)
        if isinstance(t, Lam):
            return Lam(t.param, self.transform(t.body))
        if isinstance(t, App):
            return App(self.transform(t.fn), self.transform(t.arg))
        if isinstance(t, LetRec):
            return LetRec(t.name, self.transform(t.bound), self.transform(t.body))
        if isinstance(t, Ctor):
            s = self._strategy(t)
            if isinstance(s, SCtorFuse) and not s.disabled:
                return self._fuse_site(t, s)
            return Ctor(t.tag, [self.transform(a) for a in t.args])
        if isinstance(t, Case):
            s = self._strategy(t.scrutinee)
            if isinstance(s, SCtorFuse) and not s.disabled and s.case is t:
                count = self.report.collapsed_cases.get(id(s), 0)
                self.report.collapsed_cases[id(s)] = count + 1
                return self.transform(t.scrutinee)
            arms = [
                Arm(a.tag, list(a.binders), self.transform(a.body)) for a in t.arms
            ]
            return Case(self.transform(t.scrutinee), arms)
        raise TypeError(f"unknown term node {t!r}")

    def _fuse_site(self, site: Ctor, node: SCtorFuse) -> Term:
        arm = node.arms.get(site.tag)
        if arm is None:
            raise _Downgrade(node, f"no arm for constructor {site.tag}")
        self.ensure_arms(node)
        assert arm.rewritten is not None
        args = [self.transform(a) for a in site.args]
        body = clone_term(arm.rewritten)
        count = self.report.fused_sites.get(id(node), 0)
        self.report.fused_sites[id(node)] = count + 1
        return _bind_fields(arm.binders, args, body)

    def run(self) -> Program:
        for node_id, sites in self._sites_of().items():
            self.report.expected_sites[node_id] = len(sites)
        defs = [Def(d.name, self.transform(d.body)) for d in self.prog.defs]
        main = self.transform(self.prog.main)
        return Program(defs, main)


def _bind_fields(binders: List[str], args: List[Term], body: Term) -> Term:
    """let-bind field values to the arm's pattern binders around body.

    Binders are freshened when they would capture a variable free in
    one of the bound values (each value sits inside the binders bound
    at or before it).
    """
    names = list(binders)
    for i in range(len(names)):
        clash = any(names[i] in free_vars(a) for a in args[i:])
        if clash:
            avoid = set(names) | free_vars(body)
            for a in args:
                avoid |= free_vars(a)
            fresh = fresh_name(names[i] + "'", avoid)
            body = rename_var(body, names[i], fresh)
            names[i] = fresh
    out = body
    for name, arg in reversed(list(zip(names, args))):
        out = LetRec(name, arg, out)
    return out


def elaborate_program(
    prog: Program, infer: InferResult, table: StrategyTable
) -> Tuple[Program, RewriteReport]:
    """Apply all enabled rewrites; retries after disabling bad nodes."""
    restarts = 0
    reasons: List[str] = []
    while True:
        for node in table._fuse_nodes.values():
            for arm in node.arms.values():
                arm.rewritten = None
        rewriter = _Rewriter(prog, infer, table)
        rewriter.report.restarts = restarts
        rewriter.report.skip_reasons = reasons
        try:
            out = rewriter.run()
        except _Downgrade as d:
            d.node.disabled = True
            reasons.append(d.reason)
            restarts += 1
            if restarts > 10_000:
                raise AssertionError("rewrite failed to stabilize") from d
            continue
        nodes = list(table._fuse_nodes.values())
        rewriter.report.enabled_nodes = sum(1 for n in nodes if not n.disabled)
        rewriter.report.disabled_nodes = sum(1 for n in nodes if n.disabled)
        return out, rewriter.report
