"""Per-use duplication of top-level definitions, and its undo.

Rewriting a definition specializes it to one consumer, so before any
rewriting happens every definition gets a private copy per use site:
the first use keeps the original name and each further use references
a fresh numbered copy (map, map2, map3, ...).  Afterwards every
definition is referenced at most once outside its own body.

Copies that come out of the optimizer identical are folded back
together by merge_equivalent_copies, so programs only grow where the
rewrites actually diverged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Set, Tuple

from .syntax import (
    App,
    Case,
    Ctor,
    Def,
    Lam,
    LetRec,
    Program,
    Term,
    Var,
    alpha_eq,
    clone_program,
    clone_term,
    count_occurrences,
    iter_subterms,
    rename_var,
    subst,
)


@dataclass
class DupReport:
    """What got split: original name -> copy names, copy name -> use site."""

    copies: Dict[str, List[str]] = field(default_factory=dict)
    site_of: Dict[str, int] = field(default_factory=dict)

    def empty(self) -> bool:
        return not self.copies


def _all_names(prog: Program) -> Set[str]:
    names = {d.name for d in prog.defs}
    terms = [d.body for d in prog.defs] + [prog.main]
    for term in terms:
        for t in iter_subterms(term):
            if isinstance(t, Var):
                names.add(t.name)
            elif isinstance(t, Lam):
                names.add(t.param)
            elif isinstance(t, LetRec):
                names.add(t.name)
            elif isinstance(t, Case):
                for arm in t.arms:
                    names.update(arm.binders)
    return names


def _copy_names(base: str, count: int, taken: Set[str]) -> List[str]:
    """base itself, then base2, base3, ... skipping names already taken."""
    names = [base]
    suffix = 2
    while len(names) < count:
        candidate = f"{base}{suffix}"
        if candidate not in taken:
            names.append(candidate)
            taken.add(candidate)
        suffix += 1
    return names


def _rename_sites(
    term: Term,
    name: str,
    supply: Iterator[str],
    bound: Set[str],
    sites: Optional[Dict[str, int]] = None,
) -> None:
    """Rename each free occurrence of name to the next name in supply.

    Occurrences are visited in syntactic order; the tree is mutated in
    place (callers own a fresh clone).
    """
    if isinstance(term, Var):
        if term.name == name and name not in bound:
            term.name = next(supply)
            if sites is not None:
                sites[term.name] = term.nid
    elif isinstance(term, Lam):
        _rename_sites(term.body, name, supply, bound | {term.param}, sites)
    elif isinstance(term, App):
        _rename_sites(term.fn, name, supply, bound, sites)
        _rename_sites(term.arg, name, supply, bound, sites)
    elif isinstance(term, Ctor):
        for a in term.args:
            _rename_sites(a, name, supply, bound, sites)
    elif isinstance(term, Case):
        _rename_sites(term.scrutinee, name, supply, bound, sites)
        for arm in term.arms:
            _rename_sites(arm.body, name, supply, bound | set(arm.binders), sites)
    elif isinstance(term, LetRec):
        inner = bound | {term.name}
        _rename_sites(term.bound, name, supply, inner, sites)
        _rename_sites(term.body, name, supply, inner, sites)


def duplicate_defs(
    prog: Program, max_copies: Optional[int] = None
) -> Tuple[Program, DupReport]:
    """Give every use site of every definition its own copy.

    Definitions are processed from the last to the first so that the
    use sites inside copies made along the way are themselves split.
    A definition needing more than max_copies copies is left shared.
    """
    prog = clone_program(prog)
    report = DupReport()
    defs = list(prog.defs)
    taken = _all_names(prog)
    i = len(defs) - 1
    while i >= 0:
        d = defs[i]
        later = [x.body for x in defs[i + 1 :]] + [prog.main]
        uses = sum(count_occurrences(t, d.name) for t in later)
        if uses > 1 and (max_copies is None or uses <= max_copies):
            names = _copy_names(d.name, uses, taken)
            supply = iter(names)
            for t in later:
                _rename_sites(t, d.name, supply, set(), report.site_of)
            copies = []
            for name in names:
                body = clone_term(d.body)
                if name != d.name:
                    body = rename_var(body, d.name, name)
                copies.append(Def(name, body))
            defs[i : i + 1] = copies
            report.copies[d.name] = names
        i -= 1
    return Program(defs, prog.main), report


def _eq_mod_self(d1: Def, d2: Def) -> bool:
    placeholder = Var("$self")
    return alpha_eq(
        subst(d1.body, d1.name, placeholder),
        subst(d2.body, d2.name, placeholder),
    )


def merge_equivalent_copies(prog: Program) -> Program:
    """Fold together definitions that ended up interchangeable."""
    defs = list(prog.defs)
    main = prog.main
    while True:
        renames: Dict[str, str] = {}
        kept: List[Def] = []
        for d in defs:
            match = next((k for k in kept if _eq_mod_self(d, k)), None)
            if match is None:
                kept.append(d)
            else:
                renames[d.name] = match.name
        if not renames:
            break
        for old, new in renames.items():
            kept = [Def(k.name, rename_var(k.body, old, new)) for k in kept]
            main = rename_var(main, old, new)
        defs = kept
    return Program(defs, main)


def used_def_names(prog: Program) -> Set[str]:
    """Names of defs reachable from main through def references."""
    by_name = {d.name: d for d in prog.defs}
    seen: Set[str] = set()
    work = [prog.main]
    while work:
        term = work.pop()
        for t in iter_subterms(term):
            if isinstance(t, Var) and t.name in by_name and t.name not in seen:
                seen.add(t.name)
                work.append(by_name[t.name].body)
    return seen


def drop_unused_defs(prog: Program) -> Program:
    """Remove defs not reachable from main."""
    used = used_def_names(prog)
    return Program([d for d in prog.defs if d.name in used], prog.main)
