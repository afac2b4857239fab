"""Core term language: AST nodes, traversals, and name utilities.

The language is a small strict functional calculus with variables,
single-argument lambdas, applications, saturated constructor
applications, case analysis, and recursive let bindings.  Primitive
operations and integer literals are encoded as reserved variable names
beginning with ``#`` so that every pass can treat them uniformly as
free variables that never need binding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

_node_counter = itertools.count(1)


def next_nid() -> int:
    """Return a globally fresh node id."""
    return next(_node_counter)


class Term:
    """Base class for expression nodes.  Nodes compare by identity."""

    nid: int


@dataclass(eq=False)
class Var(Term):
    name: str
    nid: int = field(default_factory=next_nid)


@dataclass(eq=False)
class Lam(Term):
    param: str
    body: Term
    nid: int = field(default_factory=next_nid)


@dataclass(eq=False)
class App(Term):
    fn: Term
    arg: Term
    nid: int = field(default_factory=next_nid)


@dataclass(eq=False)
class Ctor(Term):
    tag: str
    args: List[Term]
    nid: int = field(default_factory=next_nid)


@dataclass(eq=False)
class Arm:
    """One branch of a case: ``tag(binders) -> body``."""

    tag: str
    binders: List[str]
    body: Term


@dataclass(eq=False)
class Case(Term):
    scrutinee: Term
    arms: List[Arm]
    nid: int = field(default_factory=next_nid)


@dataclass(eq=False)
class LetRec(Term):
    """``letrec name = bound in body`` where bound may refer to name."""

    name: str
    bound: Term
    body: Term
    nid: int = field(default_factory=next_nid)


@dataclass(eq=False)
class Def:
    """A top-level definition.  Later defs and main may refer to it."""

    name: str
    body: Term


@dataclass(eq=False)
class Program:
    """A sequence of top-level defs followed by a main expression.

    Scoping is sequential: each def sees itself (recursively) and all
    earlier defs, never later ones.
    """

    defs: List[Def]
    main: Term


PRIM_ARITY: Dict[str, int] = {
    "#add": 2,
    "#sub": 2,
    "#mul": 2,
    "#lt": 2,
    "#le": 2,
    "#gt": 2,
    "#ge": 2,
    "#eq": 2,
}

PRIM_SYMBOLS: Dict[str, str] = {
    "+": "#add",
    "-": "#sub",
    "*": "#mul",
    "<": "#lt",
    "<=": "#le",
    ">": "#gt",
    ">=": "#ge",
    "==": "#eq",
}

SYMBOL_OF_PRIM: Dict[str, str] = {v: k for k, v in PRIM_SYMBOLS.items()}


def is_prim_name(name: str) -> bool:
    """True for operation names like ``#add`` (not integer literals)."""
    return name in PRIM_ARITY


def is_int_name(name: str) -> bool:
    """True for encoded integer literals like ``#42`` or ``#-3``."""
    if not name.startswith("#"):
        return False
    digits = name[1:]
    if digits.startswith("-"):
        digits = digits[1:]
    return digits.isdigit() and digits != ""


def int_name(value: int) -> str:
    return "#" + str(value)


def int_of_name(name: str) -> int:
    return int(name[1:])


def is_reserved_name(name: str) -> bool:
    """True for any ``#``-name: primitives and integer literals."""
    return name.startswith("#")


def mk_int(value: int) -> Var:
    return Var(int_name(value))


def free_vars(term: Term) -> Set[str]:
    """Free variables of a term, excluding nothing (``#``-names included)."""
    out: Set[str] = set()
    _free_vars(term, set(), out)
    return out


def _free_vars(term: Term, bound: Set[str], out: Set[str]) -> None:
    if isinstance(term, Var):
        if term.name not in bound:
            out.add(term.name)
    elif isinstance(term, Lam):
        _free_vars(term.body, bound | {term.param}, out)
    elif isinstance(term, App):
        _free_vars(term.fn, bound, out)
        _free_vars(term.arg, bound, out)
    elif isinstance(term, Ctor):
        for a in term.args:
            _free_vars(a, bound, out)
    elif isinstance(term, Case):
        _free_vars(term.scrutinee, bound, out)
        for arm in term.arms:
            _free_vars(arm.body, bound | set(arm.binders), out)
    elif isinstance(term, LetRec):
        inner = bound | {term.name}
        _free_vars(term.bound, inner, out)
        _free_vars(term.body, inner, out)
    else:
        raise TypeError(f"unknown term node {term!r}")


def program_free_vars(prog: Program) -> Set[str]:
    """Free variables of a whole program under sequential def scoping."""
    seen: Set[str] = set()
    out: Set[str] = set()
    for d in prog.defs:
        _free_vars(d.body, seen | {d.name}, out)
        seen.add(d.name)
    _free_vars(prog.main, seen, out)
    return out


def clone_term(term: Term, idmap: Optional[Dict[int, int]] = None) -> Term:
    """Deep-copy a term with fresh node ids.

    When idmap is given it records old nid -> new nid for every copied
    node, so side tables keyed by node id can follow the copy.
    """
    if isinstance(term, Var):
        new: Term = Var(term.name)
    elif isinstance(term, Lam):
        new = Lam(term.param, clone_term(term.body, idmap))
    elif isinstance(term, App):
        new = App(clone_term(term.fn, idmap), clone_term(term.arg, idmap))
    elif isinstance(term, Ctor):
        new = Ctor(term.tag, [clone_term(a, idmap) for a in term.args])
    elif isinstance(term, Case):
        new = Case(
            clone_term(term.scrutinee, idmap),
            [Arm(a.tag, list(a.binders), clone_term(a.body, idmap)) for a in term.arms],
        )
    elif isinstance(term, LetRec):
        new = LetRec(term.name, clone_term(term.bound, idmap), clone_term(term.body, idmap))
    else:
        raise TypeError(f"unknown term node {term!r}")
    if idmap is not None:
        idmap[term.nid] = new.nid
    return new


def fresh_name(base: str, avoid: Set[str]) -> str:
    """Pick a name not in avoid, preferring base itself then primed forms."""
    if base not in avoid:
        return base
    n = 1
    while f"{base}'{n}" in avoid:
        n += 1
    return f"{base}'{n}"


def subst(term: Term, name: str, replacement: Term) -> Term:
    """Capture-avoiding substitution of replacement for free name.

    Shares replacement when it occurs once and clones it (fresh node
    ids) on every further occurrence so node ids stay globally unique.
    """
    repl_fv = free_vars(replacement)
    used = [False]

    def take() -> Term:
        if used[0]:
            return clone_term(replacement)
        used[0] = True
        return replacement

    def go(t: Term) -> Term:
        if isinstance(t, Var):
            return take() if t.name == name else t
        if isinstance(t, Lam):
            if t.param == name:
                return t
            if t.param in repl_fv and name in free_vars(t.body):
                fresh = fresh_name(t.param, repl_fv | free_vars(t.body))
                body = rename_var(t.body, t.param, fresh)
                return Lam(fresh, go(body))
            return Lam(t.param, go(t.body))
        if isinstance(t, App):
            return App(go(t.fn), go(t.arg))
        if isinstance(t, Ctor):
            return Ctor(t.tag, [go(a) for a in t.args])
        if isinstance(t, Case):
            arms = []
            for arm in t.arms:
                if name in arm.binders:
                    arms.append(arm)
                    continue
                binders = list(arm.binders)
                body = arm.body
                for i, b in enumerate(binders):
                    if b in repl_fv and name in free_vars(body):
                        fresh = fresh_name(b, repl_fv | free_vars(body) | set(binders))
                        body = rename_var(body, b, fresh)
                        binders[i] = fresh
                arms.append(Arm(arm.tag, binders, go(body)))
            return Case(go(t.scrutinee), arms)
        if isinstance(t, LetRec):
            if t.name == name:
                return t
            if t.name in repl_fv and (
                name in free_vars(t.bound) or name in free_vars(t.body)
            ):
                fresh = fresh_name(t.name, repl_fv | free_vars(t.bound) | free_vars(t.body))
                return LetRec(
                    fresh,
                    go(rename_var(t.bound, t.name, fresh)),
                    go(rename_var(t.body, t.name, fresh)),
                )
            return LetRec(t.name, go(t.bound), go(t.body))
        raise TypeError(f"unknown term node {t!r}")

    return go(term)


def rename_var(term: Term, old: str, new: str) -> Term:
    """Rename a free variable.  new must not be captured or bound inside."""
    return subst(term, old, Var(new))


def alpha_eq(t1: Term, t2: Term) -> bool:
    """Structural equality modulo bound-variable names and node ids."""
    return _alpha_eq(t1, t2, {}, {})


def _alpha_eq(t1: Term, t2: Term, env1: Dict[str, int], env2: Dict[str, int]) -> bool:
    if isinstance(t1, Var) and isinstance(t2, Var):
        b1 = env1.get(t1.name)
        b2 = env2.get(t2.name)
        if b1 is None and b2 is None:
            return t1.name == t2.name
        return b1 == b2
    if isinstance(t1, Lam) and isinstance(t2, Lam):
        lvl = len(env1)
        e1 = dict(env1)
        e1[t1.param] = lvl
        e2 = dict(env2)
        e2[t2.param] = lvl
        return _alpha_eq(t1.body, t2.body, e1, e2)
    if isinstance(t1, App) and isinstance(t2, App):
        return _alpha_eq(t1.fn, t2.fn, env1, env2) and _alpha_eq(t1.arg, t2.arg, env1, env2)
    if isinstance(t1, Ctor) and isinstance(t2, Ctor):
        if t1.tag != t2.tag or len(t1.args) != len(t2.args):
            return False
        return all(_alpha_eq(a, b, env1, env2) for a, b in zip(t1.args, t2.args))
    if isinstance(t1, Case) and isinstance(t2, Case):
        if len(t1.arms) != len(t2.arms):
            return False
        if not _alpha_eq(t1.scrutinee, t2.scrutinee, env1, env2):
            return False
        for a1, a2 in zip(t1.arms, t2.arms):
            if a1.tag != a2.tag or len(a1.binders) != len(a2.binders):
                return False
            lvl = len(env1)
            e1 = dict(env1)
            e2 = dict(env2)
            for i, (b1, b2) in enumerate(zip(a1.binders, a2.binders)):
                e1[b1] = lvl + i
                e2[b2] = lvl + i
            if not _alpha_eq(a1.body, a2.body, e1, e2):
                return False
        return True
    if isinstance(t1, LetRec) and isinstance(t2, LetRec):
        lvl = len(env1)
        e1 = dict(env1)
        e1[t1.name] = lvl
        e2 = dict(env2)
        e2[t2.name] = lvl
        return _alpha_eq(t1.bound, t2.bound, e1, e2) and _alpha_eq(t1.body, t2.body, e1, e2)
    return False


def program_alpha_eq(p1: Program, p2: Program) -> bool:
    """Programs are alpha-equal if defs match pairwise by name and body."""
    if len(p1.defs) != len(p2.defs):
        return False
    for d1, d2 in zip(p1.defs, p2.defs):
        if d1.name != d2.name or not alpha_eq(d1.body, d2.body):
            return False
    return alpha_eq(p1.main, p2.main)


def program_as_term(prog: Program) -> Term:
    """Fold the def spine into nested letrecs around main (shares bodies)."""
    term = prog.main
    for d in reversed(prog.defs):
        term = LetRec(d.name, d.body, term)
    return term


def clone_program(prog: Program, idmap: Optional[Dict[int, int]] = None) -> Program:
    return Program(
        [Def(d.name, clone_term(d.body, idmap)) for d in prog.defs],
        clone_term(prog.main, idmap),
    )


def ctor_arities(prog: Program) -> Dict[str, int]:
    """Collect the arity of every constructor tag used in the program.

    Raises ValueError if some tag is used at two different arities,
    either in constructor applications or in case patterns.
    """
    arity: Dict[str, int] = {}

    def note(tag: str, n: int) -> None:
        prev = arity.setdefault(tag, n)
        if prev != n:
            raise ValueError(f"constructor {tag} used with arity {prev} and {n}")

    def walk(t: Term) -> None:
        if isinstance(t, Var):
            return
        if isinstance(t, Lam):
            walk(t.body)
        elif isinstance(t, App):
            walk(t.fn)
            walk(t.arg)
        elif isinstance(t, Ctor):
            note(t.tag, len(t.args))
            for a in t.args:
                walk(a)
        elif isinstance(t, Case):
            walk(t.scrutinee)
            for arm in t.arms:
                note(arm.tag, len(arm.binders))
                walk(arm.body)
        elif isinstance(t, LetRec):
            walk(t.bound)
            walk(t.body)

    for d in prog.defs:
        walk(d.body)
    walk(prog.main)
    return arity


def iter_subterms(term: Term) -> Iterable[Term]:
    """Yield term and all its descendants, preorder."""
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, Lam):
            stack.append(t.body)
        elif isinstance(t, App):
            stack.append(t.arg)
            stack.append(t.fn)
        elif isinstance(t, Ctor):
            stack.extend(reversed(t.args))
        elif isinstance(t, Case):
            for arm in reversed(t.arms):
                stack.append(arm.body)
            stack.append(t.scrutinee)
        elif isinstance(t, LetRec):
            stack.append(t.body)
            stack.append(t.bound)


def term_size(term: Term) -> int:
    return sum(1 for _ in iter_subterms(term))


def program_size(prog: Program) -> int:
    return sum(term_size(d.body) for d in prog.defs) + term_size(prog.main)


def count_occurrences(term: Term, name: str) -> int:
    """Count free occurrences of name in term."""
    work: List[Tuple[Term, Set[str]]] = [(term, set())]
    total = 0
    while work:
        t, bound = work.pop()
        if isinstance(t, Var):
            if t.name == name and name not in bound:
                total += 1
        elif isinstance(t, Lam):
            work.append((t.body, bound | {t.param}))
        elif isinstance(t, App):
            work.append((t.fn, bound))
            work.append((t.arg, bound))
        elif isinstance(t, Ctor):
            for a in t.args:
                work.append((a, bound))
        elif isinstance(t, Case):
            work.append((t.scrutinee, bound))
            for arm in t.arms:
                work.append((arm.body, bound | set(arm.binders)))
        elif isinstance(t, LetRec):
            inner = bound | {t.name}
            work.append((t.bound, inner))
            work.append((t.body, inner))
    return total
