"""Pretty printer for terms and programs.

Output always re-parses to an alpha-equivalent tree: infix operators,
list cells, unit, integer literals, and if/then/else are re-sugared,
equations start at column zero, and every continuation line is
indented.
"""

from __future__ import annotations

from typing import List

from .syntax import (
    App,
    Arm,
    Case,
    Ctor,
    Def,
    Lam,
    LetRec,
    Program,
    SYMBOL_OF_PRIM,
    Term,
    Var,
    int_of_name,
    is_int_name,
    is_prim_name,
)

_PREC_EXPR = 0
_PREC_CMP = 1
_PREC_CONS = 2
_PREC_ADD = 3
_PREC_MUL = 4
_PREC_APP = 5
_PREC_ATOM = 6

_OP_LEVELS = {
    "#lt": (_PREC_CMP, _PREC_CONS, _PREC_CONS),
    "#le": (_PREC_CMP, _PREC_CONS, _PREC_CONS),
    "#gt": (_PREC_CMP, _PREC_CONS, _PREC_CONS),
    "#ge": (_PREC_CMP, _PREC_CONS, _PREC_CONS),
    "#eq": (_PREC_CMP, _PREC_CONS, _PREC_CONS),
    "#add": (_PREC_ADD, _PREC_ADD, _PREC_MUL),
    "#sub": (_PREC_ADD, _PREC_ADD, _PREC_MUL),
    "#mul": (_PREC_MUL, _PREC_MUL, _PREC_APP),
}


def _wrap(text: str, needed: int, level: int) -> str:
    return f"({text})" if level < needed else text


def _is_if(term: Term) -> bool:
    return (
        isinstance(term, Case)
        and len(term.arms) == 2
        and term.arms[0].tag == "True"
        and term.arms[1].tag == "False"
        and not term.arms[0].binders
        and not term.arms[1].binders
    )


def _var_atom(name: str) -> str:
    if is_int_name(name):
        value = int_of_name(name)
        return str(value) if value >= 0 else f"(0 - {-value})"
    if is_prim_name(name):
        return f"({SYMBOL_OF_PRIM[name]})"
    return name


def _render(term: Term, prec: int, indent: int) -> str:
    pad = " " * indent
    if isinstance(term, Var):
        return _var_atom(term.name)
    if isinstance(term, Lam):
        params = [term.param]
        body = term.body
        while isinstance(body, Lam):
            params.append(body.param)
            body = body.body
        text = f"fun {' '.join(params)} -> {_render(body, _PREC_EXPR, indent + 2)}"
        return _wrap(text, prec, _PREC_EXPR)
    if isinstance(term, LetRec):
        params = []
        bound = term.bound
        while isinstance(bound, Lam):
            params.append(bound.param)
            bound = bound.body
        head = " ".join([term.name] + params)
        bound_text = _render(bound, _PREC_EXPR, indent + 2)
        body_text = _render(term.body, _PREC_EXPR, indent)
        text = f"let {head} = {bound_text} in\n{pad}{body_text}"
        return _wrap(text, prec, _PREC_EXPR)
    if isinstance(term, App):
        fn, args = term, []
        while isinstance(fn, App):
            args.append(fn.arg)
            fn = fn.fn
        args.reverse()
        if isinstance(fn, Var) and fn.name in _OP_LEVELS and len(args) == 2:
            level, lp, rp = _OP_LEVELS[fn.name]
            left = _render(args[0], lp, indent)
            right = _render(args[1], rp, indent)
            return _wrap(f"{left} {SYMBOL_OF_PRIM[fn.name]} {right}", prec, level)
        parts = [_render(fn, _PREC_APP, indent)]
        parts += [_render(a, _PREC_ATOM, indent) for a in args]
        return _wrap(" ".join(parts), prec, _PREC_APP)
    if isinstance(term, Ctor):
        if term.tag == "Nil" and not term.args:
            return "[]"
        if term.tag == "Unit" and not term.args:
            return "()"
        if term.tag == "Cons" and len(term.args) == 2:
            head = _render(term.args[0], _PREC_ADD, indent)
            tail = _render(term.args[1], _PREC_CONS, indent)
            return _wrap(f"{head} :: {tail}", prec, _PREC_CONS)
        if not term.args:
            return term.tag
        parts = [term.tag] + [_render(a, _PREC_ATOM, indent) for a in term.args]
        return _wrap(" ".join(parts), prec, _PREC_APP)
    if isinstance(term, Case):
        if _is_if(term):
            cond = _render(term.scrutinee, _PREC_CMP, indent + 2)
            then = _render(term.arms[0].body, _PREC_EXPR, indent + 2)
            other = _render(term.arms[1].body, _PREC_EXPR, indent + 2)
            return _wrap(f"if {cond} then {then} else {other}", prec, _PREC_EXPR)
        scrut = _render(term.scrutinee, _PREC_CMP, indent + 2)
        lines = [f"case {scrut} of {{"]
        rendered = [_render_arm(arm, indent + 2) for arm in term.arms]
        for i, text in enumerate(rendered):
            sep = ";" if i + 1 < len(rendered) else ""
            lines.append(f"{pad}  {text}{sep}")
        lines.append(f"{pad}}}")
        return _wrap("\n".join(lines), prec, _PREC_EXPR)
    raise TypeError(f"unknown term node {term!r}")


def _render_arm(arm: Arm, indent: int) -> str:
    if arm.tag == "Nil" and not arm.binders:
        pat = "[]"
    elif arm.tag == "Unit" and not arm.binders:
        pat = "()"
    elif arm.tag == "Cons" and len(arm.binders) == 2:
        pat = f"{arm.binders[0]} :: {arm.binders[1]}"
    else:
        pat = " ".join([arm.tag] + arm.binders)
    return f"{pat} -> {_render(arm.body, _PREC_EXPR, indent + 2)}"


def render_term(term: Term) -> str:
    return _render(term, _PREC_EXPR, 2)


def render_def(name: str, body: Term) -> str:
    params: List[str] = []
    while isinstance(body, Lam):
        params.append(body.param)
        body = body.body
    head = " ".join([name] + params)
    text = _render(body, _PREC_EXPR, 2)
    if "\n" in text or len(head) + len(text) > 76:
        return f"{head} =\n  {text}"
    return f"{head} = {text}"


def render_program(prog: Program) -> str:
    chunks = [render_def(d.name, d.body) for d in prog.defs]
    chunks.append(render_def("main", prog.main))
    return "\n\n".join(chunks) + "\n"
