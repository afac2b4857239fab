"""Parser for the surface language.

A program is a sequence of equations, the last of which must be named
``main``::

    map f xs = case xs of { [] -> []; y :: ys -> f y :: map f ys }
    main n = map (fun x -> x * x) (enum n)

Equations start at column zero; continuation lines must be indented.
Every ``let`` is recursive.  ``if c then a else b`` is sugar for a case
on True/False, ``[]``/``::``/list literals build Nil and Cons cells,
``()`` is the unit constructor, and operators desugar to applications
of the reserved primitive names from :mod:`lumberjack.syntax`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Set

from .syntax import (
    Arm,
    App,
    Case,
    Ctor,
    Def,
    Lam,
    LetRec,
    PRIM_SYMBOLS,
    Program,
    Term,
    Var,
    ctor_arities,
    int_name,
    is_int_name,
    is_prim_name,
    program_free_vars,
)

KEYWORDS = {"fun", "let", "in", "if", "then", "else", "case", "of"}

_SYMBOLS = [
    "->",
    "::",
    "<=",
    ">=",
    "==",
    "(",
    ")",
    "{",
    "}",
    "[",
    "]",
    ";",
    ",",
    "=",
    "+",
    "-",
    "*",
    "<",
    ">",
]


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass
class Token:
    kind: str  # "ident", "ctor", "int", "sym", "eof"
    text: str
    line: int
    col: int

    @property
    def bol(self) -> bool:
        return self.col == 0


def tokenize(src: str) -> List[Token]:
    toks: List[Token] = []
    line = 0
    col = 0
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            line += 1
            col = 0
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("--", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(Token("int", src[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] in "_'"):
                j += 1
            word = src[i:j]
            kind = "ctor" if word[0].isupper() else "ident"
            toks.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if src.startswith(sym, i):
                toks.append(Token("sym", sym, line, start_col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line + 1, 0))
    return toks


_COMPARE_OPS = {"<", "<=", ">", ">=", "=="}
_ADD_OPS = {"+", "-"}


class _Parser:
    def __init__(self, toks: List[Token]):
        self.toks = toks
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    def expect_sym(self, sym: str) -> None:
        tok = self.peek()
        if tok.kind != "sym" or tok.text != sym:
            raise self.error(f"expected {sym!r}, found {tok.text!r}")
        self.next()

    def expect_keyword(self, word: str) -> None:
        tok = self.peek()
        if tok.kind != "ident" or tok.text != word:
            raise self.error(f"expected {word!r}, found {tok.text!r}")
        self.next()

    def at_sym(self, sym: str) -> bool:
        tok = self.peek()
        return tok.kind == "sym" and tok.text == sym

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text == word

    def ident(self) -> str:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self.error(f"expected identifier, found {tok.text!r}")
        self.next()
        return tok.text

    # --- expressions -------------------------------------------------

    def expr(self) -> Term:
        if self.at_keyword("fun"):
            self.next()
            params = [self.ident()]
            while self.peek().kind == "ident" and not self.at_sym("->"):
                params.append(self.ident())
            self.expect_sym("->")
            body = self.expr()
            for p in reversed(params):
                body = Lam(p, body)
            return body
        if self.at_keyword("let"):
            self.next()
            name = self.ident()
            params = []
            while self.peek().kind == "ident" and self.peek().text not in KEYWORDS:
                params.append(self.ident())
            self.expect_sym("=")
            bound = self.expr()
            for p in reversed(params):
                bound = Lam(p, bound)
            self.expect_keyword("in")
            body = self.expr()
            return LetRec(name, bound, body)
        if self.at_keyword("if"):
            self.next()
            cond = self.expr()
            self.expect_keyword("then")
            then = self.expr()
            self.expect_keyword("else")
            other = self.expr()
            return Case(cond, [Arm("True", [], then), Arm("False", [], other)])
        if self.at_keyword("case"):
            self.next()
            scrutinee = self.expr()
            self.expect_keyword("of")
            self.expect_sym("{")
            arms = [self.arm()]
            while self.at_sym(";"):
                self.next()
                if self.at_sym("}"):
                    break
                arms.append(self.arm())
            self.expect_sym("}")
            return Case(scrutinee, arms)
        return self.compare_expr()

    def arm(self) -> Arm:
        tok = self.peek()
        if tok.kind == "sym" and tok.text == "[":
            self.next()
            self.expect_sym("]")
            tag = "Nil"
            binders: List[str] = []
        elif tok.kind == "sym" and tok.text == "(":
            self.next()
            self.expect_sym(")")
            tag = "Unit"
            binders = []
        elif tok.kind == "ctor":
            self.next()
            tag = tok.text
            binders = []
            while self.peek().kind == "ident" and not self.at_sym("->"):
                binders.append(self.ident())
        elif tok.kind == "ident":
            head = self.ident()
            self.expect_sym("::")
            tail = self.ident()
            tag = "Cons"
            binders = [head, tail]
        else:
            raise self.error(f"expected a pattern, found {tok.text!r}")
        if len(set(binders)) != len(binders):
            raise ParseError(f"repeated binder in pattern {tag}", tok.line, tok.col)
        self.expect_sym("->")
        return Arm(tag, binders, self.expr())

    def compare_expr(self) -> Term:
        left = self.cons_expr()
        tok = self.peek()
        if tok.kind == "sym" and tok.text in _COMPARE_OPS and not tok.bol:
            self.next()
            right = self.cons_expr()
            return App(App(Var(PRIM_SYMBOLS[tok.text]), left), right)
        return left

    def cons_expr(self) -> Term:
        head = self.add_expr()
        if self.at_sym("::") and not self.peek().bol:
            self.next()
            tail = self.cons_expr()
            return Ctor("Cons", [head, tail])
        return head

    def add_expr(self) -> Term:
        left = self.mul_expr()
        while True:
            tok = self.peek()
            if tok.kind == "sym" and tok.text in _ADD_OPS and not tok.bol:
                self.next()
                right = self.mul_expr()
                left = App(App(Var(PRIM_SYMBOLS[tok.text]), left), right)
            else:
                return left

    def mul_expr(self) -> Term:
        left = self.app_expr()
        while self.at_sym("*") and not self.peek().bol:
            self.next()
            right = self.app_expr()
            left = App(App(Var("#mul"), left), right)
        return left

    def app_expr(self) -> Term:
        tok = self.peek()
        if tok.kind == "ctor":
            self.next()
            args = []
            while self.at_atom():
                args.append(self.atom())
            return Ctor(tok.text, args)
        fn = self.atom()
        while self.at_atom():
            fn = App(fn, self.atom())
        return fn

    def at_atom(self) -> bool:
        tok = self.peek()
        if tok.bol:
            return False
        if tok.kind in ("int", "ctor"):
            return True
        if tok.kind == "ident":
            return tok.text not in KEYWORDS
        return tok.kind == "sym" and tok.text in ("(", "[")

    def atom(self) -> Term:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return Var(int_name(tok.text))
        if tok.kind == "ident":
            return Var(self.ident())
        if tok.kind == "ctor":
            self.next()
            return Ctor(tok.text, [])
        if tok.kind == "sym" and tok.text == "[":
            self.next()
            if self.at_sym("]"):
                self.next()
                return Ctor("Nil", [])
            items = [self.expr()]
            while self.at_sym(","):
                self.next()
                items.append(self.expr())
            self.expect_sym("]")
            out: Term = Ctor("Nil", [])
            for item in reversed(items):
                out = Ctor("Cons", [item, out])
            return out
        if tok.kind == "sym" and tok.text == "(":
            self.next()
            if self.at_sym(")"):
                self.next()
                return Ctor("Unit", [])
            op = self.peek()
            if op.kind == "sym" and op.text in PRIM_SYMBOLS and self.peek(1).text == ")":
                self.next()
                self.next()
                return Var(PRIM_SYMBOLS[op.text])
            inner = self.expr()
            self.expect_sym(")")
            return inner
        raise self.error(f"expected an expression, found {tok.text!r}")

    # --- programs ----------------------------------------------------

    def equation(self) -> Def:
        tok = self.peek()
        if not tok.bol and self.pos > 0:
            raise self.error("equations must start at column zero")
        name = self.ident()
        params = []
        while self.peek().kind == "ident" and self.peek().text not in KEYWORDS:
            params.append(self.ident())
        self.expect_sym("=")
        body = self.expr()
        for p in reversed(params):
            body = Lam(p, body)
        return Def(name, body)

    def program(self) -> Program:
        defs: List[Def] = []
        while self.peek().kind != "eof":
            defs.append(self.equation())
        if not defs or defs[-1].name != "main":
            raise self.error("the last equation must be named main")
        main = defs.pop()
        names = set()
        for d in defs:
            if d.name == "main":
                raise self.error("main must be the last equation")
            if d.name in names:
                raise self.error(f"duplicate definition of {d.name}")
            names.add(d.name)
        return Program(defs, main.body)


def parse_expr(src: str) -> Term:
    parser = _Parser(tokenize(src))
    term = parser.expr()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return term


def parse_args(src: str) -> List[Term]:
    """Parse a whitespace-separated run of atomic expressions.

    This is the shape of argument lists for main, as they appear in
    corpus input files and on the check command line; an optional
    leading "main" word is allowed and ignored.
    """
    # Indent by one column so the layout rule (equations start at
    # column zero) never kicks in for a bare argument list.
    parser = _Parser(tokenize(" " + src))
    if parser.peek().kind == "ident" and parser.peek().text == "main":
        parser.next()
    args: List[Term] = []
    while parser.at_atom():
        args.append(parser.atom())
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return args


def parse_program(src: str, validate: bool = True) -> Program:
    prog = _Parser(tokenize(src)).program()
    if validate:
        check_program(prog)
    return prog


def check_program(prog: Program) -> None:
    """Reject unbound variables and inconsistent constructor arities."""
    for name in sorted(program_free_vars(prog)):
        if not (is_prim_name(name) or is_int_name(name)):
            raise ValueError(f"unbound variable {name}")
    try:
        ctor_arities(prog)
    except ValueError as exc:
        raise ValueError(str(exc)) from None
