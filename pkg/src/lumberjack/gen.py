"""Random closed programs for differential testing.

Programs are built so that evaluation always terminates quickly: list
functions recurse structurally on their argument, numeric producers
count down behind a positive guard, and every case covers all the
constructors its scrutinee can produce.  Expressions are typed during
generation (integers, booleans, integer lists, optional integers), so
no primitive is ever applied to the wrong kind of value.

Definitions are emitted consumers before producers, which gives the
optimizer the def ordering it needs to move arm bodies between them;
whether fusion actually applies varies by seed, including programs
where a list has several consumers and fusion must back off.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, List, Tuple

from .syntax import App, Arm, Case, Ctor, Def, Lam, Program, Term, Var, mk_int

INT = "int"
BOOL = "bool"
LIST = "list"
OPT = "opt"


@dataclass
class _Sig:
    name: str
    args: List[str]
    result: str


class _Gen:
    def __init__(self, rng: random.Random, size: int):
        self.rng = rng
        self.size = size
        self.sigs: List[_Sig] = []
        self.counter = 0

    def fresh(self, base: str) -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    def pick(self, xs):
        return self.rng.choice(xs)

    def sigs_of(self, result: str) -> List[_Sig]:
        return [s for s in self.sigs if s.result == result]

    # --- expressions -------------------------------------------------

    def int_expr(self, env: List[Tuple[str, str]], depth: int) -> Term:
        ints = [n for n, t in env if t == INT]
        options: List[Callable[[], Term]] = [
            lambda: mk_int(self.rng.randint(0, 9)),
        ]
        if ints:
            options.append(lambda: Var(self.pick(ints)))
        if depth > 0:
            options.append(
                lambda: App(
                    App(Var(self.pick(["#add", "#sub", "#mul"])), self.int_expr(env, depth - 1)),
                    self.int_expr(env, depth - 1),
                )
            )
            options.append(
                lambda: Case(
                    self.bool_expr(env, depth - 1),
                    [
                        Arm("True", [], self.int_expr(env, depth - 1)),
                        Arm("False", [], self.int_expr(env, depth - 1)),
                    ],
                )
            )
            for sig in self.sigs_of(INT):
                if self.rng.random() < 0.45:
                    options.append(lambda s=sig: self.call(s, env, depth - 1))
        return self.pick(options)()

    def bool_expr(self, env: List[Tuple[str, str]], depth: int) -> Term:
        op = self.pick(["#lt", "#le", "#gt", "#ge", "#eq"])
        return App(App(Var(op), self.int_expr(env, depth)), self.int_expr(env, depth))

    def list_expr(self, env: List[Tuple[str, str]], depth: int) -> Term:
        lists = [n for n, t in env if t == LIST]
        options: List[Callable[[], Term]] = [
            lambda: self.list_literal(env, depth),
        ]
        if lists:
            options.append(lambda: Var(self.pick(lists)))
        if depth > 0:
            options.append(
                lambda: Ctor(
                    "Cons", [self.int_expr(env, depth - 1), self.list_expr(env, depth - 1)]
                )
            )
            for sig in self.sigs_of(LIST):
                if self.rng.random() < 0.6:
                    options.append(lambda s=sig: self.call(s, env, depth - 1))
        return self.pick(options)()

    def list_literal(self, env: List[Tuple[str, str]], depth: int) -> Term:
        out: Term = Ctor("Nil", [])
        for _ in range(self.rng.randint(0, 3)):
            out = Ctor("Cons", [self.int_expr(env, max(depth - 1, 0)), out])
        return out

    def opt_expr(self, env: List[Tuple[str, str]], depth: int) -> Term:
        options: List[Callable[[], Term]] = [
            lambda: Ctor("None", []),
            lambda: Ctor("Some", [self.int_expr(env, max(depth - 1, 0))]),
        ]
        if depth > 0:
            for sig in self.sigs_of(OPT):
                if self.rng.random() < 0.6:
                    options.append(lambda s=sig: self.call(s, env, depth - 1))
        return self.pick(options)()

    def expr_of(self, ty: str, env: List[Tuple[str, str]], depth: int) -> Term:
        if ty == INT:
            return self.int_expr(env, depth)
        if ty == BOOL:
            return self.bool_expr(env, depth)
        if ty == LIST:
            return self.list_expr(env, depth)
        return self.opt_expr(env, depth)

    def call(self, sig: _Sig, env: List[Tuple[str, str]], depth: int) -> Term:
        out: Term = Var(sig.name)
        for ty in sig.args:
            out = App(out, self.expr_of(ty, env, max(depth, 0)))
        return out

    # --- definitions -------------------------------------------------

    def gen_fold(self) -> Def:
        name = self.fresh("total")
        h, t = self.fresh("h"), self.fresh("t")
        env = [(h, INT)]
        rec = App(Var(name), Var(t))
        combine = self.pick(
            [
                lambda: App(App(Var("#add"), self.int_expr(env, 1)), rec),
                lambda: App(App(Var("#add"), Var(h)), rec),
                lambda: Case(
                    self.bool_expr(env, 1),
                    [Arm("True", [], rec), Arm("False", [], App(App(Var("#add"), Var(h)), rec))],
                ),
            ]
        )()
        body = Lam(
            "xs",
            Case(
                Var("xs"),
                [
                    Arm("Nil", [], self.int_expr([], 1)),
                    Arm("Cons", [h, t], combine),
                ],
            ),
        )
        self.sigs.append(_Sig(name, [LIST], INT))
        return Def(name, body)

    def gen_map(self) -> Def:
        name = self.fresh("each")
        h, t = self.fresh("h"), self.fresh("t")
        env = [(h, INT)]
        elem = self.int_expr(env, 1)
        body = Lam(
            "xs",
            Case(
                Var("xs"),
                [
                    Arm("Nil", [], Ctor("Nil", [])),
                    Arm("Cons", [h, t], Ctor("Cons", [elem, App(Var(name), Var(t))])),
                ],
            ),
        )
        self.sigs.append(_Sig(name, [LIST], LIST))
        return Def(name, body)

    def gen_filter(self) -> Def:
        name = self.fresh("keep")
        h, t = self.fresh("h"), self.fresh("t")
        env = [(h, INT)]
        rec = App(Var(name), Var(t))
        body = Lam(
            "xs",
            Case(
                Var("xs"),
                [
                    Arm("Nil", [], Ctor("Nil", [])),
                    Arm(
                        "Cons",
                        [h, t],
                        Case(
                            self.bool_expr(env, 1),
                            [
                                Arm("True", [], Ctor("Cons", [Var(h), rec])),
                                Arm("False", [], rec),
                            ],
                        ),
                    ),
                ],
            ),
        )
        self.sigs.append(_Sig(name, [LIST], LIST))
        return Def(name, body)

    def gen_produce(self) -> Def:
        name = self.fresh("build")
        n = self.fresh("n")
        env = [(n, INT)]
        step = self.rng.randint(1, 2)
        rec = App(Var(name), App(App(Var("#sub"), Var(n)), mk_int(step)))
        body = Lam(
            n,
            Case(
                App(App(Var("#gt"), Var(n)), mk_int(0)),
                [
                    Arm("True", [], Ctor("Cons", [self.int_expr(env, 1), rec])),
                    Arm("False", [], self.list_literal([], 0)),
                ],
            ),
        )
        self.sigs.append(_Sig(name, [INT], LIST))
        return Def(name, body)

    def gen_opt_produce(self) -> Def:
        name = self.fresh("find")
        n = self.fresh("n")
        env = [(n, INT)]
        body = Lam(
            n,
            Case(
                self.bool_expr(env, 0),
                [
                    Arm("True", [], Ctor("Some", [self.int_expr(env, 1)])),
                    Arm("False", [], Ctor("None", [])),
                ],
            ),
        )
        self.sigs.append(_Sig(name, [INT], OPT))
        return Def(name, body)

    def gen_opt_consume(self) -> Def:
        name = self.fresh("grab")
        v = self.fresh("v")
        body = Lam(
            "o",
            Case(
                Var("o"),
                [
                    Arm("Some", [v], self.int_expr([(v, INT)], 1)),
                    Arm("None", [], self.int_expr([], 1)),
                ],
            ),
        )
        self.sigs.append(_Sig(name, [OPT], INT))
        return Def(name, body)


def gen_program(seed: int, size: int = 60) -> Program:
    """Deterministic closed program for the given seed.

    Larger sizes allow more definitions and deeper bodies; every
    program takes a single integer argument and terminates on any
    input because all recursion is structural or guarded countdown.
    """
    rng = random.Random(seed)
    g = _Gen(rng, size)
    defs: List[Def] = []
    budget = max(2, min(6, size // 10))
    makers = []
    if rng.random() < 0.8:
        makers.append(g.gen_fold)
    if rng.random() < 0.5:
        makers.append(g.gen_opt_consume)
    makers.append(g.pick([g.gen_map, g.gen_filter]))
    if rng.random() < 0.4:
        makers.append(g.pick([g.gen_map, g.gen_filter]))
    makers.append(g.gen_produce)
    if rng.random() < 0.4:
        makers.append(g.gen_opt_produce)
    for mk in makers[:budget]:
        defs.append(mk())
    main_env = [("n", INT)]
    depth = 2 if size < 60 else 3
    body = g.int_expr(main_env, depth)
    # Guarantee at least one full chain so most seeds exercise fusion.
    folds = g.sigs_of(INT)
    lists = g.sigs_of(LIST)
    if folds and lists:
        fold = g.pick([s for s in folds if s.args == [LIST]] or folds)
        if fold.args == [LIST]:
            chain = g.call(fold, main_env, 1)
            body = App(App(Var("#add"), body), chain)
    main = Lam("n", body)
    return Program(defs, main)
