"""Reference interpreter: a strict explicit-stack machine with counters.

The interpreter exists to check that the optimizer preserves behavior
and to measure how much it helps, so it counts work (node dispatches),
constructor-cell allocations, and closure allocations.  The stack is
explicit so deeply recursive object programs cannot overflow the host
stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .syntax import (
    App,
    Case,
    Ctor,
    Lam,
    LetRec,
    PRIM_ARITY,
    Program,
    Term,
    Var,
    int_of_name,
    is_int_name,
    is_prim_name,
)


class Value:
    """Base class for runtime values."""


@dataclass(eq=False)
class VInt(Value):
    value: int


@dataclass(eq=False)
class VCtor(Value):
    tag: str
    args: List[Value]


@dataclass(eq=False)
class VClosure(Value):
    param: str
    body: Term
    env: Dict[str, Value]


@dataclass(eq=False)
class VPrim(Value):
    name: str
    args: List[Value]


TRUE = VCtor("True", [])
FALSE = VCtor("False", [])
UNIT = VCtor("Unit", [])


@dataclass
class Counters:
    steps: int = 0
    ctor_allocs: int = 0
    closure_allocs: int = 0


@dataclass
class Outcome:
    status: str  # "finished", "timeout", "error"
    value: Optional[Value] = None
    error: str = ""
    counters: Counters = field(default_factory=Counters)

    @property
    def finished(self) -> bool:
        return self.status == "finished"


class _Hole:
    """Placeholder for a letrec binding during its own evaluation."""


_HOLE = _Hole()


class EvalError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


def _lookup(name: str, env: Dict[str, Value], globals_: Dict[str, Value]) -> Value:
    v = env.get(name)
    if v is None:
        v = globals_.get(name)
    if v is None:
        if is_int_name(name):
            return VInt(int_of_name(name))
        if is_prim_name(name):
            return VPrim(name, [])
        raise EvalError("unbound", name)
    if v is _HOLE:
        raise EvalError("blackhole", f"{name} demanded during its own definition")
    return v


def _apply_prim(name: str, args: List[Value]) -> Value:
    ints = []
    for a in args:
        if not isinstance(a, VInt):
            raise EvalError("prim-type", f"{name} applied to a non-integer")
        ints.append(a.value)
    x, y = ints
    if name == "#add":
        return VInt(x + y)
    if name == "#sub":
        return VInt(x - y)
    if name == "#mul":
        return VInt(x * y)
    if name == "#lt":
        return TRUE if x < y else FALSE
    if name == "#le":
        return TRUE if x <= y else FALSE
    if name == "#gt":
        return TRUE if x > y else FALSE
    if name == "#ge":
        return TRUE if x >= y else FALSE
    if name == "#eq":
        return TRUE if x == y else FALSE
    raise EvalError("prim-type", f"unknown primitive {name}")


class Machine:
    """Evaluator over a fixed table of top-level definitions."""

    def __init__(self, globals_: Dict[str, Value], counters: Counters, budget: int):
        self.globals = globals_
        self.counters = counters
        self.budget = budget

    def eval(self, term: Term, env: Dict[str, Value]) -> Value:
        """Evaluate term; raises EvalError on stuck states or timeout."""
        stack: List[Tuple] = []
        mode_eval = True
        control: object = term
        value: Value = UNIT
        counters = self.counters
        while True:
            if mode_eval:
                t = control
                counters.steps += 1
                if counters.steps > self.budget:
                    raise EvalError("timeout", "step budget exhausted")
                if isinstance(t, Var):
                    value = _lookup(t.name, env, self.globals)
                    mode_eval = False
                elif isinstance(t, Lam):
                    counters.closure_allocs += 1
                    value = VClosure(t.param, t.body, env)
                    mode_eval = False
                elif isinstance(t, App):
                    stack.append(("appfn", t.arg, env))
                    control = t.fn
                elif isinstance(t, Ctor):
                    if not t.args:
                        counters.ctor_allocs += 1
                        value = VCtor(t.tag, [])
                        mode_eval = False
                    else:
                        stack.append(("ctor", t.tag, [], t.args, env))
                        control = t.args[0]
                elif isinstance(t, Case):
                    stack.append(("case", t.arms, env))
                    control = t.scrutinee
                elif isinstance(t, LetRec):
                    env2 = dict(env)
                    env2[t.name] = _HOLE
                    stack.append(("letrec", t.name, env2, t.body))
                    env = env2
                    control = t.bound
                else:
                    raise EvalError("bad-term", repr(t))
            else:
                if not stack:
                    return value
                frame = stack.pop()
                kind = frame[0]
                if kind == "appfn":
                    _, arg_expr, fenv = frame
                    stack.append(("apparg", value))
                    control = arg_expr
                    env = fenv
                    mode_eval = True
                elif kind == "apparg":
                    fn = frame[1]
                    if isinstance(fn, VClosure):
                        env = dict(fn.env)
                        env[fn.param] = value
                        control = fn.body
                        mode_eval = True
                    elif isinstance(fn, VPrim):
                        args = fn.args + [value]
                        if len(args) < PRIM_ARITY[fn.name]:
                            value = VPrim(fn.name, args)
                        else:
                            value = _apply_prim(fn.name, args)
                    else:
                        raise EvalError("not-a-function", "applied a non-function value")
                elif kind == "ctor":
                    _, tag, done, arg_exprs, fenv = frame
                    done = done + [value]
                    if len(done) == len(arg_exprs):
                        counters.ctor_allocs += 1
                        value = VCtor(tag, done)
                    else:
                        stack.append(("ctor", tag, done, arg_exprs, fenv))
                        control = arg_exprs[len(done)]
                        env = fenv
                        mode_eval = True
                elif kind == "case":
                    _, arms, fenv = frame
                    if not isinstance(value, VCtor):
                        raise EvalError("bad-case", "scrutinee is not a constructor")
                    for arm in arms:
                        if arm.tag == value.tag:
                            if len(arm.binders) != len(value.args):
                                raise EvalError(
                                    "bad-case",
                                    f"arity mismatch matching {arm.tag}",
                                )
                            env = dict(fenv)
                            for b, v in zip(arm.binders, value.args):
                                env[b] = v
                            control = arm.body
                            mode_eval = True
                            break
                    else:
                        raise EvalError("bad-case", f"no arm for {value.tag}")
                elif kind == "letrec":
                    _, name, env2, body = frame
                    env2[name] = value
                    env = env2
                    control = body
                    mode_eval = True
                else:
                    raise EvalError("bad-frame", kind)

    def apply(self, fn: Value, arg: Value) -> Value:
        """Apply an already-evaluated function value to an argument."""
        if isinstance(fn, VClosure):
            env = dict(fn.env)
            env[fn.param] = arg
            self.counters.steps += 1
            return self.eval(fn.body, env)
        if isinstance(fn, VPrim):
            args = fn.args + [arg]
            self.counters.steps += 1
            if len(args) < PRIM_ARITY[fn.name]:
                return VPrim(fn.name, args)
            return _apply_prim(fn.name, args)
        raise EvalError("not-a-function", "applied a non-function value")


def eval_defs(prog: Program, counters: Counters, budget: int) -> Dict[str, Value]:
    """Evaluate the def spine into a table of top-level values."""
    globals_: Dict[str, Value] = {}
    machine = Machine(globals_, counters, budget)
    for d in prog.defs:
        globals_[d.name] = _HOLE
        globals_[d.name] = machine.eval(d.body, {})
    return globals_


def run_main(prog: Program, args: List[Value], budget: int = 10_000_000) -> Outcome:
    """Evaluate a program and apply main to args, counting only that phase.

    Top-level defs and the main expression itself are evaluated first
    against a separate counter, so the reported numbers cover exactly
    the work caused by the application of main to the given inputs.
    """
    setup = Counters()
    try:
        globals_ = eval_defs(prog, setup, budget)
        machine = Machine(globals_, setup, budget)
        value = machine.eval(prog.main, {})
    except EvalError as exc:
        status = "timeout" if exc.kind == "timeout" else "error"
        return Outcome(status, error=str(exc), counters=setup)
    counters = Counters()
    machine = Machine(globals_, counters, budget)
    try:
        for arg in args:
            value = machine.apply(value, arg)
    except EvalError as exc:
        status = "timeout" if exc.kind == "timeout" else "error"
        return Outcome(status, error=str(exc), counters=counters)
    return Outcome("finished", value=value, counters=counters)


def eval_closed(term: Term, budget: int = 10_000_000) -> Value:
    """Evaluate a closed term (inputs, expected outputs); uncounted."""
    machine = Machine({}, Counters(), budget)
    return machine.eval(term, {})


def values_equal(a: Value, b: Value) -> bool:
    """Structural equality; all function values are considered equal.

    Iterative, because comparing a long list recursively would hit the
    interpreter stack limit long before it hits the step budget.
    """
    fn_like = (VClosure, VPrim)
    work = [(a, b)]
    while work:
        x, y = work.pop()
        if isinstance(x, VInt) and isinstance(y, VInt):
            if x.value != y.value:
                return False
        elif isinstance(x, VCtor) and isinstance(y, VCtor):
            if x.tag != y.tag or len(x.args) != len(y.args):
                return False
            work.extend(zip(x.args, y.args))
        elif not (isinstance(x, fn_like) and isinstance(y, fn_like)):
            return False
    return True


def render_value(v: Value, atom: bool = False) -> str:
    if isinstance(v, VInt):
        if v.value < 0 and atom:
            return f"({v.value})"
        return str(v.value)
    if isinstance(v, VCtor):
        if v.tag == "Nil" and not v.args:
            return "[]"
        if v.tag == "Unit" and not v.args:
            return "()"
        if v.tag == "Cons" and len(v.args) == 2:
            # Walk the spine with a loop; long lists are the one value
            # shape that gets deep in practice.
            parts = []
            cur: Value = v
            while isinstance(cur, VCtor) and cur.tag == "Cons" and len(cur.args) == 2:
                parts.append(render_value(cur.args[0], atom=True))
                cur = cur.args[1]
            parts.append(render_value(cur))
            text = " :: ".join(parts)
            return f"({text})" if atom else text
        if not v.args:
            return v.tag
        text = " ".join([v.tag] + [render_value(a, atom=True) for a in v.args])
        return f"({text})" if atom else text
    return "<fun>"


def diff_outcomes(original: Outcome, optimized: Outcome) -> str:
    """Compare behavior, trusting the original as the reference.

    Returns one of "match", "mismatch", "optimized-diverged", or
    "inconclusive" (the original ran out of budget, so there is
    nothing to compare against).
    """
    if original.status == "timeout":
        return "inconclusive"
    if original.status == "finished":
        if optimized.status == "finished":
            assert original.value is not None and optimized.value is not None
            return "match" if values_equal(original.value, optimized.value) else "mismatch"
        if optimized.status == "timeout":
            return "optimized-diverged"
        return "mismatch"
    # original errored
    if optimized.status == "error":
        same = original.error.split(":")[0] == optimized.error.split(":")[0]
        return "match" if same else "mismatch"
    return "mismatch"
