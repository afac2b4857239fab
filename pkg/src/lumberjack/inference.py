"""Constraint collection: assign a type variable per term node and emit
subtyping constraints describing how data flows between producers and
consumers.

Variable occurrences reuse their binder's variable, so the constraint
graph directly connects definition sites with use sites.  Constructor
applications put a shape with their field variables below the node's
variable; case expressions put a shape carrying their arms (binders,
field variables, and branch bodies) above the scrutinee's variable.
Nothing is solved here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple, Union

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
    is_reserved_name,
)

_tvar_counter = itertools.count(1)


@dataclass(eq=False)
class TVar:
    """A type variable; doubles as the identity of a term node."""

    hint: str = ""
    id: int = field(default_factory=lambda: next(_tvar_counter))

    def __repr__(self) -> str:
        return f"a{self.id}" + (f"({self.hint})" if self.hint else "")


@dataclass(eq=False)
class FunBound:
    """A function shape; appears below lambdas and above applied terms."""

    param: TVar
    result: TVar


@dataclass(eq=False)
class CtorBound:
    """A constructor shape below the variable of a constructor site."""

    tag: str
    fields: List[TVar]
    site: Ctor


@dataclass(eq=False)
class CaseArmInfo:
    tag: str
    binders: List[str]
    field_vars: List[TVar]
    body: Term


@dataclass(eq=False)
class CaseBound:
    """A case shape above the scrutinee variable of a case site."""

    arms: List[CaseArmInfo]
    result: TVar
    site: Case

    def arm(self, tag: str) -> Optional[CaseArmInfo]:
        return next((a for a in self.arms if a.tag == tag), None)

    def tags(self) -> List[str]:
        return [a.tag for a in self.arms]


Lower = Union[TVar, FunBound, CtorBound]
Upper = Union[TVar, FunBound, CaseBound]
Constraint = Tuple[Lower, Upper]


@dataclass(eq=False)
class InferResult:
    constraints: List[Constraint]
    var_of: Dict[int, TVar]  # term nid -> type variable
    root: TVar  # variable of the main expression
    def_vars: Dict[str, TVar]  # def name -> variable seen by its users
    ctor_bounds: List[CtorBound]
    case_bounds: List[CaseBound]
    prim_result_vars: Set[TVar]  # results of saturated primitive calls
    prim_arg_vars: Set[TVar]  # arguments handed to primitives


class _Inferencer:
    def __init__(self) -> None:
        self.constraints: List[Constraint] = []
        self.var_of: Dict[int, TVar] = {}
        self.ctor_bounds: List[CtorBound] = []
        self.case_bounds: List[CaseBound] = []
        self.prim_result_vars: Set[TVar] = set()
        self.prim_arg_vars: Set[TVar] = set()

    def emit(self, lhs: Lower, rhs: Upper) -> None:
        self.constraints.append((lhs, rhs))

    def infer(self, term: Term, env: Dict[str, TVar]) -> TVar:
        if isinstance(term, Var):
            bound = env.get(term.name)
            if bound is not None:
                self.var_of[term.nid] = bound
                return bound
            if not is_reserved_name(term.name):
                raise ValueError(f"unbound variable {term.name}")
            fresh = TVar(hint=term.name)
            self.var_of[term.nid] = fresh
            return fresh
        if isinstance(term, Lam):
            param = TVar(hint=term.param)
            body = self.infer(term.body, {**env, term.param: param})
            out = TVar(hint="lam")
            self.emit(FunBound(param, body), out)
            self.var_of[term.nid] = out
            return out
        if isinstance(term, App):
            fn = self.infer(term.fn, env)
            arg = self.infer(term.arg, env)
            out = TVar(hint="app")
            self.emit(fn, FunBound(arg, out))
            self.var_of[term.nid] = out
            self._note_prim_spine(term)
            return out
        if isinstance(term, Ctor):
            fields = [self.infer(a, env) for a in term.args]
            out = TVar(hint=term.tag)
            bound = CtorBound(term.tag, fields, term)
            self.ctor_bounds.append(bound)
            self.emit(bound, out)
            self.var_of[term.nid] = out
            return out
        if isinstance(term, Case):
            scrut = self.infer(term.scrutinee, env)
            result = TVar(hint="case")
            arm_infos = []
            arm_results = []
            for arm in term.arms:
                field_vars = [TVar(hint=b) for b in arm.binders]
                inner = dict(env)
                inner.update(zip(arm.binders, field_vars))
                arm_results.append(self.infer(arm.body, inner))
                arm_infos.append(CaseArmInfo(arm.tag, list(arm.binders), field_vars, arm.body))
            bound = CaseBound(arm_infos, result, term)
            self.case_bounds.append(bound)
            self.emit(scrut, bound)
            for r in arm_results:
                self.emit(r, result)
            self.var_of[term.nid] = result
            return result
        if isinstance(term, LetRec):
            rec = TVar(hint=term.name)
            bound_var = self.infer(term.bound, {**env, term.name: rec})
            body_var = self.infer(term.body, {**env, term.name: bound_var})
            self.emit(bound_var, rec)
            self.var_of[term.nid] = body_var
            return body_var
        raise TypeError(f"unknown term node {term!r}")

    def _note_prim_spine(self, term: App) -> None:
        """Record argument and result variables of primitive call spines."""
        args: List[Term] = []
        head: Term = term
        while isinstance(head, App):
            args.append(head.arg)
            head = head.fn
        if not (isinstance(head, Var) and head.name in PRIM_ARITY):
            return
        args.reverse()
        for a in args:
            self.prim_arg_vars.add(self.var_of[a.nid])
        if len(args) == PRIM_ARITY[head.name]:
            self.prim_result_vars.add(self.var_of[term.nid])


def infer_program(prog: Program) -> InferResult:
    """Run constraint collection over the def spine and main."""
    inf = _Inferencer()
    env: Dict[str, TVar] = {}
    def_vars: Dict[str, TVar] = {}
    for d in prog.defs:
        rec = TVar(hint=d.name)
        body_var = inf.infer(d.body, {**env, d.name: rec})
        inf.emit(body_var, rec)
        env[d.name] = body_var
        def_vars[d.name] = body_var
    root = inf.infer(prog.main, env)
    return InferResult(
        constraints=inf.constraints,
        var_of=inf.var_of,
        root=root,
        def_vars=def_vars,
        ctor_bounds=inf.ctor_bounds,
        case_bounds=inf.case_bounds,
        prim_result_vars=inf.prim_result_vars,
        prim_arg_vars=inf.prim_arg_vars,
    )
