"""End-to-end optimization driver.

Runs the full pass sequence on a program: thunk case arms, split
shared definitions per use, infer flow constraints, solve them,
build strategies, rewrite, and clean up.  A constraint clash during
solving means the program has no consistent fusion assignment, in
which case the input program is returned unchanged rather than
failing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .duplication import duplicate_defs
from .elaboration import (
    RewriteReport,
    apply_escape_analysis,
    elaborate_program,
)
from .inference import InferResult, infer_program
from .parser import check_program, parse_program
from .simplify import simplify_program, unthunk_program
from .solver import Clash, SolverState, solve
from .syntax import Program, clone_program, program_size
from .thunking import thunk_program
from .unification import StrategyTable, unify_all


@dataclass
class OptimizeResult:
    original: Program
    optimized: Program
    degraded: bool
    report: Optional[RewriteReport] = None
    infer: Optional[InferResult] = None
    state: Optional[SolverState] = None
    table: Optional[StrategyTable] = None

    @property
    def fused_sites(self) -> int:
        if self.report is None:
            return 0
        return sum(self.report.fused_sites.values())

    @property
    def size_before(self) -> int:
        return program_size(self.original)

    @property
    def size_after(self) -> int:
        return program_size(self.optimized)


def optimize_program(
    prog: Program,
    *,
    thunk: bool = True,
    dup: bool = True,
    max_dup: Optional[int] = None,
    simplify: bool = True,
    do_inline: bool = True,
    do_float: bool = True,
) -> OptimizeResult:
    original = prog
    work = clone_program(prog)
    if thunk:
        work = thunk_program(work)
    if dup:
        work, _ = duplicate_defs(work, max_copies=max_dup)
    infer = infer_program(work)
    try:
        state = solve(infer.constraints)
    except Clash:
        return OptimizeResult(original=original, optimized=original, degraded=True)
    extra = [infer.root]
    extra.extend(infer.prim_result_vars)
    extra.extend(infer.prim_arg_vars)
    for cb in infer.ctor_bounds:
        extra.append(infer.var_of[cb.site.nid])
        extra.extend(cb.fields)
    table = unify_all(state, extra)
    apply_escape_analysis(infer, table)
    out, report = elaborate_program(work, infer, table)
    if simplify:
        out = simplify_program(out, do_inline=do_inline, do_float=do_float)
    else:
        out, _ = unthunk_program(out)
    check_program(out)
    return OptimizeResult(
        original=original,
        optimized=out,
        degraded=False,
        report=report,
        infer=infer,
        state=state,
        table=table,
    )


def optimize_source(src: str, **kwargs) -> OptimizeResult:
    return optimize_program(parse_program(src), **kwargs)
