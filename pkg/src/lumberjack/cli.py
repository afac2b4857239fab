"""Command line driver.

Four modes share one flag surface:

  optimize FILE   rewrite a program and print (or write) the result
  check FILE      run original and optimized on inputs, compare
  metrics FILE    emit a JSON report of steps/allocations/sizes
  corpus [DIR]    golden-check every corpus program, then sweep
                  randomly generated programs

Exit codes: 0 on success, 1 when the input does not parse (or is not a
well-formed program), 2 when an internal invariant breaks or a
semantics check fails.  Diagnostics go to stderr as JSON lines.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .gen import gen_program
from .inference import CaseBound, CtorBound, FunBound, TVar
from .interp import Outcome, diff_outcomes, eval_closed, render_value, run_main
from .parser import ParseError, parse_args, parse_program
from .pipeline import OptimizeResult, optimize_program
from .printer import render_program
from .simplify import normalize_program
from .solver import ordered_context
from .syntax import Program, program_alpha_eq, program_size
from .unification import SBot, SCtorFuse, SCtorId, SFun, SRecRef, STop

VERDICT = {
    "match": "Equal",
    "mismatch": "Mismatch",
    "optimized-diverged": "OptimizedDiverged",
    "inconclusive": "OriginalDiverged",
}

ACCEPTABLE = ("Equal", "OriginalDiverged")


def _diag(**fields) -> None:
    print(json.dumps(fields), file=sys.stderr)


class _Failure(Exception):
    def __init__(self, code: int):
        self.code = code


def _parse_file(path: str) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        _diag(event="io-error", file=path, message=str(exc))
        raise _Failure(1) from None
    try:
        return parse_program(text)
    except (ParseError, ValueError) as exc:
        _diag(event="parse-error", file=path, message=str(exc))
        raise _Failure(1) from None


def _optimize(prog: Program, opts: argparse.Namespace) -> OptimizeResult:
    try:
        return optimize_program(
            prog,
            dup=not opts.no_dup,
            max_dup=opts.max_dup,
            do_inline=not opts.no_inline,
            do_float=not opts.no_float,
        )
    except Exception as exc:
        _diag(event="internal-error", kind=type(exc).__name__, message=str(exc))
        raise _Failure(2) from None


# --- dump channels ----------------------------------------------------------


def _var_name(v: TVar) -> str:
    return f"a{v.id}"


def _shape_json(shape) -> object:
    if isinstance(shape, TVar):
        return _var_name(shape)
    if isinstance(shape, FunBound):
        return {"fun": [_var_name(shape.param), _var_name(shape.result)]}
    if isinstance(shape, CtorBound):
        return {"ctor": shape.tag, "fields": [_var_name(f) for f in shape.fields]}
    if isinstance(shape, CaseBound):
        return {
            "case": {
                arm.tag: [_var_name(f) for f in arm.field_vars] for arm in shape.arms
            },
            "result": _var_name(shape.result),
        }
    return repr(shape)


def _strategy_json(s, nodes: Dict[int, int], depth: int = 3) -> object:
    if isinstance(s, STop):
        return "Top"
    if isinstance(s, SBot):
        return "Bot"
    if isinstance(s, SRecRef):
        return {"rec": _var_name(s.var)}
    if depth == 0:
        return "..."
    if isinstance(s, SFun):
        return {
            "fun": [
                _strategy_json(s.param, nodes, depth - 1),
                _strategy_json(s.result, nodes, depth - 1),
            ]
        }
    if isinstance(s, SCtorId):
        return {"id": sorted(s.fields)}
    if isinstance(s, SCtorFuse):
        node = nodes.setdefault(id(s), len(nodes))
        return {"fuse": sorted(s.arms), "disabled": s.disabled, "node": node}
    return repr(s)


def _emit_dumps(res: OptimizeResult, opts: argparse.Namespace) -> None:
    if opts.dump_constraints and res.infer is not None:
        for lhs, rhs in res.infer.constraints:
            _diag(event="constraint", lhs=_shape_json(lhs), rhs=_shape_json(rhs))
    if opts.dump_bounds and res.state is not None:
        lowers, varvars, uppers = ordered_context(res.state)
        for v, up in uppers:
            _diag(event="bound", region="upper", var=_var_name(v), bound=_shape_json(up))
        for v, s in varvars:
            _diag(event="bound", region="link", var=_var_name(v), bound=_var_name(s))
        for lo, v in lowers:
            _diag(event="bound", region="lower", var=_var_name(v), bound=_shape_json(lo))
    if opts.dump_strategies and res.table is not None:
        nodes: Dict[int, int] = {}
        for vid, s in sorted(res.table.of.items()):
            _diag(event="strategy", var=f"a{vid}", strategy=_strategy_json(s, nodes))
    if opts.dump_report and res.report is not None:
        _diag(
            event="report",
            enabled=res.report.enabled_nodes,
            disabled=res.report.disabled_nodes,
            restarts=res.report.restarts,
            fused_sites=res.fused_sites,
            skip_reasons=res.report.skip_reasons,
            degraded=res.degraded,
        )


# --- inputs -----------------------------------------------------------------


def _input_lines(path: str, opts: argparse.Namespace) -> List[Tuple[str, Optional[str]]]:
    """Pairs of (argument source, expected render or None)."""
    if opts.input:
        return [(text, None) for text in opts.input]
    sidecar = Path(path).with_suffix(".inputs")
    if not sidecar.exists():
        return []
    lines = []
    for raw in sidecar.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=>" in line:
            args_src, expected = line.split("=>", 1)
            lines.append((args_src.strip(), expected.strip()))
        else:
            lines.append((line, None))
    return lines


def _run_on(prog: Program, args_src: str, budget: int) -> Outcome:
    args = [eval_closed(a) for a in parse_args(args_src)]
    return run_main(prog, args, budget=budget)


def _outcome_render(out: Outcome) -> str:
    if out.status == "finished":
        assert out.value is not None
        return render_value(out.value)
    if out.status == "timeout":
        return "!timeout"
    return "!error"


# --- modes ------------------------------------------------------------------


def _mode_optimize(opts: argparse.Namespace) -> int:
    prog = _parse_file(opts.file)
    res = _optimize(prog, opts)
    _emit_dumps(res, opts)
    text = render_program(res.optimized)
    if opts.output:
        Path(opts.output).write_text(text + "\n")
    elif opts.json:
        print(
            json.dumps(
                {
                    "program": Path(opts.file).stem,
                    "degraded": res.degraded,
                    "fused_sites": res.fused_sites,
                    "source": text,
                }
            )
        )
    else:
        print(text)
    return 0


def _mode_check(opts: argparse.Namespace) -> int:
    prog = _parse_file(opts.file)
    res = _optimize(prog, opts)
    _emit_dumps(res, opts)
    lines = _input_lines(opts.file, opts)
    if not lines:
        _diag(event="no-inputs", file=opts.file)
        return 0
    code = 0
    for args_src, expected in lines:
        orig = _run_on(res.original, args_src, opts.step_limit)
        opt = _run_on(res.optimized, args_src, opts.step_limit)
        verdict = VERDICT[diff_outcomes(orig, opt)]
        ok = verdict in ACCEPTABLE
        if expected is not None:
            got = _outcome_render(orig)
            if got != expected:
                ok = False
                _diag(event="expectation", inputs=args_src, expected=expected, got=got)
        if opts.json:
            print(json.dumps({"inputs": args_src, "verdict": verdict, "ok": ok}))
        else:
            print(f"{args_src} => {verdict}")
        if not ok:
            code = 2
    return code


def _metrics_json(name: str, res: OptimizeResult, args_src: str, budget: int) -> dict:
    orig = _run_on(res.original, args_src, budget)
    opt = _run_on(res.optimized, args_src, budget)

    def counters(out: Outcome) -> dict:
        return {
            "steps": out.counters.steps,
            "ctor_allocs": out.counters.ctor_allocs,
            "closure_allocs": out.counters.closure_allocs,
        }

    return {
        "program": name,
        "original": counters(orig),
        "optimized": counters(opt),
        "ast_nodes": {"before": res.size_before, "after": res.size_after},
        "fused_sites": res.fused_sites,
    }


def _mode_metrics(opts: argparse.Namespace) -> int:
    prog = _parse_file(opts.file)
    res = _optimize(prog, opts)
    _emit_dumps(res, opts)
    lines = _input_lines(opts.file, opts) or [("", None)]
    args_src = lines[0][0]
    print(json.dumps(_metrics_json(Path(opts.file).stem, res, args_src, opts.step_limit)))
    return 0


def _expected_program(path: Path) -> Optional[Program]:
    expect = path.with_suffix(".expect.lh")
    if not expect.exists():
        return None
    return parse_program(expect.read_text())


def _mode_corpus(opts: argparse.Namespace) -> int:
    root = Path(opts.file) if opts.file else Path("corpus")
    if not root.is_dir():
        _diag(event="io-error", file=str(root), message="corpus directory not found")
        return 1
    code = 0
    for path in sorted(root.glob("*.lh")):
        if path.name.endswith(".expect.lh"):
            continue
        prog = _parse_file(str(path))
        res = _optimize(prog, opts)
        status = "ok"
        expected = _expected_program(path)
        if expected is not None and not _same_modulo_layout(res.optimized, expected):
            status = "golden-differs"
            code = 2
        for args_src, expect_text in _input_lines(str(path), opts):
            orig = _run_on(res.original, args_src, opts.step_limit)
            opt = _run_on(res.optimized, args_src, opts.step_limit)
            verdict = VERDICT[diff_outcomes(orig, opt)]
            if verdict not in ACCEPTABLE:
                status = f"diff-{verdict}"
                code = 2
            if expect_text is not None and _outcome_render(orig) != expect_text:
                status = "expectation-differs"
                code = 2
        line = f"{path.name}: {status} (fused {res.fused_sites})"
        print(json.dumps({"program": path.name, "status": status}) if opts.json else line)
    swept, failures = _sweep(opts)
    if failures:
        code = 2
    summary = f"sweep: {swept} programs, {failures} failures"
    print(json.dumps({"sweep": swept, "failures": failures}) if opts.json else summary)
    return code


def _same_modulo_layout(got: Program, want: Program) -> bool:
    if program_alpha_eq(got, want):
        return True
    return program_alpha_eq(normalize_program(got), normalize_program(want))


def _sweep(opts: argparse.Namespace) -> Tuple[int, int]:
    failures = 0
    count = opts.seed if opts.seed is not None else 100
    for seed in range(count):
        prog = gen_program(seed, 60)
        try:
            res = optimize_program(prog)
        except Exception as exc:
            _diag(event="sweep-error", seed=seed, kind=type(exc).__name__, message=str(exc))
            failures += 1
            continue
        for n in ("0", "3", "9"):
            orig = _run_on(res.original, n, opts.step_limit)
            opt = _run_on(res.optimized, n, opts.step_limit)
            verdict = VERDICT[diff_outcomes(orig, opt)]
            if verdict not in ACCEPTABLE:
                _diag(event="sweep-diff", seed=seed, input=n, verdict=verdict)
                failures += 1
                break
    return count, failures


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(
        prog="lumberjack", description="Fuse producers into consumers."
    )
    ap.add_argument("mode", choices=["optimize", "check", "metrics", "corpus"])
    ap.add_argument("file", nargs="?", help="program file (corpus: fixture directory)")
    ap.add_argument("-o", "--output", metavar="FILE", help="write optimized source here")
    ap.add_argument("--input", action="append", metavar="EXPR",
                    help="main arguments, e.g. 'main 10' (repeatable)")
    ap.add_argument("--step-limit", type=int, default=1_000_000, metavar="N")
    ap.add_argument("--max-dup", type=int, default=None, metavar="N",
                    help="give up splitting defs used more than N times")
    ap.add_argument("--no-dup", action="store_true", help="skip definition duplication")
    ap.add_argument("--no-float", action="store_true",
                    help="skip floating result lambdas into parameters")
    ap.add_argument("--no-inline", action="store_true",
                    help="skip wrapper inlining during cleanup")
    ap.add_argument("--seed", type=int, default=None, metavar="N",
                    help="number of generated programs for the corpus sweep")
    ap.add_argument("--dump-constraints", action="store_true")
    ap.add_argument("--dump-bounds", action="store_true")
    ap.add_argument("--dump-strategies", action="store_true")
    ap.add_argument("--dump-report", action="store_true")
    ap.add_argument("--json", action="store_true", help="machine-readable stdout")
    opts = ap.parse_args(argv)

    if opts.step_limit < 1:
        ap.error("--step-limit must be at least 1")
    if opts.mode != "corpus" and not opts.file:
        ap.error(f"{opts.mode} needs a program file")

    runner = {
        "optimize": _mode_optimize,
        "check": _mode_check,
        "metrics": _mode_metrics,
        "corpus": _mode_corpus,
    }[opts.mode]
    try:
        return runner(opts)
    except _Failure as fail:
        return fail.code
    except Exception as exc:  # anything else is a bug in the optimizer
        _diag(event="internal-error", kind=type(exc).__name__, message=str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
