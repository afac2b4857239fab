from pathlib import Path
from typing import Dict, List, Tuple

import pytest

from lumberjack.interp import Outcome, diff_outcomes, eval_closed, run_main
from lumberjack.parser import parse_args, parse_program
from lumberjack.syntax import Program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus_names() -> List[str]:
    return sorted(
        p.stem for p in CORPUS.glob("*.lh") if not p.name.endswith(".expect.lh")
    )


def corpus_source(name: str) -> str:
    return (CORPUS / f"{name}.lh").read_text()

def corpus_expect(name: str) -> str:
    return (CORPUS / f"{name}.expect.lh").read_text()


def corpus_inputs(name: str) -> List[Tuple[str, str]]:
    """(argument source, expected rendering) pairs from the sidecar file."""
    pairs = []
    for raw in (CORPUS / f"{name}.inputs").read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        args_src, _, expected = line.partition("=>")
        pairs.append((args_src.strip(), expected.strip()))
    return pairs


def run_on(prog: Program, args_src: str, budget: int = 1_000_000) -> Outcome:
    args = [eval_closed(a) for a in parse_args(args_src)]
    return run_main(prog, args, budget=budget)


def diff_on_corpus_inputs(name: str, original: Program, optimized: Program) -> None:
    """Assert agreement of two program versions on the declared inputs."""
    for args_src, _ in corpus_inputs(name):
        verdict = diff_outcomes(run_on(original, args_src), run_on(optimized, args_src))
        assert verdict in ("match", "inconclusive"), f"{name} [{args_src}]: {verdict}"


@pytest.fixture(scope="session")
def corpus() -> Dict[str, Program]:
    return {name: parse_program(corpus_source(name)) for name in corpus_names()}
