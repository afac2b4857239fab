"""Per-use-site copying of definitions and the merge that undoes it."""

import pytest

from conftest import corpus_inputs, corpus_names, corpus_source, run_on
from lumberjack.duplication import (
    drop_unused_defs,
    duplicate_defs,
    merge_equivalent_copies,
    used_def_names,
)
from lumberjack.interp import diff_outcomes
from lumberjack.parser import parse_program
from lumberjack.syntax import Var, iter_subterms, program_alpha_eq

THREE_USES = "incr x = x + 1\nmain a = incr (incr (incr a))"


def test_two_uses_split_into_numbered_copies():
    p = parse_program(corpus_source("fig1_map_map"))
    q, report = duplicate_defs(p)
    assert [d.name for d in q.defs] == ["map", "map2", "double", "incr"]
    expected = parse_program(
        "map f xs = case xs of { [] -> [] ; x :: rest -> f x :: map f rest }\n"
        "map2 f xs = case xs of { [] -> [] ; x :: rest -> f x :: map2 f rest }\n"
        "double x = x * 2\n"
        "incr x = x + 1\n"
        "main ls = map incr (map2 double ls)"
    )
    assert program_alpha_eq(q, expected)
    assert report.copies == {"map": ["map", "map2"]}


def test_report_sites_point_at_use_occurrences():
    p = parse_program(corpus_source("fig1_map_map"))
    q, report = duplicate_defs(p)
    name_of = {}
    for t in iter_subterms(q.main):
        if isinstance(t, Var):
            name_of[t.nid] = t.name
    for copy, nid in report.site_of.items():
        assert name_of[nid] == copy
    assert set(report.site_of) == {"map", "map2"}


def test_single_use_definition_untouched():
    src = "go n = if n > 0 then go (n - 1) else 0\nmain x = go x"
    p = parse_program(src)
    q, report = duplicate_defs(p)
    # Recursive self-reference is not a use site.
    assert report.empty()
    assert program_alpha_eq(q, p)


def test_copies_get_private_recursive_knots():
    src = THREE_USES
    q, report = duplicate_defs(parse_program(src))
    assert report.copies == {"incr": ["incr", "incr2", "incr3"]}
    uses = [t.name for t in iter_subterms(q.main) if isinstance(t, Var) and t.name.startswith("incr")]
    assert sorted(uses) == ["incr", "incr2", "incr3"]


def test_duplication_cascades_through_helpers():
    src = (
        "map f xs = case xs of { [] -> [] ; x :: rest -> f x :: map f rest }\n"
        "incr x = x + 1\n"
        "wrap g l = map g l\n"
        "main ls = wrap incr (wrap incr ls)"
    )
    q, report = duplicate_defs(parse_program(src))
    # Splitting wrap leaves map and incr each used twice, so they split too.
    assert report.copies == {
        "wrap": ["wrap", "wrap2"],
        "incr": ["incr", "incr2"],
        "map": ["map", "map2"],
    }
    bodies = {d.name: d.body for d in q.defs}
    wrap2_calls = {t.name for t in iter_subterms(bodies["wrap2"]) if isinstance(t, Var)}
    assert "map2" in wrap2_calls and "map" not in wrap2_calls


def test_max_copies_leaves_busy_definitions_shared():
    p = parse_program(THREE_USES)
    q, report = duplicate_defs(p, max_copies=2)
    assert report.empty()
    assert program_alpha_eq(q, p)
    q3, report3 = duplicate_defs(p, max_copies=3)
    assert report3.copies == {"incr": ["incr", "incr2", "incr3"]}
    assert len(q3.defs) == 3


def test_size_grows_by_at_most_the_use_count():
    for name in corpus_names():
        p = parse_program(corpus_source(name))
        q, _report = duplicate_defs(p)
        assert len(q.defs) <= sum(
            max(1, _count_uses(p, d.name)) for d in p.defs
        )


def _count_uses(prog, name):
    n = 0
    terms = [prog.main] + [d.body for d in prog.defs if d.name != name]
    for root in terms:
        for t in iter_subterms(root):
            if isinstance(t, Var) and t.name == name:
                n += 1
    return n


@pytest.mark.parametrize("name", corpus_names())
def test_duplication_preserves_semantics(name):
    p = parse_program(corpus_source(name))
    q, _report = duplicate_defs(p)
    for args, _expected in corpus_inputs(name):
        a = run_on(p, args, 200_000)
        b = run_on(q, args, 200_000)
        assert diff_outcomes(a, b) in ("match", "inconclusive")


@pytest.mark.parametrize("name", corpus_names())
def test_untouched_copies_merge_back(name):
    p = parse_program(corpus_source(name))
    q, _report = duplicate_defs(p)
    merged = merge_equivalent_copies(q)
    assert program_alpha_eq(merged, p)


def test_drop_unused_defs():
    p = parse_program("dead x = x\nmain y = y + 1")
    assert used_def_names(p) == set()
    q = drop_unused_defs(p)
    assert q.defs == []
    kept = parse_program("live x = x\nmain y = live y")
    assert used_def_names(kept) == {"live"}
    assert program_alpha_eq(drop_unused_defs(kept), kept)


def test_drop_unused_defs_keeps_transitive_uses():
    src = "a x = x + 1\nb y = a y\nmain z = b z"
    p = parse_program(src)
    assert used_def_names(p) == {"a", "b"}
    assert program_alpha_eq(drop_unused_defs(p), p)
