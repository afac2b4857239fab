from lumberjack.parser import parse_expr, parse_program
from lumberjack.syntax import (
    App,
    Case,
    Ctor,
    Lam,
    LetRec,
    Var,
    alpha_eq,
    clone_term,
    count_occurrences,
    free_vars,
    int_of_name,
    is_reserved_name,
    iter_subterms,
    mk_int,
    next_nid,
    program_alpha_eq,
    subst,
    term_size,
)


def test_free_vars_lambda():
    t = Lam("x", App(Var("f"), Var("x")))
    assert free_vars(t) == {"f"}


def test_free_vars_letrec_binds_both_sides():
    t = LetRec("g", Var("g"), Var("g"))
    assert free_vars(t) == set()


def test_free_vars_case_binders():
    t = parse_expr("case xs of { x :: rest -> f x :: go rest ; [] -> acc }")
    assert free_vars(t) == {"xs", "f", "go", "acc"}


def test_alpha_eq_renamed_identity():
    assert alpha_eq(parse_expr("fun x -> x"), parse_expr("fun y -> y"))


def test_alpha_eq_distinguishes_bodies():
    assert not alpha_eq(parse_expr("fun x -> x"), parse_expr("fun x -> f x"))


def test_alpha_eq_free_names_matter():
    assert not alpha_eq(Var("a"), Var("b"))
    assert alpha_eq(Var("a"), Var("a"))


def test_alpha_eq_case_binders():
    a = parse_expr("case l of { x :: xs -> x ; [] -> z }")
    b = parse_expr("case l of { h :: t -> h ; [] -> z }")
    c = parse_expr("case l of { h :: t -> t ; [] -> z }")
    assert alpha_eq(a, b)
    assert not alpha_eq(a, c)


def test_program_alpha_eq_renamed_def_bodies():
    p1 = parse_program("map f xs = case xs of { [] -> [] ; x :: r -> f x :: map f r }\nmain l = map l\n")
    p2 = parse_program("map g ys = case ys of { [] -> [] ; a :: b -> g a :: map g b }\nmain l = map l\n")
    assert program_alpha_eq(p1, p2)


def test_program_alpha_eq_def_names_matter():
    p1 = parse_program("f x = x\nmain y = f y\n")
    p2 = parse_program("g x = x\nmain y = g y\n")
    assert not program_alpha_eq(p1, p2)


def test_subst_shares_then_clones():
    body = App(Var("x"), Var("x"))
    repl = parse_expr("f 1")
    out = subst(body, "x", repl)
    assert alpha_eq(out, parse_expr("(f 1) (f 1)"))
    nids = [t.nid for t in iter_subterms(out)]
    assert len(nids) == len(set(nids))


def test_subst_avoids_capture():
    t = parse_expr("fun y -> x y")
    out = subst(t, "x", Var("y"))
    # the free y must not be captured by the binder
    assert isinstance(out, Lam)
    assert out.param != "y"
    assert free_vars(out) == {"y"}


def test_subst_under_shadowing_stops():
    t = parse_expr("fun x -> x")
    assert alpha_eq(subst(t, "x", mk_int(1)), t)


def test_node_ids_fresh():
    assert next_nid() != next_nid()


def test_node_ids_fresh_in_bulk():
    ids = {next_nid() for _ in range(1_000_000)}
    assert len(ids) == 1_000_000


def test_clone_gives_fresh_ids_same_shape():
    t = parse_expr("case l of { x :: xs -> f x ; [] -> 0 }")
    c = clone_term(t)
    assert alpha_eq(t, c)
    old = {s.nid for s in iter_subterms(t)}
    new = {s.nid for s in iter_subterms(c)}
    assert old.isdisjoint(new)


def test_count_occurrences_respects_binders():
    t = parse_expr("x + (fun x -> x) 1")
    assert count_occurrences(t, "x") == 1


def test_term_size_counts_nodes():
    assert term_size(Var("x")) == 1
    assert term_size(App(Var("f"), Var("x"))) == 3
    assert term_size(Ctor("Nil", [])) == 1


def test_int_literals_are_reserved_vars():
    t = mk_int(42)
    assert isinstance(t, Var)
    assert is_reserved_name(t.name)
    assert int_of_name(t.name) == 42
    # free_vars reports reserved names too; closedness checks filter them
    assert free_vars(t) == {t.name}
