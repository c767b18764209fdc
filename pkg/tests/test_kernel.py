import pytest

from iptk.kernel import (AND, BOT, FULL, IMP, IMP_AND, IMPLICATIONAL, OR, POSITIVE, And, Fragment,
                         FragmentError, FreshNames, FreshnessError, Impl, ParseError, Substitution,
                         Var, big_and, conj_free_decompose, connectives, dag_size,
                         essential_disjunctions, head, join, limd, negative_disjunctions, parse,
                         polarity_at, replace_at, subterm_at, to_text, top, variables)


def test_hash_consing_makes_equal_formulas_identical():
    assert parse("(p -> q) & r") is And(Impl(Var("p"), Var("q")), Var("r"))
    assert parse("p -> q -> r") is parse("p -> (q -> r)")


def test_parse_precedence_and_printing():
    f = parse("p & q | r -> s")
    assert f.op == IMP
    assert f.left.op == OR
    assert f.left.left.op == AND
    assert to_text(parse("(p -> q) -> r")) == "(p -> q) -> r"
    assert to_text(parse("p -> (q -> r)")) == "p -> q -> r"
    assert parse("⊥ → p ∧ q") is parse("F -> p & q")


@pytest.mark.parametrize("text", ["p ->", "(p", "p q", "p $ q", ""])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse(text)


def test_sizes_and_sharing():
    a = parse("p -> q")
    f = And(a, a)
    assert f.size == 7
    assert dag_size(f) == 4


def test_connectives_and_variables():
    f = parse("(p | q) -> F")
    assert connectives(f) == frozenset({IMP, OR, "F"})
    assert variables(f) == frozenset({"p", "q"})


@pytest.mark.parametrize("name", ["p\n", "p q", "1p", "", "F"])
def test_variable_names_must_be_whole_identifiers(name):
    with pytest.raises(ValueError):
        Var(name)


def test_top_depends_on_fragment():
    assert top() is Impl(BOT, BOT)
    assert top(POSITIVE) is parse("x -> x")
    assert big_and([]) is top()
    assert big_and([Var("a"), Var("b"), Var("c")]) is parse("(a & b) & c")


def test_join_and_head():
    f = join([Var("a"), Var("b")], Var("c"))
    assert f is parse("a -> b -> c")
    premises, h = head(f)
    assert premises == [Var("a"), Var("b")]
    assert h is Var("c")


def test_substitution_compose_and_restrict():
    s = Substitution({"p": parse("q & r")})
    t = Substitution({"q": parse("a")})
    assert s(parse("p -> q")) is parse("q & r -> q")
    composed = t.compose(s)
    assert composed(parse("p -> q")) is parse("a & r -> a")
    assert Substitution({"p": Var("p")}).is_identity()
    assert s.restrict(["q"]).is_identity()
    assert s["z"] is Var("z")


def test_fresh_names_refuse_collisions():
    fresh = FreshNames({"_t1"})
    assert fresh.fresh() == "_t0"
    with pytest.raises(FreshnessError):
        fresh.fresh()


def test_paths_and_polarity():
    f = parse("(p -> q) -> r")
    assert subterm_at(f, (0, 1)) is Var("q")
    assert polarity_at(f, (0, 0)) is True
    assert polarity_at(f, (0, 1)) is False
    assert replace_at(f, (1,), Var("s")) is parse("(p -> q) -> s")


def test_disjunction_classification():
    f = parse("(p | q -> r) -> s")
    assert negative_disjunctions(parse("p | q -> r")) == [(0,)]
    assert essential_disjunctions(parse("p | q")) == []
    # reaching an antecedent through a disjunction only is inessential
    assert essential_disjunctions(parse("(p | q) -> r")) == []
    assert essential_disjunctions(f) == []
    assert essential_disjunctions(parse("((p -> q | r) -> s) -> t")) == []
    assert essential_disjunctions(parse("(p -> q | r) -> s")) == [(0, 1)]
    assert essential_disjunctions(parse("((p -> q | r) -> F) -> s")) == []


def test_limd_counts_left_nesting():
    assert limd(parse("p")) == 0
    assert limd(parse("p -> q -> r")) == 1
    assert limd(parse("(p -> q) -> r")) == 2


def test_conj_free_decompose():
    parts = conj_free_decompose(parse("p -> q & r"))
    assert parts == [parse("p -> q"), parse("p -> r")]
    assert all(IMPLICATIONAL.admits(g) for g in parts)


def test_fragments():
    frag = Fragment.parse("->, &")
    assert frag == IMP_AND
    assert Fragment.of(AND) == IMP_AND
    assert str(FULL) == "->,&,|,F"
    assert frag.admits(parse("p & q -> p"))
    assert not frag.admits(parse("p | q"))
    assert OR in POSITIVE
    with pytest.raises(FragmentError):
        Fragment.parse("&, ~")
    with pytest.raises(FragmentError):
        Fragment(frozenset({AND}))
