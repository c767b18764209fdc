import random

import pytest

from iptk.generators import alpha, conj_cnf_family
from iptk.kernel import IMPLICATIONAL, FragmentError, parse, to_text
from iptk.semantics import (KripkeModel, MClass, Tree, X, Y, brute_force_min_equivalent,
                            classify_in_M, cnf_formula, formula_forest, has_class_path,
                            int_limd_check, model_M, model_M_eval, monotone_cnf, paths,
                            random_model, rooted_frames, unnested, unnested_top_check)

PEIRCE = parse("((p -> q) -> p) -> p")


@pytest.fixture
def chain():
    return KripkeModel.build(["a", "b"], [("a", "b")], {"b": ["p"]})


def test_two_point_chain_refutes_peirce(chain):
    assert chain.root() == "a"
    assert not chain.forces("a", PEIRCE)
    assert chain.forces("b", PEIRCE)
    assert chain.valid(parse("p -> p"))
    assert not chain.valid(parse("p | (p -> F)"))


def test_non_persistent_valuation_is_rejected():
    with pytest.raises(ValueError):
        KripkeModel.build(["a", "b"], [("a", "b")], {"a": ["p"]})


def test_model_json(chain):
    again = KripkeModel.from_json(chain.to_json())
    assert again.points == chain.points
    assert again.truth_mask(PEIRCE) == chain.truth_mask(PEIRCE)


def test_rooted_frame_counts():
    assert [len(rooted_frames(n)) for n in range(1, 5)] == [1, 1, 2, 5]


def test_restriction_keeps_forcing(chain):
    top = chain.restrict(["b"])
    assert top.root() == "b"
    assert top.valid(PEIRCE)


def test_random_models_are_persistent():
    rng = random.Random(7)
    for _ in range(20):
        model = random_model(4, ["p", "q"], rng)
        f = parse("p -> q")
        mask = model.truth_mask(f)
        assert model.order.is_up_set(mask)


def test_two_column_model():
    assert model_M_eval(X(0), parse("p1"))
    for n in range(1, 5):
        assert model_M_eval(Y(n + 1), alpha(n))
        assert not model_M_eval(X(n + 1), alpha(n))
    model = model_M(3, ["p0", "p1"])
    for name in ("p0", "p1"):
        assert model.order.is_up_set(model.val[name])


@pytest.mark.parametrize("text, expected", [
    ("p0", MClass("beta", 1)),
    ("(p0 -> p1) -> p1", MClass("beta", 1)),
    ("p0 -> p1", MClass("alpha", 1)),
    ("p1 -> p1", MClass("top")),
    ("F", MClass("bot")),
])
def test_classify_in_two_column_model(text, expected):
    assert classify_in_M(parse(text)) == expected


def test_classification_rejects_conjunctions():
    with pytest.raises(FragmentError):
        classify_in_M(parse("p0 & p1"))


def test_formula_forest():
    forest = formula_forest(parse("p | q -> r | s"))
    leaves = (Tree("p"), Tree("q"))
    assert forest == (Tree("r", leaves), Tree("s", leaves))
    assert ("p", "r") in set(paths(forest))


def test_unnested_occurrences():
    assert unnested(parse("p -> q")) == [(), (1,)]
    assert unnested(parse("(p -> q) | r")) == [(), (0,), (0, 1), (1,)]
    assert unnested_top_check(parse("(p -> p) | q"))


def test_class_paths():
    for text in ("p0 -> p1", "p0", "(p0 -> p1) -> p1"):
        assert has_class_path(parse(text))


def test_monotone_cnf():
    clauses = monotone_cnf(conj_cnf_family(2))
    assert len(clauses) == 4
    assert monotone_cnf(parse("p & q")) == frozenset({frozenset({"p"}), frozenset({"q"})})
    assert monotone_cnf(parse("p | q")) == frozenset({frozenset({"p", "q"})})
    assert monotone_cnf(cnf_formula(clauses)) == clauses
    with pytest.raises(FragmentError):
        monotone_cnf(parse("p -> q"))


def test_brute_force_finds_smallest_equivalent():
    result = brute_force_min_equivalent(parse("p & p -> p"), IMPLICATIONAL, ["p"], 3)
    assert result.complete
    assert to_text(result.witness) == "p -> p"
    assert result.to_dict()["searched_size"] == 3


def test_depth_check_for_small_n():
    report = int_limd_check(1)
    assert report.alpha_separates
    assert report.confirmed
    assert report.to_dict()["confirmed"] is True
    with pytest.raises(ValueError):
        int_limd_check(0)
