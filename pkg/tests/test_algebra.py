import json

import pytest

from iptk.algebra import (AlgebraError, FiniteAlgebra, canonical_value, characteristic_formula,
                          embedding, embeds_in_quotient, filters, heyting_from_order, load_algebra,
                          quotient, shipped_algebras, shipped_counterexamples, subalgebra)
from iptk.kernel import AND, BOT_OP, IMP, OR, parse

LC = parse("((x -> y) -> z) -> ((y -> x) -> z) -> z")
EM = parse("p | (p -> F)")


@pytest.fixture
def chain3():
    return heyting_from_order("C3", ["0", "h", "1"], [["0", "h"], ["h", "1"]])


@pytest.fixture
def boolean2():
    return heyting_from_order("B2", ["0", "1"], [["0", "1"]])


def test_three_chain_is_linear_but_not_boolean(chain3):
    assert chain3.validates(LC)
    assert not chain3.validates(EM)
    assert chain3.refuting_valuation(EM) == {"p": "h"}
    assert chain3.signature == frozenset({IMP, AND, OR, BOT_OP})


def test_two_element_algebra_is_boolean(boolean2):
    assert boolean2.validates(EM)
    assert boolean2.validates(parse("((p -> q) -> p) -> p"))


def test_bad_tables_are_rejected():
    with pytest.raises(AlgebraError):
        FiniteAlgebra("bad", ["a", "b"], [[0, 0], [0, 0]])
    with pytest.raises(AlgebraError):
        FiniteAlgebra("empty", [], [])
    with pytest.raises(AlgebraError):
        heyting_from_order("loop", ["a", "b"], [["a", "b"], ["b", "a"]])


def test_unsupported_connective(chain3):
    imp_only = subalgebra(chain3, ["h", "1"], "C2")
    assert imp_only.signature == frozenset({IMP, AND, OR})
    with pytest.raises(AlgebraError):
        imp_only.validates(EM)


def test_load_algebra_from_file(tmp_path, chain3):
    path = tmp_path / "c3.json"
    path.write_text(json.dumps(chain3.to_json()))
    again = load_algebra(str(path))
    assert again.elements == chain3.elements
    assert again.imp == chain3.imp
    covers = tmp_path / "covers.json"
    covers.write_text(json.dumps({"name": "C2", "domain": ["0", "1"], "covers": [["0", "1"]]}))
    assert load_algebra(str(covers)).validates(EM)


def test_filters_and_quotients(chain3, boolean2):
    assert len(filters(chain3)) == 3
    q = quotient(chain3, frozenset({chain3.index("h"), chain3.index("1")}))
    assert q.size == 2
    assert embedding(boolean2, chain3) == {"1": "1", "0": "0"}
    assert embedding(chain3, boolean2) is None
    found = embeds_in_quotient(boolean2, chain3)
    assert found is not None


def test_characteristic_formula_hits_the_opremum(chain3):
    char = characteristic_formula(chain3)
    assert chain3.elements[chain3.opremum()] == "h"
    assert canonical_value(chain3, char) == "h"
    assert char.pairs == 9
    assert not chain3.validates(char.formula)


def test_shipped_counterexamples_hold():
    items = shipped_counterexamples()
    assert [c.name for c in items] == ["wronski-i", "wronski-ii", "wronski-iii"]
    for c in items:
        assert c.verify() == []
        assert not c.algebra.validates(LC)
    assert len(shipped_algebras()) == 6
