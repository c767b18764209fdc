import pytest

from iptk.circuits import BlowUp, Circuit, from_formula, gate_formula, substitute_gates, to_formula
from iptk.generators import rn
from iptk.kernel import And, dag_size, parse


def test_from_formula_shares_subformulas():
    a = parse("p -> q")
    c = from_formula(And(a, a))
    assert c.gate_count() == dag_size(And(a, a)) == 4
    assert c.unfolded_size() == 7
    assert to_formula(c) is And(a, a)


def test_text_form():
    c = from_formula(parse("(p -> F) -> p & q"))
    again = Circuit.from_text(c.to_text())
    assert gate_formula(again, again.root) is parse("(p -> F) -> p & q")
    assert again.gate_count() == c.gate_count()


@pytest.mark.parametrize("text", ["g0 := var(p)", "g0 := var(p)\ng1 := imp(g0, g2)\nroot g1",
                                  "g0 := nand(g0)\nroot g0"])
def test_malformed_text(text):
    with pytest.raises(ValueError):
        Circuit.from_text(text)


def test_unfolding_refuses_blow_up():
    c = rn(30)
    with pytest.raises(BlowUp) as err:
        to_formula(c, size_bound=100)
    assert err.value.bound == 100
    assert err.value.size == c.unfolded_size()


def test_substitute_gates_embeds_once():
    c = from_formula(parse("p -> p"))
    out = substitute_gates(c, {"p": parse("q & r")})
    assert gate_formula(out, out.root) is parse("q & r -> q & r")
    assert out.gate_count() == 4
    assert to_formula(substitute_gates(c, {})) is parse("p -> p")


def test_add_rejects_forward_arguments():
    c = Circuit()
    c.var("p")
    with pytest.raises(ValueError):
        c.add("->", 0, 3)
