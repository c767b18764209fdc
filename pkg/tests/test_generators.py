import pytest

from iptk.calculus import check
from iptk.decision import decide_ipc, equiv_ipc, minimal_ruleset
from iptk.generators import (FAMILIES, alpha, alpha_conj2, alpha_conj2_impl, clique_colour_family,
                             clique_colour_size, conj_cnf_family, default_clique_colour, family_eq1,
                             family_eq2, family_eq6, generate, index_variables, rn, rn_classes,
                             rn_formula, shipped_axioms, xi)
from iptk.kernel import (IMPLICATIONAL, FragmentError, essential_disjunctions, is_strict_monotone,
                         parse, to_text, variables)
from iptk.negtrans import classical_value, implicational_rules, sep_proof


def test_alpha_is_left_nested():
    assert alpha(0) is parse("p0")
    assert alpha(2) is parse("(p0 -> p1) -> p2")
    with pytest.raises(ValueError):
        alpha(-1)


def test_conjunctive_alpha_and_its_implicational_form():
    assert alpha_conj2(1) is parse("p0_0 & p0_1 -> p1")
    assert alpha_conj2_impl(1) is parse("p0_0 -> p0_1 -> p1")
    for n in range(6):
        assert alpha_conj2_impl(n).size == 2 ** (n + 2) - 3
        assert IMPLICATIONAL.admits(alpha_conj2_impl(n))
    for n in range(3):
        assert equiv_ipc(alpha_conj2(n), alpha_conj2_impl(n))


def test_xi_splits_every_variable():
    assert xi(2, parse("p0 -> p1")) is parse("p0 & p1 -> p2 & p3")
    assert xi(1, parse("p3")) is parse("p3")
    with pytest.raises(FragmentError):
        xi(2, parse("q"))


def test_index_variables():
    renamed, back = index_variables(parse("b -> a"))
    assert renamed is parse("p1 -> p0")
    assert back(renamed) is parse("b -> a")


def test_rieger_nishimura_ladder():
    assert to_text(rn_formula(4)) == "(p -> F) -> p"
    assert rn_formula(3) is parse("p | (p -> F)")
    assert rn(12).gate_count() == 13
    assert rn_classes(7) == [[i] for i in range(8)]


def test_disjunction_premise_shapes():
    f = family_eq2(1, parse("p0"), parse("p0_"))
    assert f is parse("(p0 | p0_) -> (s0 | s0_ -> p0) | (r0 | r0_ -> p0_)")
    with pytest.raises(FragmentError):
        family_eq2(1, parse("p0 -> p1"), parse("p0_"))
    assert family_eq1(1, parse("p0"), parse("q")) is parse("(p0 | p0_) -> (p0 -> F) | (q -> F)")


def test_smallest_members_are_tautologies():
    assert decide_ipc(family_eq1(1, parse("p0 -> F"), parse("p0_ -> F"))).provable
    assert decide_ipc(family_eq2(1, parse("p0"), parse("p0_"))).provable
    assert decide_ipc(family_eq6(1, parse("p0"), parse("p0_"))).provable
    # each body must hold under every choice in its own block
    assert decide_ipc(family_eq2(1, parse("s0"), parse("r0"))).refuted


def test_disjunction_premise_shapes_have_no_essential_disjunctions():
    gamma, delta = default_clique_colour(1)
    assert essential_disjunctions(family_eq2(clique_colour_size(1), gamma, delta)) == []
    assert essential_disjunctions(family_eq1(2, parse("p0 -> F"), parse("p1_ -> F"))) == []


def test_clique_colour_instance_uses_every_block():
    gamma, delta = default_clique_colour(1)
    assert clique_colour_size(1) == 3
    gv, dv = variables(gamma), variables(delta)
    assert {"s0", "s1", "s2", "s0_", "s1_", "s2_", "p0", "p1", "p2"} == gv
    assert {"r0", "r1", "r2", "r0_", "r1_", "r2_", "p0_", "p1_", "p2_"} == dv
    assert is_strict_monotone(gamma) and is_strict_monotone(delta)
    with pytest.raises(ValueError):
        default_clique_colour(0)


def test_clique_colour_members_are_tautologies():
    phi = generate("eq2", 1)
    assert phi is clique_colour_family(1)
    verdict = decide_ipc(phi, with_proof=True)
    assert verdict.provable
    assert check(minimal_ruleset([phi]), verdict.proof, conclusion=phi).ok


def test_clique_colour_bodies_separate_graphs():
    gamma, delta = default_clique_colour(1)
    # a triangle: the full vertex set misses no edge and every colouring clashes
    triangle = {"p0_": True, "p1_": True, "p2_": True, "p0": False, "p1": False, "p2": False}
    full_set = {"s0": True, "s1": True, "s2": True, "s0_": False, "s1_": False, "s2_": False}
    assert not classical_value(gamma, {**triangle, **full_set})
    colouring = {"r0": True, "r1": False, "r2": True, "r0_": False, "r1_": True, "r2_": False}
    assert classical_value(delta, {**triangle, **colouring})
    # a single edge is 2-colourable
    one_edge = {"p0_": True, "p1_": False, "p2_": False, "p0": False, "p1": True, "p2": True}
    assert not classical_value(delta, {**one_edge, **colouring})


def test_separation_member_is_implicational():
    phi = generate("eq6", 1)
    gamma, delta = default_clique_colour(1)
    assert phi is family_eq6(clique_colour_size(1), gamma, delta)
    assert IMPLICATIONAL.admits(phi)
    assert {"u", "v", "w"} <= set(variables(phi))


@pytest.mark.slow
def test_clique_colour_member_for_four_vertices():
    assert decide_ipc(generate("eq2", 2)).provable


@pytest.mark.slow
def test_separation_member_has_a_checked_proof():
    proof = sep_proof(clique_colour_size(1), *default_clique_colour(1))
    assert check(implicational_rules(), proof, conclusion=generate("eq6", 1)).ok


def test_shipped_axioms_are_not_ipc_theorems():
    for name, axiom in shipped_axioms().items():
        assert decide_ipc(axiom).refuted, name


def test_generate_dispatch():
    assert generate("cnf", 2) is conj_cnf_family(2)
    assert generate("axiom", 0) is shipped_axioms()["kc"]
    for family in FAMILIES:
        assert generate(family, 1) is not None
    with pytest.raises(ValueError):
        generate("nope", 1)


def test_shipped_axioms_parse():
    axioms = shipped_axioms()
    assert axioms["lc"] is parse("((p -> q) -> r) -> ((q -> p) -> r) -> r")
    assert {"pp", "qq"} <= set(variables(axioms["lc-conj2"]))
