import itertools

import pytest

from iptk.calculus import check
from iptk.kernel import FragmentError, FreshnessError, parse, to_text, variables
from iptk.negtrans import (NandRefutation, NandStep, NegativeFormula, SatisfiableInput,
                           classical_core, classical_value, glivenko, implicational_rules,
                           is_negative, neg_mon_library, nneg, refute_nand, sep_proof,
                           separation_formula, to_u)
from iptk.structural import PreconditionError


@pytest.fixture
def rs():
    return implicational_rules()


def test_nneg_is_classical_negation():
    phi = parse("(p & q) | r")
    out = nneg(phi)
    assert is_negative(out)
    names = sorted(variables(phi))
    for values in itertools.product([False, True], repeat=len(names)):
        assignment = dict(zip(names, values))
        assert classical_value(out, assignment) == (not classical_value(phi, assignment))
    assert nneg(parse("p")) is parse("p -> F")
    with pytest.raises(FragmentError):
        nneg(parse("p -> q"))


def test_to_u_replaces_bottom():
    assert to_u(parse("(p -> F) -> F"), "u") is parse("(p -> u) -> u")
    with pytest.raises(FreshnessError):
        to_u(parse("u -> F"), "u")
    with pytest.raises(FragmentError):
        NegativeFormula(parse("p -> q"))


def test_refutation_of_contradiction():
    refutation = refute_nand([parse("p"), parse("p -> F")])
    assert refutation.validate() is None
    assert refutation.steps[-1].sequent == refutation.goal


def test_satisfiable_input_has_no_refutation():
    with pytest.raises(SatisfiableInput) as err:
        refute_nand([parse("p"), parse("q -> F")])
    assert err.value.assignment == {"p": True, "q": False}


def test_validate_reports_bad_steps():
    goal = (parse("p"),)
    bogus = NandRefutation(goal, [NandStep(goal, "init", (), (parse("p"),))])
    assert bogus.validate() is not None
    assert NandRefutation(goal, []).validate() == "last step is not the goal"


def test_glivenko_proof_of_negative_tautology(rs):
    phi = parse("p -> (p -> F) -> F")
    proof = glivenko(phi)
    assert check(rs, proof, conclusion=to_u(phi, "u")).ok


def test_glivenko_with_nested_premises(rs):
    phi = parse("((p -> F) -> F) -> (p -> F) -> F")
    proof = glivenko(phi, seed=3)
    assert check(rs, proof, conclusion=parse("((p -> u) -> u) -> (p -> u) -> u")).ok


def test_monotone_negation_library(rs):
    library = neg_mon_library(parse("p"), parse("q"))
    assert set(library) >= {"or_left", "or_intro", "monotone", "shift_fwd"}
    for proof in library.values():
        assert check(rs, proof).ok
    with pytest.raises(FreshnessError):
        neg_mon_library(parse("u"), parse("q"))


def test_classical_core_is_unsatisfiable():
    core = classical_core(1, parse("p0"), parse("p0_"))
    refutation = refute_nand(core)
    assert refutation.validate() is None


@pytest.mark.parametrize("n", [1, 2])
def test_separation_proof(rs, n):
    gamma, delta = parse("p0"), parse("p0_")
    proof = sep_proof(n, gamma, delta)
    target = separation_formula(n, gamma, delta)
    report = check(rs, proof, conclusion=target)
    assert report.ok, report.reason
    assert proof.kind == "SF"


@pytest.mark.slow
def test_separation_proof_larger_block(rs):
    gamma, delta = parse("p0 & p1"), parse("p0_ | p1_")
    proof = sep_proof(3, gamma, delta)
    assert check(rs, proof, conclusion=separation_formula(3, gamma, delta)).ok


def test_separation_preconditions():
    with pytest.raises(PreconditionError):
        sep_proof(0, parse("p0"), parse("p0_"))
    with pytest.raises(PreconditionError):
        sep_proof(1, parse("p0 -> p0"), parse("p0_"))
    with pytest.raises(FreshnessError):
        sep_proof(1, parse("u"), parse("p0_"))
    assert "u" in to_text(separation_formula(1, parse("p0"), parse("p0_")))
