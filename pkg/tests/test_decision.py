import pytest

from iptk.builder import BuildError, ProofBuilder
from iptk.calculus import check
from iptk.decision import (PROVABLE, REFUTED, Effort, countermodel, decide_ext, decide_ipc,
                           derive_into, equiv_ipc, ipc_provable, minimal_ruleset, prove_ipc,
                           refutes, search_countermodel)
from iptk.kernel import parse

PEIRCE = parse("((p -> q) -> p) -> p")
LC = parse("((p -> q) -> r) -> ((q -> p) -> r) -> r")


def test_peirce_is_refuted_with_a_countermodel():
    verdict = decide_ipc(PEIRCE)
    assert verdict.status == REFUTED
    assert refutes(verdict.model, PEIRCE)
    assert verdict.to_dict()["verdict"] == "refuted"
    assert "countermodel" in verdict.to_dict()


@pytest.mark.parametrize("text", [
    "(p & q -> r) -> p -> q -> r",
    "p | q -> q | p",
    "(p -> F) -> p -> q",
    "(((p -> F) -> F) -> F) -> p -> F",
])
def test_provable_formulas_get_checked_proofs(text):
    phi = parse(text)
    verdict = decide_ipc(phi, with_proof=True)
    assert verdict.provable
    rs = minimal_ruleset([phi])
    assert check(rs, verdict.proof, conclusion=phi).ok


def test_prove_from_hypotheses():
    hyps = [parse("p | q"), parse("p -> r"), parse("q -> r")]
    r = parse("r")
    proof = prove_ipc(hyps, r)
    assert proof.hypotheses == hyps
    assert check(minimal_ruleset(hyps + [r]), proof, conclusion=r).ok
    assert prove_ipc([parse("p | q")], r) is None


def test_derive_into_raises_when_not_derivable():
    rs = minimal_ruleset([parse("p -> q")])
    b = ProofBuilder(rs)
    with pytest.raises(BuildError):
        derive_into(b, parse("p -> q"))


def test_countermodel_respects_hypotheses():
    hyps = [parse("p -> q")]
    model = countermodel(parse("q -> p"), hyps)
    assert refutes(model, parse("q -> p"), hyps)
    assert countermodel(parse("p -> p")) is None


def test_equivalence_and_provability():
    assert equiv_ipc(parse("p -> q -> r"), parse("p & q -> r"))
    assert not equiv_ipc(parse("(p -> F) -> F"), parse("p"))
    assert ipc_provable(parse("q"), [parse("p"), parse("p -> q")])


def test_exhaustive_countermodel_search():
    model = search_countermodel(parse("p | (p -> F)"), 2)
    assert model is not None
    assert not model.forces(model.root(), parse("p | (p -> F)"))
    assert search_countermodel(parse("p -> p"), 3) is None


def test_excluded_middle_extension_proves_peirce():
    verdict = decide_ext([parse("p | (p -> F)")], PEIRCE)
    assert verdict.status == PROVABLE
    assert check(verdict.ruleset, verdict.proof, conclusion=PEIRCE).ok
    assert verdict.to_dict()["verdict"] == "provable"


def test_linear_extension_does_not_prove_excluded_middle():
    verdict = decide_ext([LC], parse("p | (p -> F)"), Effort(max_instances=2))
    assert verdict.refuted
    assert verdict.model is not None or verdict.algebra is not None
