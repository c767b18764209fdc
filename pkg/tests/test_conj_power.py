import pytest

from iptk.calculus import check
from iptk.conj_power import (LC_IMPL, check_frag_axiom, conj_power_proofs, indexed,
                             indexed_ruleset, lc_witness, phi_conj_power, power_sizes,
                             shipped_witness)
from iptk.conj_split import Vectorizer
from iptk.kernel import IMPLICATIONAL, parse
from iptk.structural import PreconditionError

LC = parse(LC_IMPL)


def test_indexing_keeps_variable_positions():
    idx, positions = indexed(LC)
    assert idx is parse("((p0 -> p1) -> p2) -> ((p1 -> p0) -> p2) -> p2")
    assert positions == {"p": 0, "q": 1, "r": 2}


def test_compact_square_of_lc():
    a = [f"((p0 -> p1 -> p2) -> (p0 -> p1 -> p3) -> p{4 + s})" for s in (0, 1)]
    b = [f"((p2 -> p3 -> p0) -> (p2 -> p3 -> p1) -> p{4 + s})" for s in (0, 1)]
    expected = parse(" -> ".join(a + b + ["p4"]))
    assert phi_conj_power(LC, 2) is expected
    assert phi_conj_power(LC, 1) is indexed(LC)[0]
    with pytest.raises(ValueError):
        phi_conj_power(LC, 0)
    with pytest.raises(PreconditionError):
        phi_conj_power(parse("p & q -> p"), 2)


def test_split_power_of_negation_axiom():
    square = phi_conj_power(parse("((p -> F) -> F) -> p"), 2)
    assert square.op == "->"


def test_lc_witness_is_valid():
    witness = lc_witness()
    witness.validate()
    assert witness.to_dict()["name"] == "lc-impl"
    assert shipped_witness(parse("((a -> b) -> c) -> ((b -> a) -> c) -> c")) is not None
    assert shipped_witness(parse("p -> q -> p")) is None


def test_square_proofs_check():
    witness = lc_witness()
    idx = witness.indexed
    rs = indexed_ruleset(idx)
    squares = conj_power_proofs(witness, 2)
    assert len(squares) == 2
    for slot, proof in enumerate(squares):
        assert check(rs, proof, conclusion=Vectorizer(2)(idx)[slot]).ok
    assert all(IMPLICATIONAL.admits(line.statement) for q in squares for line in q.lines)


def test_power_arguments():
    witness = lc_witness()
    with pytest.raises(ValueError):
        conj_power_proofs(witness, 3)
    assert len(conj_power_proofs(witness, 1)) == 1


def test_frag_axiom_verdict_for_lc():
    verdict = check_frag_axiom(LC)
    assert verdict.provable
    assert check(verdict.ruleset, verdict.proof).ok


@pytest.mark.slow
def test_fourth_power_of_lc():
    witness = lc_witness()
    idx = witness.indexed
    rs = indexed_ruleset(idx)
    proofs = conj_power_proofs(witness, 4)
    assert len(proofs) == 4
    for slot, proof in enumerate(proofs):
        assert check(rs, proof, conclusion=Vectorizer(4)(idx)[slot]).ok
    sizes = power_sizes(witness, [2, 4])
    assert sizes[4]["slots"] == 4
