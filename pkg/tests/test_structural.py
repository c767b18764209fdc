import pytest

from iptk.builder import ProofBuilder
from iptk.calculus import CF, EF, SF, Ext, check, named_logic
from iptk.kernel import FreshnessError, Substitution, Var, parse
from iptk.structural import (PreconditionError, cf_to_ef, deduction, ef_to_cf, instantiate_template,
                             struct_compose, struct_reorder)

p, q, r = Var("p"), Var("q"), Var("r")


@pytest.fixture
def rs():
    return named_logic("ipc-impl")


def identity(rs, a, kind="F"):
    b = ProofBuilder(rs, kind)
    return b.proof(b.identity(a))


def test_instantiate_template_replays_axioms():
    rs = named_logic("ipc")
    proof = instantiate_template(rs, identity(rs, p), Substitution({"p": parse("q & r")}))
    assert check(rs, proof, conclusion=parse("q & r -> q & r")).ok
    assert proof.num_lines() == 5


def test_instantiate_substitution_frege_template(rs):
    template = identity(rs, p, SF)
    proof = instantiate_template(rs, template, Substitution({"p": q}))
    assert proof.num_lines() == template.num_lines() + 1
    assert check(rs, proof, conclusion=parse("q -> q")).ok


def test_instantiate_refuses_extension_variables(rs):
    b = ProofBuilder(rs, EF)
    fwd, _ = b.ext("e", p)
    template = b.proof(b.mp(fwd, b.axiom("K", a=b.statement(fwd), b=q)))
    with pytest.raises(FreshnessError):
        instantiate_template(rs, template, Substitution({"e": q}))


def test_reorder_with_exchange_weakening_and_contraction(rs):
    proof = struct_reorder(rs, [p, q, p], [q, p, r], Var("s"))
    assert check(rs, proof, conclusion=parse("(p -> q -> p -> s) -> q -> p -> r -> s")).ok


def test_reorder_needs_every_premise(rs):
    with pytest.raises(PreconditionError):
        struct_reorder(rs, [p, q], [p], r)


def test_compose(rs):
    a = Var("a")
    proof = struct_compose(rs, [a], [p, q], r)
    assert check(rs, proof, conclusion=parse("(p -> q -> r) -> (a -> p) -> (a -> q) -> a -> r")).ok


def test_deduction_discharges_all_hypotheses(rs):
    b = ProofBuilder(rs, hypotheses=[parse("p -> q"), parse("q -> r"), p])
    h1, h2, x = (b.hyp(h) for h in list(b.hypotheses))
    source = b.proof(b.mp(b.mp(x, h1), h2))
    assert source.hypotheses

    proof = deduction(rs, source)
    assert proof.hypotheses == []
    assert check(rs, proof, conclusion=parse("(p -> q) -> (q -> r) -> p -> r")).ok


def test_deduction_rejects_substitution_frege(rs):
    with pytest.raises(PreconditionError):
        deduction(rs, identity(rs, p, SF))


def test_ef_to_cf_unfolds_abbreviations(rs):
    b = ProofBuilder(rs, EF)
    fwd, bwd = b.ext("e", p)
    pep = b.mp(fwd, b.axiom("K", a=b.statement(fwd), b=p))
    dist = b.mp(pep, b.axiom("S", a=p, b=Var("e"), c=p))
    source = b.proof(b.mp(bwd, dist))
    assert check(rs, source).ok

    proof = ef_to_cf(rs, source)
    assert proof.kind == CF
    assert not any(isinstance(line.just, Ext) for line in proof.lines)
    assert check(rs, proof, conclusion=parse("p -> p")).ok


def test_cf_to_ef_names_shared_gates(rs):
    a = parse("p -> p")
    source = identity(rs, a, CF)
    proof = cf_to_ef(rs, source)
    assert proof.kind == EF
    assert proof.extension_vars()
    assert check(rs, proof, conclusion=parse("(p -> p) -> p -> p")).ok


def test_cf_to_ef_copies_tree_like_proofs(rs):
    b = ProofBuilder(rs, CF)
    source = b.proof(b.axiom("K", a=p, b=q))
    proof = cf_to_ef(rs, source)
    assert proof.kind == EF
    assert proof.lines == source.lines
    assert check(rs, proof).ok
