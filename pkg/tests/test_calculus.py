import pytest

from iptk.builder import ProofBuilder
from iptk.calculus import (EF, F, SF, Axiom, CheckError, Ext, Hyp, Line, Proof, RuleSet, check,
                           named_logic, proof_from_json, proof_to_json)
from iptk.kernel import IMPLICATIONAL, Impl, Substitution, Var, parse

p, q, r = Var("p"), Var("q"), Var("r")


@pytest.fixture
def impl_rules():
    return named_logic("ipc-impl")


def identity_proof(rs, a):
    b = ProofBuilder(rs)
    return b.proof(b.identity(a))


def extension_proof(rs):
    """p -> p through the abbreviation q := p."""
    b = ProofBuilder(rs, EF)
    fwd, bwd = b.ext("q", p)
    pqp = b.mp(fwd, b.axiom("K", a=b.statement(fwd), b=p))
    dist = b.mp(pqp, b.axiom("S", a=p, b=q, c=p))
    return b.proof(b.mp(bwd, dist))


def test_identity_proof_is_accepted(impl_rules):
    proof = identity_proof(impl_rules, p)
    report = check(impl_rules, proof, conclusion=parse("p -> p"))
    assert report.ok
    assert proof.num_lines() == 5
    assert report.to_dict()["k_P"] == 5
    assert report.to_dict()["s_P"] == proof.size()
    assert proof.axiom_names() == {"S", "K"}


def test_broken_modus_ponens_is_reported(impl_rules):
    proof = identity_proof(impl_rules, p)
    last = proof.lines[-1]
    broken = Proof(F, [], proof.lines[:-1] + [Line(parse("q -> q"), last.just)])
    report = check(impl_rules, broken)
    assert not report.ok
    assert report.failed_line == 4
    with pytest.raises(CheckError):
        broken.require_ok(impl_rules)


def test_wrong_conclusion_is_reported(impl_rules):
    report = check(impl_rules, identity_proof(impl_rules, p), conclusion=parse("q -> q"))
    assert not report.ok
    assert report.failed_line == 4


def test_axiom_line_must_match_its_substitution(impl_rules):
    line = Line(parse("p -> q -> q"), Axiom("K", Substitution({"a": p, "b": q})))
    report = check(impl_rules, Proof(F, [], [line]))
    assert not report.ok and report.failed_line == 0


def test_lines_outside_the_fragment_are_rejected(impl_rules):
    line = Line(parse("p & q -> p"), Axiom("and_e1", Substitution({"a": p, "b": q})))
    report = check(impl_rules, Proof(F, [], [line]))
    assert not report.ok
    assert "outside fragment" in report.reason


def test_hypothesis_lines(impl_rules):
    proof = Proof(F, [p], [Line(p, Hyp(0))])
    assert check(impl_rules, proof).ok
    assert not check(impl_rules, Proof(F, [q], [Line(p, Hyp(0))])).ok
    assert not check(impl_rules, Proof(SF, [p], [Line(p, Hyp(0))])).ok


def test_extension_side_conditions(impl_rules):
    proof = extension_proof(impl_rules)
    report = check(impl_rules, proof, conclusion=parse("p -> p"))
    assert report.ok
    assert report.extension_axioms == 1
    assert proof.extension_vars() == ["q"]

    # the abbreviation may not survive into the conclusion
    assert not check(impl_rules, Proof(EF, [], [Line(Impl(q, p), Ext("q", p, True))])).ok
    # nor be used outside extended Frege
    assert not check(impl_rules, Proof(F, [], [Line(Impl(q, p), Ext("q", p, True))])).ok
    circular = Proof(EF, [], [Line(Impl(q, Impl(q, p)), Ext("q", Impl(q, p), True))])
    assert "occurs in its definition" in check(impl_rules, circular).reason


def test_substitution_rule(impl_rules):
    b = ProofBuilder(impl_rules, SF)
    k = b.axiom("K", a=p, b=q)
    line = b.subst(k, {"p": parse("r -> r")})
    proof = b.proof(line)
    assert check(impl_rules, proof, conclusion=parse("(r -> r) -> q -> r -> r")).ok


def test_named_logics():
    assert named_logic("ipc").proper is None
    assert named_logic("lc-impl").proper is parse("((p -> q) -> r) -> ((q -> p) -> r) -> r")
    assert named_logic("lc").restrict(IMPLICATIONAL).proper is named_logic("lc-impl").proper
    assert named_logic("kc").restrict(IMPLICATIONAL).proper is None
    assert "efq" not in named_logic("ipc-impl").axioms
    with pytest.raises(ValueError):
        named_logic("kc", IMPLICATIONAL)
    with pytest.raises(ValueError):
        named_logic("s4")


def test_ruleset_json():
    rs = named_logic("kc")
    again = RuleSet.from_json(rs.to_json())
    assert again.proper is rs.proper
    assert set(again.axioms) == set(rs.axioms)
    assert again.fragment == rs.fragment


def test_proof_json_keeps_proofs_checkable(impl_rules):
    for proof in (identity_proof(impl_rules, parse("p -> q")), extension_proof(impl_rules)):
        rs, again = proof_from_json(proof_to_json(proof, impl_rules))
        assert again.kind == proof.kind
        assert again.conclusion is proof.conclusion
        assert check(rs, again).ok
