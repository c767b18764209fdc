import pytest

from iptk.builder import ProofBuilder
from iptk.calculus import PROPER, check, named_logic, standard_ruleset
from iptk.decision import prove_ipc
from iptk.kernel import AND, BOT_OP, FULL, IMPLICATIONAL, Var, connectives, parse
from iptk.proof_transform import (LogicPair, bot_top_translate, conj_elim_general, conj_elim_ipc,
                                  eliminate_all, eliminate_lor_bot, scan_connectives, shipped_pair,
                                  star)
from iptk.structural import PreconditionError
from iptk.taut_transform import ipc_rules

p, q = Var("p"), Var("q")


@pytest.fixture
def rs():
    return ipc_rules()


def test_star_at_the_top_point():
    assert star(parse("F -> p")) is parse("x -> x")
    assert star(parse("p & q")) is parse("p & q")
    assert star(parse("(p -> F) -> F")) is parse("x -> x")
    assert star(parse("p | F")) is parse("p")
    assert star(parse("p -> F")) is None
    assert star(parse("q -> p"), {"q": False}) is parse("x -> x")


def test_lor_elimination_keeps_disjunctions_local(rs):
    phi = parse("p | q -> q | p")
    out = eliminate_lor_bot(rs, prove_ipc([], phi, rs=rs))
    assert check(rs, out, conclusion=phi).ok
    assert scan_connectives(out).clean()


def test_bot_elimination_for_a_negative_conclusion(rs):
    phi = parse("(p -> F) -> p -> q")
    out = eliminate_lor_bot(rs, prove_ipc([], phi, rs=rs), what=["bot"])
    assert check(rs, out, conclusion=phi).ok
    assert scan_connectives(out).clean(["bot"])


def test_bot_disappears_from_a_positive_conclusion(rs):
    b = ProofBuilder(rs)
    x = b.assume(p)
    y = b.assume(parse("p -> F"))
    negated = b.discharge_all([x, y], b.mp(b.mp(x, y), b.axiom("efq", a=q)))
    ident = b.identity(p)
    weak = b.mp(ident, b.axiom("K", a=b.statement(ident), b=b.statement(negated)))
    proof = b.proof(b.mp(negated, weak))
    assert any(BOT_OP in connectives(l.statement) for l in proof.lines)

    out = eliminate_lor_bot(rs, proof)
    assert check(rs, out, conclusion=parse("p -> p")).ok
    assert not any(BOT_OP in connectives(l.statement) for l in out.lines)


def test_unknown_elimination(rs):
    with pytest.raises(ValueError):
        eliminate_lor_bot(rs, prove_ipc([], parse("p -> p"), rs=rs), what=["and"])


def kc_proof_with_gratuitous_axiom():
    rs = named_logic("kc")
    b = ProofBuilder(rs)
    detour = b.axiom(PROPER, p=q)
    ident = b.identity(p)
    weak = b.mp(ident, b.axiom("K", a=b.statement(ident), b=b.statement(detour)))
    return rs, b.proof(b.mp(detour, weak))


def test_bot_top_translation_from_kc_to_ipc():
    rs, proof = kc_proof_with_gratuitous_axiom()
    assert check(rs, proof, conclusion=parse("p -> p")).ok
    pair = shipped_pair("kc-ipc")
    out = bot_top_translate(pair, proof)
    assert check(pair.target_rules, out, conclusion=parse("p -> p")).ok
    assert not any(BOT_OP in connectives(l.statement) for l in out.lines)
    assert pair.warm() > 0


def test_bot_top_pair_cache(tmp_path):
    rs, proof = kc_proof_with_gratuitous_axiom()
    pair = LogicPair(named_logic("kc"), named_logic("ipc"), name="kc-ipc", cache_dir=str(tmp_path))
    bot_top_translate(pair, proof)
    assert (tmp_path / "pair-kc-ipc.json").exists()
    again = LogicPair(named_logic("kc"), named_logic("ipc"), name="kc-ipc", cache_dir=str(tmp_path))
    assert check(again.target_rules, bot_top_translate(again, proof)).ok


def test_logic_pair_preconditions(rs):
    with pytest.raises(PreconditionError):
        LogicPair(named_logic("kc"), named_logic("ipc"), fragment=FULL)
    with pytest.raises(ValueError):
        shipped_pair("kc-lc")
    b = ProofBuilder(rs)
    with pytest.raises(PreconditionError):
        bot_top_translate(shipped_pair("kc-ipc"), b.proof(b.axiom("efq", a=p)))


def conj_detour(rs, f):
    """f from a proof of f that passes through f & f."""
    b = ProofBuilder(rs)
    x = b.assume(f)
    both = b.mp(x, b.mp(x, b.axiom("and_i", a=f, b=f)))
    return b, b.discharge(x, b.mp(both, b.axiom("and_e2", a=f, b=f)))


def test_conjunction_elimination_in_ipc(rs):
    b, line = conj_detour(rs, parse("p -> q"))
    proof = b.proof(line)
    assert any(AND in connectives(l.statement) for l in proof.lines)
    out = conj_elim_ipc(proof, rs)
    impl = standard_ruleset(IMPLICATIONAL)
    assert check(impl, out, conclusion=parse("(p -> q) -> p -> q")).ok
    assert all(IMPLICATIONAL.admits(l.statement) for l in out.lines)
    assert eliminate_all(rs, proof).conclusion is out.conclusion


def test_conjunction_elimination_rejects_non_implicational(rs):
    b, line = conj_detour(rs, p)
    with pytest.raises(PreconditionError):
        conj_elim_ipc(prove_ipc([], parse("p & q -> p"), rs=rs), rs)
    with pytest.raises(PreconditionError):
        conj_elim_general(named_logic("lc"), None, b.proof(line))


@pytest.mark.slow
def test_conjunction_elimination_in_lc():
    rs = named_logic("lc")
    b = ProofBuilder(rs)
    axiom = b.axiom(PROPER)
    inst = b.statement(axiom)
    both = b.mp(axiom, b.mp(axiom, b.axiom("and_i", a=inst, b=inst)))
    proof = b.proof(b.mp(both, b.axiom("and_e1", a=inst, b=inst)))
    out = eliminate_all(rs, proof)
    impl = rs.restrict(IMPLICATIONAL)
    assert check(impl, out, conclusion=inst).ok
    assert not any(AND in connectives(l.statement) for l in out.lines)
