import pytest

from iptk.builder import ProofBuilder
from iptk.calculus import EF, check, named_logic
from iptk.decision import prove_ipc
from iptk.kernel import BOT_OP, OR, connectives, parse, to_text
from iptk.structural import PreconditionError
from iptk.taut_transform import (TRANSLATIONS, bar_basic, bar_essential, ipc_rules, plus,
                                 plus_transport, tilde, tilde_transport, translate)


@pytest.fixture
def rs():
    return ipc_rules()


@pytest.mark.parametrize("kind, text", [
    ("bar", "(p -> q | r) -> s"),
    ("bar", "p & q -> q & p"),
    ("bar-ess", "(p -> q | r) -> s"),
    ("bar-ess", "p | q -> r"),
    ("plus", "(p -> F) | q"),
    ("tilde", "p | q -> q | p"),
    ("hat", "p | (p -> F)"),
])
def test_translations_come_with_checked_proofs(kind, text):
    tr = translate(kind, parse(text))
    assert tr.verify()
    assert tr.to_dict()["kind"] == kind


def test_essential_translation_drops_inessential_premises():
    phi = parse("p | q -> r")
    assert bar_basic(phi).disjunction_premises == 1
    assert bar_essential(phi).disjunction_premises == 0


def test_plus_output():
    tr = plus(parse("p | (p -> F)"))
    assert to_text(tr.output) == "(_u0 -> p) -> p | (p -> _u0)"
    assert BOT_OP not in connectives(tr.output)


def test_tilde_output_is_disjunction_free():
    tr = tilde(parse("p | q -> q | p"))
    assert OR not in connectives(tr.output)
    assert tr.verify()


def test_unknown_translation():
    with pytest.raises(ValueError):
        translate("star", parse("p"))
    assert set(TRANSLATIONS) == {"bar", "bar-ess", "plus", "tilde", "hat"}


def test_plus_transport(rs):
    b = ProofBuilder(rs)
    proof = b.proof(b.axiom("efq", a=parse("p")))
    out = plus_transport(rs, proof)
    assert check(rs, out, conclusion=plus(parse("F -> p")).output).ok


def test_tilde_transport(rs):
    phi = parse("p | q -> q | p")
    proof = prove_ipc([], phi, rs=rs)
    out = tilde_transport(rs, proof)
    assert out.kind == EF
    assert check(rs, out, conclusion=tilde(phi).output).ok


def test_transports_refuse_unusable_input(rs):
    b = ProofBuilder(rs)
    proof = b.proof(b.axiom("efq", a=parse("p")))
    with pytest.raises(PreconditionError):
        plus_transport(named_logic("ipc-impl"), proof)
    h = ProofBuilder(rs, hypotheses=[parse("p | q")])
    with pytest.raises(PreconditionError):
        tilde_transport(rs, h.proof(h.hyp(parse("p | q"))))
