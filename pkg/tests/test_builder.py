import pytest

import iptk.decision
from iptk.builder import BuildError, LemmaLibrary, ProofBuilder, replace_equivalent
from iptk.calculus import EF, check, named_logic
from iptk.kernel import Var, parse

p, q, r = Var("p"), Var("q"), Var("r")


@pytest.fixture
def rs():
    return named_logic("ipc-impl")


def test_discharge_compiles_to_hilbert_lines(rs):
    b = ProofBuilder(rs)
    h1 = b.assume(parse("p -> q"))
    h2 = b.assume(parse("q -> r"))
    x = b.assume(p)
    z = b.mp(b.mp(x, h1), h2)
    line = b.discharge_all([h1, h2, x], z)
    assert b.deps(line) == frozenset()
    proof = b.proof(line)
    assert check(rs, proof, conclusion=parse("(p -> q) -> (q -> r) -> p -> r")).ok


def test_discharging_an_unused_assumption_weakens(rs):
    b = ProofBuilder(rs)
    a = b.assume(q)
    line = b.discharge(a, b.identity(p))
    assert b.statement(line) is parse("q -> p -> p")
    assert check(rs, b.proof(line)).ok


def test_nested_discharge_projects_outer_assumption(rs):
    b = ProofBuilder(rs)
    a = b.assume(p)
    c = b.assume(q)
    line = b.discharge_all([a, c], a)
    assert check(rs, b.proof(line), conclusion=parse("p -> q -> p")).ok


def test_builder_rejects_bad_steps(rs):
    b = ProofBuilder(rs)
    k = b.axiom("K", a=p, b=q)
    with pytest.raises(BuildError):
        b.mp(k, k)
    with pytest.raises(BuildError):
        b.axiom("and_i", a=p, b=q)
    with pytest.raises(BuildError):
        b.ext("e", p)
    with pytest.raises(BuildError):
        b.subst(k, {"p": q})
    with pytest.raises(BuildError):
        b.proof(b.assume(p))


def test_identical_lines_are_shared(rs):
    b = ProofBuilder(rs)
    first = b.axiom("K", a=p, b=q)
    assert b.axiom("K", {"a": p, "b": q}) == first
    assert len(b) == 1


def test_include_under_substitution():
    rs = named_logic("ipc")
    b = ProofBuilder(rs)
    template = ProofBuilder(rs)
    source = template.proof(template.identity(p))
    line = b.include(source, {"p": parse("q & r")})
    assert b.statement(line) is parse("q & r -> q & r")
    assert check(rs, b.proof(line)).ok


def test_extension_lines(rs):
    b = ProofBuilder(rs, EF)
    fwd, bwd = b.ext("e", parse("p -> q"))
    assert b.statement(fwd) is parse("e -> p -> q")
    assert b.statement(bwd) is parse("(p -> q) -> e")
    assert b.ext("e", parse("p -> q")) == (fwd, bwd)
    with pytest.raises(BuildError):
        b.ext("e", p)


def test_lemma_instances_check(rs):
    b = ProofBuilder(rs)
    line = b.lemma("exchange", a=p, b=q, c=r)
    assert b.statement(line) is parse("(p -> q -> r) -> q -> p -> r")
    assert check(rs, b.proof(line)).ok


def test_replace_equivalent_in_antecedent(rs):
    b = ProofBuilder(rs)
    fwd = b.hyp(parse("p -> q"))
    bwd = b.hyp(parse("q -> p"))
    phi = parse("p -> r")
    into, back = replace_equivalent(b, phi, (0,), fwd, bwd)
    assert b.statement(into) is parse("(p -> r) -> q -> r")
    assert b.statement(back) is parse("(q -> r) -> p -> r")
    assert check(rs, b.proof(into)).ok
    assert check(rs, b.proof(back)).ok


def test_lemma_library_reads_its_disk_cache(tmp_path, monkeypatch):
    LemmaLibrary(str(tmp_path)).get("contract")
    assert (tmp_path / "lemmas.json").exists()

    def refuse(*args, **kwargs):
        raise AssertionError("lemma should come from the cache")

    monkeypatch.setattr(iptk.decision, "prove_ipc", refuse)
    cached = LemmaLibrary(str(tmp_path)).get("contract")
    assert cached.conclusion is parse("(a -> a -> b) -> a -> b")
