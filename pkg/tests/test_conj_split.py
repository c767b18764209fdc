import pytest

from iptk.calculus import check, named_logic
from iptk.conj_split import Splitter, Vectorizer, conj_elim_impl, conj_split_circuit, default_atoms
from iptk.decision import equiv_ipc
from iptk.kernel import BOT, IMPLICATIONAL, Impl, Var, big_and, parse
from iptk.structural import PreconditionError


def test_default_atoms_order():
    atoms = default_atoms([parse("q -> p10 -> p2 -> F")])
    assert atoms == [Var("p2"), Var("p10"), Var("q"), BOT]


def test_components_of_an_atom():
    assert conj_split_circuit(parse("p"), [Var("p"), Var("q")]) == [parse("p"), parse("q -> q")]


@pytest.mark.parametrize("text", ["p & q", "(p -> q & r) -> q", "(p & q -> r) -> p -> r", "p -> p & p"])
def test_components_are_jointly_equivalent(text):
    phi = parse(text)
    comps = conj_split_circuit(phi)
    assert all(IMPLICATIONAL.admits(c) for c in comps)
    assert equiv_ipc(big_and(comps), phi)


def test_splitter_rejects_disjunctions_and_unknown_atoms():
    split = Splitter([Var("p"), Var("q")])
    with pytest.raises(PreconditionError):
        split(parse("p | q"))
    with pytest.raises(PreconditionError):
        split(parse("p -> r"))
    with pytest.raises(ValueError):
        Splitter([Var("p"), Var("p")])
    with pytest.raises(ValueError):
        Splitter([parse("p -> q")])


def test_vectorizer_slots():
    vec = Vectorizer(2)
    assert vec(parse("p0 -> p1")) == (parse("p0 -> p1 -> p2"), parse("p0 -> p1 -> p3"))
    assert vec(parse("q")) == (parse("q"), parse("q"))
    with pytest.raises(ValueError):
        Vectorizer(0)
    with pytest.raises(PreconditionError):
        vec(parse("p0 & p1"))


def test_implicational_split_proofs():
    rs = named_logic("ipc-impl")
    c = parse("(p -> q) -> p -> q")
    split = conj_elim_impl(c)
    head = split.components[split.head_index]
    assert check(rs, split.to_head, conclusion=Impl(c, head)).ok
    assert check(rs, split.from_head, conclusion=Impl(head, c)).ok
    assert set(split.trivial) == {i for i in range(len(split.atoms)) if i != split.head_index}
    for i, proof in split.trivial.items():
        assert check(rs, proof, conclusion=split.components[i]).ok
    with pytest.raises(PreconditionError):
        conj_elim_impl(parse("p & q -> p"))
