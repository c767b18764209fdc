"""
IPTK - Conjunction Powers

For an implicational axiom Phi over p0, ..., p_{k-1}, the formula Phi^{&n}
is the component of xi_n(Phi) at the head block, written compactly with
slot vectors: leaf p_l in slot u is p_{ln+u} and X -> Y in slot s is
X_0 -> ... -> X_{n-1} -> Y_s.

A ConjPowerWitness certifies that IPC_-> + Phi proves Phi^{&2}. From the
two square proofs, proofs of all slots of Phi^{&n} for n a power of two
follow by vectorising the squares and plugging in the proofs of the half
power.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

from iptk.builder import ProofBuilder
from iptk.calculus import CheckError, F, PROPER, Axiom, MP, Proof, RuleSet, standard_ruleset
from iptk.conj_split import _INDEXED, Splitter, SplitTranslator, Vectorizer, atom_key
from iptk.decision import PROVABLE, Effort, Verdict, decide_ext
from iptk.generators import index_variables, p, xi
from iptk.kernel import (BOT, BOT_OP, IMP, IMP_AND, IMP_BOT, IMPLICATIONAL, VAR, Formula, Impl,
                         Substitution, Var, And, connectives, head, is_implicational, parse,
                         to_text, variables, variables_of)
from iptk.structural import PreconditionError

logger = logging.getLogger(__name__)


def indexed(phi: Formula) -> Tuple[Formula, Dict[str, int]]:
    """phi over p0, p1, ... and the index of each original variable."""
    idx, back = index_variables(phi)
    return idx, {back[v].name: int(v[1:]) for v in variables(idx)}


def indexed_ruleset(phi_idx: Formula) -> RuleSet:
    return standard_ruleset(IMPLICATIONAL, phi_idx, name="impl+axiom")


def phi_conj_power(phi: Formula, n: int) -> Formula:
    """Phi^{&n}: compact slot form for implicational Phi, literal head component otherwise."""
    if n < 1:
        raise ValueError("conjunction powers need n >= 1")
    idx, _ = indexed(phi)
    if is_implicational(idx):
        return Vectorizer(n)(idx)[0]
    if not connectives(idx) <= {IMP, BOT_OP}:
        raise PreconditionError(f"{to_text(phi)} is not a {{->, F}}-formula")
    return conj_power_split(phi, n)


def conj_power_split(phi: Formula, n: int) -> Formula:
    """The component of xi_n(Phi) at the first atom of the head block."""
    idx, _ = indexed(phi)
    f = xi(n, idx)
    atoms = sorted([Var(v) for v in variables(f)] + ([BOT] if BOT_OP in connectives(f) else []),
                   key=atom_key)
    _, h = head(idx)
    target = p(int(h.name[1:]) * n) if h.op == VAR else BOT
    split = Splitter(atoms)
    return split(f)[split.position[target]]


@dataclass
class ConjPowerWitness:
    """Instances sigma_u(Phi) deriving xi_2(Phi) in IPC over {->, &}."""

    phi: Formula
    substitutions: List[Substitution]
    base_derivation: Proof
    squares: Optional[List[Proof]] = None
    name: str = ""
    powers: Dict[int, List[Proof]] = field(default_factory=dict, repr=False)

    @property
    def indexed(self) -> Formula:
        return indexed(self.phi)[0]

    @property
    def instances(self) -> List[Formula]:
        idx = self.indexed
        return [s(idx) for s in self.substitutions]

    def validate(self) -> None:
        idx = self.indexed
        if not is_implicational(idx):
            raise PreconditionError(f"{to_text(self.phi)} is not implicational")
        instances = self.instances
        allowed = {f"p{2 * l + u}" for l in indexed(self.phi)[1].values() for u in (0, 1)}
        stray = {v for v in variables_of(instances) - allowed if _INDEXED.match(v)}
        if stray:
            raise PreconditionError(f"witness instances use variables outside xi_2: {sorted(stray)}")
        hyps = self.base_derivation.hypotheses
        if len(hyps) != len(instances) or any(a is not b for a, b in zip(hyps, instances)):
            raise PreconditionError("base derivation hypotheses differ from the witness instances")
        try:
            self.base_derivation.require_ok(standard_ruleset(IMP_AND), conclusion=xi(2, idx))
            for c, proof in enumerate(self.squares or []):
                proof.require_ok(indexed_ruleset(idx), conclusion=Vectorizer(2)(idx)[c])
        except CheckError as e:
            raise PreconditionError(f"invalid conjunction-power witness: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return {
            "phi": to_text(self.phi),
            "name": self.name,
            "instances": [to_text(f) for f in self.instances],
            "base_lines": self.base_derivation.num_lines(),
            "square_lines": [q.num_lines() for q in self.squares] if self.squares else None,
        }


# --- squares ---------------------------------------------------------------------------

class _Reshape:
    """Moves between the head-block components of xi_m(X) and the slots of X."""

    def __init__(self, tr: SplitTranslator, m: int):
        self.tr = tr
        self.b = tr.b
        self.split = tr.comps
        self.m = m
        self.vec = Vectorizer(m)
        self._fwd: Dict[Tuple[Formula, int], int] = {}
        self._bwd: Dict[Tuple[Formula, int], int] = {}

    def _block(self, x: Formula) -> List[int]:
        _, h = head(x)
        base = int(h.name[1:]) * self.m
        return [self.split.position[p(base + u)] for u in range(self.m)]

    def to_slots(self, x: Formula, u: int) -> int:
        key = (x, u)
        if key in self._fwd:
            return self._fwd[key]
        b, tr = self.b, self.tr
        if x.op == VAR:
            line = self._leaf_to(xi(self.m, x), self._block(x)[u])
        else:
            a = x.left
            block = self._block(a)
            e = b.assume(self.split(xi(self.m, x))[self._block(x)[u]])
            rs = [b.assume(r) for r in self.vec(a)]
            args = [b.mp(rs[block.index(i)], self.from_slots(a, block.index(i))) if i in block
                    else tr.trivial(xi(self.m, a), i) for i in range(self.split.width)]
            rb = b.mp(b.mp_chain(e, *args), self.to_slots(x.right, u))
            line = b.discharge_all([e] + rs, rb)
        self._fwd[key] = line
        return line

    def from_slots(self, x: Formula, u: int) -> int:
        key = (x, u)
        if key in self._bwd:
            return self._bwd[key]
        b = self.b
        if x.op == VAR:
            line = self._leaf_from(xi(self.m, x), self._block(x)[u])
        else:
            a = x.left
            r = b.assume(self.vec(x)[u])
            es = [b.assume(c) for c in self.split(xi(self.m, a))]
            ra = [b.mp(es[i], self.to_slots(a, k)) for k, i in enumerate(self._block(a))]
            eb = b.mp(b.mp_chain(r, *ra), self.from_slots(x.right, u))
            line = b.discharge_all([r] + es, eb)
        self._bwd[key] = line
        return line

    def _leaf_to(self, t: Formula, i: int) -> int:
        b = self.b
        atom = self.split.atoms[i]
        if t is atom:
            return b.identity(atom)
        side = 0 if atom.name in variables(t.left) else 1
        x = b.assume(self.split(t)[i])
        ys = [b.assume(self.split(t.left)[i]), b.assume(self.split(t.right)[i])]
        inner = b.mp(ys[side], self._leaf_to((t.left, t.right)[side], i))
        g = b.discharge_all(ys, inner)
        return b.discharge(x, b.mp(g, x))

    def _leaf_from(self, t: Formula, i: int) -> int:
        b = self.b
        atom = self.split.atoms[i]
        if t is atom:
            return b.identity(atom)
        side = 0 if atom.name in variables(t.left) else 1
        parts = (t.left, t.right)
        z = b.assume(atom)
        f = b.assume(Impl(self.split(t.left)[i], Impl(self.split(t.right)[i], atom)))
        args = [b.mp(z, self._leaf_from(parts[k], i)) if k == side else self.tr.trivial(parts[k], i)
                for k in (0, 1)]
        return b.discharge_all([z, f], b.mp_chain(f, *args))


def square_proofs(witness: ConjPowerWitness) -> List[Proof]:
    """Proofs of both slots of Phi^{&2} in IPC_-> + Phi, derived from the base derivation if needed."""
    if witness.squares is not None:
        return witness.squares
    witness.validate()
    idx = witness.indexed
    b = ProofBuilder(indexed_ruleset(idx), F)
    lines = witness.base_derivation.lines
    atoms = sorted((Var(v) for v in variables_of(line.statement for line in lines)), key=atom_key)
    split = Splitter(atoms)

    def hyp(stmt: Formula, index: int) -> List[int]:
        inst = b.axiom(PROPER, witness.substitutions[index])
        h = split.head_index(stmt)
        return [b.mp(inst, tr.to_head(stmt)) if i == h else tr.trivial(stmt, i)
                for i in range(split.width)]

    tr = SplitTranslator(b, split, hyp=hyp)
    comps = tr.translate(witness.base_derivation)
    reshape = _Reshape(tr, 2)
    block = reshape._block(idx)
    witness.squares = [b.proof(b.mp(comps[block[c]], reshape.to_slots(idx, c))) for c in (0, 1)]
    logger.info(f"squares of {to_text(witness.phi)}: {[q.num_lines() for q in witness.squares]} lines")
    return witness.squares


def _double(rs: RuleSet, idx: Formula, squares: List[Proof], half: List[Proof], m: int) -> List[Proof]:
    b = ProofBuilder(rs, F)
    vec = Vectorizer(m)
    leaves = sorted(int(v[1:]) for v in variables(idx))

    def proper(stmt: Formula, ax: Axiom) -> List[int]:
        rho = {}
        for l in leaves:
            for u, part in enumerate(vec(ax.subst[f"p{l}"])):
                rho[f"p{l * m + u}"] = part
        sub = Substitution(rho)
        return [b.include(proof, sub) for proof in half]

    tr = SplitTranslator(b, vec, proper=proper)
    out: List[Proof] = []
    for square in squares:
        out.extend(b.proof(line) for line in tr.translate(square))
    return out


def conj_power_proofs(witness: ConjPowerWitness, n: int) -> List[Proof]:
    """Proofs of the n slots of Phi^{&n} (n a power of two) over the indexed axiom."""
    if n < 1 or n & (n - 1):
        raise ValueError("n must be a power of two")
    if n in witness.powers:
        return witness.powers[n]
    idx = witness.indexed
    rs = indexed_ruleset(idx)
    if n == 1:
        b = ProofBuilder(rs, F)
        out = [b.proof(b.axiom(PROPER))]
    elif n == 2:
        out = square_proofs(witness)
    else:
        out = _double(rs, idx, square_proofs(witness), conj_power_proofs(witness, n // 2), n // 2)
    witness.powers[n] = out
    logger.debug(f"Phi^&{n}: {sum(q.num_lines() for q in out)} lines over {n} slots")
    return out


def power_sizes(witness: ConjPowerWitness, ns: Sequence[int]) -> Dict[int, Dict[str, int]]:
    out = {}
    for n in ns:
        proofs = conj_power_proofs(witness, n)
        out[n] = {"slots": len(proofs), "lines": sum(q.num_lines() for q in proofs),
                  "size": sum(q.size() for q in proofs)}
    return out


# --- shipped witness for the implicational LC axiom -------------------------------------

LC_IMPL = "((p -> q) -> r) -> ((q -> p) -> r) -> r"

# Comparisons between the two blocks p0, p1 and p2, p3 of xi_2.
_PAIRS = ((0, 2), (0, 3), (1, 2), (1, 3))


def _lc_instance(x: int, y: int, c: Formula) -> Substitution:
    return Substitution({"p0": p(x), "p1": p(y), "p2": c})


def _lc_cases(b: ProofBuilder, instance, leaf, c: Formula, k: int = 0,
              facts: Optional[Dict[Tuple[int, int], int]] = None) -> int:
    """Derive c by splitting on x -> y or y -> x for each comparison in turn."""
    facts = facts or {}
    if k == len(_PAIRS):
        return leaf(facts, c)
    x, y = _PAIRS[k]
    branches = []
    for fact in ((x, y), (y, x)):
        a = b.assume(Impl(p(fact[0]), p(fact[1])))
        branches.append(b.discharge(a, _lc_cases(b, instance, leaf, c, k + 1, {**facts, fact: a})))
    return b.mp_chain(instance(x, y, c), *branches)


def _lc_forward(facts: Dict[Tuple[int, int], int]) -> Optional[Dict[int, int]]:
    """For each upper atom a lower atom below it, if there is one for both."""
    chosen = {}
    for q in (2, 3):
        lower = [x for x in (0, 1) if (x, q) in facts]
        if not lower:
            return None
        chosen[q] = lower[0]
    return chosen


def _lc_below_both(facts: Dict[Tuple[int, int], int]) -> int:
    return next(q for q in (2, 3) if (q, 0) in facts and (q, 1) in facts)


def lc_base_derivation() -> Tuple[List[Substitution], Proof]:
    idx = parse(LC_IMPL)
    idx, _ = indexed(idx)
    subs = [_lc_instance(x, y, p(c)) for c in (4, 5) for x, y in _PAIRS]
    b = ProofBuilder(standard_ruleset(IMP_AND), F, [s(idx) for s in subs])
    lower, upper, result = And(p(0), p(1)), And(p(2), p(3)), And(p(4), p(5))
    ga = b.assume(Impl(Impl(lower, upper), result))
    gb = b.assume(Impl(Impl(upper, lower), result))

    def instance(x, y, c):
        return b.hyp(_lc_instance(x, y, c)(idx))

    def parts(line, conj):
        return [b.mp(line, b.axiom(name, a=conj.left, b=conj.right)) for name in ("and_e1", "and_e2")]

    def leaf(facts, c):
        forward = _lc_forward(facts)
        if forward is not None:
            z = b.assume(lower)
            got = dict(zip((0, 1), parts(z, lower)))
            qs = [b.mp(got[forward[q]], facts[(forward[q], q)]) for q in (2, 3)]
            arrow = b.discharge(z, b.mp_chain(b.axiom("and_i", a=p(2), b=p(3)), *qs))
            r = b.mp(arrow, ga)
        else:
            q = _lc_below_both(facts)
            z = b.assume(upper)
            got = dict(zip((2, 3), parts(z, upper)))
            ps = [b.mp(got[q], facts[(q, x)]) for x in (0, 1)]
            arrow = b.discharge(z, b.mp_chain(b.axiom("and_i", a=p(0), b=p(1)), *ps))
            r = b.mp(arrow, gb)
        return parts(r, result)[0 if c is p(4) else 1]

    r4 = _lc_cases(b, instance, leaf, p(4))
    r5 = _lc_cases(b, instance, leaf, p(5))
    conj = b.mp_chain(b.axiom("and_i", a=p(4), b=p(5)), r4, r5)
    return subs, b.proof(b.discharge_all([ga, gb], conj))


def lc_square(c: int) -> Proof:
    """Slot c of the square of the LC axiom, by the same case split over atoms."""
    idx, _ = indexed(parse(LC_IMPL))
    b = ProofBuilder(indexed_ruleset(idx), F)
    forward_slots, backward_slots = Vectorizer(2)(idx.left), Vectorizer(2)(idx.right.left)
    hs = [b.assume(f) for f in list(forward_slots) + list(backward_slots)]
    goal = p(4 + c)

    def instance(x, y, target):
        return b.axiom(PROPER, _lc_instance(x, y, target))

    def arrow(premises: Sequence[int], source: int, fact: int) -> int:
        zs = [b.assume(p(k)) for k in premises]
        return b.discharge_all(zs, b.mp(zs[premises.index(source)], fact))

    def leaf(facts, target):
        forward = _lc_forward(facts)
        if forward is not None:
            args = [arrow((0, 1), forward[q], facts[(forward[q], q)]) for q in (2, 3)]
            return b.mp_chain(hs[c], *args)
        q = _lc_below_both(facts)
        args = [arrow((2, 3), q, facts[(q, x)]) for x in (0, 1)]
        return b.mp_chain(hs[2 + c], *args)

    return b.proof(b.discharge_all(hs, _lc_cases(b, instance, leaf, goal)))


@lru_cache(maxsize=None)
def _lc_witness_parts() -> Tuple[Tuple[Substitution, ...], Proof, Tuple[Proof, ...]]:
    subs, base = lc_base_derivation()
    return tuple(subs), base, (lc_square(0), lc_square(1))


def lc_witness() -> ConjPowerWitness:
    subs, base, squares = _lc_witness_parts()
    return ConjPowerWitness(parse(LC_IMPL), list(subs), base, list(squares), name="lc-impl")


def shipped_witness(phi: Formula) -> Optional[ConjPowerWitness]:
    if indexed(phi)[0] is indexed(parse(LC_IMPL))[0]:
        witness = lc_witness()
        witness.phi = phi
        return witness
    return None


def witness_from_search(phi: Formula, effort: Optional[Effort] = None) -> Optional[ConjPowerWitness]:
    """Look for instances of Phi deriving xi_2(Phi) with the bounded extension search."""
    idx, _ = indexed(phi)
    if not is_implicational(idx):
        raise PreconditionError(f"{to_text(phi)} is not implicational")
    verdict = decide_ext([idx], xi(2, idx), effort, fragment=IMPLICATIONAL)
    if not verdict.provable:
        logger.info(f"no conjunction-power witness for {to_text(phi)}: {verdict.status}")
        return None
    found = verdict.proof
    instances: List[Formula] = []
    subs: List[Substitution] = []
    for line in found.lines:
        j = line.just
        if isinstance(j, Axiom) and j.name == PROPER and line.statement not in instances:
            instances.append(line.statement)
            subs.append(j.subst)
    b = ProofBuilder(standard_ruleset(IMP_AND), F, instances)
    out: List[int] = []
    for line in found.lines:
        j = line.just
        if isinstance(j, MP):
            out.append(b.mp(out[j.minor], out[j.major]))
        elif j.name == PROPER:
            out.append(b.hyp(line.statement))
        else:
            out.append(b.axiom(j.name, j.subst))
    return ConjPowerWitness(phi, subs, b.proof(out[-1]), name="search")


def check_frag_axiom(phi: Formula, effort: Optional[Effort] = None,
                     witness: Optional[ConjPowerWitness] = None) -> Verdict:
    """Does IPC_-> + Phi prove Phi^{&2}? Witnessed proofs first, then the bounded search."""
    idx, _ = indexed(phi)
    witness = witness or (shipped_witness(phi) if is_implicational(idx) else None)
    if witness is not None:
        squares = square_proofs(witness)
        return Verdict(PROVABLE, proof=squares[0], ruleset=indexed_ruleset(idx),
                       reason=f"witness with {len(witness.substitutions)} instances")
    fragment = IMPLICATIONAL if is_implicational(idx) else IMP_BOT
    return decide_ext([idx], phi_conj_power(phi, 2), effort, fragment=fragment)
