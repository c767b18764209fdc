"""
IPTK - Structural Proof Constructions

Polynomial-size implicational proofs of the structural rules on premise
sequences (weakening, exchange, contraction, composition), the deduction
theorem built from them, template instantiation, and the conversions
between extended Frege proofs and circuit Frege proofs.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from iptk.builder import BuildError, ProofBuilder, replace_equivalent
from iptk.calculus import CF, EF, F, SF, Axiom, Ext, Hyp, Line, MP, Proof, RuleSet, SubstRule
from iptk.config import get_stats_collector
from iptk.kernel import (BOT_OP, VAR, Formula, FreshNames, FreshnessError, Impl, Path,
                         Substitution, Var, _dag_nodes, join, make, subterm_at,
                         substitute, to_text, variables)

logger = logging.getLogger(__name__)


class PreconditionError(ValueError):
    pass


# --- template instantiation ------------------------------------------------------------

def instantiate_template(rs: RuleSet, template: Proof, sigma: Substitution) -> Proof:
    """The proof of sigma(conclusion): line-wise for F/EF/CF, one substitution step for SF."""
    if sigma.is_identity():
        return template
    if template.kind == SF:
        lines = list(template.lines)
        lines.append(Line(sigma(template.conclusion), SubstRule(len(lines) - 1, sigma)))
        return Proof(SF, [], lines)
    ext = set(template.extension_vars())
    touched = set(k for k, _ in sigma.items()) | set().union(*(variables(v) for _, v in sigma.items()))
    if ext & touched:
        raise FreshnessError(f"Substitution touches extension variables {sorted(ext & touched)}")
    lines = []
    for line in template.lines:
        j = line.just
        if isinstance(j, Axiom):
            j = Axiom(j.name, sigma.compose(j.subst))
        elif isinstance(j, Ext):
            j = Ext(j.var, sigma(j.definition), j.forward)
        lines.append(Line(sigma(line.statement), j))
    return Proof(template.kind, [sigma(h) for h in template.hypotheses], lines)


# --- sequence lemmas --------------------------------------------------------------------

def chain(b: ProofBuilder, first: int, second: int) -> int:
    """From X -> Y and Y -> Z derive X -> Z."""
    xy, yz = b.statement(first), b.statement(second)
    if xy.right is not yz.left:
        raise BuildError("chain: middle formulas differ")
    return b.mp(first, b.mp(second, b.lemma("trans", a=xy.left, b=yz.left, c=yz.right)))


def lift(b: ProofBuilder, gamma: Sequence[Formula], psi: Formula, phi: Formula) -> int:
    """(psi -> phi) -> (Gamma -> psi) -> (Gamma -> phi), one composition per premise."""
    if not gamma:
        return b.identity(Impl(psi, phi))
    inner = lift(b, gamma[1:], psi, phi)
    rest_psi, rest_phi = join(gamma[1:], psi), join(gamma[1:], phi)
    step = b.lemma("trans", a=gamma[0], b=rest_psi, c=rest_phi)
    return chain(b, inner, step)


def under(b: ProofBuilder, prefix: Sequence[Formula], line: int) -> int:
    """From A -> B derive (Pi -> A) -> (Pi -> B)."""
    if not prefix:
        return line
    stmt = b.statement(line)
    return b.mp(line, lift(b, prefix, stmt.left, stmt.right))


def reorder_into(b: ProofBuilder, gamma: Sequence[Formula], delta: Sequence[Formula], phi: Formula) -> int:
    """(Gamma -> phi) -> (Delta -> phi) when every premise of Gamma occurs in Delta.

    Greedy left-to-right: bring each target premise into place by exchanges or
    weaken it in, then contract the leftover duplicates.
    """
    missing = [g for g in gamma if g not in delta]
    if missing:
        raise PreconditionError(f"premise {to_text(missing[0])} does not occur in the target sequence")
    cur = list(gamma)
    acc: Optional[int] = None

    def step(line: int):
        nonlocal acc
        acc = line if acc is None else chain(b, acc, line)

    def swap(i: int):
        # exchange cur[i-1] and cur[i]
        rest = join(cur[i + 1:], phi)
        base = b.lemma("exchange", a=cur[i - 1], b=cur[i], c=rest)
        step(under(b, cur[:i - 1], base))
        cur[i - 1], cur[i] = cur[i], cur[i - 1]

    for k, d in enumerate(delta):
        pos = next((j for j in range(k, len(cur)) if cur[j] is d), None)
        if pos is None:
            rest = join(cur[k:], phi)
            step(under(b, cur[:k], b.axiom("K", a=rest, b=d)))
            cur.insert(k, d)
            continue
        for i in range(pos, k, -1):
            swap(i)
    while len(cur) > len(delta):
        j = len(delta)
        e = cur[j]
        i = next(i for i in range(len(delta)) if cur[i] is e)
        for s in range(j, i + 1, -1):
            swap(s)
        rest = join(cur[i + 2:], phi)
        step(under(b, cur[:i], b.lemma("contract", a=e, b=rest)))
        del cur[i + 1]
    if acc is None:
        acc = b.identity(join(gamma, phi))
    return acc


def compose_into(b: ProofBuilder, gamma: Sequence[Formula], delta: Sequence[Formula], phi: Formula) -> int:
    """(Delta -> phi) -> (Gamma -> psi_0) -> ... -> (Gamma -> psi_{n-1}) -> (Gamma -> phi)."""
    gamma = list(gamma)
    if not delta:
        return reorder_into(b, [], gamma, phi)
    psi0, rest = delta[0], list(delta[1:])
    inner = compose_into(b, gamma, rest, phi)
    xi = b.statement(inner).right
    prefixed = b.mp(inner, b.lemma("trans", a=psi0, b=join(rest, phi), c=xi))
    lifted = chain(b, prefixed, lift(b, gamma, psi0, xi))
    side = [join(gamma, psi) for psi in rest]
    contracted = reorder_into(b, gamma + side + gamma, side + gamma, phi)
    head = [join(delta, phi), join(gamma, psi0)]
    return b.mp(lifted, under(b, head, contracted))


def _proof_of(rs: RuleSet, build) -> Proof:
    b = ProofBuilder(rs, F)
    line = build(b)
    proof = b.proof(line)
    get_stats_collector().record_transform("structural", proof.size())
    return proof


def struct_reorder(rs: RuleSet, gamma: Sequence[Formula], delta: Sequence[Formula], phi: Formula) -> Proof:
    return _proof_of(rs, lambda b: reorder_into(b, gamma, delta, phi))


def struct_compose(rs: RuleSet, gamma: Sequence[Formula], delta: Sequence[Formula], phi: Formula) -> Proof:
    return _proof_of(rs, lambda b: compose_into(b, gamma, delta, phi))


# --- deduction ------------------------------------------------------------------------

def deduction_into(b: ProofBuilder, proof: Proof, gamma: Sequence[Formula]) -> int:
    """Replay proof so that every line phi_l becomes Gamma -> phi_l; returns the last one."""
    gamma = list(gamma)
    out: List[int] = []
    for i, line in enumerate(proof.lines):
        stmt, j = line.statement, line.just
        if isinstance(j, Hyp):
            h = proof.hypotheses[j.index]
            out.append(b.mp(b.identity(h), reorder_into(b, [h], gamma, h)))
            continue
        if isinstance(j, MP):
            x = proof.lines[j.minor].statement
            xy = proof.lines[j.major].statement
            comp = compose_into(b, gamma, [xy, x], stmt)
            out.append(b.mp(out[j.minor], b.mp(out[j.major], b.mp(b.identity(xy), comp))))
            continue
        if isinstance(j, Axiom):
            base = b.axiom(j.name, j.subst)
        elif isinstance(j, Ext):
            fwd, bwd = b.ext(j.var, j.definition)
            base = fwd if j.forward else bwd
        else:
            raise PreconditionError(f"line {i}: substitution steps admit no deduction theorem")
        out.append(b.mp(base, reorder_into(b, [], gamma, stmt)))
    return out[-1]


def deduction(rs: RuleSet, proof: Proof) -> Proof:
    """A hypothesis-free proof of Gamma -> phi from a proof of phi from Gamma."""
    if proof.kind == SF:
        raise PreconditionError("substitution Frege proofs have no hypotheses to discharge")
    b = ProofBuilder(rs, proof.kind)
    result = b.proof(deduction_into(b, proof, proof.hypotheses))
    get_stats_collector().record_transform("deduction", result.size())
    logger.info(f"Deduction over {len(proof.hypotheses)} hypotheses: "
                f"{proof.num_lines()} -> {result.num_lines()} lines")
    return result


# --- extended Frege <-> circuit Frege ---------------------------------------------------

def ef_to_cf(rs: RuleSet, proof: Proof) -> Proof:
    """Unfold extension variables into shared gates; extension axioms become identities."""
    if proof.kind not in (EF, F):
        raise PreconditionError(f"expected an extended Frege proof, got {proof.kind}")
    sigma: Dict[str, Formula] = {}
    for line in proof.lines:
        j = line.just
        if isinstance(j, Ext) and j.var not in sigma:
            sigma[j.var] = substitute(j.definition, sigma)
    s = Substitution(sigma)
    b = ProofBuilder(rs, CF, list(proof.hypotheses))
    out: List[int] = []
    for line in proof.lines:
        j = line.just
        if isinstance(j, Axiom):
            out.append(b.axiom(j.name, s.compose(j.subst)))
        elif isinstance(j, MP):
            out.append(b.mp(out[j.minor], out[j.major]))
        elif isinstance(j, Hyp):
            out.append(b.hyp(proof.hypotheses[j.index]))
        elif isinstance(j, Ext):
            out.append(b.identity(s(j.definition)))
        else:
            raise PreconditionError("substitution steps cannot be unfolded into circuits")
    result = b.proof(out[-1])
    get_stats_collector().record_transform("ef_to_cf", result.size())
    return result


def _tree_like(f: Formula) -> bool:
    compound = sum(1 for g in _dag_nodes(f) if g.op not in (VAR, BOT_OP))
    return compound == (f.size - 1) // 2


class _Abbreviations:
    """Extension variable q_g <-> op(a(left), a(right)) for every compound gate g."""

    def __init__(self, b: ProofBuilder, reserved):
        self.b = b
        self.names = FreshNames(reserved, prefix="_q")
        self.var: Dict[Formula, Formula] = {}
        self.lines: Dict[Formula, Tuple[int, int]] = {}

    def a(self, g: Formula) -> Formula:
        if g.op in (VAR, BOT_OP):
            return g
        self.define(g)
        return self.var[g]

    def e(self, g: Formula) -> Formula:
        if g.op in (VAR, BOT_OP):
            return g
        return make(g.op, self.a(g.left), self.a(g.right))

    def define(self, g: Formula):
        for node in _dag_nodes(g):
            if node.op in (VAR, BOT_OP) or node in self.var:
                continue
            body = make(node.op, self.var.get(node.left, node.left), self.var.get(node.right, node.right))
            q = self.names.fresh()
            self.var[node] = Var(q)
            self.lines[node] = self.b.ext(q, body)

    def fold_line(self, line: int, shape: Formula) -> int:
        """Line with statement shape (a tree over gates) rewritten to e(shape)."""
        b = self.b
        for path in _compound_paths(shape):
            if not path:
                continue
            g = subterm_at(shape, path)
            self.define(g)
            fwd, bwd = self.lines[g]
            current = b.statement(line)
            into, _ = replace_equivalent(b, current, path, bwd, fwd)
            line = b.mp(line, into)
        return line

    def unfold_line(self, line: int, target: Formula) -> int:
        """From e(target) recover target itself by expanding abbreviations top-down."""
        b = self.b
        back = {v: g for g, v in self.var.items()}
        while b.statement(line) is not target:
            current = b.statement(line)
            path = _first_abbreviation(current, back)
            if path is None:
                raise BuildError("unfolding stalled before reaching the conclusion")
            g = back[subterm_at(current, path)]
            fwd, bwd = self.lines[g]
            into, _ = replace_equivalent(b, current, path, fwd, bwd)
            line = b.mp(line, into)
        return line


def _compound_paths(f: Formula) -> List[Path]:
    """Paths of compound occurrences in post-order (children before parents)."""
    out: List[Path] = []

    def walk(g: Formula, path: Path):
        if g.op in (VAR, BOT_OP):
            return
        walk(g.left, path + (0,))
        walk(g.right, path + (1,))
        out.append(path)

    walk(f, ())
    return out


def _first_abbreviation(f: Formula, back: Dict[Formula, Formula]) -> Optional[Path]:
    stack: List[Tuple[Formula, Path]] = [(f, ())]
    while stack:
        g, path = stack.pop()
        if g in back:
            return path
        if g.left is not None:
            stack.append((g.right, path + (1,)))
            stack.append((g.left, path + (0,)))
    return None


def cf_to_ef(rs: RuleSet, proof: Proof) -> Proof:
    """Name shared gates by extension variables; tree-shaped proofs are copied unchanged."""
    if proof.kind != CF:
        raise PreconditionError(f"expected a circuit Frege proof, got {proof.kind}")
    if all(_tree_like(line.statement) for line in proof.lines):
        return Proof(EF, list(proof.hypotheses), list(proof.lines))
    reserved = set()
    for line in proof.lines:
        reserved |= variables(line.statement)
    for h in proof.hypotheses:
        reserved |= variables(h)
    b = ProofBuilder(rs, EF, list(proof.hypotheses))
    ab = _Abbreviations(b, reserved)
    out: List[int] = []
    for line in proof.lines:
        stmt, j = line.statement, line.just
        if isinstance(j, Axiom):
            template = rs.axioms[j.name]
            small = Substitution({k: ab.a(v) for k, v in j.subst.items()})
            start = b.axiom(j.name, small)
            out.append(_fold_template(ab, start, template, j.subst))
        elif isinstance(j, Hyp):
            out.append(ab.fold_line(b.hyp(proof.hypotheses[j.index]), stmt))
        elif isinstance(j, MP):
            x = proof.lines[j.minor].statement
            minor = out[j.minor]
            if x.op not in (VAR, BOT_OP):
                ab.define(x)
                minor = b.mp(minor, ab.lines[x][1])
            y = b.mp(minor, out[j.major])
            if stmt.op not in (VAR, BOT_OP):
                ab.define(stmt)
                y = b.mp(y, ab.lines[stmt][0])
            out.append(y)
        else:
            raise PreconditionError("circuit Frege proofs have only axioms, hypotheses and modus ponens")
    last = ab.unfold_line(out[-1], proof.conclusion)
    result = b.proof(last)
    get_stats_collector().record_transform("cf_to_ef", result.size())
    logger.info(f"Circuit proof of {proof.num_lines()} lines -> extended Frege with "
                f"{len(result.extension_vars())} extension variables")
    return result


def _fold_template(ab: _Abbreviations, line: int, template: Formula, sigma: Substitution) -> int:
    """Rewrite sigma'(template) (leaves abbreviated) into the one-level expansion of sigma(template)."""
    b = ab.b
    for path in _compound_paths(template):
        if not path:
            continue
        g = sigma(subterm_at(template, path))
        ab.define(g)
        fwd, bwd = ab.lines[g]
        into, _ = replace_equivalent(b, b.statement(line), path, bwd, fwd)
        line = b.mp(line, into)
    return line
