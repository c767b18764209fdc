"""
IPTK - Tautology Translations

Rewrites of a formula into a restricted shape, each paired with a
substitution sigma and Frege certificates:

- bar:    purely implicational apart from one F premise and one premise
          p -> q | r per negative (or essential) disjunction
- plus:   F-free
- tilde:  disjunction-free, in {->, F} (purely implicational when the
          input is positive)
- hat:    purely implicational (plus, then tilde)

backward always proves sigma(output) -> input; bar also proves
input -> output. The transports turn a proof of the input in a calculus
into a proof of the output in the same calculus.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Set, Tuple

from iptk.builder import BuildError, ProofBuilder, replace_equivalent
from iptk.calculus import (CF, EF, F, PROPER, SF, Axiom, CheckError, Ext, MP, Proof, RuleSet,
                           SubstRule, check, standard_ruleset)
from iptk.config import get_stats_collector
from iptk.decision import derive_into
from iptk.kernel import (AND, BOT, BOT_OP, FULL, IMP, OR, VAR, Formula, FreshNames, Impl,
                         Substitution, Var, _dag_nodes, big_and, connectives, head, is_positive, join, make,
                         replace_at, replace_subterm, subterm_at, to_text, variables, variables_of)
from iptk.structural import PreconditionError, chain, instantiate_template

logger = logging.getLogger(__name__)

OR_ROW = "(((a -> c) -> (b -> c) -> c) -> c) -> a | b -> c"
AND_ROW = "(((a -> c) -> c) -> b -> c) -> a & b -> c"

ELIM_IMP = "(c -> (a -> e) -> (b -> e) -> e) -> c -> (a -> d -> e) -> (b -> d -> e) -> d -> e"
ELIM_AND = ("(c -> (a -> d) -> (b -> d) -> d) -> (c -> (a -> e) -> (b -> e) -> e) -> "
            "c -> (a -> d & e) -> (b -> d & e) -> d & e")
ELIM_EXT = "(c -> (a -> d) -> (b -> d) -> d) -> (e -> d) -> (d -> e) -> c -> (a -> e) -> (b -> e) -> e"


@lru_cache(maxsize=None)
def ipc_rules() -> RuleSet:
    return standard_ruleset(FULL, name="ipc")


@dataclass
class Translation:
    kind: str
    source: Formula
    output: Formula
    back_subst: Substitution
    backward: Proof
    forward: Optional[Proof] = None
    disjunction_premises: int = 0

    def back_statement(self) -> Formula:
        return Impl(self.back_subst(self.output), self.source)

    def forward_statement(self) -> Formula:
        return Impl(self.source, self.output)

    def verify(self, rs: Optional[RuleSet] = None) -> bool:
        rs = rs or ipc_rules()
        ok = check(rs, self.backward, conclusion=self.back_statement()).ok
        if self.forward is not None:
            ok = ok and check(rs, self.forward, conclusion=self.forward_statement()).ok
        return ok

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "source": to_text(self.source),
            "output": to_text(self.output),
            "back_subst": self.back_subst.to_json(),
            "disjunction_premises": self.disjunction_premises,
            "backward_lines": self.backward.num_lines(),
            "forward_lines": self.forward.num_lines() if self.forward is not None else None,
        }


def _bot_to(f: Formula, r: Formula) -> Formula:
    return replace_subterm(f, BOT, r)


# --- bar ------------------------------------------------------------------------------

@dataclass
class _Row:
    formula: Formula
    group: int  # 0: the F premise, 1: disjunctive premises, 2: the rest
    line: int
    instance: Callable[[ProofBuilder], int]


class _Bar:
    """Walks a formula occurrence by occurrence, assuming one premise per row.

    visit returns the variable standing for the occurrence together with a
    link line, psi -> p for positive and p -> psi for negative occurrences
    (None when the occurrence is a variable).
    """

    def __init__(self, b: ProofBuilder, phi: Formula, essential: bool):
        self.b = b
        self.essential = essential
        self.names = FreshNames(variables(phi), "_t")
        self.sigma: Dict[str, Formula] = {}
        self.rows: List[_Row] = []
        self._bot_var: Optional[Formula] = None
        self._bot_row: Optional[int] = None

    def fresh(self, meaning: Formula) -> Formula:
        v = self.names.var()
        self.sigma[v.name] = meaning
        return v

    def row(self, formula: Formula, group: int, instance: Callable[[ProofBuilder], int]) -> int:
        line = self.b.assume(formula)
        self.rows.append(_Row(formula, group, line, instance))
        return line

    def ordered(self) -> List[_Row]:
        return sorted(self.rows, key=lambda r: r.group)

    def apply(self, line: int, link: Optional[int]) -> int:
        return line if link is None else self.b.mp(line, link)

    def visit(self, g: Formula, positive: bool) -> Tuple[Formula, Optional[int]]:
        if g.op == VAR:
            return g, None
        if g.op == BOT_OP:
            return self.bot(positive)
        if g.op == IMP:
            if positive and self.essential:
                return self.implication(g)
            return self.plain_implication(g, positive)
        if g.op == AND:
            return self.conjunction(g, positive)
        return self.disjunction(g, positive)

    def bot(self, positive: bool) -> Tuple[Formula, int]:
        if self._bot_var is None:
            self._bot_var = self.fresh(BOT)
        p = self._bot_var
        if positive:
            return p, self.b.axiom("efq", a=p)
        if self._bot_row is None:
            self._bot_row = self.row(Impl(p, BOT), 0, lambda b: b.identity(BOT))
        return p, self._bot_row

    def plain_implication(self, g: Formula, positive: bool) -> Tuple[Formula, int]:
        b = self.b
        a, la = self.visit(g.left, not positive)
        c, lc = self.visit(g.right, positive)
        p = self.fresh(g)
        if positive:
            row = self.row(Impl(Impl(a, c), p), 2, lambda bb: bb.identity(g))
            h = b.assume(g)
            x = b.assume(a)
            y = self.apply(b.mp(self.apply(x, la), h), lc)
            return p, b.discharge(h, b.mp(b.discharge(x, y), row))
        row = self.row(join([p, a], c), 2, lambda bb: bb.identity(g))
        h = b.assume(p)
        x = b.assume(g.left)
        y = b.mp(self.apply(x, la), b.mp(h, row))
        return p, b.discharge(h, b.discharge(x, self.apply(y, lc)))

    def conjunction(self, g: Formula, positive: bool) -> Tuple[Formula, int]:
        b = self.b
        a, la = self.visit(g.left, positive)
        c, lc = self.visit(g.right, positive)
        p = self.fresh(g)
        if positive:
            row = self.row(join([a, c], p), 2, lambda bb: bb.axiom("and_i", a=g.left, b=g.right))
            h = b.assume(g)
            x = self.apply(b.mp(h, b.axiom("and_e1", a=g.left, b=g.right)), la)
            y = self.apply(b.mp(h, b.axiom("and_e2", a=g.left, b=g.right)), lc)
            return p, b.discharge(h, b.mp(y, b.mp(x, row)))
        r0 = self.row(Impl(p, a), 2, lambda bb: bb.axiom("and_e1", a=g.left, b=g.right))
        r1 = self.row(Impl(p, c), 2, lambda bb: bb.axiom("and_e2", a=g.left, b=g.right))
        h = b.assume(p)
        x = self.apply(b.mp(h, r0), la)
        y = self.apply(b.mp(h, r1), lc)
        return p, b.discharge(h, b.mp(y, b.mp(x, b.axiom("and_i", a=g.left, b=g.right))))

    def disjunction(self, g: Formula, positive: bool) -> Tuple[Formula, int]:
        b = self.b
        a, la = self.visit(g.left, positive)
        c, lc = self.visit(g.right, positive)
        p = self.fresh(g)
        if positive:
            r0 = self.row(Impl(a, p), 2, lambda bb: bb.axiom("or_i1", a=g.left, b=g.right))
            r1 = self.row(Impl(c, p), 2, lambda bb: bb.axiom("or_i2", a=g.left, b=g.right))
            left = r0 if la is None else chain(b, la, r0)
            right = r1 if lc is None else chain(b, lc, r1)
            h = b.assume(g)
            y = b.mp(right, b.mp(left, b.mp(h, b.axiom("or_e", a=g.left, b=g.right, c=p))))
            return p, b.discharge(h, y)
        row = self.row(Impl(p, make(OR, a, c)), 1, lambda bb: bb.identity(g))
        left = b.axiom("or_i1", a=g.left, b=g.right)
        right = b.axiom("or_i2", a=g.left, b=g.right)
        left = left if la is None else chain(b, la, left)
        right = right if lc is None else chain(b, lc, right)
        h = b.assume(p)
        split = b.axiom("or_e", a=a, b=c, c=g)
        y = b.mp(right, b.mp(left, b.mp(b.mp(h, row), split)))
        return p, b.discharge(h, y)

    def implication(self, g: Formula) -> Tuple[Formula, int]:
        """Positive g = mu(alphas) -> beta with mu the and/or skeleton of the antecedent."""
        b = self.b
        beta, lb = self.visit(g.right, True)

        def build(nu: Formula, root: bool) -> Tuple[Formula, int]:
            if nu.op in (AND, OR):
                q0, e0 = build(nu.left, False)
                q1, e1 = build(nu.right, False)
            else:
                a, la = self.visit(nu, False)
            q = self.fresh(g if root else Impl(nu, g.right))
            target = Impl(nu, beta)
            if nu.op == OR:
                row = self.row(Impl(Impl(join([q0, q1], beta), beta), q), 2,
                               lambda bb: bb.lemma(OR_ROW, a=nu.left, b=nu.right, c=g.right))
                h = b.assume(target)
                k = b.assume(join([q0, q1], beta))
                x0 = b.mp(chain(b, b.axiom("or_i1", a=nu.left, b=nu.right), h), e0)
                x1 = b.mp(chain(b, b.axiom("or_i2", a=nu.left, b=nu.right), h), e1)
                y = b.mp(x1, b.mp(x0, k))
                return q, b.discharge(h, b.mp(b.discharge(k, y), row))
            if nu.op == AND:
                row = self.row(Impl(Impl(Impl(q0, beta), q1), q), 2,
                               lambda bb: bb.lemma(AND_ROW, a=nu.left, b=nu.right, c=g.right))
                h = b.assume(target)
                k = b.assume(Impl(q0, beta))
                y = b.assume(nu.right)
                x = b.assume(nu.left)
                both = b.mp(y, b.mp(x, b.axiom("and_i", a=nu.left, b=nu.right)))
                first = b.mp(b.discharge(x, b.mp(both, h)), e0)
                second = b.mp(b.discharge(y, b.mp(first, k)), e1)
                return q, b.discharge(h, b.mp(b.discharge(k, second), row))
            row = self.row(Impl(Impl(a, beta), q), 2, lambda bb: bb.identity(Impl(nu, g.right)))
            if la is None:
                return q, row
            h = b.assume(target)
            return q, b.discharge(h, b.mp(chain(b, la, h), row))

        q, e = build(g.left, True)
        t = b.assume(g)
        m = t if lb is None else chain(b, t, lb)
        return q, b.discharge(t, b.mp(m, e))


def _classical(f: Formula) -> Formula:
    """Classically equivalent {->, F} form: a & b as (a -> b -> F) -> F, a | b as (a -> F) -> b."""
    memo: Dict[Formula, Formula] = {}
    for g in _dag_nodes(f):
        if g.left is None:
            memo[g] = g
        elif g.op == AND:
            memo[g] = Impl(join([memo[g.left], memo[g.right]], BOT), BOT)
        elif g.op == OR:
            memo[g] = Impl(Impl(memo[g.left], BOT), memo[g.right])
        else:
            memo[g] = Impl(memo[g.left], memo[g.right])
    return memo[f]


def _negation_sites(f: Formula) -> List[Tuple[int, ...]]:
    """Top-most occurrences of a -> F whose a contains a conjunction or disjunction."""
    out: List[Tuple[int, ...]] = []
    stack: List[Tuple[Formula, Tuple[int, ...]]] = [(f, ())]
    while stack:
        g, path = stack.pop()
        if g.left is None:
            continue
        if g.op == IMP and g.right.op == BOT_OP and connectives(g.left) & {AND, OR}:
            out.append(path)
            continue
        stack.append((g.right, path + (1,)))
        stack.append((g.left, path + (0,)))
    return sorted(out)


def _rewrite_negations(b: ProofBuilder, phi: Formula) -> Tuple[Formula, Optional[int], Optional[int]]:
    cur = phi
    fwd: Optional[int] = None
    bwd: Optional[int] = None
    for path in _negation_sites(phi):
        node = subterm_at(cur, path)
        new = Impl(_classical(node.left), BOT)
        f, k = (derive_into(b, Impl(node, new)), derive_into(b, Impl(new, node)))
        f, k = replace_equivalent(b, cur, path, f, k)
        fwd = f if fwd is None else chain(b, fwd, f)
        bwd = k if bwd is None else chain(b, k, bwd)
        cur = replace_at(cur, path, new)
    return cur, fwd, bwd


def _bar(phi: Formula, essential: bool) -> Translation:
    b = ProofBuilder(ipc_rules(), F)
    source = phi
    fwd_rw: Optional[int] = None
    bwd_rw: Optional[int] = None
    if essential:
        phi, fwd_rw, bwd_rw = _rewrite_negations(b, phi)
    walk = _Bar(b, phi, essential)
    root, link = walk.visit(phi, True)
    rows = walk.ordered()
    output = join([r.formula for r in rows], root)

    start = b.assume(phi)
    forward = b.discharge_all([start] + [r.line for r in rows], walk.apply(start, link))

    sigma = Substitution(walk.sigma)
    s = b.assume(sigma(output))
    cur = s
    for r in rows:
        inst = r.instance(b)
        if b.statement(inst) is not sigma(r.formula):
            raise BuildError(f"row instance {to_text(b.statement(inst))} does not match {to_text(r.formula)}")
        cur = b.mp(inst, cur)
    backward = b.discharge(s, cur)

    if fwd_rw is not None:
        forward = chain(b, fwd_rw, forward)
        backward = chain(b, backward, bwd_rw)
    m = sum(1 for r in rows if r.group == 1)
    kind = "bar-ess" if essential else "bar"
    tr = Translation(kind, source, output, sigma, b.proof(backward), b.proof(forward), m)
    get_stats_collector().record_transform(kind, tr.backward.size() + tr.forward.size())
    logger.debug(f"{kind}: {len(rows)} premises, {m} disjunctive")
    return tr


def bar_basic(phi: Formula) -> Translation:
    """Implicational core with one p -> q | r premise per negative disjunction."""
    return _bar(phi, essential=False)


def bar_essential(phi: Formula) -> Translation:
    """Like bar_basic, keeping only the essential disjunctions as premises."""
    return _bar(phi, essential=True)


# --- plus -------------------------------------------------------------------------------

def _plus_shape(phi: Formula) -> Tuple[List[str], Formula, Formula]:
    vs = sorted(variables(phi))
    r = FreshNames(vs, "_u").var()
    return vs, r, join([Impl(r, Var(p)) for p in vs], _bot_to(phi, r))


def plus(phi: Formula) -> Translation:
    vs, r, output = _plus_shape(phi)
    sigma = Substitution({r.name: BOT})
    b = ProofBuilder(ipc_rules(), F)
    s = b.assume(sigma(output))
    cur = s
    for p in vs:
        cur = b.mp(b.axiom("efq", a=Var(p)), cur)
    tr = Translation("plus", phi, output, sigma, b.proof(b.discharge(s, cur)))
    get_stats_collector().record_transform("plus", tr.backward.size())
    return tr


def _require_checked(rs: RuleSet, proof: Proof) -> None:
    try:
        proof.require_ok(rs)
    except CheckError as e:
        raise PreconditionError(f"input proof does not check: {e}") from e
    if proof.kind == CF:
        raise PreconditionError("circuit Frege proofs are not supported, convert with cf_to_ef first")
    if proof.hypotheses:
        raise PreconditionError("transports take proofs without hypotheses")


def _propers(rs: RuleSet) -> List[Formula]:
    return [t for k, t in rs.axioms.items() if k.startswith(PROPER)]


def _drop_extraneous(rs: RuleSet, proof: Proof, keep: Set[str], filler: Formula) -> Proof:
    """Substitute filler for variables that are neither in keep nor extension variables."""
    ext = set(proof.extension_vars())
    extra = variables_of(line.statement for line in proof.lines) - keep - ext
    if not extra:
        return proof
    logger.debug(f"substituting {to_text(filler)} for {sorted(extra)}")
    return instantiate_template(rs, proof, Substitution({v: filler for v in extra}))


def _below(b: ProofBuilder, f: Formula, r: Formula, hyps: Dict[str, int],
           ext: Dict[str, Tuple[int, int]], memo: Dict[Formula, int]) -> int:
    """r -> f for an F-free f whose variables carry hypotheses r -> p."""
    line = memo.get(f)
    if line is not None:
        return line
    if f is r:
        line = b.identity(r)
    elif f.op == VAR:
        if f.name in hyps:
            line = hyps[f.name]
        elif f.name in ext:
            fwd, bwd = ext[f.name]
            line = chain(b, _below(b, b.statement(fwd).right, r, hyps, ext, memo), bwd)
        else:
            raise BuildError(f"no hypothesis {to_text(r)} -> {f.name}")
    elif f.op == IMP:
        line = chain(b, _below(b, f.right, r, hyps, ext, memo), b.axiom("K", a=f.right, b=f.left))
    elif f.op == AND:
        x = b.assume(r)
        left = b.mp(x, _below(b, f.left, r, hyps, ext, memo))
        right = b.mp(x, _below(b, f.right, r, hyps, ext, memo))
        line = b.discharge(x, b.mp(right, b.mp(left, b.axiom("and_i", a=f.left, b=f.right))))
    elif f.op == OR:
        line = chain(b, _below(b, f.left, r, hyps, ext, memo), b.axiom("or_i1", a=f.left, b=f.right))
    else:
        raise BuildError(f"unexpected F below {to_text(r)}")
    memo[f] = line
    return line


def plus_transport(rs: RuleSet, proof: Proof) -> Proof:
    """A proof of plus(phi).output from a proof of phi in the same calculus."""
    _require_checked(rs, proof)
    for t in _propers(rs):
        if not is_positive(t):
            raise PreconditionError(f"proper axiom {to_text(t)} contains F")
    phi = proof.conclusion
    vs, r, target = _plus_shape(phi)
    if proof.kind == SF:
        if r.name in variables_of(line.statement for line in proof.lines):
            raise PreconditionError(f"{r.name} occurs in the proof")
        out = _plus_sf(rs, proof, r)
    else:
        out = _plus_global(rs, _drop_extraneous(rs, proof, set(vs), BOT), vs, r)
    if out.conclusion is not target:
        raise BuildError("transported proof does not end in the translated formula")
    get_stats_collector().record_transform("plus_transport", out.size())
    return out


def _plus_global(rs: RuleSet, proof: Proof, vs: List[str], r: Formula) -> Proof:
    if r.name in proof.extension_vars():
        raise PreconditionError(f"{r.name} is an extension variable of the proof")
    b = ProofBuilder(rs, proof.kind)
    hyps = {p: b.assume(Impl(r, Var(p))) for p in vs}
    ext: Dict[str, Tuple[int, int]] = {}
    for line in proof.lines:
        j = line.just
        if isinstance(j, Ext) and j.var not in ext:
            ext[j.var] = b.ext(j.var, _bot_to(j.definition, r))
    memo: Dict[Formula, int] = {}
    out: List[int] = []
    for line in proof.lines:
        j = line.just
        if isinstance(j, Axiom):
            if j.name == "efq":
                out.append(_below(b, _bot_to(line.statement.right, r), r, hyps, ext, memo))
            else:
                s = Substitution({k: _bot_to(v, r) for k, v in j.subst.items()})
                out.append(b.axiom(j.name, s))
        elif isinstance(j, MP):
            out.append(b.mp(out[j.minor], out[j.major]))
        elif isinstance(j, Ext):
            out.append(ext[j.var][0 if j.forward else 1])
        else:
            raise BuildError(f"unexpected justification {j!r}")
        if b.statement(out[-1]) is not _bot_to(line.statement, r):
            raise BuildError(f"translated line {len(out) - 1} does not match")
    final = b.discharge_all([hyps[p] for p in vs], out[-1])
    return b.proof(final)


def _plus_sf(rs: RuleSet, proof: Proof, r: Formula) -> Proof:
    """Line k becomes (r -> p) for each of its variables -> the line with F as r."""
    b = ProofBuilder(rs, SF)

    def hyps_for(names: List[str]) -> Dict[str, int]:
        return {p: b.assume(Impl(r, Var(p))) for p in names}

    out: List[int] = []
    ident: Optional[int] = None
    for line in proof.lines:
        j = line.just
        stmt = line.statement
        gamma = sorted(variables(stmt))
        if isinstance(j, Axiom):
            hyps = hyps_for(gamma)
            if j.name == "efq":
                body = _below(b, _bot_to(stmt.right, r), r, hyps, {}, {})
            else:
                body = b.axiom(j.name, Substitution({k: _bot_to(v, r) for k, v in j.subst.items()}))
            res = b.discharge_all([hyps[p] for p in gamma], body)
        elif isinstance(j, MP):
            minor = proof.lines[j.minor].statement
            hyps = hyps_for(sorted(variables(stmt) | variables(minor)))
            a = b.mp_chain(out[j.minor], *[hyps[p] for p in sorted(variables(minor))])
            major = b.mp_chain(out[j.major], *[hyps[p] for p in sorted(variables(Impl(minor, stmt)))])
            y = b.mp(a, major)
            extra = sorted(variables(minor) - variables(stmt))
            res = b.discharge_all([hyps[p] for p in extra + gamma], y)
            if extra:
                res = b.subst(res, {p: r for p in extra})
                if ident is None:
                    ident = b.identity(r)
                res = b.mp_chain(res, *[ident] * len(extra))
        elif isinstance(j, SubstRule):
            src = proof.lines[j.line].statement
            tau = Substitution({k: _bot_to(v, r) for k, v in j.subst.items()})
            y = b.subst(out[j.line], tau)
            hyps = hyps_for(gamma)
            memo: Dict[Formula, int] = {}
            for p in sorted(variables(src)):
                y = b.mp(_below(b, _bot_to(j.subst[p], r), r, hyps, {}, memo), y)
            res = b.discharge_all([hyps[p] for p in gamma], y)
        else:
            raise BuildError(f"unexpected justification {j!r}")
        want = join([Impl(r, Var(p)) for p in gamma], _bot_to(stmt, r))
        if b.statement(res) is not want:
            raise BuildError(f"translated line {len(out)} does not match")
        out.append(res)
    return b.proof(out[-1])


# --- tilde ------------------------------------------------------------------------------

class _Stars:
    """alpha* : top-most disjunctions replaced by their variables."""

    def __init__(self, names: Dict[Formula, Formula], fresh: Optional[FreshNames] = None):
        self.names = names
        self.fresh = fresh
        self.named: Dict[str, Formula] = {v.name: d for d, v in names.items()}
        self._memo: Dict[Formula, Formula] = {}

    def name(self, d: Formula) -> Formula:
        v = self.names.get(d)
        if v is None:
            if self.fresh is None:
                raise BuildError(f"no variable for {to_text(d)}")
            v = self.names[d] = self.fresh.var()
            self.named[v.name] = d
        return v

    def __call__(self, f: Formula) -> Formula:
        memo = self._memo
        if f in memo:
            return memo[f]
        for g in _dag_nodes(f):
            if g in memo:
                continue
            if g.op == OR:
                memo[g] = self.name(g)
            elif g.left is None:
                memo[g] = g
            else:
                memo[g] = make(g.op, memo[g.left], memo[g.right])
        return memo[f]


@dataclass
class _TildeShape:
    """Delta rows keyed (d, 0) and (d, 1) for the introductions, (d, v) for the eliminations."""

    source: Formula
    disjunctions: List[Formula]
    stars: _Stars
    values: List[Formula]
    delta: List[Tuple[tuple, Formula]] = field(default_factory=list)

    @property
    def core(self) -> Formula:
        return join([f for _, f in self.delta], self.stars(self.source))


def _tilde_shape(phi: Formula) -> _TildeShape:
    disj = [g for g in _dag_nodes(phi) if g.op == OR]
    names = FreshNames(variables(phi), "_r")
    stars = _Stars({d: names.var() for d in disj})
    values = [Var(p) for p in sorted(variables(phi))] + [stars.names[d] for d in disj]
    if not is_positive(phi):
        values.append(BOT)
    shape = _TildeShape(phi, disj, stars, values)
    for d in disj:
        r = stars.names[d]
        a, c = stars(d.left), stars(d.right)
        shape.delta.append(((d, 0), Impl(a, r)))
        shape.delta.append(((d, 1), Impl(c, r)))
        for v in values:
            shape.delta.append(((d, v), join([r, Impl(a, v), Impl(c, v)], v)))
    return shape


def tilde(phi: Formula) -> Translation:
    shape = _tilde_shape(phi)
    core = shape.core
    back = Substitution({v.name: d for d, v in shape.stars.names.items()})
    b = ProofBuilder(ipc_rules(), F)
    s = b.assume(back(core))
    cur = s
    for (d, key), _ in shape.delta:
        if isinstance(key, Formula):
            inst = b.axiom("or_e", a=d.left, b=d.right, c=back(key))
        else:
            inst = b.axiom("or_i1" if key == 0 else "or_i2", a=d.left, b=d.right)
        cur = b.mp(inst, cur)
    backward = b.discharge(s, cur)
    output, sigma = core, back
    if AND in connectives(core):
        inner = bar_basic(core)
        output = inner.output
        sigma = back.compose(inner.back_subst)
        lifted = b.include(instantiate_template(ipc_rules(), inner.backward, back))
        backward = chain(b, lifted, backward)
    tr = Translation("tilde", phi, output, sigma, b.proof(backward))
    get_stats_collector().record_transform("tilde", tr.backward.size())
    return tr


class _DisjunctionTransport:
    """Rewrites a disjunction-using EF proof under the Delta premises of tilde."""

    def __init__(self, b: ProofBuilder, shape: _TildeShape, delta_lines: Dict[tuple, int],
                 old_defs: Dict[str, Formula], definition_values: List[Formula]):
        self.b = b
        self.shape = shape
        self.stars = shape.stars
        self.in_phi = set(shape.disjunctions)
        self.values = set(shape.values)
        self.definition_values = definition_values
        self.delta = delta_lines
        self.old = old_defs
        self.ext: Dict[str, Tuple[int, int]] = {}
        self._elim: Dict[Tuple[Formula, Formula], int] = {}
        self._bot: Dict[Formula, int] = {}

    def _parts(self, d: Formula) -> List[Formula]:
        a, c = self.stars(d.left), self.stars(d.right)
        return [join([Impl(a, v), Impl(c, v)], v) for v in self.definition_values]

    def define(self, q: str) -> Tuple[int, int]:
        known = self.ext.get(q)
        if known is not None:
            return known
        if q in self.old:
            body = self.stars(self.old[q])
        else:
            body = big_and(self._parts(self.stars.named[q]))
        for v in sorted(variables(body)):
            if self.is_ext(v):
                self.define(v)
        self.ext[q] = self.b.ext(q, body)
        return self.ext[q]

    def is_ext(self, name: str) -> bool:
        if name in self.old:
            return True
        d = self.stars.named.get(name)
        return d is not None and d not in self.in_phi

    def intro(self, d: Formula, side: int) -> int:
        """a* -> r_d (side 0) or c* -> r_d (side 1)."""
        if d in self.in_phi:
            return self.delta[(d, side)]
        b = self.b
        a, c = self.stars(d.left), self.stars(d.right)
        x = b.assume(a if side == 0 else c)
        comps = []
        for v in self.definition_values:
            f = b.assume(Impl(a, v))
            g = b.assume(Impl(c, v))
            comps.append(b.discharge_all([f, g], b.mp(x, f if side == 0 else g)))
        conj = comps[0]
        for k in range(1, len(comps)):
            conj = b.mp(comps[k], b.mp(conj, b.axiom("and_i", a=b.statement(conj), b=b.statement(comps[k]))))
        _, bwd = self.define(self.stars.name(d).name)
        return b.discharge(x, b.mp(conj, bwd))

    def base(self, d: Formula, v: Formula) -> int:
        if d in self.in_phi:
            if v in self.values:
                return self.delta[(d, v)]
            return self.redundant_bot(d)
        fwd, _ = self.define(self.stars.name(d).name)
        parts = self._parts(d)
        if len(parts) == 1:
            return fwd
        return chain(self.b, fwd, _projection(self.b, parts, self.definition_values.index(v)))

    def redundant_bot(self, d: Formula) -> int:
        """The F row of a disjunction of a positive formula, from the other rows and efq."""
        known = self._bot.get(d)
        if known is not None:
            return known
        b = self.b
        a, c = self.stars(d.left), self.stars(d.right)
        x = b.assume(self.stars.name(d))
        f = b.assume(Impl(a, BOT))
        g = b.assume(Impl(c, BOT))
        vals: Dict[Formula, int] = {}
        for v in self.shape.values:
            row = b.mp(x, self.delta[(d, v)])
            row = b.mp(chain(b, f, b.axiom("efq", a=v)), row)
            vals[v] = b.mp(chain(b, g, b.axiom("efq", a=v)), row)
        line = b.discharge_all([x, f, g], b.mp(_positive_from(b, c, vals), g))
        self._bot[d] = line
        return line

    def elim(self, d: Formula, xi: Formula) -> int:
        """r_d -> (a* -> xi) -> (c* -> xi) -> xi."""
        key = (d, xi)
        known = self._elim.get(key)
        if known is not None:
            return known
        b = self.b
        a, c, r = self.stars(d.left), self.stars(d.right), self.stars.name(d)
        if xi in self.values or xi in self.definition_values:
            line = self.base(d, xi)
        elif xi.op == IMP:
            line = b.mp(self.elim(d, xi.right), b.lemma(ELIM_IMP, a=a, b=c, c=r, d=xi.left, e=xi.right))
        elif xi.op == AND:
            schema = b.lemma(ELIM_AND, a=a, b=c, c=r, d=xi.left, e=xi.right)
            line = b.mp(self.elim(d, xi.right), b.mp(self.elim(d, xi.left), schema))
        elif xi.op == VAR and self.is_ext(xi.name):
            fwd, bwd = self.define(xi.name)
            body = b.statement(fwd).right
            schema = b.lemma(ELIM_EXT, a=a, b=c, c=r, d=body, e=xi)
            line = b.mp(bwd, b.mp(fwd, b.mp(self.elim(d, body), schema)))
        else:
            raise BuildError(f"cannot eliminate {to_text(d)} into {to_text(xi)}")
        self._elim[key] = line
        return line

    def line(self, stmt: Formula, j: object, out: List[int]) -> int:
        b = self.b
        if isinstance(j, Axiom):
            if j.name == "or_i1":
                return self.intro(stmt.right, 0)
            if j.name == "or_i2":
                return self.intro(stmt.right, 1)
            if j.name == "or_e":
                return self.elim(stmt.left, self.stars(head(stmt)[1]))
            return b.axiom(j.name, Substitution({k: self.stars(v) for k, v in j.subst.items()}))
        if isinstance(j, MP):
            return b.mp(out[j.minor], out[j.major])
        if isinstance(j, Ext):
            return self.define(j.var)[0 if j.forward else 1]
        raise BuildError(f"unexpected justification {j!r}")


def _projection(b: ProofBuilder, parts: List[Formula], k: int) -> int:
    """big_and(parts) -> parts[k] for the left-nested conjunction."""
    steps = []
    for m in range(len(parts) - 1, k, -1):
        steps.append(b.axiom("and_e1", a=big_and(parts[:m]), b=parts[m]))
    if k > 0:
        steps.append(b.axiom("and_e2", a=big_and(parts[:k]), b=parts[k]))
    line = steps[0]
    for s in steps[1:]:
        line = chain(b, line, s)
    return line


def _positive_from(b: ProofBuilder, f: Formula, vals: Dict[Formula, int]) -> int:
    """Derive an F-free, disjunction-free f from derived variables."""
    if f in vals:
        return vals[f]
    if f.op == IMP:
        return b.weaken(_positive_from(b, f.right, vals), f.left)
    if f.op == AND:
        left = _positive_from(b, f.left, vals)
        right = _positive_from(b, f.right, vals)
        return b.mp(right, b.mp(left, b.axiom("and_i", a=f.left, b=f.right)))
    raise BuildError(f"{to_text(f)} is not built from the derived variables")


def tilde_core_transport(rs: RuleSet, proof: Proof) -> Tuple[Proof, _TildeShape]:
    """An EF proof of the disjunction-free core Delta -> phi* of a proof of phi."""
    _require_checked(rs, proof)
    if proof.kind == SF:
        raise PreconditionError("the disjunction transport handles F and EF proofs only")
    for t in _propers(rs):
        if OR in connectives(t):
            raise PreconditionError(f"proper axiom {to_text(t)} contains a disjunction")
    phi = proof.conclusion
    shape = _tilde_shape(phi)
    filler = BOT if not is_positive(phi) else Var(sorted(variables(phi))[0])
    proof = _drop_extraneous(rs, proof, set(variables(phi)), filler)
    old_defs = {line.just.var: line.just.definition for line in proof.lines if isinstance(line.just, Ext)}
    used = variables_of(line.statement for line in proof.lines)
    clash = used & set(shape.stars.named)
    if clash:
        raise PreconditionError(f"variables {sorted(clash)} are reserved for disjunctions")
    shape.stars.fresh = FreshNames(used | set(shape.stars.named), "_d")

    b = ProofBuilder(rs, EF)
    delta_lines = {key: b.assume(f) for key, f in shape.delta}
    definition_values = list(shape.values)
    if BOT not in shape.values and any(BOT_OP in connectives(line.statement) for line in proof.lines):
        definition_values.append(BOT)
    tr = _DisjunctionTransport(b, shape, delta_lines, old_defs, definition_values)
    out: List[int] = []
    for line in proof.lines:
        out.append(tr.line(line.statement, line.just, out))
        if b.statement(out[-1]) is not shape.stars(line.statement):
            raise BuildError(f"translated line {len(out) - 1} does not match")
    final = b.discharge_all([delta_lines[key] for key, _ in shape.delta], out[-1])
    return b.proof(final), shape


def tilde_transport(rs: RuleSet, proof: Proof) -> Proof:
    """An EF proof of tilde(phi).output from an F or EF proof of phi."""
    core, shape = tilde_core_transport(rs, proof)
    b = ProofBuilder(rs, EF)
    final = b.include(core)
    if AND in connectives(shape.core):
        inner = bar_basic(shape.core)
        clash = set(inner.back_subst.mapping) & set(core.extension_vars())
        if clash:
            raise PreconditionError(f"extension variables {sorted(clash)} collide with fresh names")
        final = b.mp(final, b.include(inner.forward))
    result = b.proof(final)
    get_stats_collector().record_transform("tilde_transport", result.size())
    return result


# --- hat --------------------------------------------------------------------------------

def hat(phi: Formula) -> Translation:
    p = plus(phi)
    t = tilde(p.output)
    b = ProofBuilder(ipc_rules(), F)
    first = b.include(instantiate_template(ipc_rules(), t.backward, p.back_subst))
    backward = chain(b, first, b.include(p.backward))
    tr = Translation("hat", phi, t.output, p.back_subst.compose(t.back_subst), b.proof(backward))
    get_stats_collector().record_transform("hat", tr.backward.size())
    return tr


def hat_transport(rs: RuleSet, proof: Proof) -> Proof:
    return tilde_transport(rs, plus_transport(rs, proof))


TRANSLATIONS: Dict[str, Callable[[Formula], Translation]] = {
    "bar": bar_basic,
    "bar-ess": bar_essential,
    "plus": plus,
    "tilde": tilde,
    "hat": hat,
}

TRANSPORTS: Dict[str, Callable[[RuleSet, Proof], Proof]] = {
    "plus": plus_transport,
    "tilde": tilde_transport,
    "hat": hat_transport,
}


def translate(kind: str, phi: Formula) -> Translation:
    fn = TRANSLATIONS.get(kind)
    if fn is None:
        raise ValueError(f"Unknown translation {kind!r}; known: {sorted(TRANSLATIONS)}")
    return fn(phi)
