"""
IPTK - Negative Translation

Negative formulas and their u-images, the monotone negation nneg, a
refutation search for sequences of NAND formulas whose branching is logged
as cuts, the translation of such refutations into implicational Frege
proofs, and the substitution Frege proof generator for the implicational
separation family.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from iptk.builder import BuildError, ProofBuilder
from iptk.calculus import F, SF, Proof, RuleSet, standard_ruleset
from iptk.config import config, get_stats_collector
from iptk.generators import block
from iptk.kernel import (AND, BOT, BOT_OP, IMP, IMPLICATIONAL, OR, VAR, Formula, FragmentError,
                         FreshnessError, Impl, Or, Substitution, Var, _dag_nodes, big_and, head,
                         is_monotone, is_top_constant, join, make, to_text, top, variables)
from iptk.structural import PreconditionError, compose_into, reorder_into

logger = logging.getLogger(__name__)


class SatisfiableInput(ValueError):
    """The sequence has a satisfying assignment, so no refutation exists."""

    def __init__(self, assignment: Mapping[str, bool]):
        self.assignment = dict(assignment)
        shown = ", ".join(f"{k}={int(v)}" for k, v in sorted(self.assignment.items()))
        super().__init__(f"Satisfiable: {shown}")


class EffortExceeded(ValueError):
    pass


# --- negative formulas ----------------------------------------------------------------

def is_nand(f: Formula) -> bool:
    return f.op == VAR or is_negative(f)


def is_negative(f: Formula) -> bool:
    """Gamma -> F with every premise a variable or again negative."""
    premises, last = head(f)
    return last.op == BOT_OP and all(is_nand(g) for g in premises)


@dataclass(frozen=True)
class NegativeFormula:
    formula: Formula

    def __post_init__(self):
        if not is_negative(self.formula):
            raise FragmentError(f"{to_text(self.formula)} is not a negative formula")


def to_u(phi: Union[Formula, NegativeFormula], u: Union[str, Formula]) -> Formula:
    """Replace every F by the variable u."""
    if isinstance(phi, NegativeFormula):
        phi = phi.formula
    target = Var(u) if isinstance(u, str) else u
    if target.name in variables(phi):
        raise FreshnessError(f"{target.name} occurs in {to_text(phi)}")
    memo: Dict[Formula, Formula] = {}
    for g in _dag_nodes(phi):
        if g.op == BOT_OP:
            memo[g] = target
        elif g.op == VAR:
            memo[g] = g
        else:
            memo[g] = make(g.op, memo[g.left], memo[g.right])
    return memo[phi]


def nneg(phi: Formula) -> Formula:
    """Negative formula equivalent to ~phi for monotone phi."""
    if not is_monotone(phi):
        raise FragmentError(f"{to_text(phi)} is not monotone")
    memo: Dict[Formula, Formula] = {}

    def go(g: Formula) -> Formula:
        found = memo.get(g)
        if found is not None:
            return found
        if is_top_constant(g):
            out = BOT
        elif g.op == VAR:
            out = Impl(g, BOT)
        elif g.op == BOT_OP:
            out = Impl(BOT, BOT)
        elif g.op == OR:
            out = Impl(join([go(g.left), go(g.right)], BOT), BOT)
        else:
            out = join([Impl(go(g.left), BOT), Impl(go(g.right), BOT)], BOT)
        memo[g] = out
        return out

    return go(phi)


def nneg_u(phi: Formula, t: str) -> Formula:
    return to_u(nneg(phi), t)


def classical_value(phi: Formula, assignment: Mapping[str, bool]) -> bool:
    memo: Dict[Formula, bool] = {}
    for g in _dag_nodes(phi):
        if g.op == VAR:
            memo[g] = bool(assignment[g.name])
        elif g.op == BOT_OP:
            memo[g] = False
        elif g.op == IMP:
            memo[g] = (not memo[g.left]) or memo[g.right]
        elif g.op == AND:
            memo[g] = memo[g.left] and memo[g.right]
        else:
            memo[g] = memo[g.left] or memo[g.right]
    return memo[phi]


# --- NAND refutations -------------------------------------------------------------------

NandSequent = Tuple[Formula, ...]

INIT, STRUCT, CUT = "init", "struct", "cut"


def nand(fs: Sequence[Formula]) -> Formula:
    return join(list(fs), BOT)


def check_sequent(seq: Sequence[Formula]) -> NandSequent:
    for f in seq:
        if not is_nand(f):
            raise FragmentError(f"{to_text(f)} is neither a variable nor a negative formula")
    return tuple(seq)


@dataclass(frozen=True)
class NandStep:
    sequent: NandSequent
    rule: str
    premises: Tuple[int, ...] = ()
    cut: Tuple[Formula, ...] = ()


@dataclass
class NandRefutation:
    goal: NandSequent
    steps: List[NandStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def validate(self) -> Optional[str]:
        """None when every step is sound, else the first problem found."""
        for i, step in enumerate(self.steps):
            if any(k >= i for k in step.premises):
                return f"step {i}: premise does not precede it"
            if step.rule == INIT:
                if step.sequent != (nand(step.cut),) + tuple(step.cut):
                    return f"step {i}: not an initial sequent"
            elif step.rule == STRUCT:
                prem = self.steps[step.premises[0]].sequent
                if not set(prem) <= set(step.sequent):
                    return f"step {i}: structural step loses a formula"
            elif step.rule == CUT:
                left, right = (self.steps[k].sequent for k in step.premises)
                if left != step.sequent + step.cut or right != step.sequent + (nand(step.cut),):
                    return f"step {i}: malformed cut"
            else:
                return f"step {i}: unknown rule {step.rule}"
        if not self.steps or self.steps[-1].sequent != self.goal:
            return "last step is not the goal"
        return None


class _Refuter:
    """DPLL over the variables of the goal; every branching becomes a cut."""

    def __init__(self, goal: NandSequent, budget: int, seed: Optional[int]):
        self.goal = goal
        self.budget = budget
        self.nodes = 0
        self.steps: List[NandStep] = []
        self.index: Dict[Tuple[str, NandSequent], int] = {}
        order: List[str] = []
        for f in goal:
            for g in _dag_nodes(f):
                if g.op == VAR and g.name not in order:
                    order.append(g.name)
        if seed is not None:
            random.Random(seed).shuffle(order)
        self.order = order

    def add(self, step: NandStep) -> int:
        key = (step.rule, step.sequent)
        found = self.index.get(key)
        if found is not None and self.steps[found] == step:
            return found
        self.steps.append(step)
        self.index[key] = len(self.steps) - 1
        return len(self.steps) - 1

    def weaken(self, line: int, target: NandSequent) -> int:
        if self.steps[line].sequent == target:
            return line
        return self.add(NandStep(target, STRUCT, (line,)))

    def init(self, fs: Sequence[Formula], target: NandSequent) -> int:
        fs = tuple(fs)
        return self.weaken(self.add(NandStep((nand(fs),) + fs, INIT, (), fs)), target)

    def cut(self, seq: NandSequent, fs: Sequence[Formula], left: int, right: int) -> int:
        return self.add(NandStep(seq, CUT, (left, right), tuple(fs)))

    # three-valued evaluation under a partial assignment
    def value(self, f: Formula, assign: Dict[str, bool]) -> Optional[bool]:
        if f.op == VAR:
            return assign.get(f.name)
        premises, _ = head(f)
        vals = [self.value(g, assign) for g in premises]
        if any(v is False for v in vals):
            return True
        if all(v is True for v in vals):
            return False
        return None

    def search(self, seq: NandSequent, assign: Dict[str, bool]) -> int:
        self.nodes += 1
        if self.nodes > self.budget:
            raise EffortExceeded(f"refutation search exceeded {self.budget} nodes")
        for f in self.goal:
            if self.value(f, assign) is False:
                return self.false_in(seq, f, assign)
        x = next((v for v in self.order if v not in assign), None)
        if x is None:
            raise SatisfiableInput(assign)
        lit = Var(x)
        left = self.search(seq + (lit,), {**assign, x: True})
        right = self.search(seq + (nand([lit]),), {**assign, x: False})
        return self.cut(seq, (lit,), left, right)

    def false_in(self, seq: NandSequent, psi: Formula, assign: Dict[str, bool]) -> int:
        """Refute seq, which contains psi, psi false under assign."""
        if psi.op == VAR:
            return self.init((psi,), seq)
        premises, _ = head(psi)
        added: List[Formula] = []
        cur = seq
        for g in premises:
            if g not in cur:
                cur = cur + (g,)
                added.append(g)
        line = self.init(premises, cur)
        for g in reversed(added):
            prev = cur[:-1]
            line = self.cut(prev, (g,), line, self.true_in(prev, g, assign))
            cur = prev
        return line

    def true_in(self, seq: NandSequent, phi: Formula, assign: Dict[str, bool]) -> int:
        """Refute seq + (~phi,), phi true under assign."""
        target = seq + (nand([phi]),)
        if phi.op == VAR:
            return self.init((phi,), target)
        premises, _ = head(phi)
        false = next(g for g in premises if self.value(g, assign) is False)
        left = self.false_in(target + tuple(premises), false, assign)
        right = self.init((phi,), target + (phi,))
        return self.cut(target, tuple(premises), left, right)


def refute_nand(goal: Sequence[Formula], budget: Optional[int] = None,
                seed: Optional[int] = None) -> NandRefutation:
    """Refutation of a classically unsatisfiable NAND sequence."""
    goal = check_sequent(goal)
    refuter = _Refuter(goal, budget or config.prover_budget, seed)
    refuter.search(goal, {})
    steps = _reachable(refuter.steps, len(refuter.steps) - 1)
    refutation = NandRefutation(goal, steps)
    logger.debug(f"Refuted {len(goal)} formulas in {len(steps)} steps after {refuter.nodes} nodes")
    return refutation


def _reachable(steps: List[NandStep], last: int) -> List[NandStep]:
    keep = set()
    stack = [last]
    while stack:
        i = stack.pop()
        if i in keep:
            continue
        keep.add(i)
        stack.extend(steps[i].premises)
    order = sorted(keep)
    renumber = {old: new for new, old in enumerate(order)}
    return [NandStep(steps[i].sequent, steps[i].rule, tuple(renumber[k] for k in steps[i].premises),
                     steps[i].cut) for i in order]


# --- refutations to implicational proofs ----------------------------------------------------

def implicational_rules() -> RuleSet:
    return standard_ruleset(IMPLICATIONAL, name="ipc-impl")


def glivenko_into(b: ProofBuilder, refutation: NandRefutation, u: str) -> int:
    lines: List[int] = []
    uu = Var(u)
    tr = lambda seq: [to_u(f, u) for f in seq]
    for step in refutation.steps:
        if step.rule == INIT:
            lines.append(b.identity(to_u(nand(step.cut), u)))
        elif step.rule == STRUCT:
            prem = refutation.steps[step.premises[0]].sequent
            moved = reorder_into(b, tr(prem), tr(step.sequent), uu)
            lines.append(b.mp(lines[step.premises[0]], moved))
        else:
            gamma = tr(step.sequent)
            a = to_u(nand(step.cut), u)
            comp = compose_into(b, gamma, [Impl(a, uu), a], uu)
            left, right = (lines[k] for k in step.premises)
            lines.append(b.mp(left, b.mp(right, b.mp(b.identity(Impl(a, uu)), comp))))
    return lines[-1]


def glivenko_impl(refutation: NandRefutation, u: str = "u") -> Proof:
    """Implicational Frege proof of Gamma^u -> u from a refutation of Gamma."""
    problem = refutation.validate()
    if problem:
        raise PreconditionError(f"invalid refutation: {problem}")
    for f in refutation.goal:
        if u in variables(f):
            raise FreshnessError(f"{u} occurs in the refuted sequence")
    b = ProofBuilder(implicational_rules(), F)
    proof = b.proof(glivenko_into(b, refutation, u))
    get_stats_collector().record_transform("glivenko", proof.size())
    return proof


def glivenko(phi: Formula, u: str = "u", seed: Optional[int] = None) -> Proof:
    """Implicational proof of phi^u for a classically valid negative phi."""
    NegativeFormula(phi)
    premises, _ = head(phi)
    return glivenko_impl(refute_nand(premises, seed=seed), u)


# --- monotone negation lemmas ----------------------------------------------------------------

def _tautology(b: ProofBuilder, goal: Formula) -> int:
    from iptk.decision import derive_into
    return derive_into(b, goal)


def neg_mon_statements(phi: Formula, psi: Formula, u: str = "u", v: str = "v") -> Dict[str, Formula]:
    """The implicational facts about nneg(.)^u used by the separation proofs."""
    uu, vv = Var(u), Var(v)
    nu = lambda f: nneg_u(f, u)
    n_phi = nu(phi)
    return {
        "double_u_fwd": Impl(Impl(Impl(n_phi, uu), uu), n_phi),
        "double_u_bwd": Impl(n_phi, Impl(Impl(n_phi, uu), uu)),
        "or_left": Impl(nu(Or(phi, psi)), n_phi),
        "or_right": Impl(nu(Or(phi, psi)), nu(psi)),
        "or_intro": join([n_phi, nu(psi)], nu(Or(phi, psi))),
        "and_left": Impl(n_phi, nu(big_and([phi, psi]))),
        "and_right": Impl(nu(psi), nu(big_and([phi, psi]))),
        "shift_fwd": Impl(nneg_u_imp(phi, vv, uu), Impl(vv, n_phi)),
        "shift_bwd": Impl(Impl(vv, n_phi), nneg_u_imp(phi, vv, uu)),
        "monotone": join([Impl(vv, uu), nneg_u(phi, v)], n_phi),
    }


def nneg_u_imp(phi: Formula, v: Formula, u: Formula) -> Formula:
    """(nneg phi) with F replaced by v -> u."""
    return to_u(nneg(phi), Impl(v, u))


def neg_mon_library(phi: Formula, psi: Formula, u: str = "u", v: str = "v") -> Dict[str, Proof]:
    for name in (u, v):
        if name in variables(phi) | variables(psi):
            raise FreshnessError(f"{name} occurs in the monotone formulas")
    out = {}
    for name, goal in neg_mon_statements(phi, psi, u, v).items():
        b = ProofBuilder(implicational_rules(), F)
        out[name] = b.proof(_tautology(b, goal))
    return out


# --- the separation family -------------------------------------------------------------

def _blocks(prefix: str, lo: int, hi: int) -> Formula:
    return big_and([Or(Var(f"{prefix}{i}"), Var(f"{prefix}{i}_")) for i in range(lo, hi)])


def separation_formula(n: int, gamma: Formula, delta: Formula,
                       u: str = "u", v: str = "v", w: str = "w") -> Formula:
    uu = Var(u)
    return join([Impl(nneg_u(block("p", n), u), uu),
                 Impl(nneg_u(block("s", n), v), uu),
                 Impl(nneg_u(block("r", n), w), uu),
                 nneg_u(gamma, v),
                 nneg_u(delta, w)], uu)


def classical_core(n: int, gamma: Formula, delta: Formula) -> NandSequent:
    """The NAND sequence whose u-image is the all-u instance of the separation formula."""
    return check_sequent([Impl(nneg(block("p", n)), BOT),
                          Impl(nneg(block("s", n)), BOT),
                          Impl(nneg(block("r", n)), BOT),
                          nneg(gamma),
                          nneg(delta)])


def _check_separation_inputs(n: int, gamma: Formula, delta: Formula, names: Sequence[str]):
    if n < 1:
        raise PreconditionError("the separation family needs n >= 1")
    for f in (gamma, delta):
        if not is_monotone(f):
            raise PreconditionError(f"{to_text(f)} is not monotone")
    gv, dv = variables(gamma), variables(delta)
    s_names = {f"s{i}" for i in range(n)} | {f"s{i}_" for i in range(n)}
    r_names = {f"r{i}" for i in range(n)} | {f"r{i}_" for i in range(n)}
    if gv & r_names or dv & s_names:
        raise PreconditionError("gamma may not mention the r block, nor delta the s block")
    clash = set(names) & (gv | dv)
    if clash:
        raise FreshnessError(f"{sorted(clash)} occur in gamma or delta")


class _SeparationBuilder:
    """Discharges one block of the separation formula by substitution steps."""

    def __init__(self, b: ProofBuilder, u: str):
        self.b = b
        self.u = u
        self.uu = Var(u)

    def assume_all(self, fs: Sequence[Formula]) -> List[int]:
        return [self.b.assume(f) for f in fs]

    def close(self, assumptions: Sequence[int], goal: int) -> int:
        return self.b.discharge_all(list(assumptions), goal)

    def rest(self, prefix: str, j: int, n: int) -> Formula:
        return Impl(nneg_u(_blocks(prefix, j, n), self.u), self.uu)

    def done(self, prefix: str, j: int, t: Formula) -> Formula:
        return Impl(to_u(nneg(_blocks(prefix, 0, j)), t), self.uu)

    def base(self, ctx: Sequence[Formula], chi: Formula, t: str, prefix: str, n: int,
             source: int, order: Sequence[Formula]) -> int:
        """From source (u-variant) derive ctx -> nneg(chi)^t -> rest_0 -> (t -> u) -> u.

        order lists the premises of source; the chi premise there is nneg(chi)^u.
        """
        b, tt = self.b, Var(t)
        mono = _tautology(b, join([Impl(tt, self.uu), nneg_u(chi, t)], nneg_u(chi, self.u)))
        premises = list(ctx) + [nneg_u(chi, t), self.rest(prefix, 0, n), Impl(tt, self.uu)]
        hyps = self.assume_all(premises)
        env = dict(zip(premises, hyps))
        env[nneg_u(chi, self.u)] = b.mp(hyps[-3], b.mp(hyps[-1], mono))
        line = source
        for f in order:
            line = b.mp(env[f], line)
        return self.close(hyps, line)

    def half(self, ctx: Sequence[Formula], chi: Formula, t: str, prefix: str, j: int, n: int,
             current: int, x: Formula) -> int:
        """Substitute x := top, t := x -> t into the step-j line."""
        b, tt = self.b, Var(t)
        sigma = Substitution({x.name: top(IMPLICATIONAL), t: Impl(x, tt)})
        for f in ctx:
            if sigma(f) is not f:
                raise PreconditionError(f"{x.name} or {t} occurs in the context")
        moved = b.subst(current, sigma)
        n_chi = nneg_u(chi, t)
        phi_j = to_u(nneg(_blocks(prefix, 0, j)), tt)
        la = _tautology(b, Impl(n_chi, sigma(n_chi)))
        lb = _tautology(b, Impl(self.rest(prefix, j + 1, n), sigma(self.rest(prefix, j, n))))
        assumed = Impl(Impl(x, phi_j), self.uu)
        lc = _tautology(b, Impl(assumed, sigma(self.done(prefix, j, tt))))
        hyps = self.assume_all(list(ctx) + [n_chi, self.rest(prefix, j + 1, n), assumed])
        line = moved
        for h in hyps[:len(ctx)]:
            line = b.mp(h, line)
        line = b.mp(b.mp(hyps[-3], la), line)
        line = b.mp(b.mp(hyps[-2], lb), line)
        line = b.mp(b.mp(hyps[-1], lc), line)
        return self.close(hyps, line)

    def step(self, ctx: Sequence[Formula], chi: Formula, t: str, prefix: str, j: int, n: int,
             current: int) -> int:
        b, tt = self.b, Var(t)
        xs, xp = Var(f"{prefix}{j}"), Var(f"{prefix}{j}_")
        left = self.half(ctx, chi, t, prefix, j, n, current, xs)
        right = self.half(ctx, chi, t, prefix, j, n, current, xp)
        phi_j = to_u(nneg(_blocks(prefix, 0, j)), tt)
        x, y = Impl(xs, phi_j), Impl(xp, phi_j)
        z = to_u(nneg(_blocks(prefix, 0, j + 1)), tt)
        split = _tautology(b, join([x, y], z))
        lift = b.mp(split, b.lemma("(a -> b -> c) -> ((a -> d) -> d) -> ((b -> d) -> d) -> (c -> d) -> d",
                                   a=x, b=y, c=z, d=self.uu))
        hyps = self.assume_all(list(ctx) + [nneg_u(chi, t), self.rest(prefix, j + 1, n), Impl(z, self.uu)])
        def run(line: int) -> int:
            for h in hyps[:-1]:
                line = b.mp(h, line)
            return line
        line = b.mp(run(right), b.mp(run(left), lift))
        line = b.mp(hyps[-1], line)
        return self.close(hyps, line)

    def finish(self, ctx: Sequence[Formula], chi: Formula, t: str, prefix: str, n: int, current: int) -> int:
        """Drop the exhausted u -> u premise."""
        b = self.b
        premises = list(ctx) + [nneg_u(chi, t), self.done(prefix, n, Var(t))]
        hyps = self.assume_all(premises)
        line = current
        for h in hyps[:-1]:
            line = b.mp(h, line)
        line = b.mp(b.identity(self.uu), line)
        line = b.mp(hyps[-1], line)
        return self.close(hyps, line)

    def discharge_block(self, ctx, chi, t, prefix, n, source, order) -> int:
        line = self.base(ctx, chi, t, prefix, n, source, order)
        for j in range(n):
            line = self.step(ctx, chi, t, prefix, j, n, line)
            logger.debug(f"block {prefix}: discharged position {j}")
        return self.finish(ctx, chi, t, prefix, n, line)


def sep_proof(n: int, gamma: Formula, delta: Formula, refutation: Optional[NandRefutation] = None,
              u: str = "u", v: str = "v", w: str = "w", seed: Optional[int] = None) -> Proof:
    """Substitution Frege proof of the separation formula in the implicational fragment."""
    _check_separation_inputs(n, gamma, delta, (u, v, w, "x"))
    core = classical_core(n, gamma, delta)
    if refutation is None:
        refutation = refute_nand(core, seed=seed)
    if refutation.goal != core:
        raise PreconditionError("the refutation is not for the classical core of this instance")
    b = ProofBuilder(implicational_rules(), SF)
    sb = _SeparationBuilder(b, u)
    uu = Var(u)

    # all-u instance: P -> S -> R -> G -> D -> u
    all_u = glivenko_into(b, refutation, u)
    P = Impl(nneg_u(block("p", n), u), uu)
    R = Impl(nneg_u(block("r", n), u), uu)
    D = nneg_u(delta, u)
    S_u = Impl(nneg_u(block("s", n), u), uu)
    G_u = nneg_u(gamma, u)

    # first block: gamma, v, s
    ctx1 = [P, R, D]
    first = sb.discharge_block(ctx1, gamma, v, "s", n, all_u, [P, S_u, R, G_u, D])
    # first: P -> R -> D -> G_v -> S_v -> u
    G_v = nneg_u(gamma, v)
    S_v = sb.done("s", n, Var(v))

    # second block: delta, w, r
    ctx2 = [P, S_v, G_v]
    second = sb.discharge_block(ctx2, delta, w, "r", n, first, [P, R, D, G_v, S_v])
    D_w = nneg_u(delta, w)
    R_w = sb.done("r", n, Var(w))

    target = separation_formula(n, gamma, delta, u, v, w)
    premises = [P, S_v, R_w, G_v, D_w]
    hyps = sb.assume_all(premises)
    env = dict(zip(premises, hyps))
    line = second
    for f in ctx2 + [D_w, R_w]:
        line = b.mp(env[f], line)
    final = sb.close(hyps, line)
    if b.statement(final) is not target:
        raise BuildError("separation proof ended on the wrong formula")
    proof = b.proof(final)
    get_stats_collector().record_transform("sep_proof", proof.size())
    logger.info(f"Separation proof for n={n}: {proof.num_lines()} lines, size {proof.size()}")
    return proof
