"""
IPTK - Decision Procedures

A terminating contraction-free sequent prover for IPC (G4ip), whose
successful searches replay into standard Frege derivations, finite Kripke
countermodels for failed searches, an exhaustive small-model search used for
cross-validation, and a bounded counterexample-guided procedure for
axiomatic extensions.
"""

import itertools
import logging
from dataclasses import dataclass, field
from time import monotonic
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from iptk.builder import BuildError, ProofBuilder
from iptk.calculus import F, PROPER, Proof, RuleSet, standard_ruleset
from iptk.config import config
from iptk.kernel import (AND, BOT, BOT_OP, IMP, OR, VAR, Formula, Fragment, Impl, Substitution,
                         connectives, sort_key, subformulas, to_text, top, variables)
from iptk.semantics import KripkeModel, rooted_frames, up_sets

logger = logging.getLogger(__name__)

PROVABLE, REFUTED, UNKNOWN = "provable", "refuted", "unknown"


class BudgetExceeded(ValueError):
    pass


@dataclass
class Verdict:
    status: str
    proof: Optional[Proof] = None
    ruleset: Optional[RuleSet] = None
    model: Optional[KripkeModel] = None
    algebra: Optional[Any] = None
    reason: str = ""

    @property
    def provable(self) -> bool:
        return self.status == PROVABLE

    @property
    def refuted(self) -> bool:
        return self.status == REFUTED

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"verdict": self.status}
        if self.reason:
            out["reason"] = self.reason
        if self.proof is not None:
            out["proof_lines"] = self.proof.num_lines()
        if self.model is not None:
            out["countermodel"] = self.model.to_json()
        if self.algebra is not None:
            out["algebra"] = getattr(self.algebra, "name", "algebra")
        return out


# --- G4ip search ------------------------------------------------------------------

Node = Tuple[Any, ...]


class Prover:
    """Memoised G4ip proof search; invertible rules first."""

    def __init__(self, budget: Optional[int] = None, deadline: Optional[float] = None):
        self.budget = budget
        self.deadline = deadline
        self.steps = 0
        self.memo: Dict[Tuple[FrozenSet[Formula], Formula], Optional[Node]] = {}

    def prove(self, gamma: Iterable[Formula], goal: Formula) -> Optional[Node]:
        return self._search(frozenset(gamma), goal)

    def provable(self, gamma: Iterable[Formula], goal: Formula) -> bool:
        return self.prove(gamma, goal) is not None

    def _search(self, gamma: FrozenSet[Formula], goal: Formula) -> Optional[Node]:
        key = (gamma, goal)
        if key in self.memo:
            return self.memo[key]
        self.steps += 1
        if self.budget is not None and self.steps > self.budget:
            raise BudgetExceeded(f"prover budget of {self.budget} sequents exhausted")
        if self.deadline is not None and self.steps % 256 == 0 and monotonic() > self.deadline:
            raise BudgetExceeded("prover deadline passed")
        node = self._rules(gamma, goal)
        self.memo[key] = node
        return node

    def _rules(self, gamma: FrozenSet[Formula], goal: Formula) -> Optional[Node]:
        if goal in gamma:
            return ("ax",)
        if BOT in gamma:
            return ("bot",)
        ordered = sorted(gamma, key=sort_key)
        search = self._search
        for f in ordered:
            rest = gamma - {f}
            if f.op == AND:
                sub = search(rest | {f.left, f.right}, goal)
                return ("andL", f, sub) if sub is not None else None
            if f.op == OR:
                s1 = search(rest | {f.left}, goal)
                if s1 is None:
                    return None
                s2 = search(rest | {f.right}, goal)
                return ("orL", f, s1, s2) if s2 is not None else None
            if f.op == IMP:
                a = f.left
                if a.op == VAR and a in gamma:
                    sub = search(rest | {f.right}, goal)
                    return ("impAtom", f, sub) if sub is not None else None
                if a.op == BOT_OP:
                    sub = search(rest, goal)
                    return ("impBot", f, sub) if sub is not None else None
                if a.op == AND:
                    sub = search(rest | {Impl(a.left, Impl(a.right, f.right))}, goal)
                    return ("impAnd", f, sub) if sub is not None else None
                if a.op == OR:
                    sub = search(rest | {Impl(a.left, f.right), Impl(a.right, f.right)}, goal)
                    return ("impOr", f, sub) if sub is not None else None
        if goal.op == IMP:
            sub = search(gamma | {goal.left}, goal.right)
            return ("impR", sub) if sub is not None else None
        if goal.op == AND:
            s1 = search(gamma, goal.left)
            if s1 is None:
                return None
            s2 = search(gamma, goal.right)
            return ("andR", s1, s2) if s2 is not None else None
        if goal.op == OR:
            for side, part in ((0, goal.left), (1, goal.right)):
                sub = search(gamma, part)
                if sub is not None:
                    return ("orR", side, sub)
        for f in ordered:
            if f.op == IMP and f.left.op == IMP:
                b, c, d = f.left.left, f.left.right, f.right
                rest = gamma - {f}
                s1 = search(rest | {Impl(c, d)}, f.left)
                if s1 is None:
                    continue
                s2 = search(rest | {d}, goal)
                if s2 is not None:
                    return ("impImp", f, s1, s2)
        return None


# --- replay into Hilbert derivations ------------------------------------------------

def replay(builder: ProofBuilder, node: Node, ctx: Dict[Formula, int], goal: Formula) -> int:
    """Emit lines deriving goal from the context lines along a successful search."""
    kind = node[0]
    b = builder
    if kind == "ax":
        return ctx[goal]
    if kind == "bot":
        return b.mp(ctx[BOT], b.axiom("efq", a=goal))
    if kind == "impR":
        a = goal.left
        hyp = b.assume(a)
        inner = dict(ctx)
        inner.setdefault(a, hyp)
        return b.discharge(hyp, replay(b, node[1], inner, goal.right))
    if kind == "andR":
        l1 = replay(b, node[1], ctx, goal.left)
        l2 = replay(b, node[2], ctx, goal.right)
        return b.mp(l2, b.mp(l1, b.axiom("and_i", a=goal.left, b=goal.right)))
    if kind == "orR":
        part = goal.left if node[1] == 0 else goal.right
        line = replay(b, node[2], ctx, part)
        return b.mp(line, b.axiom("or_i1" if node[1] == 0 else "or_i2", a=goal.left, b=goal.right))

    f = node[1]
    major = ctx[f]
    rest = {k: v for k, v in ctx.items() if k is not f}
    if kind == "andL":
        rest.setdefault(f.left, b.mp(major, b.axiom("and_e1", a=f.left, b=f.right)))
        rest.setdefault(f.right, b.mp(major, b.axiom("and_e2", a=f.left, b=f.right)))
        return replay(b, node[2], rest, goal)
    if kind == "orL":
        branches = []
        for part, sub in ((f.left, node[2]), (f.right, node[3])):
            hyp = b.assume(part)
            inner = dict(rest)
            inner.setdefault(part, hyp)
            branches.append(b.discharge(hyp, replay(b, sub, inner, goal)))
        elim = b.axiom("or_e", a=f.left, b=f.right, c=goal)
        return b.mp_chain(elim, major, branches[0], branches[1])
    if kind == "impAtom":
        rest.setdefault(f.right, b.mp(ctx[f.left], major))
        return replay(b, node[2], rest, goal)
    if kind == "impBot":
        return replay(b, node[2], rest, goal)
    if kind == "impAnd":
        a, c = f.left.left, f.left.right
        ha = b.assume(a)
        hc = b.assume(c)
        conj = b.mp_chain(b.axiom("and_i", a=a, b=c), ha, hc)
        curried = b.discharge_all([ha, hc], b.mp(conj, major))
        rest.setdefault(b.statement(curried), curried)
        return replay(b, node[2], rest, goal)
    if kind == "impOr":
        for part, ax in ((f.left.left, "or_i1"), (f.left.right, "or_i2")):
            hyp = b.assume(part)
            intro = b.mp(hyp, b.axiom(ax, a=f.left.left, b=f.left.right))
            line = b.discharge(hyp, b.mp(intro, major))
            rest.setdefault(b.statement(line), line)
        return replay(b, node[2], rest, goal)
    if kind == "impImp":
        bb, c, d = f.left.left, f.left.right, f.right
        hc = b.assume(c)
        cd = b.discharge(hc, b.mp(b.weaken(hc, bb), major))
        first = dict(rest)
        first.setdefault(Impl(c, d), cd)
        bc = replay(b, node[2], first, f.left)
        second = dict(rest)
        second.setdefault(d, b.mp(bc, major))
        return replay(b, node[3], second, goal)
    raise ValueError(f"Unknown search node {kind}")


def minimal_ruleset(formulas: Iterable[Formula], proper: Optional[Formula] = None) -> RuleSet:
    ops = {IMP}
    for f in formulas:
        ops |= connectives(f)
    return standard_ruleset(Fragment(frozenset(ops)), proper)


def prove_ipc(hypotheses: Sequence[Formula], phi: Formula, rs: Optional[RuleSet] = None,
              budget: Optional[int] = None) -> Optional[Proof]:
    """A standard Frege derivation of phi from the hypotheses, or None if IPC does not prove it."""
    hypotheses = list(hypotheses)
    prover = Prover(budget)
    node = prover.prove(hypotheses, phi)
    if node is None:
        return None
    rs = rs or minimal_ruleset(hypotheses + [phi])
    builder = ProofBuilder(rs, F, hypotheses)
    ctx = {h: builder.hyp(h) for h in hypotheses}
    line = replay(builder, node, ctx, phi)
    return builder.proof(line)


def prove_into(builder: ProofBuilder, ctx: Dict[Formula, int], goal: Formula,
               prover: Optional[Prover] = None) -> Optional[int]:
    """Derive goal inside an existing builder from the given context lines."""
    prover = prover or Prover(config.prover_budget)
    node = prover.prove(ctx.keys(), goal)
    if node is None:
        return None
    return replay(builder, node, dict(ctx), goal)



def derive_into(builder: ProofBuilder, goal: Formula, ctx: Optional[Dict[Formula, int]] = None) -> int:
    """prove_into that raises when IPC does not prove the goal."""
    line = prove_into(builder, dict(ctx or {}), goal)
    if line is None:
        raise BuildError(f"{to_text(goal)[:120]} is not derivable in IPC")
    return line

# --- countermodels ------------------------------------------------------------------

def countermodel(phi: Formula, hypotheses: Sequence[Formula] = (),
                 prover: Optional[Prover] = None, shrink: bool = True) -> Optional[KripkeModel]:
    """Finite rooted model forcing the hypotheses but not phi at its root."""
    prover = prover or Prover()
    if prover.provable(hypotheses, phi):
        return None
    closure: List[Formula] = []
    seen = set()
    for f in list(hypotheses) + [phi]:
        for g in subformulas(f):
            if g not in seen:
                seen.add(g)
                closure.append(g)

    def saturate(base: FrozenSet[Formula]) -> FrozenSet[Formula]:
        return frozenset(g for g in closure if g in base or prover.provable(base, g))

    def prime(base: FrozenSet[Formula], avoid: Formula) -> FrozenSet[Formula]:
        theory = saturate(base)
        while True:
            split = None
            for g in closure:
                if g.op == OR and g in theory and g.left not in theory and g.right not in theory:
                    split = g
                    break
            if split is None:
                return theory
            if not prover.provable(theory | {split.left}, avoid):
                theory = saturate(theory | {split.left})
            else:
                theory = saturate(theory | {split.right})

    root = prime(frozenset(hypotheses), phi)
    worlds = [root]
    index = {root: 0}
    queue = [root]
    while queue:
        theory = queue.pop(0)
        for g in closure:
            if g.op == IMP and g not in theory:
                succ = prime(theory | {g.left}, g.right)
                if succ not in index:
                    index[succ] = len(worlds)
                    worlds.append(succ)
                    queue.append(succ)
    atoms = sorted(set().union(*(variables(f) for f in list(hypotheses) + [phi])))
    names = [f"w{i}" for i in range(len(worlds))]
    leq = [(names[i], names[j]) for i, s in enumerate(worlds) for j, t in enumerate(worlds) if s <= t]
    val = {names[i]: [a for a in atoms if any(g.op == VAR and g.name == a for g in w)] for i, w in enumerate(worlds)}
    model = KripkeModel.build(names, leq, val)
    if shrink:
        model = shrink_countermodel(model, phi, hypotheses)
    logger.debug(f"Countermodel for {to_text(phi)[:60]} has {len(model.points)} points")
    return model


def refutes(model: KripkeModel, phi: Formula, hypotheses: Sequence[Formula] = ()) -> bool:
    root = model.root()
    return all(model.forces(root, h) for h in hypotheses) and not model.forces(root, phi)


def shrink_countermodel(model: KripkeModel, phi: Formula, hypotheses: Sequence[Formula] = ()) -> KripkeModel:
    """Greedy point deletion keeping the refutation at the root."""
    current = model
    changed = True
    while changed:
        changed = False
        root = current.root()
        for x in current.points:
            if x == root:
                continue
            candidate = current.restrict([y for y in current.points if y != x])
            if refutes(candidate, phi, hypotheses):
                current = candidate
                changed = True
                break
    return current


def search_countermodel(phi: Formula, max_points: Optional[int] = None) -> Optional[KripkeModel]:
    """Exhaustive search over rooted models with at most max_points points."""
    bound = config.max_worlds if max_points is None else max_points
    names = sorted(variables(phi))
    for n in range(1, bound + 1):
        for frame in rooted_frames(n):
            ups = up_sets(frame)
            for choice in itertools.product(ups, repeat=len(names)):
                model = KripkeModel.from_masks(frame, dict(zip(names, choice)))
                if not model.forces(model.root(), phi):
                    return model
    return None


# --- IPC verdicts ----------------------------------------------------------------

def decide_ipc(phi: Formula, with_proof: bool = False) -> Verdict:
    prover = Prover()
    node = prover.prove([], phi)
    if node is not None:
        proof = prove_ipc([], phi) if with_proof else None
        return Verdict(PROVABLE, proof=proof)
    model = countermodel(phi, prover=prover)
    return Verdict(REFUTED, model=model)


def equiv_ipc(phi: Formula, psi: Formula) -> bool:
    prover = Prover()
    return prover.provable([phi], psi) and prover.provable([psi], phi)


def ipc_provable(phi: Formula, hypotheses: Sequence[Formula] = ()) -> bool:
    return Prover().provable(hypotheses, phi)


# --- axiomatic extensions ----------------------------------------------------------

@dataclass
class Effort:
    max_instances: int = field(default_factory=lambda: config.ext_instances)
    depth: int = field(default_factory=lambda: config.ext_depth)
    max_worlds: int = 4
    budget: int = field(default_factory=lambda: config.prover_budget)
    deadline_seconds: Optional[float] = None
    progress: Optional[Callable[[str], None]] = None


def extension_ruleset(axioms: Sequence[Formula], phi: Formula, fragment: Optional[Fragment] = None) -> RuleSet:
    ops = set(fragment.connectives) if fragment else {IMP}
    for f in list(axioms) + [phi]:
        ops |= connectives(f)
    return standard_ruleset(Fragment(frozenset(ops)), axioms[0] if axioms else None, more=axioms[1:])


def _axiom_name(k: int) -> str:
    return PROPER if k == 0 else f"{PROPER}{k}"


def _instance_pool(phi: Formula, fragment: Fragment, depth: int) -> List[Formula]:
    pool = sorted(set(subformulas(phi)), key=sort_key)
    if BOT_OP in fragment.connectives and BOT not in pool:
        pool.append(BOT)
    pool.append(top(fragment))
    if depth >= 2:
        extra = [Impl(a, b) for a in pool for b in pool if a is not b and a.size + b.size <= 6]
        pool = pool + [f for f in extra if f not in set(pool)]
    return pool


def _candidates(axioms: Sequence[Formula], phi: Formula, fragment: Fragment, depth: int):
    """Axiom instances over the pool, those matching the query's head first."""
    pool = _instance_pool(phi, fragment, depth)
    goal_head = phi
    while goal_head.op == IMP:
        goal_head = goal_head.right
    tiers: Tuple[List, List] = ([], [])
    for k, ax in enumerate(axioms):
        names = sorted(variables(ax))
        ax_head = ax
        while ax_head.op == IMP:
            ax_head = ax_head.right
        for choice in itertools.product(pool, repeat=len(names)):
            sigma = Substitution(dict(zip(names, choice)))
            inst = sigma(ax)
            if not fragment.admits(inst):
                continue
            preferred = ax_head.op == VAR and sigma[ax_head.name] is goal_head
            tiers[0 if preferred else 1].append((inst.size, to_text(inst), k, sigma, inst))
    out = []
    for tier in tiers:
        tier.sort(key=lambda t: (t[0], t[1]))
        out.extend(tier)
    return out


def frame_validates(model: KripkeModel, formulas: Sequence[Formula]) -> bool:
    """Validity on the underlying frame: every valuation, every point."""
    frame = model.frame()
    ups = up_sets(frame)
    for f in formulas:
        names = sorted(variables(f))
        for choice in itertools.product(ups, repeat=len(names)):
            m = KripkeModel.from_masks(frame, dict(zip(names, choice)))
            if not m.forces(m.root(), f):
                return False
    return True


def decide_ext(axioms: Sequence[Formula], phi: Formula, effort: Optional[Effort] = None,
               fragment: Optional[Fragment] = None) -> Verdict:
    """Sound but incomplete: certified Provable/Refuted, otherwise Unknown."""
    effort = effort or Effort()
    axioms = list(axioms)
    rs = extension_ruleset(axioms, phi, fragment)
    frag = fragment or rs.fragment
    deadline = monotonic() + effort.deadline_seconds if effort.deadline_seconds else None
    notify = effort.progress or (lambda msg: None)
    prover = Prover(effort.budget, deadline)
    chosen: List[Tuple[int, Substitution, Formula]] = []
    try:
        candidates = _candidates(axioms, phi, frag, effort.depth)
        for round_no in range(effort.max_instances + 1):
            hyps = [inst for _, _, inst in chosen]
            if prover.provable(hyps, phi):
                return Verdict(PROVABLE, proof=_extension_proof(rs, chosen, phi, prover), ruleset=rs,
                               reason=f"{len(chosen)} axiom instances")
            model = countermodel(phi, hyps, prover=prover)
            if frame_validates(model, axioms):
                return Verdict(REFUTED, model=model, ruleset=rs, reason="Kripke frame validating the axioms")
            if round_no == effort.max_instances:
                break
            root = model.root()
            pick = next((c for c in candidates if not model.forces(root, c[4])), None)
            if pick is None:
                break
            chosen.append((pick[2], pick[3], pick[4]))
            notify(f"round {round_no}: added {to_text(pick[4])}")
    except BudgetExceeded as e:
        logger.warning(f"decide_ext stopped: {e}")

    algebra = _algebra_refuter(axioms, phi, frag)
    if algebra is not None:
        return Verdict(REFUTED, algebra=algebra, ruleset=rs, reason=f"algebra {algebra.name}")
    model = _frame_refuter(axioms, phi, effort.max_worlds)
    if model is not None:
        return Verdict(REFUTED, model=model, ruleset=rs, reason="Kripke frame validating the axioms")
    return Verdict(UNKNOWN, ruleset=rs, reason=f"no certificate with {len(chosen)} instances")


def _extension_proof(rs: RuleSet, chosen, phi: Formula, prover: Prover) -> Proof:
    builder = ProofBuilder(rs, F)
    ctx = {}
    for k, sigma, inst in chosen:
        ctx.setdefault(inst, builder.axiom(_axiom_name(k), sigma))
    line = prove_into(builder, ctx, phi, prover)
    return builder.proof(line)


def _algebra_refuter(axioms: Sequence[Formula], phi: Formula, fragment: Fragment):
    from iptk.algebra import shipped_algebras
    needed = (fragment.connectives | connectives(phi)) - {IMP}
    for algebra in shipped_algebras():
        if not algebra.supports(needed):
            continue
        if all(algebra.validates(ax) for ax in axioms) and not algebra.validates(phi):
            return algebra
    return None


def _frame_refuter(axioms: Sequence[Formula], phi: Formula, max_worlds: int) -> Optional[KripkeModel]:
    names = sorted(variables(phi))
    for n in range(1, max_worlds + 1):
        for frame in rooted_frames(n):
            ups = up_sets(frame)
            for choice in itertools.product(ups, repeat=len(names)):
                model = KripkeModel.from_masks(frame, dict(zip(names, choice)))
                if not model.forces(model.root(), phi):
                    if frame_validates(model, axioms):
                        return model
                    break
    return None
