"""
IPTK - Proof Transformations

Proof-level eliminations:

- disjunctions and F restricted to subformulas of the conclusion
  (eliminate_lor_bot), with a line scan asserting the restriction
- the top-point translation of an L0 proof of a F-free formula into an
  L1 proof that never mentions F (bot_top_translate over a LogicPair)
- conjunction elimination for implicational conclusions, in IPC
  (conj_elim_ipc) and in logics axiomatised by an implicational formula
  whose conjunction powers are witnessed (conj_elim_general)
"""

import json
import logging
import os
from dataclasses import dataclass, field
from threading import Lock
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from iptk.builder import BuildError, ProofBuilder
from iptk.calculus import (CF, EF, F, PROPER, SF, Axiom, CheckError, Ext, MP, Line, Proof, RuleSet,
                           named_logic, proof_from_json, proof_to_json, standard_ruleset)
from iptk.config import config, get_stats_collector
from iptk.conj_power import (ConjPowerWitness, conj_power_proofs, indexed, indexed_ruleset,
                             shipped_witness, witness_from_search)
from iptk.conj_split import SplitTranslator, Splitter, default_atoms
from iptk.decision import Effort, decide_ext, prove_ipc
from iptk.kernel import (AND, BOT, BOT_OP, IMPLICATIONAL, OR, POSITIVE, TOP_VAR, VAR, Formula,
                         Fragment, FreshNames, Impl, Substitution, Var, _dag_nodes, And, Or, big_and,
                         connectives, is_implicational, is_positive, to_text, top, variables,
                         variables_of)
from iptk.structural import PreconditionError, cf_to_ef, ef_to_cf, instantiate_template
from iptk.taut_transform import (_plus_shape, _projection, _propers, plus_transport,
                                 tilde_core_transport)

logger = logging.getLogger(__name__)

ELIMINATIONS = ("lor", "bot")


# --- line scan --------------------------------------------------------------------------

@dataclass
class ConnectiveScan:
    """Line numbers of occurrences outside the subformulas of the conclusion."""

    stray_or: List[int] = field(default_factory=list)
    stray_and: List[int] = field(default_factory=list)
    stray_bot: List[int] = field(default_factory=list)
    bad_or_e: List[int] = field(default_factory=list)
    bad_efq: List[int] = field(default_factory=list)

    def clean(self, what: Sequence[str] = ELIMINATIONS) -> bool:
        checks = {
            "lor": self.stray_or or self.bad_or_e,
            "bot": self.stray_bot or self.bad_efq,
            "conj": self.stray_and,
        }
        return not any(checks[w] for w in what)

    def to_dict(self) -> Dict[str, List[int]]:
        return {
            "stray_or": self.stray_or,
            "stray_and": self.stray_and,
            "stray_bot": self.stray_bot,
            "bad_or_e": self.bad_or_e,
            "bad_efq": self.bad_efq,
        }


def scan_connectives(proof: Proof, phi: Optional[Formula] = None) -> ConnectiveScan:
    """Report every disjunction, conjunction or F that is not a subformula of phi,
    or-elimination instances whose c is not a variable, disjunction subformula or F,
    and ex-falso instances at anything other than a variable of phi."""
    phi = phi if phi is not None else proof.conclusion
    subs = set(_dag_nodes(phi))
    names = variables(phi)
    positive = is_positive(phi)
    scan = ConnectiveScan()
    for k, line in enumerate(proof.lines):
        nodes = _dag_nodes(line.statement)
        if any(g.op == OR and g not in subs for g in nodes):
            scan.stray_or.append(k)
        if any(g.op == AND and g not in subs for g in nodes):
            scan.stray_and.append(k)
        if positive and BOT in nodes:
            scan.stray_bot.append(k)
        j = line.just
        if isinstance(j, Axiom) and j.name == "or_e":
            c = j.subst["c"]
            if not (c is BOT or (c.op == VAR and c.name in names) or (c.op == OR and c in subs)):
                scan.bad_or_e.append(k)
        elif isinstance(j, Axiom) and j.name == "efq":
            a = j.subst["a"]
            if not (a.op == VAR and a.name in names):
                scan.bad_efq.append(k)
    return scan


# --- disjunction and F elimination ------------------------------------------------------

def _eliminate_lor(rs: RuleSet, proof: Proof) -> Proof:
    core, shape = tilde_core_transport(rs, proof)
    back = Substitution({v.name: d for d, v in shape.stars.names.items()})
    b = ProofBuilder(rs, EF)
    cur = b.include(instantiate_template(rs, core, back))
    for (d, key), _ in shape.delta:
        if isinstance(key, Formula):
            inst = b.axiom("or_e", a=d.left, b=d.right, c=back(key))
        else:
            inst = b.axiom("or_i1" if key == 0 else "or_i2", a=d.left, b=d.right)
        cur = b.mp(inst, cur)
    return b.proof(cur)


def _eliminate_bot(rs: RuleSet, proof: Proof) -> Proof:
    phi = proof.conclusion
    vs, r, _ = _plus_shape(phi)
    shifted = plus_transport(rs, proof)
    positive = is_positive(phi)
    if positive:
        parts = [Var(v) for v in vs]
        if len(parts) > 1 and "and_i" not in rs.axioms:
            raise PreconditionError("F elimination for a positive conclusion needs conjunction")
        filler = big_and(parts)
    else:
        filler = BOT
    b = ProofBuilder(rs, shifted.kind)
    cur = b.include(instantiate_template(rs, shifted, Substitution({r.name: filler})))
    for k, v in enumerate(vs):
        if not positive:
            premise = b.axiom("efq", a=Var(v))
        elif len(vs) == 1:
            premise = b.identity(Var(v))
        else:
            premise = _projection(b, parts, k)
        cur = b.mp(premise, cur)
    return b.proof(cur)


def eliminate_lor_bot(rs: RuleSet, proof: Proof, what: Sequence[str] = ELIMINATIONS) -> Proof:
    """A proof of the same formula whose disjunctions and F are subformulas of it.

    Disjunction elimination needs an F or EF proof and a disjunction-free
    proper axiom; F elimination needs F-free proper axioms. For a positive
    conclusion F disappears entirely.
    """
    unknown = set(what) - set(ELIMINATIONS)
    if unknown:
        raise ValueError(f"unknown eliminations {sorted(unknown)}")
    phi = proof.conclusion
    lines = [line.statement for line in proof.lines]
    has_or = any(OR in connectives(f) for f in lines)
    has_bot = any(BOT_OP in connectives(f) for f in lines)
    steps = []
    if "lor" in what and has_or:
        if proof.kind == SF:
            raise PreconditionError("disjunction elimination handles F and EF proofs only")
        steps.append(("lor", _eliminate_lor))
    if "bot" in what and has_bot:
        steps.append(("bot", _eliminate_bot))
    if is_positive(phi):
        steps.reverse()
    out = proof
    for name, step in steps:
        out = step(rs, out)
        logger.info(f"{name} elimination: {out.num_lines()} lines, size {out.size()}")
    if out is not proof:
        out.require_ok(rs, conclusion=phi)
        scan = scan_connectives(out, phi)
        if not scan.clean([w for w in what if w in ELIMINATIONS]):
            raise BuildError(f"elimination left stray occurrences: {scan.to_dict()}")
    get_stats_collector().record_transform("eliminate_lor_bot", out.size())
    return out


# --- top-point translation --------------------------------------------------------------

def _truth(f: Formula, values: Dict[str, bool]) -> bool:
    """Classical value; variables default to true, F is false."""
    val: Dict[Formula, bool] = {}
    for g in _dag_nodes(f):
        if g.op == VAR:
            val[g] = values.get(g.name, True)
        elif g.op == BOT_OP:
            val[g] = False
        elif g.op == AND:
            val[g] = val[g.left] and val[g.right]
        elif g.op == OR:
            val[g] = val[g.left] or val[g.right]
        else:
            val[g] = not val[g.left] or val[g.right]
    return val[f]


def star(phi: Formula, values: Optional[Dict[str, bool]] = None,
         fragment: Fragment = POSITIVE) -> Optional[Formula]:
    """The F-free image of phi at the added top point, None when phi is false there.

    values gives the variables that are false (default: all true); false
    antecedents turn implications into the top constant of the fragment.
    """
    values = values or {}
    truth: Dict[Formula, bool] = {}
    image: Dict[Formula, Optional[Formula]] = {}
    t = top(fragment)
    for g in _dag_nodes(phi):
        if g.op == VAR:
            truth[g] = values.get(g.name, True)
            image[g] = g if truth[g] else None
        elif g.op == BOT_OP:
            truth[g], image[g] = False, None
        else:
            a, c = truth[g.left], truth[g.right]
            x, y = image[g.left], image[g.right]
            if g.op == AND:
                truth[g] = a and c
                image[g] = And(x, y) if truth[g] else None
            elif g.op == OR:
                truth[g] = a or c
                image[g] = Or(x, y) if a and c else (x if a else y)
            else:
                truth[g] = not a or c
                image[g] = t if not a else (Impl(x, y) if c else None)
    return image[phi]


@dataclass
class LogicPair:
    """L0 and L1 agreeing on F-free formulas, with the translated axioms of L0 proved in L1."""

    source: RuleSet
    target: RuleSet
    fragment: Fragment = POSITIVE
    name: str = ""
    cache_dir: str = field(default_factory=lambda: config.cache_dir)
    effort: Optional[Effort] = None
    _templates: Dict[Tuple[str, FrozenSet[str]], Proof] = field(default_factory=dict, repr=False)
    _lock: Lock = field(default_factory=Lock, repr=False)
    _loaded: bool = field(default=False, repr=False)

    def __post_init__(self):
        if BOT_OP in self.fragment.connectives:
            raise PreconditionError("the translated fragment must not contain F")
        for axiom_name, template in self.source.axioms.items():
            if TOP_VAR in variables(template):
                raise PreconditionError(f"axiom {axiom_name} uses {TOP_VAR}, reserved for the top constant")

    @property
    def target_rules(self) -> RuleSet:
        return self.target.restrict(self.fragment)

    def _path(self) -> str:
        return os.path.join(self.cache_dir, f"pair-{self.name or 'custom'}.json")

    def _load(self):
        self._loaded = True
        if not self.cache_dir or not os.path.exists(self._path()):
            return
        try:
            with open(self._path()) as fh:
                data = json.load(fh)
            for key, entry in data.items():
                axiom_name, _, false = key.partition("|")
                _, proof = proof_from_json(entry)
                self._templates[(axiom_name, frozenset(false.split(",")) - {""})] = proof
            logger.info(f"Loaded {len(data)} translated axioms from {self._path()}")
        except (OSError, ValueError, KeyError) as e:
            logger.warning(f"Ignoring unreadable pair cache: {e}")

    def _save(self):
        if not self.cache_dir:
            return
        try:
            os.makedirs(self.cache_dir, exist_ok=True)
            data = {f"{k}|{','.join(sorted(false))}": proof_to_json(v)
                    for (k, false), v in self._templates.items()}
            tmp = self._path() + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(data, fh)
            os.replace(tmp, self._path())
        except OSError as e:
            logger.warning(f"Could not write pair cache: {e}")

    def image(self, axiom_name: str, false: FrozenSet[str]) -> Formula:
        schema = self.source.axioms[axiom_name]
        out = star(schema, {v: v not in false for v in variables(schema)}, self.fragment)
        if out is None:
            raise PreconditionError(f"axiom {axiom_name} is false when {sorted(false)} are false")
        return out

    def template(self, axiom_name: str, false: FrozenSet[str]) -> Proof:
        """An L1 proof of the translated axiom, proved once per set of false variables."""
        key = (axiom_name, frozenset(false))
        with self._lock:
            if not self._loaded:
                self._load()
            found = self._templates.get(key)
        if found is not None:
            return found
        image = self.image(axiom_name, key[1])
        rules = self.target_rules
        if rules.proper is None:
            proof = prove_ipc([], image, rs=rules)
            status = "refuted" if proof is None else "provable"
        else:
            verdict = decide_ext([rules.proper] + rules.extra_propers(), image, self.effort,
                                 fragment=self.fragment)
            proof, status = verdict.proof, verdict.status
        if proof is None:
            raise PreconditionError(f"translated axiom {axiom_name} with false {sorted(false)} "
                                    f"({to_text(image)}) has no {self.target} proof: {status}")
        with self._lock:
            self._templates[key] = proof
            self._save()
        logger.debug(f"translated axiom {axiom_name} {sorted(false)}: {proof.num_lines()} lines")
        return proof

    def warm(self) -> int:
        """Prove every translated axiom; surfaces missing proofs when the pair is loaded."""
        count = 0
        for axiom_name, schema in self.source.axioms.items():
            names = sorted(variables(schema))
            for mask in range(1 << len(names)):
                false = frozenset(n for i, n in enumerate(names) if mask >> i & 1)
                if _truth(schema, {v: v not in false for v in names}):
                    self.template(axiom_name, false)
                    count += 1
        return count


SHIPPED_PAIRS = {
    "kc-ipc": ("kc", "ipc"),
    "lc-lc": ("lc", "lc"),
}


def shipped_pair(name: str) -> LogicPair:
    if name not in SHIPPED_PAIRS:
        raise ValueError(f"Unknown logic pair {name!r}; known: {sorted(SHIPPED_PAIRS)}")
    low, high = SHIPPED_PAIRS[name]
    return LogicPair(named_logic(low), named_logic(high), name=name)


def bot_top_translate(pair: LogicPair, proof: Proof) -> Proof:
    """An L1 proof in the fragment, free of F, of the F-free conclusion of an L0 proof."""
    if proof.kind not in (F, EF):
        raise PreconditionError(f"expected a Frege or extended Frege proof, got {proof.kind}")
    if proof.hypotheses:
        raise PreconditionError("the translation takes proofs without hypotheses")
    try:
        proof.require_ok(pair.source)
    except CheckError as e:
        raise PreconditionError(f"input proof does not check: {e}") from e
    phi = proof.conclusion
    if not pair.fragment.admits(phi):
        raise PreconditionError(f"{to_text(phi)[:80]} is not a {pair.fragment}-formula")
    frag = pair.fragment
    rules = pair.target_rules
    b = ProofBuilder(rules, proof.kind)
    values: Dict[str, bool] = {}
    top_var = Var(TOP_VAR)
    out: List[int] = []
    for k, line in enumerate(proof.lines):
        j = line.just
        if isinstance(j, Ext):
            if j.var not in values:
                values[j.var] = _truth(j.definition, values)
            if values[j.var]:
                fwd, bwd = b.ext(j.var, star(j.definition, values, frag))
                out.append(fwd if j.forward else bwd)
            else:
                out.append(b.identity(top_var))
        elif isinstance(j, MP):
            out.append(b.mp(out[j.minor], out[j.major]))
        elif isinstance(j, Axiom):
            names = variables(pair.source.axioms[j.name])
            false = frozenset(v for v in names if not _truth(j.subst[v], values))
            sub = Substitution({v: star(j.subst[v], values, frag) for v in names if v not in false})
            out.append(b.include(pair.template(j.name, false), sub))
        else:
            raise PreconditionError(f"cannot translate a {type(j).__name__} line")
        expected = star(line.statement, values, frag)
        if expected is None or b.statement(out[-1]) is not expected:
            raise BuildError(f"translated line {k} does not match its image")
    result = b.proof(out[-1])
    result.require_ok(rules, conclusion=phi)
    get_stats_collector().record_transform("bot_top", result.size())
    logger.info(f"{pair.name or 'pair'}: {proof.num_lines()} lines -> {result.num_lines()} lines")
    return result


# --- conjunction elimination ------------------------------------------------------------

def _require_implicational(phi: Formula) -> None:
    if not is_implicational(phi):
        raise PreconditionError(f"{to_text(phi)[:80]} is not implicational")


def _split_atoms(proof: Proof) -> List[Formula]:
    atoms = default_atoms([line.statement for line in proof.lines])
    if BOT in atoms:
        raise BuildError("F survived the elimination of F")
    return atoms


def conj_elim_ipc(proof: Proof, rs: Optional[RuleSet] = None) -> Proof:
    """An implicational EF proof of the implicational conclusion of an EF IPC proof."""
    rs = rs or named_logic("ipc")
    phi = proof.conclusion
    _require_implicational(phi)
    if _propers(rs):
        raise PreconditionError("proper axioms need conj_elim_general and a conjunction-power witness")
    cf = ef_to_cf(rs, eliminate_lor_bot(rs, proof))
    rules = standard_ruleset(IMPLICATIONAL)
    b = ProofBuilder(rules, CF)
    split = Splitter(_split_atoms(cf))
    tr = SplitTranslator(b, split)
    comps = tr.translate(cf)
    final = b.mp(comps[split.head_index(phi)], tr.from_head(phi))
    result = cf_to_ef(rules, b.proof(final))
    result.require_ok(rules, conclusion=phi)
    get_stats_collector().record_transform("conj_elim_ipc", result.size())
    logger.info(f"conjunction elimination over {split.width} atoms: {result.num_lines()} lines")
    return result


def _rename_proper(proof: Proof, positions: Dict[str, int]) -> Proof:
    """Proper axiom instances over the indexed axiom, restated over the original one."""
    lines = []
    for line in proof.lines:
        j = line.just
        if isinstance(j, Axiom) and j.name == PROPER:
            j = Axiom(PROPER, Substitution({v: j.subst[f"p{l}"] for v, l in positions.items()}))
        lines.append(Line(line.statement, j))
    return Proof(proof.kind, list(proof.hypotheses), lines)


def conj_elim_general(rs: RuleSet, witness: Optional[ConjPowerWitness], proof: Proof) -> Proof:
    """An EF L_-> proof of the implicational conclusion of an EF L proof, L = IPC + Phi."""
    phi = proof.conclusion
    _require_implicational(phi)
    if rs.proper is None:
        return conj_elim_ipc(proof, rs)
    if rs.extra_propers():
        raise PreconditionError("conjunction elimination supports a single proper axiom")
    if witness is None:
        raise PreconditionError(f"no conjunction-power witness for {to_text(rs.proper)}")
    idx, positions = indexed(rs.proper)
    if witness.indexed is not idx:
        raise PreconditionError("the witness is for a different axiom")
    _require_implicational(idx)
    witness.validate()

    cf = ef_to_cf(rs, eliminate_lor_bot(rs, proof))
    atoms = _split_atoms(cf)
    fresh = FreshNames(variables_of(line.statement for line in cf.lines), "_z")
    while len(atoms) & (len(atoms) - 1):
        atoms.append(fresh.var())
    n = len(atoms)
    powers = conj_power_proofs(witness, n)
    b = ProofBuilder(indexed_ruleset(idx), CF)
    split = Splitter(atoms)

    def proper(stmt: Formula, ax: Axiom) -> List[int]:
        rho = {}
        for v, l in positions.items():
            for u, part in enumerate(split(ax.subst[v])):
                rho[f"p{l * n + u}"] = part
        sub = Substitution(rho)
        return [b.include(q, sub) for q in powers]

    tr = SplitTranslator(b, split, proper=proper)
    comps = tr.translate(cf)
    final = b.mp(comps[split.head_index(phi)], tr.from_head(phi))
    rules = rs.restrict(IMPLICATIONAL)
    result = cf_to_ef(rules, _rename_proper(b.proof(final), positions))
    result.require_ok(rules, conclusion=phi)
    get_stats_collector().record_transform("conj_elim_general", result.size())
    logger.info(f"conjunction elimination in {rs} over {n} atoms: {result.num_lines()} lines")
    return result


def eliminate_all(rs: RuleSet, proof: Proof, witness: Optional[ConjPowerWitness] = None,
                  effort: Optional[Effort] = None) -> Proof:
    """Conjunctions, disjunctions and F all removed from a proof of an implicational formula."""
    _require_implicational(proof.conclusion)
    if rs.proper is None:
        return conj_elim_ipc(proof, rs)
    witness = witness or shipped_witness(rs.proper) or witness_from_search(rs.proper, effort)
    return conj_elim_general(rs, witness, proof)
