"""
IPTK - Calculus

Standard Frege systems for fragments L_C, proof objects for the F, EF, CF
and SF systems, the independent proof checker, and proof JSON.

A standard system for L_C has modus ponens, the axioms below whose
connectives all lie in C, and optionally one proper axiom (a C-formula).
Axiom instances carry their substitution explicitly, so checking a line is
a single substitution plus an identity comparison of interned formulas.
"""

import logging
from dataclasses import dataclass, field
from time import perf_counter
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from iptk import circuits
from iptk.config import get_stats_collector
from iptk.kernel import (AND, BOT_OP, FULL, IMP, OR, Formula, Fragment, Impl, Substitution, Var,
                         connectives, dag_size, parse, to_text, variables)

logger = logging.getLogger(__name__)

F, EF, CF, SF = "F", "EF", "CF", "SF"
KINDS = (F, EF, CF, SF)


class CheckError(ValueError):
    pass


# Axiom schemas over the schema variables a, b, c, with the connectives each needs.
AXIOM_SCHEMAS: Dict[str, Tuple[str, FrozenSet[str]]] = {
    "S": ("(a -> b -> c) -> (a -> b) -> a -> c", frozenset({IMP})),
    "K": ("a -> b -> a", frozenset({IMP})),
    "and_e1": ("a & b -> a", frozenset({IMP, AND})),
    "and_e2": ("a & b -> b", frozenset({IMP, AND})),
    "and_i": ("a -> b -> a & b", frozenset({IMP, AND})),
    "or_i1": ("a -> a | b", frozenset({IMP, OR})),
    "or_i2": ("b -> a | b", frozenset({IMP, OR})),
    "or_e": ("a | b -> (a -> c) -> (b -> c) -> c", frozenset({IMP, OR})),
    "efq": ("F -> a", frozenset({IMP, BOT_OP})),
}

PROPER = "proper"

SHIPPED_PROPER = {
    "ipc": (FULL, None),
    "kc": (FULL, "(p -> F) | ((p -> F) -> F)"),
    "lc": (FULL, "((p -> q) -> r) -> ((q -> p) -> r) -> r"),
    "lc-disj": (FULL, "(p -> q) | (q -> p)"),
    "lc-impl": (Fragment(frozenset({IMP})), "((p -> q) -> r) -> ((q -> p) -> r) -> r"),
    "ipc-impl": (Fragment(frozenset({IMP})), None),
}


@dataclass(frozen=True)
class RuleSet:
    """Modus ponens plus named axiom templates, all within the fragment."""

    fragment: Fragment
    axioms: Dict[str, Formula] = field(hash=False, compare=False)
    proper: Optional[Formula] = None
    name: str = ""

    def __post_init__(self):
        for axiom_name, template in self.axioms.items():
            if not self.fragment.admits(template):
                raise ValueError(f"Axiom {axiom_name} uses connectives outside {self.fragment}")

    def template(self, axiom_name: str) -> Formula:
        return self.axioms[axiom_name]

    def restrict(self, fragment: Fragment) -> 'RuleSet':
        """The standard system of the sub-fragment, keeping an admissible proper axiom."""
        proper = self.proper if self.proper is not None and fragment.admits(self.proper) else None
        return standard_ruleset(fragment, proper, name=self.name)

    def extra_propers(self) -> List[Formula]:
        names = [k for k in self.axioms if k.startswith(PROPER) and k != PROPER]
        return [self.axioms[k] for k in sorted(names, key=lambda k: int(k[len(PROPER):]))]

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "fragment": str(self.fragment),
            "proper": to_text(self.proper) if self.proper is not None else None,
            "more": [to_text(f) for f in self.extra_propers()],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> 'RuleSet':
        proper = data.get("proper")
        return standard_ruleset(Fragment.parse(data["fragment"]), parse(proper) if proper else None,
                                name=data.get("name", ""), more=[parse(t) for t in data.get("more", [])])

    def __str__(self) -> str:
        tail = f" + {to_text(self.proper)}" if self.proper is not None else ""
        return f"{self.name or 'L'}[{self.fragment}]{tail}"


def standard_ruleset(fragment: Fragment, proper: Optional[Formula] = None, name: str = "",
                     more: Sequence[Formula] = ()) -> RuleSet:
    """MP plus the axioms over the fragment; extra proper axioms are named proper1, proper2, ..."""
    axioms: Dict[str, Formula] = {}
    for axiom_name, (text, needs) in AXIOM_SCHEMAS.items():
        if needs <= fragment.connectives:
            axioms[axiom_name] = parse(text)
    for k, extra in enumerate([proper] + list(more) if proper is not None else []):
        if not fragment.admits(extra):
            raise ValueError(f"Proper axiom {to_text(extra)} is not a {fragment}-formula")
        axioms[PROPER if k == 0 else f"{PROPER}{k}"] = extra
    return RuleSet(fragment, axioms, proper, name)


def named_logic(name: str, fragment: Optional[Fragment] = None) -> RuleSet:
    """Shipped logics: ipc, kc, lc, lc-disj, lc-impl, ipc-impl."""
    if name not in SHIPPED_PROPER:
        raise ValueError(f"Unknown logic {name!r}; known: {sorted(SHIPPED_PROPER)}")
    base, proper_text = SHIPPED_PROPER[name]
    proper = parse(proper_text) if proper_text else None
    frag = fragment or base
    if proper is not None and not frag.admits(proper):
        raise ValueError(f"Logic {name} has no proper axiom in fragment {frag}")
    return standard_ruleset(frag, proper, name=name)


# --- justifications -------------------------------------------------------------

@dataclass(frozen=True)
class Axiom:
    name: str
    subst: Substitution


@dataclass(frozen=True)
class MP:
    minor: int
    major: int


@dataclass(frozen=True)
class Hyp:
    index: int


@dataclass(frozen=True)
class Ext:
    var: str
    definition: Formula
    forward: bool


@dataclass(frozen=True)
class SubstRule:
    line: int
    subst: Substitution


Justification = Union[Axiom, MP, Hyp, Ext, SubstRule]


@dataclass(frozen=True)
class Line:
    statement: Formula
    just: Justification


@dataclass
class Proof:
    kind: str
    hypotheses: List[Formula] = field(default_factory=list)
    lines: List[Line] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"Unknown proof kind {self.kind!r}")

    @property
    def conclusion(self) -> Formula:
        if not self.lines:
            raise ValueError("Empty proof has no conclusion")
        return self.lines[-1].statement

    def num_lines(self) -> int:
        return len(self.lines)

    def size(self) -> int:
        """s_P: formula symbols per line, or gates per line for circuit proofs."""
        if self.kind == CF:
            return sum(dag_size(line.statement) for line in self.lines)
        return sum(line.statement.size for line in self.lines)

    def extension_vars(self) -> List[str]:
        seen: List[str] = []
        for line in self.lines:
            if isinstance(line.just, Ext) and line.just.var not in seen:
                seen.append(line.just.var)
        return seen

    def axiom_names(self) -> FrozenSet[str]:
        return frozenset(line.just.name for line in self.lines if isinstance(line.just, Axiom))

    def require_ok(self, rs: RuleSet, conclusion: Optional[Formula] = None,
                   allow: FrozenSet[str] = frozenset()) -> 'CheckReport':
        report = check(rs, self, conclusion=conclusion, allow=allow)
        if not report.ok:
            raise CheckError(f"Proof rejected at line {report.failed_line}: {report.reason}")
        return report


@dataclass
class CheckReport:
    ok: bool
    failed_line: Optional[int] = None
    reason: str = ""
    lines: int = 0
    size: int = 0
    extension_axioms: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "failed_line": self.failed_line,
            "reason": self.reason,
            "k_P": self.lines,
            "s_P": self.size,
            "extension_axioms": self.extension_axioms,
        }


def _fail(i: Optional[int], reason: str, proof: Proof) -> CheckReport:
    logger.debug(f"Check failed at line {i}: {reason}")
    return CheckReport(False, i, reason, len(proof.lines), proof.size())


def check(rs: RuleSet, proof: Proof, conclusion: Optional[Formula] = None,
          allow: FrozenSet[str] = frozenset()) -> CheckReport:
    """Verify every line, the EF side conditions and the conclusion."""
    start = perf_counter()
    report = _check(rs, proof, conclusion, allow)
    get_stats_collector().record_check(report.ok, report.lines, report.size,
                                       (perf_counter() - start) * 1000)
    return report


def _check(rs: RuleSet, proof: Proof, conclusion: Optional[Formula],
           allow: FrozenSet[str]) -> CheckReport:
    permitted = rs.fragment.connectives | allow
    if proof.kind == SF and proof.hypotheses:
        return _fail(None, "substitution Frege proofs take no hypotheses", proof)
    if not proof.lines:
        return _fail(None, "empty proof", proof)
    for k, h in enumerate(proof.hypotheses):
        if not connectives(h) <= permitted:
            return _fail(None, f"hypothesis {k} leaves the fragment", proof)

    definitions: Dict[str, Formula] = {}
    defined_order: List[str] = []
    for i, line in enumerate(proof.lines):
        stmt = line.statement
        j = line.just
        if not connectives(stmt) <= permitted:
            extra = sorted(connectives(stmt) - permitted)
            return _fail(i, f"connectives {extra} outside fragment {rs.fragment}", proof)
        if isinstance(j, Axiom):
            template = rs.axioms.get(j.name)
            if template is None:
                return _fail(i, f"axiom {j.name} not in rule set", proof)
            if j.subst(template) is not stmt:
                return _fail(i, f"not an instance of {j.name} under the given substitution", proof)
        elif isinstance(j, MP):
            if not (0 <= j.minor < i and 0 <= j.major < i):
                return _fail(i, "modus ponens refers to a later line", proof)
            major = proof.lines[j.major].statement
            if not (major.op == IMP and major.left is proof.lines[j.minor].statement and major.right is stmt):
                return _fail(i, f"modus ponens mismatch on lines {j.minor}, {j.major}", proof)
        elif isinstance(j, Hyp):
            if proof.kind == SF:
                return _fail(i, "hypothesis line in a substitution Frege proof", proof)
            if not 0 <= j.index < len(proof.hypotheses) or proof.hypotheses[j.index] is not stmt:
                return _fail(i, f"no hypothesis {j.index} matching the line", proof)
        elif isinstance(j, Ext):
            if proof.kind != EF:
                return _fail(i, "extension axiom outside extended Frege", proof)
            q = Var(j.var)
            expected = Impl(q, j.definition) if j.forward else Impl(j.definition, q)
            if stmt is not expected:
                return _fail(i, f"extension axiom line does not match {j.var}", proof)
            known = definitions.get(j.var)
            if known is None:
                if j.var in variables(j.definition):
                    return _fail(i, f"extension variable {j.var} occurs in its definition", proof)
                for earlier in defined_order:
                    if j.var in variables(definitions[earlier]):
                        return _fail(i, f"extension variable {j.var} occurs in the earlier definition of {earlier}", proof)
                definitions[j.var] = j.definition
                defined_order.append(j.var)
            elif known is not j.definition:
                return _fail(i, f"extension variable {j.var} defined twice", proof)
        elif isinstance(j, SubstRule):
            if proof.kind != SF:
                return _fail(i, "substitution rule outside substitution Frege", proof)
            if not 0 <= j.line < i:
                return _fail(i, "substitution refers to a later line", proof)
            if j.subst(proof.lines[j.line].statement) is not stmt:
                return _fail(i, "substitution image mismatch", proof)
        else:
            return _fail(i, f"unknown justification {j!r}", proof)

    final = proof.conclusion
    if defined_order:
        guarded = variables(final)
        for h in proof.hypotheses:
            guarded = guarded | variables(h)
        for q in defined_order:
            if q in guarded:
                return _fail(len(proof.lines) - 1, f"extension variable {q} occurs in the conclusion or hypotheses", proof)
    if conclusion is not None and final is not conclusion:
        return _fail(len(proof.lines) - 1, "last line is not the claimed conclusion", proof)
    return CheckReport(True, None, "", len(proof.lines), proof.size(), len(defined_order))


# --- JSON -------------------------------------------------------------------------

def _enc(f: Formula, kind: str) -> str:
    return circuits.from_formula(f).to_text() if kind == CF else to_text(f)


def _dec(text: str, kind: str) -> Formula:
    return circuits.to_formula(circuits.Circuit.from_text(text), size_bound=float("inf")) if kind == CF else parse(text)


def _enc_subst(s: Substitution, kind: str) -> Dict[str, str]:
    return {k: _enc(v, kind) for k, v in sorted(s.items())}


def _dec_subst(data: Dict[str, str], kind: str) -> Substitution:
    return Substitution({k: _dec(v, kind) for k, v in data.items()})


def proof_to_json(proof: Proof, rs: Optional[RuleSet] = None) -> Dict[str, Any]:
    kind = proof.kind
    lines = []
    for line in proof.lines:
        j = line.just
        if isinstance(j, Axiom):
            jd = {"ax": j.name, "s": _enc_subst(j.subst, kind)}
        elif isinstance(j, MP):
            jd = {"mp": [j.minor, j.major]}
        elif isinstance(j, Hyp):
            jd = {"hyp": j.index}
        elif isinstance(j, Ext):
            jd = {"ext": j.var, "def": _enc(j.definition, kind), "dir": "fwd" if j.forward else "bwd"}
        else:
            jd = {"subst": j.line, "s": _enc_subst(j.subst, kind)}
        key = "c" if kind == CF else "f"
        lines.append({key: _enc(line.statement, kind), "j": jd})
    return {
        "kind": kind,
        "logic": rs.to_json() if rs is not None else None,
        "hyps": [_enc(h, kind) for h in proof.hypotheses],
        "lines": lines,
    }


def proof_from_json(data: Dict[str, Any]) -> Tuple[Optional[RuleSet], Proof]:
    kind = data["kind"]
    rs = RuleSet.from_json(data["logic"]) if data.get("logic") else None
    lines = []
    for entry in data["lines"]:
        stmt = _dec(entry["c"] if kind == CF else entry["f"], kind)
        jd = entry["j"]
        if "ax" in jd:
            j = Axiom(jd["ax"], _dec_subst(jd.get("s", {}), kind))
        elif "mp" in jd:
            j = MP(int(jd["mp"][0]), int(jd["mp"][1]))
        elif "hyp" in jd:
            j = Hyp(int(jd["hyp"]))
        elif "ext" in jd:
            j = Ext(jd["ext"], _dec(jd["def"], kind), jd.get("dir", "fwd") == "fwd")
        elif "subst" in jd:
            j = SubstRule(int(jd["subst"]), _dec_subst(jd.get("s", {}), kind))
        else:
            raise ValueError(f"Unknown justification {jd!r}")
        lines.append(Line(stmt, j))
    return rs, Proof(kind, [_dec(h, kind) for h in data.get("hyps", [])], lines)
