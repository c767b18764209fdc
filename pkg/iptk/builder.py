"""
IPTK - Proof Builder

Natural-deduction style construction of Hilbert proofs. Lines may depend on
local assumptions. Discharges are recorded lazily and compiled to K/S steps
under their full premise context when a proof is emitted; only Hilbert lines
reach the emitted proof. Identical lines are shared.

The lemma library proves small schemas once with the decision procedure and
inlines them as substitution instances.
"""

import json
import logging
import os
from dataclasses import dataclass
from threading import Lock
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

from iptk.calculus import (EF, F, SF, Axiom, Ext, Hyp, Line, MP, Proof, RuleSet, SubstRule,
                           proof_from_json, proof_to_json, standard_ruleset)
from iptk.config import config
from iptk.kernel import (AND, IMP, OR, Formula, Fragment, Impl, Substitution, Var, connectives, parse,
                         subterm_at, to_text)

logger = logging.getLogger(__name__)


class BuildError(ValueError):
    pass


@dataclass(frozen=True)
class _Assume:
    ident: int


@dataclass(frozen=True)
class _Lam:
    ident: int
    body: int


SubstLike = Union[Substitution, Mapping[str, Formula]]


def _as_subst(s: Optional[SubstLike]) -> Substitution:
    if s is None:
        return Substitution()
    return s if isinstance(s, Substitution) else Substitution(s)


class ProofBuilder:
    """Accumulates justified lines and emits a checkable Proof."""

    def __init__(self, rs: RuleSet, kind: str = F, hypotheses: Sequence[Formula] = ()):
        self.rs = rs
        self.kind = kind
        self.hypotheses: List[Formula] = list(hypotheses)
        self._stmt: List[Formula] = []
        self._just: List[object] = []
        self._deps: List[FrozenSet[int]] = []
        self._index: Dict[Tuple[Formula, FrozenSet[int]], int] = {}
        self._pure: List[bool] = []
        self._pure_index: Dict[Formula, int] = {}
        self._compiled: Dict[Tuple[int, Tuple[int, ...]], int] = {}
        self._assumed: Dict[int, int] = {}
        self._ext: Dict[str, Formula] = {}
        self._next_assumption = 0

    # -- primitive lines --------------------------------------------------------

    def _add(self, stmt: Formula, just: object, deps: FrozenSet[int] = frozenset()) -> int:
        for key in ((stmt, frozenset()), (stmt, deps)):
            found = self._index.get(key)
            if found is not None:
                return found
        i = len(self._stmt)
        self._stmt.append(stmt)
        self._just.append(just)
        self._deps.append(deps)
        pure = isinstance(just, (Axiom, Hyp, Ext, SubstRule)) or (
            isinstance(just, MP) and self._pure[just.minor] and self._pure[just.major])
        self._pure.append(pure)
        self._index[(stmt, deps)] = i
        if pure:
            self._pure_index.setdefault(stmt, i)
        return i

    def statement(self, i: int) -> Formula:
        return self._stmt[i]

    def deps(self, i: int) -> FrozenSet[int]:
        return self._deps[i]

    def __len__(self) -> int:
        return len(self._stmt)

    def hyp(self, f: Formula) -> int:
        for k, h in enumerate(self.hypotheses):
            if h is f:
                return self._add(f, Hyp(k))
        if self.kind == SF:
            raise BuildError("substitution Frege proofs take no hypotheses")
        self.hypotheses.append(f)
        return self._add(f, Hyp(len(self.hypotheses) - 1))

    def axiom(self, name: str, subst: Optional[SubstLike] = None, **values: Formula) -> int:
        s = _as_subst(subst) if not values else Substitution({**dict(_as_subst(subst).items()), **values})
        template = self.rs.axioms.get(name)
        if template is None:
            raise BuildError(f"axiom {name} is not available in {self.rs}")
        return self._add(s(template), Axiom(name, s))

    def mp(self, minor: int, major: int) -> int:
        m = self._stmt[major]
        if m.op != IMP or m.left is not self._stmt[minor]:
            raise BuildError(f"modus ponens mismatch: {to_text(self._stmt[minor])[:80]} vs {to_text(m)[:80]}")
        return self._add(m.right, MP(minor, major), self._deps[minor] | self._deps[major])

    def mp_chain(self, major: int, *minors: int) -> int:
        for minor in minors:
            major = self.mp(minor, major)
        return major

    def ext(self, var: str, definition: Formula) -> Tuple[int, int]:
        if self.kind != EF:
            raise BuildError("extension axioms need an extended Frege builder")
        known = self._ext.get(var)
        if known is not None and known is not definition:
            raise BuildError(f"extension variable {var} already defined")
        self._ext[var] = definition
        q = Var(var)
        fwd = self._add(Impl(q, definition), Ext(var, definition, True))
        bwd = self._add(Impl(definition, q), Ext(var, definition, False))
        return fwd, bwd

    def extension_definitions(self) -> Dict[str, Formula]:
        return dict(self._ext)

    def subst(self, line: int, subst: SubstLike) -> int:
        if self.kind != SF:
            raise BuildError("the substitution rule needs a substitution Frege builder")
        if self._deps[line]:
            raise BuildError("cannot substitute into a line with open assumptions")
        line = self._compile(line)
        s = _as_subst(subst)
        return self._add(s(self._stmt[line]), SubstRule(line, s))

    # -- local assumptions --------------------------------------------------------

    def assume(self, f: Formula) -> int:
        ident = self._next_assumption
        self._next_assumption += 1
        line = len(self._stmt)
        self._stmt.append(f)
        self._just.append(_Assume(ident))
        self._deps.append(frozenset({ident}))
        self._pure.append(False)
        self._index[(f, frozenset({ident}))] = line
        self._assumed[ident] = line
        return line

    def identity(self, a: Formula) -> int:
        """a -> a from S and K."""
        aa = Impl(a, a)
        s = self.axiom("S", a=a, b=aa, c=a)
        k1 = self.axiom("K", a=a, b=aa)
        k2 = self.axiom("K", a=a, b=a)
        return self.mp(k2, self.mp(k1, s))

    def weaken(self, line: int, a: Formula) -> int:
        """From X derive a -> X."""
        x = self._stmt[line]
        return self.mp(line, self.axiom("K", a=x, b=a))

    def discharge(self, assumption: int, goal: int) -> int:
        """From a derivation of G under assumption A, derive A -> G.

        The step is recorded and only compiled to K/S lines when the proof is
        emitted, so nested discharges cost one lift per enclosing assumption.
        """
        just = self._just[assumption]
        if not isinstance(just, _Assume):
            raise BuildError(f"line {assumption} is not an assumption")
        a = self._stmt[assumption]
        if just.ident not in self._deps[goal]:
            return self.weaken(goal, a)
        return self._add(Impl(a, self._stmt[goal]), _Lam(just.ident, goal),
                         self._deps[goal] - {just.ident})

    def discharge_all(self, assumptions: Sequence[int], goal: int) -> int:
        """Discharge innermost first: assumptions [A0..An-1] give A0 -> ... -> An-1 -> G."""
        for a in reversed(assumptions):
            goal = self.discharge(a, goal)
        return goal

    # -- compiling discharges ---------------------------------------------------------

    def _emit(self, stmt: Formula, just: object) -> int:
        found = self._pure_index.get(stmt)
        if found is not None:
            return found
        i = len(self._stmt)
        self._stmt.append(stmt)
        self._just.append(just)
        self._deps.append(frozenset())
        self._pure.append(True)
        self._pure_index[stmt] = i
        self._index.setdefault((stmt, frozenset()), i)
        return i

    def _emit_axiom(self, name: str, **values: Formula) -> int:
        s = Substitution(values)
        return self._emit(s(self.rs.axioms[name]), Axiom(name, s))

    def _emit_mp(self, minor: int, major: int) -> int:
        return self._emit(self._stmt[major].right, MP(minor, major))

    def _emit_weaken(self, line: int, a: Formula) -> int:
        return self._emit_mp(line, self._emit_axiom("K", a=self._stmt[line], b=a))

    def _emit_chain(self, f: int, h: int) -> int:
        """X -> Y and Y -> Z give X -> Z."""
        x, y, z = self._stmt[f].left, self._stmt[f].right, self._stmt[h].right
        s = self._emit_axiom("S", a=x, b=y, c=z)
        return self._emit_mp(f, self._emit_mp(self._emit_weaken(h, x), s))

    def _emit_identity(self, a: Formula) -> int:
        aa = Impl(a, a)
        s = self._emit_axiom("S", a=a, b=aa, c=a)
        k1 = self._emit_axiom("K", a=a, b=aa)
        k2 = self._emit_axiom("K", a=a, b=a)
        return self._emit_mp(k2, self._emit_mp(k1, s))

    def _emit_weaken_all(self, line: int, context: Sequence[Formula]) -> int:
        for g in reversed(context):
            line = self._emit_weaken(line, g)
        return line

    def _emit_projection(self, context: Sequence[Formula], k: int) -> int:
        t = self._emit_identity(context[k])
        for q in range(len(context) - 1, k, -1):
            u = self._stmt[t].right
            t = self._emit_chain(t, self._emit_axiom("K", a=u, b=context[q]))
        return self._emit_weaken_all(t, context[:k])

    def _emit_distribute(self, context: Sequence[Formula], x: Formula, y: Formula) -> int:
        """(G -> x -> y) -> (G -> x) -> G -> y for the premise list G."""
        p, q, r = Impl(x, y), x, y
        line = self._emit_identity(p)
        for g in reversed(context):
            lifted = self._emit_mp(self._emit_weaken(line, g),
                                   self._emit_axiom("S", a=g, b=p, c=Impl(q, r)))
            line = self._emit_chain(lifted, self._emit_axiom("S", a=g, b=q, c=r))
            p, q, r = Impl(g, p), Impl(g, q), Impl(g, r)
        return line

    def _compile(self, target: int, context: Tuple[int, ...] = ()) -> int:
        """A dependency-free line proving join(context, target) from Hilbert steps only."""
        memo = self._compiled
        stack = [(target, context)]
        while stack:
            key = stack[-1]
            if key in memo:
                stack.pop()
                continue
            line, ctx = key
            step, needed = self._plan(line, ctx)
            missing = [n for n in needed if n not in memo]
            if missing:
                stack.extend(missing)
                continue
            stack.pop()
            memo[key] = self._compile_step(step, line, ctx, needed)
        return memo[(target, context)]

    def _plan(self, line: int, ctx: Tuple[int, ...]) -> Tuple[str, List[Tuple[int, Tuple[int, ...]]]]:
        just = self._just[line]
        deps = self._deps[line]
        if not ctx:
            if self._pure[line]:
                return "pure", []
            if deps:
                raise BuildError(f"line {line} still depends on open assumptions")
            if isinstance(just, _Lam):
                return "lam", [(just.body, (just.ident,))]
            if isinstance(just, MP):
                return "mp", [(just.minor, ()), (just.major, ())]
            raise BuildError(f"cannot compile line {line}")
        if not deps:
            return "weaken", [(line, ())]
        # leading premises the line never uses are added by weakening
        skip = next(k for k, ident in enumerate(ctx) if ident in deps or k == len(ctx) - 1)
        if skip and ctx[skip] in deps:
            return "weaken", [(line, ctx[skip:])]
        if isinstance(just, _Assume):
            if just.ident not in ctx:
                raise BuildError(f"assumption {just.ident} is not discharged in scope")
            return "project", []
        if isinstance(just, _Lam):
            return "lam", [(just.body, ctx + (just.ident,))]
        if isinstance(just, MP):
            return "mp", [(just.minor, ctx), (just.major, ctx)]
        raise BuildError(f"cannot compile line {line}")

    def _compile_step(self, step: str, line: int, ctx: Tuple[int, ...],
                      needed: List[Tuple[int, Tuple[int, ...]]]) -> int:
        memo = self._compiled
        if step == "pure":
            return line
        if step == "lam":
            return memo[needed[0]]
        statements = [self._stmt[self._assumed[i]] for i in ctx]
        if step == "weaken":
            inner = needed[0][1]
            return self._emit_weaken_all(memo[needed[0]], statements[:len(ctx) - len(inner)])
        if step == "project":
            return self._emit_projection(statements, ctx.index(self._just[line].ident))
        minor, major = memo[needed[0]], memo[needed[1]]
        if not ctx:
            return self._emit_mp(minor, major)
        just = self._just[line]
        dist = self._emit_distribute(statements, self._stmt[just.minor], self._stmt[line])
        return self._emit_mp(minor, self._emit_mp(major, dist))

    # -- embedding other proofs ------------------------------------------------------

    def include(self, proof: Proof, subst: Optional[SubstLike] = None,
                hyp_lines: Optional[Sequence[int]] = None) -> int:
        """Replay a proof line by line (optionally substituted); returns its conclusion."""
        s = _as_subst(subst)
        plain = s.is_identity()
        out: List[int] = []
        for line in proof.lines:
            j = line.just
            if isinstance(j, Axiom):
                out.append(self.axiom(j.name, s.compose(j.subst)) if not plain else self.axiom(j.name, j.subst))
            elif isinstance(j, MP):
                out.append(self.mp(out[j.minor], out[j.major]))
            elif isinstance(j, Hyp):
                if hyp_lines is not None:
                    out.append(hyp_lines[j.index])
                else:
                    out.append(self.hyp(s(proof.hypotheses[j.index])))
            elif isinstance(j, Ext):
                if not plain:
                    raise BuildError("cannot substitute into extension axioms")
                fwd, bwd = self.ext(j.var, j.definition)
                out.append(fwd if j.forward else bwd)
            elif isinstance(j, SubstRule):
                if not plain:
                    raise BuildError("cannot substitute into substitution-rule lines")
                out.append(self.subst(out[j.line], j.subst))
            else:
                raise BuildError(f"unknown justification {j!r}")
            if out[-1] is not None and self._stmt[out[-1]] is not s(line.statement):
                raise BuildError("replayed line does not match its source")
        return out[-1]

    def lemma(self, schema: Union[str, Formula], subst: Optional[SubstLike] = None, **values: Formula) -> int:
        """Inline the library proof of a schema under a substitution."""
        s = _as_subst(subst) if not values else Substitution({**dict(_as_subst(subst).items()), **values})
        template = get_lemma_library().get(schema)
        return self.include(template, s)

    # -- emitting ------------------------------------------------------------------

    def proof(self, target: int) -> Proof:
        if self._deps[target]:
            raise BuildError(f"line {target} still depends on open assumptions")
        target = self._compile(target)
        keep = set()
        stack = [target]
        while stack:
            line = stack.pop()
            if line in keep:
                continue
            keep.add(line)
            j = self._just[line]
            if isinstance(j, MP):
                stack.append(j.minor)
                stack.append(j.major)
            elif isinstance(j, SubstRule):
                stack.append(j.line)
        order = sorted(keep)
        renumber = {old: new for new, old in enumerate(order)}
        lines = []
        for old in order:
            j = self._just[old]
            if isinstance(j, MP):
                j = MP(renumber[j.minor], renumber[j.major])
            elif isinstance(j, SubstRule):
                j = SubstRule(renumber[j.line], j.subst)
            lines.append(Line(self._stmt[old], j))
        return Proof(self.kind, list(self.hypotheses), lines)


# --- congruence ---------------------------------------------------------------------

CONGRUENCE = {
    (IMP, 0): "(a -> b) -> (b -> c) -> a -> c",
    (IMP, 1): "(b -> c) -> (a -> b) -> a -> c",
    (AND, 0): "(a -> b) -> a & c -> b & c",
    (AND, 1): "(a -> b) -> c & a -> c & b",
    (OR, 0): "(a -> b) -> a | c -> b | c",
    (OR, 1): "(a -> b) -> c | a -> c | b",
}


def replace_equivalent(builder: ProofBuilder, phi: Formula, path: Sequence[int],
                       fwd: int, bwd: int) -> Tuple[int, int]:
    """Given lines X -> Y and Y -> X for X at path in phi, prove phi -> phi' and phi' -> phi."""
    x = subterm_at(phi, tuple(path))
    y = builder.statement(fwd).right
    if builder.statement(fwd).left is not x or builder.statement(bwd) is not Impl(y, x):
        raise BuildError("equivalence lines do not match the subterm")
    for depth in range(len(path) - 1, -1, -1):
        node = subterm_at(phi, tuple(path[:depth]))
        side = path[depth]
        other = node.right if side == 0 else node.left
        schema = CONGRUENCE[(node.op, side)]
        if node.op == IMP and side == 0:
            # contravariant position: antecedent
            new_fwd = builder.mp(bwd, builder.lemma(schema, a=y, b=x, c=other))
            new_bwd = builder.mp(fwd, builder.lemma(schema, a=x, b=y, c=other))
        elif node.op == IMP:
            new_fwd = builder.mp(fwd, builder.lemma(schema, a=other, b=x, c=y))
            new_bwd = builder.mp(bwd, builder.lemma(schema, a=other, b=y, c=x))
        else:
            new_fwd = builder.mp(fwd, builder.lemma(schema, a=x, b=y, c=other))
            new_bwd = builder.mp(bwd, builder.lemma(schema, a=y, b=x, c=other))
        fwd, bwd = new_fwd, new_bwd
        x = builder.statement(fwd).left
        y = builder.statement(fwd).right
    return fwd, bwd


# --- lemma library --------------------------------------------------------------------

SCHEMAS = {
    "identity": "a -> a",
    "trans": "(b -> c) -> (a -> b) -> a -> c",
    "trans_r": "(a -> b) -> (b -> c) -> a -> c",
    "exchange": "(a -> b -> c) -> b -> a -> c",
    "contract": "(a -> a -> b) -> a -> b",
    "mp_swap": "a -> (a -> b) -> b",
    "curry": "(a & b -> c) -> a -> b -> c",
    "uncurry": "(a -> b -> c) -> a & b -> c",
}


class LemmaLibrary:
    """Template proofs of small schemas, proved once and cached."""

    def __init__(self, cache_dir: str = ""):
        self.cache_dir = cache_dir
        self._templates: Dict[Formula, Proof] = {}
        self._lock = Lock()
        self._loaded = False

    def _path(self) -> str:
        return os.path.join(self.cache_dir, "lemmas.json")

    def _load(self):
        self._loaded = True
        if not self.cache_dir or not os.path.exists(self._path()):
            return
        try:
            with open(self._path()) as fh:
                data = json.load(fh)
            for text, entry in data.items():
                _, proof = proof_from_json(entry)
                self._templates[parse(text)] = proof
            logger.info(f"Loaded {len(data)} lemma templates from {self._path()}")
        except (OSError, ValueError, KeyError) as e:
            logger.warning(f"Ignoring unreadable lemma cache: {e}")

    def _save(self):
        if not self.cache_dir:
            return
        try:
            os.makedirs(self.cache_dir, exist_ok=True)
            data = {to_text(k): proof_to_json(v) for k, v in self._templates.items()}
            tmp = self._path() + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(data, fh)
            os.replace(tmp, self._path())
        except OSError as e:
            logger.warning(f"Could not write lemma cache: {e}")

    def get(self, schema: Union[str, Formula]) -> Proof:
        if isinstance(schema, str):
            schema = parse(SCHEMAS.get(schema, schema))
        with self._lock:
            if not self._loaded:
                self._load()
            found = self._templates.get(schema)
        if found is not None:
            return found
        from iptk.decision import prove_ipc
        proof = prove_ipc([], schema)
        if proof is None:
            raise BuildError(f"schema {to_text(schema)} is not an IPC tautology")
        with self._lock:
            self._templates[schema] = proof
            self._save()
        logger.debug(f"Proved lemma {to_text(schema)} in {proof.num_lines()} lines")
        return proof

    def ruleset_for(self, schema: Formula) -> RuleSet:
        return standard_ruleset(Fragment(connectives(schema) | {IMP}))

    def __len__(self) -> int:
        return len(self._templates)


_library: Optional[LemmaLibrary] = None
_library_lock = Lock()


def get_lemma_library() -> LemmaLibrary:
    global _library
    if _library is None:
        with _library_lock:
            if _library is None:
                _library = LemmaLibrary(config.cache_dir)
    return _library
