"""
IPTK - Conjunction Splitting

A {->, &}-formula over the atoms a_0 .. a_{n-1} is IPC-equivalent to the
conjunction of its components, implicational formulas with head a_i:

    a_j^(i)        a_i when i == j, a_i -> a_i otherwise
    (A -> B)^(i)   A^(0) -> ... -> A^(n-1) -> B^(i)
    (A & B)^(i)    (A^(i) -> B^(i) -> a_i) -> a_i

A proof in {->, &} translates line by line into implicational proofs of the
components of its lines. Only the implication clause is needed for the K,
S and modus ponens patches, so the same translator also carries
implicational proofs through the slot vectorisation behind conjunction
powers, where p_i becomes the vector p_{im}, ..., p_{im+m-1}.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from iptk.builder import BuildError, ProofBuilder
from iptk.calculus import F, PROPER, Axiom, Hyp, MP, Proof, standard_ruleset
from iptk.kernel import (AND, BOT, BOT_OP, IMP, IMP_BOT, IMPLICATIONAL, VAR, Formula, Impl, Var,
                         _dag_nodes, connectives, head, join, to_text, variables)
from iptk.structural import PreconditionError

logger = logging.getLogger(__name__)

Components = Tuple[Formula, ...]

_INDEXED = re.compile(r"^p(\d+)$")


def atom_key(a: Formula) -> Tuple[int, int, str]:
    """Indexed variables by index, then other variables by name, then F."""
    if a.op == BOT_OP:
        return (2, 0, "")
    m = _INDEXED.match(a.name)
    return (0, int(m.group(1)), "") if m else (1, 0, a.name)


def default_atoms(formulas: Sequence[Formula]) -> List[Formula]:
    names = set()
    bot = False
    for f in formulas:
        names |= variables(f)
        bot = bot or BOT_OP in connectives(f)
    atoms = [Var(n) for n in names] + ([BOT] if bot else [])
    return sorted(atoms, key=atom_key)


class Splitter:
    """Components over a fixed atom list, memoised per DAG node."""

    def __init__(self, atoms: Sequence[Formula]):
        self.atoms = list(atoms)
        self.width = len(self.atoms)
        self.position = {a: i for i, a in enumerate(self.atoms)}
        if len(self.position) != self.width:
            raise ValueError("splitting atoms must be distinct")
        for a in self.atoms:
            if a.op not in (VAR, BOT_OP):
                raise ValueError(f"{to_text(a)} is not an atom")
        self._memo: Dict[Formula, Components] = {}

    def __call__(self, f: Formula) -> Components:
        memo = self._memo
        if f in memo:
            return memo[f]
        for g in _dag_nodes(f):
            if g in memo:
                continue
            if g.op in (VAR, BOT_OP):
                j = self.position.get(g)
                if j is None:
                    raise PreconditionError(f"{to_text(g)} is not among the splitting atoms")
                memo[g] = tuple(a if i == j else Impl(a, a) for i, a in enumerate(self.atoms))
            elif g.op == IMP:
                left = memo[g.left]
                memo[g] = tuple(join(left, r) for r in memo[g.right])
            elif g.op == AND:
                memo[g] = tuple(Impl(join([x, y], a), a)
                                for x, y, a in zip(memo[g.left], memo[g.right], self.atoms))
            else:
                raise PreconditionError("disjunctions cannot be split into components")
        return memo[f]

    def head_index(self, f: Formula) -> int:
        _, h = head(f)
        if h not in self.position:
            raise PreconditionError(f"head {to_text(h)} of {to_text(f)[:60]} is not an atom")
        return self.position[h]


class Vectorizer:
    """Slot vectors of implicational formulas: p_i becomes p_{im}, ..., p_{im+m-1}.

    Variables outside the p<i> scheme (and F) become constant vectors.
    """

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("vector width must be positive")
        self.width = m
        self._memo: Dict[Formula, Components] = {}

    def _leaf(self, g: Formula) -> Components:
        m = self.width
        match = _INDEXED.match(g.name) if g.op == VAR else None
        if match is None:
            return (g,) * m
        i = int(match.group(1))
        return tuple(Var(f"p{i * m + u}") for u in range(m))

    def __call__(self, f: Formula) -> Components:
        memo = self._memo
        if f in memo:
            return memo[f]
        for g in _dag_nodes(f):
            if g in memo:
                continue
            if g.op in (VAR, BOT_OP):
                memo[g] = self._leaf(g)
            elif g.op == IMP:
                left = memo[g.left]
                memo[g] = tuple(join(left, r) for r in memo[g.right])
            else:
                raise PreconditionError(f"slot vectors are defined for implicational formulas, got {g.op}")
        return memo[f]


def conj_split_circuit(c: Formula, atoms: Optional[Sequence[Formula]] = None) -> List[Formula]:
    """The implicational components C^(i), one per atom (sorted variables, then F)."""
    return list(Splitter(atoms if atoms is not None else default_atoms([c]))(c))


ProperHandler = Callable[[Formula, Axiom], List[int]]
HypHandler = Callable[[Formula, int], List[int]]


class SplitTranslator:
    """Translates proofs into component proofs inside one builder.

    Lines are translated once per statement. Proper axiom instances and
    hypotheses go to the handlers, which return one line per component.
    """

    def __init__(self, b: ProofBuilder, comps, proper: Optional[ProperHandler] = None,
                 hyp: Optional[HypHandler] = None):
        self.b = b
        self.comps = comps
        self.width = comps.width
        self.proper = proper
        self.hyp = hyp
        self._done: Dict[Formula, List[int]] = {}
        self._trivial: Dict[Tuple[Formula, int], int] = {}
        self._to: Dict[Formula, int] = {}
        self._from: Dict[Formula, int] = {}

    # -- proofs -----------------------------------------------------------------------

    def translate(self, proof: Proof) -> List[int]:
        out: List[List[int]] = []
        for k, line in enumerate(proof.lines):
            stmt = line.statement
            done = self._done.get(stmt)
            if done is None:
                done = self._line(line, out)
                expected = self.comps(stmt)
                if any(self.b.statement(x) is not e for x, e in zip(done, expected)):
                    raise BuildError(f"component proofs of line {k} do not match")
                self._done[stmt] = done
            out.append(done)
        logger.debug(f"split {proof.num_lines()} lines into {self.width} components "
                     f"({len(self.b)} builder lines)")
        return out[-1]

    def _line(self, line, out: List[List[int]]) -> List[int]:
        j = line.just
        if isinstance(j, MP):
            return self.mp(out[j.minor], out[j.major])
        if isinstance(j, Hyp):
            if self.hyp is None:
                raise PreconditionError("hypotheses cannot be split without a handler")
            return self.hyp(line.statement, j.index)
        if isinstance(j, Axiom):
            if j.name.startswith(PROPER):
                if self.proper is None:
                    raise PreconditionError(f"proper axiom {j.name} cannot be split without a handler")
                return self.proper(line.statement, j)
            return self.axiom(j.name, line.statement)
        raise PreconditionError(f"cannot split a {type(j).__name__} line")

    def mp(self, minor: List[int], major: List[int]) -> List[int]:
        return [self.b.mp_chain(m, *minor) for m in major]

    def axiom(self, name: str, stmt: Formula) -> List[int]:
        patch = getattr(self, f"_axiom_{name}", None)
        if patch is None:
            raise PreconditionError(f"axiom {name} has no component translation")
        return patch(stmt)

    def _assume_all(self, f: Formula) -> List[int]:
        return [self.b.assume(c) for c in self.comps(f)]

    def _axiom_K(self, stmt: Formula) -> List[int]:
        b = self.b
        xs = self._assume_all(stmt.left)
        ys = self._assume_all(stmt.right.left)
        return [b.discharge_all(xs + ys, x) for x in xs]

    def _axiom_S(self, stmt: Formula) -> List[int]:
        b = self.b
        abc = stmt.left
        a = abc.left
        xs = self._assume_all(abc)
        ys = self._assume_all(Impl(a, abc.right.left))
        zs = self._assume_all(a)
        bs = [b.mp_chain(y, *zs) for y in ys]
        return [b.discharge_all(xs + ys + zs, b.mp_chain(x, *zs, *bs)) for x in xs]

    def _axiom_and_e(self, stmt: Formula, side: int) -> List[int]:
        b = self.b
        conj = stmt.left
        hs = self._assume_all(conj)
        left, right = self.comps(conj.left), self.comps(conj.right)
        out = []
        for i in range(self.width):
            premises, a = head((left, right)[side][i])
            gs = [b.assume(g) for g in premises]
            x = b.assume(left[i])
            y = b.assume(right[i])
            f = b.discharge_all([x, y], b.mp_chain((x, y)[side], *gs))
            out.append(b.discharge_all(hs + gs, b.mp(f, hs[i])))
        return out

    def _axiom_and_e1(self, stmt: Formula) -> List[int]:
        return self._axiom_and_e(stmt, 0)

    def _axiom_and_e2(self, stmt: Formula) -> List[int]:
        return self._axiom_and_e(stmt, 1)

    def _axiom_and_i(self, stmt: Formula) -> List[int]:
        b = self.b
        a, c = stmt.left, stmt.right.left
        xs = self._assume_all(a)
        ys = self._assume_all(c)
        atoms = self.comps.atoms
        out = []
        for i in range(self.width):
            g = b.assume(join([b.statement(xs[i]), b.statement(ys[i])], atoms[i]))
            out.append(b.discharge_all(xs + ys, b.discharge(g, b.mp_chain(g, xs[i], ys[i]))))
        return out

    def _axiom_efq(self, stmt: Formula) -> List[int]:
        b = self.b
        bots = self._assume_all(BOT)
        k = self.comps.position[BOT]
        return [b.discharge_all(bots, b.mp(bots[k], b.axiom("efq", a=c)))
                for c in self.comps(stmt.right)]

    # -- trivial components and head equivalences --------------------------------------

    def trivial(self, f: Formula, i: int) -> int:
        """A proof of the i-th component when atom i is not a head of f."""
        key = (f, i)
        found = self._trivial.get(key)
        if found is not None:
            return found
        b = self.b
        atom = self.comps.atoms[i]
        if f.op in (VAR, BOT_OP):
            if f is atom:
                raise BuildError(f"component {i} of {to_text(f)} is not trivial")
            line = b.identity(atom)
        elif f.op == IMP:
            line = self.trivial(f.right, i)
            for g in reversed(self.comps(f.left)):
                line = b.weaken(line, g)
        elif f.op == AND:
            first, second = self.trivial(f.left, i), self.trivial(f.right, i)
            g = b.assume(join([b.statement(first), b.statement(second)], atom))
            line = b.discharge(g, b.mp_chain(g, first, second))
        else:
            raise PreconditionError("disjunctions cannot be split into components")
        self._trivial[key] = line
        return line

    def to_head(self, f: Formula) -> int:
        """f -> f^(h) for an implicational f with head atom h."""
        found = self._to.get(f)
        if found is not None:
            return found
        b = self.b
        if f.op != IMP:
            line = b.identity(f)
        else:
            x = b.assume(f)
            ys = self._assume_all(f.left)
            d0 = b.mp(ys[self.comps.head_index(f.left)], self.from_head(f.left))
            goal = b.mp(b.mp(d0, x), self.to_head(f.right))
            line = b.discharge_all([x] + ys, goal)
        self._to[f] = line
        return line

    def from_head(self, f: Formula) -> int:
        """f^(h) -> f for an implicational f with head atom h."""
        found = self._from.get(f)
        if found is not None:
            return found
        b = self.b
        if f.op != IMP:
            line = b.identity(f)
        else:
            h = self.comps.head_index(f)
            z = b.assume(self.comps(f)[h])
            x = b.assume(f.left)
            h0 = self.comps.head_index(f.left)
            args = [b.mp(x, self.to_head(f.left)) if i == h0 else self.trivial(f.left, i)
                    for i in range(self.width)]
            d1 = b.mp(b.mp_chain(z, *args), self.from_head(f.right))
            line = b.discharge_all([z, x], d1)
        self._from[f] = line
        return line


@dataclass
class ImplSplit:
    """Proofs relating an implicational formula to its components."""

    formula: Formula
    atoms: List[Formula]
    components: List[Formula]
    head_index: int
    to_head: Proof
    from_head: Proof
    trivial: Dict[int, Proof] = field(default_factory=dict)


def conj_elim_impl(c: Formula, atoms: Optional[Sequence[Formula]] = None) -> ImplSplit:
    """C -> C^(h), C^(h) -> C and proofs of the components C^(i), i != h."""
    ops = connectives(c)
    if not ops <= {IMP, BOT_OP}:
        raise PreconditionError(f"{to_text(c)} is not implicational")
    atoms = list(atoms) if atoms is not None else default_atoms([c])
    split = Splitter(atoms)
    rs = standard_ruleset(IMP_BOT if BOT_OP in ops else IMPLICATIONAL)
    b = ProofBuilder(rs, F)
    tr = SplitTranslator(b, split)
    h = split.head_index(c)
    result = ImplSplit(c, atoms, list(split(c)), h, b.proof(tr.to_head(c)), b.proof(tr.from_head(c)))
    for i in range(split.width):
        if i != h:
            result.trivial[i] = b.proof(tr.trivial(c, i))
    return result
