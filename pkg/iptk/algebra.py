"""
IPTK - Finite Hilbert Algebras

Finite implicative algebras (optionally with meet, join and bottom) used as
refuters for fragment axiomatizations: brute-force validity, Heyting tables
derived from finite distributive lattices, subalgebras, filters and
quotients, characteristic formulas, and the shipped counterexample algebras
showing that fragments of extensions need not be axiomatized inside the
fragment.
"""

import itertools
import json
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from iptk.kernel import (AND, BOT_OP, IMP, OR, VAR, Formula, Impl, Var, _dag_nodes, join, parse,
                         to_text, variables)

logger = logging.getLogger(__name__)

DATA_PATH = os.path.join(os.path.dirname(__file__), "data", "algebras.json")

Table = List[List[int]]


class AlgebraError(ValueError):
    pass


@dataclass
class FiniteAlgebra:
    """Finite Hilbert algebra <A, 1, ->> with optional lattice operations."""

    name: str
    elements: List[str]
    imp: Table
    meet: Optional[Table] = None
    join: Optional[Table] = None
    bot: Optional[int] = None
    one: int = field(init=False, default=-1)

    def __post_init__(self):
        n = len(self.elements)
        if n == 0:
            raise AlgebraError(f"{self.name}: empty domain")
        if len(set(self.elements)) != n:
            raise AlgebraError(f"{self.name}: duplicate element names")
        self._index = {e: i for i, e in enumerate(self.elements)}
        self._check_laws()

    # --- structure ---

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, element: str) -> int:
        try:
            return self._index[element]
        except KeyError:
            raise AlgebraError(f"{self.name}: unknown element {element!r}")

    def leq(self, a: int, b: int) -> bool:
        return self.imp[a][b] == self.one

    def _check_laws(self):
        n = self.size
        r = range(n)
        if any(len(row) != n or any(not 0 <= v < n for v in row) for row in self.imp):
            raise AlgebraError(f"{self.name}: implication table is not {n}x{n}")
        ones = {self.imp[a][a] for a in r}
        if len(ones) != 1:
            raise AlgebraError(f"{self.name}: a -> a is not constant")
        self.one = ones.pop()
        one, imp = self.one, self.imp
        for a in r:
            if imp[one][a] != a:
                raise AlgebraError(f"{self.name}: 1 -> {self.elements[a]} differs from {self.elements[a]}")
        for a, b in itertools.product(r, r):
            if a != b and imp[a][b] == one and imp[b][a] == one:
                raise AlgebraError(f"{self.name}: order is not antisymmetric")
            if imp[a][imp[b][a]] != one:
                raise AlgebraError(f"{self.name}: a -> (b -> a) fails")
        for a, b, c in itertools.product(r, r, r):
            if imp[imp[a][imp[b][c]]][imp[imp[a][b]][imp[a][c]]] != one:
                raise AlgebraError(f"{self.name}: self-distributivity fails")
        for label, table, pick in (("meet", self.meet, self._glb), ("join", self.join, self._lub)):
            if table is None:
                continue
            for a, b in itertools.product(r, r):
                if table[a][b] != pick(a, b):
                    raise AlgebraError(f"{self.name}: {label} table disagrees with the order")
        if self.bot is not None and not all(self.leq(self.bot, a) for a in r):
            raise AlgebraError(f"{self.name}: bottom is not least")

    def _bounds(self, a: int, b: int, upper: bool) -> List[int]:
        if upper:
            return [c for c in range(self.size) if self.leq(a, c) and self.leq(b, c)]
        return [c for c in range(self.size) if self.leq(c, a) and self.leq(c, b)]

    def _glb(self, a: int, b: int) -> Optional[int]:
        lower = self._bounds(a, b, upper=False)
        best = [c for c in lower if all(self.leq(d, c) for d in lower)]
        return best[0] if best else None

    def _lub(self, a: int, b: int) -> Optional[int]:
        upper = self._bounds(a, b, upper=True)
        best = [c for c in upper if all(self.leq(c, d) for d in upper)]
        return best[0] if best else None

    def supports(self, ops: Iterable[str]) -> bool:
        have = {IMP}
        if self.meet is not None:
            have.add(AND)
        if self.join is not None:
            have.add(OR)
        if self.bot is not None:
            have.add(BOT_OP)
        return set(ops) <= have

    @property
    def signature(self) -> FrozenSet[str]:
        return frozenset(op for op in (IMP, AND, OR, BOT_OP) if self.supports({op}))

    def opremum(self) -> Optional[int]:
        """Largest element strictly below 1; exists iff the algebra is subdirectly irreducible."""
        below = [a for a in range(self.size) if a != self.one]
        top = [a for a in below if all(self.leq(b, a) for b in below)]
        return top[0] if top else None

    # --- evaluation ---

    def evaluate(self, phi: Formula, valuation: Mapping[str, int]) -> int:
        memo: Dict[Formula, int] = {}
        for g in _dag_nodes(phi):
            if g.op == VAR:
                memo[g] = valuation[g.name]
            elif g.op == BOT_OP:
                if self.bot is None:
                    raise AlgebraError(f"{self.name} has no bottom")
                memo[g] = self.bot
            elif g.op == IMP:
                memo[g] = self.imp[memo[g.left]][memo[g.right]]
            elif g.op == AND:
                if self.meet is None:
                    raise AlgebraError(f"{self.name} has no meet")
                memo[g] = self.meet[memo[g.left]][memo[g.right]]
            else:
                if self.join is None:
                    raise AlgebraError(f"{self.name} has no join")
                memo[g] = self.join[memo[g.left]][memo[g.right]]
        return memo[phi]

    def refuting_valuation(self, phi: Formula) -> Optional[Dict[str, str]]:
        names = sorted(variables(phi))
        for choice in itertools.product(range(self.size), repeat=len(names)):
            valuation = dict(zip(names, choice))
            if self.evaluate(phi, valuation) != self.one:
                return {k: self.elements[v] for k, v in valuation.items()}
        return None

    def validates(self, phi: Formula) -> bool:
        """Every valuation evaluates phi to 1."""
        ops = {g.op for g in _dag_nodes(phi)} - {VAR}
        if not self.supports(ops):
            raise AlgebraError(f"{self.name} does not interpret {sorted(ops - self.signature)}")
        return self.refuting_valuation(phi) is None

    # --- serialization ---

    def to_json(self) -> Dict[str, Any]:
        names = self.elements

        def table(t: Optional[Table]):
            return None if t is None else [[names[v] for v in row] for row in t]

        out: Dict[str, Any] = {"name": self.name, "domain": list(names), "imp": table(self.imp)}
        if self.meet is not None:
            out["meet"] = table(self.meet)
        if self.join is not None:
            out["join"] = table(self.join)
        if self.bot is not None:
            out["bot"] = names[self.bot]
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> 'FiniteAlgebra':
        """Explicit tables, or a lattice order ("covers") from which Heyting tables are derived."""
        if "imp" not in data:
            if "covers" not in data:
                raise AlgebraError("Algebra needs an 'imp' table or a 'covers' order")
            return heyting_from_order(data.get("name", "algebra"), data["domain"], data["covers"])
        domain = list(data["domain"])
        index = {e: i for i, e in enumerate(domain)}

        def table(rows):
            if rows is None:
                return None
            try:
                return [[index[v] for v in row] for row in rows]
            except KeyError as e:
                raise AlgebraError(f"Unknown element {e.args[0]!r} in table")

        bot = data.get("bot")
        return cls(data.get("name", "algebra"), domain, table(data["imp"]), table(data.get("meet")),
                   table(data.get("join")), index[bot] if bot is not None else None)

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.elements)})"


def load_algebra(path: str) -> FiniteAlgebra:
    with open(path, "r", encoding="utf-8") as fh:
        return FiniteAlgebra.from_json(json.load(fh))


# --- constructions ----------------------------------------------------------------

def _order_closure(n: int, pairs: Sequence[Tuple[int, int]]) -> List[List[bool]]:
    leq = [[i == j for j in range(n)] for i in range(n)]
    for a, b in pairs:
        leq[a][b] = True
    for k in range(n):
        for i in range(n):
            if leq[i][k]:
                for j in range(n):
                    if leq[k][j]:
                        leq[i][j] = True
    return leq


def heyting_from_order(name: str, elements: Sequence[str], covers: Sequence[Sequence[str]]) -> FiniteAlgebra:
    """Heyting algebra of a finite distributive lattice given by its covering pairs."""
    elements = list(elements)
    n = len(elements)
    index = {e: i for i, e in enumerate(elements)}
    leq = _order_closure(n, [(index[a], index[b]) for a, b in covers])
    for i in range(n):
        for j in range(i + 1, n):
            if leq[i][j] and leq[j][i]:
                raise AlgebraError(f"{name}: order is not antisymmetric")

    def extreme(cands: List[int], largest: bool) -> Optional[int]:
        for c in cands:
            if all(leq[d][c] if largest else leq[c][d] for d in cands):
                return c
        return None

    r = range(n)
    meet = [[extreme([c for c in r if leq[c][a] and leq[c][b]], True) for b in r] for a in r]
    joins = [[extreme([c for c in r if leq[a][c] and leq[b][c]], False) for b in r] for a in r]
    if any(v is None for row in meet + joins for v in row):
        raise AlgebraError(f"{name}: order is not a lattice")
    imp = []
    for a in r:
        row = []
        for b in r:
            c = extreme([z for z in r if leq[meet[z][a]][b]], True)
            if c is None:
                raise AlgebraError(f"{name}: no relative pseudocomplement {elements[a]} -> {elements[b]}")
            row.append(c)
        imp.append(row)
    bot = extreme(list(r), False)
    return FiniteAlgebra(name, elements, imp, meet, joins, bot)


def subalgebra(parent: FiniteAlgebra, keep: Iterable[str], name: str) -> FiniteAlgebra:
    """Restriction to keep; -> must be closed, the other operations survive only where closed."""
    kept = [i for i, e in enumerate(parent.elements) if e in set(keep)]
    pos = {i: k for k, i in enumerate(kept)}

    def restrict(table: Optional[Table]) -> Optional[Table]:
        if table is None:
            return None
        if any(table[a][b] not in pos for a in kept for b in kept):
            return None
        return [[pos[table[a][b]] for b in kept] for a in kept]

    imp = restrict(parent.imp)
    if imp is None:
        raise AlgebraError(f"{name}: subset is not closed under ->")
    bot = pos.get(parent.bot) if parent.bot is not None else None
    return FiniteAlgebra(name, [parent.elements[i] for i in kept], imp,
                         restrict(parent.meet), restrict(parent.join), bot)


def principal_filter(algebra: FiniteAlgebra, a: int) -> FrozenSet[int]:
    return frozenset(b for b in range(algebra.size) if algebra.leq(a, b))


def is_filter(algebra: FiniteAlgebra, members: FrozenSet[int]) -> bool:
    if algebra.one not in members:
        return False
    return all(b in members for a in members for b in range(algebra.size)
               if algebra.imp[a][b] in members)


def filters(algebra: FiniteAlgebra) -> List[FrozenSet[int]]:
    others = [a for a in range(algebra.size) if a != algebra.one]
    out = []
    for r in range(len(others) + 1):
        for subset in itertools.combinations(others, r):
            candidate = frozenset(subset) | {algebra.one}
            if is_filter(algebra, candidate):
                out.append(candidate)
    return out


def quotient(algebra: FiniteAlgebra, members: FrozenSet[int]) -> FiniteAlgebra:
    """A/F with a ~ b iff a -> b and b -> a lie in F."""
    if not is_filter(algebra, members):
        raise AlgebraError(f"{algebra.name}: not a filter")
    n = algebra.size
    cls_of: Dict[int, int] = {}
    reps: List[int] = []
    for a in range(n):
        for k, r in enumerate(reps):
            if algebra.imp[a][r] in members and algebra.imp[r][a] in members:
                cls_of[a] = k
                break
        else:
            cls_of[a] = len(reps)
            reps.append(a)

    def table(t: Optional[Table]) -> Optional[Table]:
        if t is None:
            return None
        out = [[cls_of[t[a][b]] for b in reps] for a in reps]
        for a, b in itertools.product(range(n), range(n)):
            if cls_of[t[a][b]] != out[cls_of[a]][cls_of[b]]:
                return None
        return out

    imp = table(algebra.imp)
    if imp is None:
        raise AlgebraError(f"{algebra.name}: filter does not induce a congruence")
    names = [algebra.elements[r] for r in reps]
    bot = cls_of[algebra.bot] if algebra.bot is not None else None
    label = ",".join(sorted(algebra.elements[i] for i in members))
    return FiniteAlgebra(f"{algebra.name}/{{{label}}}", names, imp, table(algebra.meet),
                         table(algebra.join), bot)


def embedding(a: FiniteAlgebra, b: FiniteAlgebra) -> Optional[Dict[str, str]]:
    """Injective ->-homomorphism from a into b, by backtracking."""
    order = [a.one] + [x for x in range(a.size) if x != a.one]
    image: Dict[int, int] = {}

    def consistent(x: int) -> bool:
        for y in image:
            if a.imp[x][y] in image and image[a.imp[x][y]] != b.imp[image[x]][image[y]]:
                return False
            if a.imp[y][x] in image and image[a.imp[y][x]] != b.imp[image[y]][image[x]]:
                return False
        return True

    def extend(k: int) -> bool:
        if k == len(order):
            # closure: results of -> on mapped elements must land on the mapped result
            return all(image[a.imp[x][y]] == b.imp[image[x]][image[y]] for x in image for y in image)
        x = order[k]
        used = set(image.values())
        targets = [b.one] if x == a.one else [t for t in range(b.size) if t not in used]
        for t in targets:
            image[x] = t
            if consistent(x) and extend(k + 1):
                return True
            del image[x]
        return False

    if a.size > b.size or not extend(0):
        return None
    return {a.elements[x]: b.elements[t] for x, t in image.items()}


def embeds_in_quotient(a: FiniteAlgebra, b: FiniteAlgebra) -> Optional[Dict[str, Any]]:
    for members in filters(b):
        q = quotient(b, members)
        found = embedding(a, q)
        if found is not None:
            return {"quotient": q.name, "map": found}
    return None


# --- characteristic formulas ---------------------------------------------------------

def element_var(element: str) -> Formula:
    return Var(f"p_{element}")


@dataclass
class CharacteristicFormula:
    algebra: str
    premises: List[Formula]
    conclusion: Formula
    valuation: Dict[str, str]

    @property
    def formula(self) -> Formula:
        return join(self.premises, self.conclusion)

    @property
    def pairs(self) -> int:
        return len(self.premises) // 2


def characteristic_formula(algebra: FiniteAlgebra) -> CharacteristicFormula:
    """Xi_A -> p_o, refuted in A exactly by the canonical valuation p_a = a (up to quotients)."""
    o = algebra.opremum()
    if o is None:
        raise AlgebraError(f"{algebra.name} is not subdirectly irreducible (no opremum)")
    els = algebra.elements
    premises: List[Formula] = []
    for a, b in itertools.product(range(algebra.size), repeat=2):
        pa, pb, pab = element_var(els[a]), element_var(els[b]), element_var(els[algebra.imp[a][b]])
        premises.append(Impl(Impl(pa, pb), pab))
        premises.append(Impl(pab, Impl(pa, pb)))
    valuation = {f"p_{e}": e for e in els}
    logger.debug(f"Characteristic formula of {algebra.name}: {len(premises)} premises")
    return CharacteristicFormula(algebra.name, premises, element_var(els[o]), valuation)


def canonical_value(algebra: FiniteAlgebra, char: CharacteristicFormula) -> str:
    valuation = {k: algebra.index(v) for k, v in char.valuation.items()}
    return algebra.elements[algebra.evaluate(char.formula, valuation)]


# --- shipped counterexamples ------------------------------------------------------------

@dataclass
class Counterexample:
    name: str
    description: str
    algebra: FiniteAlgebra
    parent: FiniteAlgebra
    validated: List[Formula]
    refuted: List[Formula]

    def verify(self) -> List[str]:
        """Documented facts that fail (empty when all hold)."""
        problems = []
        for f in self.validated:
            if not self.algebra.validates(f):
                problems.append(f"{self.name} should validate {to_text(f)}")
        for f in self.refuted:
            if self.algebra.validates(f):
                problems.append(f"{self.name} should refute {to_text(f)}")
        return problems


@lru_cache(maxsize=None)
def _load(path: str) -> Tuple[Counterexample, ...]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    out = []
    for entry in data["counterexamples"]:
        parent_data = entry["parent"]
        parent = heyting_from_order(parent_data["name"], parent_data["domain"], parent_data["covers"])
        keep = [e for e in parent.elements if e not in set(entry["remove"])]
        algebra = subalgebra(parent, keep, entry["name"])
        if algebra.signature != frozenset(entry["signature"]):
            raise AlgebraError(f"{entry['name']}: signature {sorted(algebra.signature)} "
                               f"differs from declared {sorted(entry['signature'])}")
        out.append(Counterexample(entry["name"], entry.get("description", ""), algebra, parent,
                                  [parse(t) for t in entry.get("validates", [])],
                                  [parse(t) for t in entry.get("refutes", [])]))
    logger.info(f"Loaded {len(out)} counterexample algebras from {path}")
    return tuple(out)


def shipped_counterexamples(path: str = DATA_PATH) -> List[Counterexample]:
    return list(_load(path))


def shipped_algebras(path: str = DATA_PATH) -> List[FiniteAlgebra]:
    """The counterexample subalgebras followed by their Heyting parents."""
    items = _load(path)
    return [c.algebra for c in items] + [c.parent for c in items]
