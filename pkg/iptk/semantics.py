"""
IPTK - Kripke Semantics

Finite rooted frames and Kripke models with bitmask forcing, the infinite
two-column model used for the implication-depth and size lower bounds
(queried through its finite up-sets), labelled formula forests and unnested
occurrences, monotone CNF, and the exhaustive search oracles that back the
size and depth experiments.
"""

import itertools
import logging
import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from time import monotonic
from typing import (Any, Callable, Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence,
                    Tuple)

from iptk.kernel import (AND, BOT, BOT_OP, IMP, OR, VAR, Formula, FragmentError, Fragment, Path,
                         Var, _dag_nodes, big_and, big_or, connectives, is_top_constant, make,
                         subterm_at, to_text, top, variables)

logger = logging.getLogger(__name__)


# --- frames ------------------------------------------------------------------------

@dataclass(frozen=True)
class Frame:
    """Finite poset on points 0..n-1; up[i] is the bitmask of points >= i."""

    up: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.up)

    @property
    def full(self) -> int:
        return (1 << len(self.up)) - 1

    def leq(self, i: int, j: int) -> bool:
        return bool(self.up[i] >> j & 1)

    def root(self) -> int:
        for i, mask in enumerate(self.up):
            if mask == self.full:
                return i
        raise ValueError("Frame has no least point")

    def is_up_set(self, mask: int) -> bool:
        return all(self.up[i] & ~mask == 0 for i in range(self.size) if mask >> i & 1)

    def imp(self, a: int, b: int) -> int:
        bad = a & ~b
        if bad == 0:
            return self.full
        out = 0
        for i, mask in enumerate(self.up):
            if mask & bad == 0:
                out |= 1 << i
        return out


def _closure(n: int, pairs: Sequence[Tuple[int, int]]) -> Tuple[int, ...]:
    up = [1 << i for i in range(n)]
    for a, b in pairs:
        up[a] |= 1 << b
    changed = True
    while changed:
        changed = False
        for i in range(n):
            grown = up[i]
            for j in range(n):
                if up[i] >> j & 1:
                    grown |= up[j]
            if grown != up[i]:
                up[i] = grown
                changed = True
    for i in range(n):
        for j in range(i + 1, n):
            if up[i] >> j & 1 and up[j] >> i & 1:
                raise ValueError(f"Order is not antisymmetric on points {i} and {j}")
    return tuple(up)


def _canonical(up: Tuple[int, ...]) -> Tuple[Tuple[int, int], ...]:
    n = len(up)
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j and up[i] >> j & 1]
    best = None
    for perm in itertools.permutations(range(1, n)):
        relabel = (0,) + perm
        key = tuple(sorted((relabel[i], relabel[j]) for i, j in pairs))
        if best is None or key < best:
            best = key
    return best or ()


@lru_cache(maxsize=None)
def _rooted_frames(n: int) -> Tuple[Frame, ...]:
    if n < 1:
        return ()
    seen = set()
    out: List[Frame] = []
    # Point i picks its strict down-set: a down-closed set of earlier points containing the root.
    partial = [[1]]
    for i in range(1, n):
        grown = []
        for downs in partial:
            for mask in range(1, 1 << i, 2):
                if all(downs[j] & ~mask == 0 for j in range(i) if mask >> j & 1):
                    grown.append(downs + [mask | 1 << i])
        partial = grown
    for downs in partial:
        up = tuple(sum(1 << j for j in range(n) if downs[j] >> i & 1) for i in range(n))
        key = _canonical(up)
        if key not in seen:
            seen.add(key)
            out.append(Frame(up))
    logger.debug(f"{len(out)} rooted frames with {n} points")
    return tuple(out)


def rooted_frames(n: int) -> List[Frame]:
    """Rooted posets with n points up to isomorphism, root labelled 0."""
    return list(_rooted_frames(n))


@lru_cache(maxsize=4096)
def _up_sets(frame: Frame) -> Tuple[int, ...]:
    return tuple(m for m in range(1 << frame.size) if frame.is_up_set(m))


def up_sets(frame: Frame) -> List[int]:
    return list(_up_sets(frame))


# --- models --------------------------------------------------------------------------

@dataclass
class KripkeModel:
    """Rooted finite Kripke model; val maps each variable to its up-closed truth mask."""

    points: List[str]
    order: Frame
    val: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self._index = {p: i for i, p in enumerate(self.points)}
        for name, mask in self.val.items():
            if not self.order.is_up_set(mask):
                raise ValueError(f"Valuation of {name} is not persistent")

    @classmethod
    def build(cls, names: Sequence[str], leq: Sequence[Tuple[str, str]],
              val: Mapping[str, Sequence[str]]) -> 'KripkeModel':
        names = list(names)
        if len(set(names)) != len(names):
            raise ValueError("Duplicate point names")
        index = {p: i for i, p in enumerate(names)}
        try:
            pairs = [(index[a], index[b]) for a, b in leq]
        except KeyError as e:
            raise ValueError(f"Unknown point {e.args[0]}")
        order = Frame(_closure(len(names), pairs))
        masks: Dict[str, int] = {}
        for point, atoms in val.items():
            if point not in index:
                raise ValueError(f"Unknown point {point}")
            for atom in atoms:
                masks[atom] = masks.get(atom, 0) | 1 << index[point]
        return cls(names, order, masks)

    @classmethod
    def from_masks(cls, frame: Frame, masks: Mapping[str, int]) -> 'KripkeModel':
        return cls([f"w{i}" for i in range(frame.size)], frame, dict(masks))

    def frame(self) -> Frame:
        return self.order

    def index(self, point: str) -> int:
        return self._index[point]

    def root(self) -> str:
        return self.points[self.order.root()]

    def leq(self, a: str, b: str) -> bool:
        return self.order.leq(self._index[a], self._index[b])

    def true_atoms(self, point: str) -> List[str]:
        i = self._index[point]
        return sorted(name for name, mask in self.val.items() if mask >> i & 1)

    def truth_mask(self, phi: Formula) -> int:
        memo: Dict[Formula, int] = {}
        for g in _dag_nodes(phi):
            if g.op == VAR:
                memo[g] = self.val.get(g.name, 0)
            elif g.op == BOT_OP:
                memo[g] = 0
            elif g.op == AND:
                memo[g] = memo[g.left] & memo[g.right]
            elif g.op == OR:
                memo[g] = memo[g.left] | memo[g.right]
            else:
                memo[g] = self.order.imp(memo[g.left], memo[g.right])
        return memo[phi]

    def forces(self, point: str, phi: Formula) -> bool:
        return bool(self.truth_mask(phi) >> self._index[point] & 1)

    def valid(self, phi: Formula) -> bool:
        return self.truth_mask(phi) == self.order.full

    def restrict(self, keep: Sequence[str]) -> 'KripkeModel':
        kept = [p for p in self.points if p in set(keep)]
        old = [self._index[p] for p in kept]
        up = tuple(sum(1 << k for k, j in enumerate(old) if self.order.up[i] >> j & 1) for i in old)
        val = {name: sum(1 << k for k, i in enumerate(old) if mask >> i & 1)
               for name, mask in self.val.items()}
        return KripkeModel(kept, Frame(up), val)

    def to_json(self) -> Dict[str, Any]:
        leq = [[a, b] for a in self.points for b in self.points if a != b and self.leq(a, b)]
        return {
            "points": list(self.points),
            "leq": leq,
            "val": {p: self.true_atoms(p) for p in self.points},
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> 'KripkeModel':
        return cls.build(data["points"], [tuple(pair) for pair in data.get("leq", [])],
                         data.get("val", {}))


def model_to_json(model: KripkeModel) -> Dict[str, Any]:
    return model.to_json()


def model_from_json(data: Mapping[str, Any]) -> KripkeModel:
    return KripkeModel.from_json(data)


def forces(model: KripkeModel, point: str, phi: Formula) -> bool:
    return model.forces(point, phi)


def random_model(n_points: int, names: Sequence[str], rng: random.Random) -> KripkeModel:
    frame = rng.choice(rooted_frames(n_points))
    ups = up_sets(frame)
    return KripkeModel.from_masks(frame, {name: rng.choice(ups) for name in names})


def disjoint_union(models: Sequence[KripkeModel]) -> KripkeModel:
    """One (unrooted) model whose truth masks concatenate those of the parts."""
    points: List[str] = []
    up: List[int] = []
    val: Dict[str, int] = {}
    offset = 0
    for k, m in enumerate(models):
        points.extend(f"m{k}_{p}" for p in m.points)
        up.extend(mask << offset for mask in m.order.up)
        for name, mask in m.val.items():
            val[name] = val.get(name, 0) | mask << offset
        offset += len(m.points)
    return KripkeModel(points, Frame(tuple(up)), val)


# --- the two-column model --------------------------------------------------------------
#
# Points x_n (n >= 0) and y_n (n >= 1) with x_n < x_{n-1} and x_{n+1} < y_n < x_{n-1};
# y_1 forces p0, x_n and y_n force p{n+1}. Every point has a finite up-set.

_PVAR = re.compile(r"^p(\d+)$")


@dataclass(frozen=True, order=True)
class ModelMPoint:
    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in ("x", "y"):
            raise ValueError(f"Unknown point kind {self.kind!r}")
        if self.index < (0 if self.kind == "x" else 1):
            raise ValueError(f"Point {self} does not exist")

    def __str__(self) -> str:
        return f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, text: str) -> 'ModelMPoint':
        m = re.match(r"^\s*([xy])_?(\d+)\s*$", text)
        if m is None:
            raise ValueError(f"Malformed point {text!r}")
        return cls(m.group(1), int(m.group(2)))


def X(n: int) -> ModelMPoint:
    return ModelMPoint("x", n)


def Y(n: int) -> ModelMPoint:
    return ModelMPoint("y", n)


@lru_cache(maxsize=None)
def m_up(pt: ModelMPoint) -> FrozenSet[ModelMPoint]:
    """The finite set of points above pt (inclusive)."""
    out = {pt}
    n = pt.index
    if pt.kind == "x":
        if n >= 1:
            out |= m_up(X(n - 1))
        if n >= 2:
            out |= m_up(Y(n - 1))
    else:
        out |= m_up(X(n - 1))
    return frozenset(out)


def m_atom(pt: ModelMPoint, name: str) -> bool:
    m = _PVAR.match(name)
    if m is None:
        return False
    k = int(m.group(1))
    if k == 0:
        return pt in m_up(Y(1))
    return pt in m_up(X(k - 1)) or (k >= 2 and pt in m_up(Y(k - 1)))


def m_points(depth: int) -> List[ModelMPoint]:
    """The up-closed initial segment x_0..x_depth, y_1..y_depth."""
    pts = [X(n) for n in range(depth + 1)] + [Y(n) for n in range(1, depth + 1)]
    return sorted(pts, key=lambda p: (p.index, p.kind))


def model_M(depth: int, names: Sequence[str] = ()) -> KripkeModel:
    return _model_on(m_points(depth), names)


def _model_on(pts: Sequence[ModelMPoint], names: Sequence[str]) -> KripkeModel:
    index = {p: i for i, p in enumerate(pts)}
    up = tuple(sum(1 << index[q] for q in m_up(p)) for p in pts)
    val = {name: sum(1 << i for i, p in enumerate(pts) if m_atom(p, name)) for name in names}
    return KripkeModel([str(p) for p in pts], Frame(up), val)


def model_M_eval(pt: ModelMPoint, phi: Formula) -> bool:
    """Forcing at a point of the infinite model, computed on its finite up-set."""
    pts = sorted(m_up(pt), key=lambda p: (p.index, p.kind))
    return _model_on(pts, sorted(variables(phi))).forces(str(pt), phi)


@dataclass(frozen=True)
class MClass:
    """Canonical class in the two-column model: top, bot, p_n, alpha_n or beta_n (n >= 1)."""

    kind: str
    n: int = 0

    def __str__(self) -> str:
        if self.kind in ("top", "bot"):
            return self.kind
        return f"{self.kind}{self.n}"


def _alpha(n: int) -> Formula:
    out = Var("p0")
    for i in range(1, n + 1):
        out = make(IMP, out, Var(f"p{i}"))
    return out


def canonical_formula(cls: MClass) -> Formula:
    if cls.kind == "top":
        return top()
    if cls.kind == "bot":
        return BOT
    if cls.kind == "p":
        return Var(f"p{cls.n}")
    if cls.kind == "alpha":
        return _alpha(cls.n)
    if cls.kind == "beta":
        return make(IMP, _alpha(cls.n), Var(f"p{cls.n}"))
    raise ValueError(f"Unknown class kind {cls.kind!r}")


def _p_index(phi: Formula) -> int:
    k = 0
    for name in variables(phi):
        m = _PVAR.match(name)
        if m is None:
            raise ValueError(f"Variable {name} is not of the form p<k>")
        k = max(k, int(m.group(1)))
    return k


def _require_and_free(phi: Formula):
    if AND in connectives(phi):
        raise FragmentError(f"Formula {to_text(phi)} contains a conjunction")


def classify_in_M(phi: Formula) -> Optional[MClass]:
    """Canonical equivalent of a conjunction-free formula in the two-column model."""
    _require_and_free(phi)
    k = _p_index(phi)
    depth = k + 3
    model = model_M(depth, [f"p{i}" for i in range(depth + 1)])
    target = model.truth_mask(phi)
    candidates = [MClass("top"), MClass("bot")]
    for kind in ("p", "alpha", "beta"):
        candidates.extend(MClass(kind, n) for n in range(1, k + 3))
    for cls in candidates:
        if model.truth_mask(canonical_formula(cls)) == target:
            return cls
    logger.debug(f"No canonical class for {to_text(phi)}")
    return None


# --- formula forests and unnested occurrences ----------------------------------------------

@dataclass(frozen=True)
class Tree:
    label: str
    children: Tuple['Tree', ...] = ()

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


Forest = Tuple[Tree, ...]


def formula_forest(phi: Formula) -> Forest:
    """Premise trees hang under every root of the consequent forest; disjunction is disjoint union."""
    _require_and_free(phi)
    memo: Dict[Formula, Forest] = {}
    for g in _dag_nodes(phi):
        if g.op in (VAR, BOT_OP):
            memo[g] = (Tree(to_text(g)),)
        elif g.op == OR:
            memo[g] = memo[g.left] + memo[g.right]
        else:
            premise = memo[g.left]
            memo[g] = tuple(Tree(r.label, premise + r.children) for r in memo[g.right])
    return memo[phi]


def paths(forest: Forest) -> Iterator[Tuple[str, ...]]:
    """Label sequences from every node up to the root of its tree."""
    stack: List[Tuple[Tree, Tuple[str, ...]]] = [(t, ()) for t in reversed(forest)]
    while stack:
        node, above = stack.pop()
        here = (node.label,) + above
        yield here
        for child in reversed(node.children):
            stack.append((child, here))


def unnested(phi: Formula) -> List[Path]:
    """Occurrences not inside the left scope of an implication, in pre-order."""
    _require_and_free(phi)
    out: List[Path] = []
    stack: List[Tuple[Formula, Path]] = [(phi, ())]
    while stack:
        g, path = stack.pop()
        out.append(path)
        if g.op == IMP:
            stack.append((g.right, path + (1,)))
        elif g.op == OR:
            stack.append((g.right, path + (1,)))
            stack.append((g.left, path + (0,)))
    return out


def unnested_subformulas(phi: Formula) -> List[Formula]:
    out: List[Formula] = []
    for path in unnested(phi):
        g = subterm_at(phi, path)
        if g not in out:
            out.append(g)
    return out


def unnested_top_check(phi: Formula) -> bool:
    """False only if some unnested subformula is provable while phi is not."""
    from iptk.decision import ipc_provable
    if any(ipc_provable(g) for g in unnested_subformulas(phi)):
        return ipc_provable(phi)
    return True


def _runs(seq: Sequence[str]) -> List[Tuple[str, int]]:
    return [(label, len(list(group))) for label, group in itertools.groupby(seq)]


def path_matches(cls: MClass, path: Sequence[str]) -> bool:
    """Whether a node-to-root label sequence has the shape forced by the class."""
    runs = _runs(path)
    if cls.kind == "top":
        return False
    if cls.kind == "bot":
        return runs == [("F", 1)]
    if cls.kind == "p":
        return runs == [(f"p{cls.n}", 1)]
    if not runs or runs[0] != ("p0", 1):
        return False
    n = cls.n
    if cls.kind == "beta" and n == 1:
        return len(runs) == 1 or (len(runs) == 2 and runs[1][0] == "p1" and runs[1][1] % 2 == 0)
    if len(runs) != n + 1 or [label for label, _ in runs[1:]] != [f"p{i}" for i in range(1, n + 1)]:
        return False
    odd = all(count % 2 == 1 for _, count in runs[1:n])
    last = runs[n][1]
    if cls.kind == "alpha":
        return odd and last % 2 == 1
    return odd and last % 2 == 0


def has_class_path(phi: Formula) -> bool:
    cls = classify_in_M(phi)
    if cls is None or cls.kind == "top":
        return True
    if cls.kind == "beta" and cls.n >= 2 and OR in connectives(phi):
        return True
    return any(path_matches(cls, p) for p in paths(formula_forest(phi)))


# --- monotone CNF ---------------------------------------------------------------------

Clause = FrozenSet[str]


def _minimize(clauses) -> FrozenSet[Clause]:
    kept: List[Clause] = []
    for c in sorted(set(clauses), key=lambda c: (len(c), sorted(c))):
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def monotone_cnf(phi: Formula) -> FrozenSet[Clause]:
    """The irredundant monotone CNF: no clause contains another."""
    memo: Dict[Formula, FrozenSet[Clause]] = {}
    for g in _dag_nodes(phi):
        if is_top_constant(g):
            memo[g] = frozenset()
        elif g.op == VAR:
            memo[g] = frozenset({frozenset({g.name})})
        elif g.op == BOT_OP:
            memo[g] = frozenset({frozenset()})
        elif g.op == AND:
            memo[g] = _minimize(memo[g.left] | memo[g.right])
        elif g.op == OR:
            memo[g] = _minimize(a | b for a in memo[g.left] for b in memo[g.right])
    if phi not in memo:
        raise FragmentError(f"Formula {to_text(phi)} is not monotone")
    return memo[phi]


def cnf_formula(clauses: FrozenSet[Clause]) -> Formula:
    ordered = sorted(clauses, key=lambda c: (len(c), sorted(c)))
    return big_and([big_or([Var(v) for v in sorted(c)]) for c in ordered])


# --- exhaustive size and depth searches -----------------------------------------------------

@dataclass
class SearchResult:
    witness: Optional[Formula]
    complete: bool
    searched_size: int
    enumerated: int
    reason: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "witness": to_text(self.witness) if self.witness is not None else None,
            "complete": self.complete,
            "searched_size": self.searched_size,
            "enumerated": self.enumerated,
            "reason": self.reason,
        }


def fingerprint_model(names: Sequence[str], seed: int = 0, max_points: int = 512) -> KripkeModel:
    """A disjoint union of small models; equal truth masks are necessary for equivalence."""
    rng = random.Random(seed)
    parts: List[KripkeModel] = []
    budget = max_points
    for n in (1, 2, 3):
        for frame in rooted_frames(n):
            ups = up_sets(frame)
            total = len(ups) ** len(names)
            if total * frame.size <= budget // 2:
                choices = itertools.product(ups, repeat=len(names))
            else:
                count = max(1, budget // (4 * frame.size))
                choices = (tuple(rng.choice(ups) for _ in names) for _ in range(count))
            for choice in choices:
                parts.append(KripkeModel.from_masks(frame, dict(zip(names, choice))))
                budget -= frame.size
            if budget <= 0:
                break
        if budget <= 0:
            break
    return disjoint_union(parts)


def _default_equiv(a: Formula, b: Formula) -> bool:
    from iptk.decision import equiv_ipc
    return equiv_ipc(a, b)


def _default_entails(a: Formula, b: Formula) -> bool:
    from iptk.decision import ipc_provable
    return ipc_provable(b, [a])


def brute_force_min_equivalent(target: Formula, fragment: Fragment, names: Sequence[str],
                               max_size: int,
                               equiv: Optional[Callable[[Formula, Formula], bool]] = None,
                               max_conjuncts: int = 1,
                               deadline_seconds: Optional[float] = None,
                               seed: int = 0) -> SearchResult:
    """Smallest fragment formula (or conjunction of up to max_conjuncts of them) equivalent to target.

    Candidates are built only from pairwise inequivalent smaller candidates, which
    loses nothing because equivalence is a congruence and replacing a subformula
    by a smaller equivalent never grows the formula.
    """
    equiv = equiv or _default_equiv
    deadline = monotonic() + deadline_seconds if deadline_seconds else None
    model = fingerprint_model(sorted(set(names) | variables(target)), seed=seed)
    order = model.order
    goal = model.truth_mask(target)
    ops = sorted(op for op in fragment.connectives if op != BOT_OP)
    atoms = [Var(v) for v in names] + ([BOT] if BOT_OP in fragment.connectives else [])

    by_size: Dict[int, List[Tuple[Formula, int]]] = {}
    buckets: Dict[int, List[Formula]] = {}
    enumerated = 0

    def admit(f: Formula, mask: int) -> bool:
        for g in buckets.get(mask, ()):
            if equiv(f, g):
                return False
        buckets.setdefault(mask, []).append(f)
        return True

    def finish(witness: Optional[Formula], size: int, complete: bool, reason: str) -> SearchResult:
        result = SearchResult(witness, complete, size, enumerated, reason)
        logger.info(f"Brute force for {to_text(target)[:60]}: {reason} ({enumerated} candidates)")
        return result

    for size in range(1, max_size + 1):
        fresh: List[Tuple[Formula, int]] = []
        if size == 1:
            pool = [(a, model.truth_mask(a)) for a in atoms]
        else:
            pool = []
            for left_size in range(1, size - 1):
                right_size = size - 1 - left_size
                for op in ops:
                    symmetric = op in (AND, OR)
                    if symmetric and left_size > right_size:
                        continue
                    for i, (a, ma) in enumerate(by_size.get(left_size, ())):
                        rights = by_size.get(right_size, ())
                        start = i if symmetric and left_size == right_size else 0
                        for b, mb in rights[start:]:
                            if op == IMP:
                                mask = order.imp(ma, mb)
                            elif op == AND:
                                mask = ma & mb
                            else:
                                mask = ma | mb
                            pool.append((make(op, a, b), mask))
        for f, mask in pool:
            if deadline is not None and monotonic() > deadline:
                return finish(None, size - 1, False, f"deadline reached while enumerating size {size}")
            enumerated += 1
            if not admit(f, mask):
                continue
            fresh.append((f, mask))
            if max_conjuncts == 1 and mask == goal and equiv(f, target):
                return finish(f, size, True, f"witness of size {size}")
        by_size[size] = fresh

    if max_conjuncts > 1:
        return _conjunction_search(target, goal, by_size, max_size, max_conjuncts, equiv, finish)
    return finish(None, max_size, True, f"no equivalent of size <= {max_size}")


def _conjunction_search(target, goal, by_size, max_size, max_conjuncts, equiv, finish) -> SearchResult:
    members = [(f, m) for size in sorted(by_size) for f, m in by_size[size]
               if m & goal == goal and _default_entails(target, f)]
    for r in range(1, max_conjuncts + 1):
        for combo in itertools.combinations(members, r):
            mask = -1
            for _, m in combo:
                mask &= m
            if mask == goal:
                candidate = big_and([f for f, _ in combo])
                if equiv(candidate, target):
                    return finish(candidate, max_size, True, f"{r} conjuncts")
    return finish(None, max_size, True, f"no conjunction of <= {max_conjuncts} members of size <= {max_size}")


@dataclass
class LimdReport:
    n: int
    classes: int
    separating: Optional[Formula]
    alpha_separates: bool

    @property
    def confirmed(self) -> bool:
        return self.separating is None and self.alpha_separates

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "classes": self.classes,
            "separating": to_text(self.separating) if self.separating is not None else None,
            "alpha_separates": self.alpha_separates,
            "confirmed": self.confirmed,
        }


def limd_classes(model: KripkeModel, names: Sequence[str], depth: int,
                 max_size: Optional[int] = None) -> Dict[int, Formula]:
    """Truth masks of all formulas of left-implication depth <= depth, each with a smallest witness."""
    order = model.order
    atoms: List[Tuple[Formula, int]] = [(Var(v), model.val.get(v, 0)) for v in names]
    atoms += [(BOT, 0), (top(), order.full)]

    def better(table, mask, f):
        if max_size is not None and f.size > max_size:
            return False
        old = table.get(mask)
        if old is None or f.size < old.size:
            table[mask] = f
            return True
        return False

    prev: Dict[int, Formula] = {}
    for d in range(depth + 1):
        best = dict(prev)
        for f, mask in atoms:
            better(best, mask, f)
        changed = True
        while changed:
            changed = False
            items = list(best.items())
            for (ma, fa), (mb, fb) in itertools.product(items, repeat=2):
                changed |= better(best, ma & mb, make(AND, fa, fb))
                changed |= better(best, ma | mb, make(OR, fa, fb))
            for (ma, fa), (mb, fb) in itertools.product(list(prev.items()), items):
                changed |= better(best, order.imp(ma, mb), make(IMP, fa, fb))
        prev = best
    return prev


def int_limd_check(n: int, max_size: Optional[int] = None) -> LimdReport:
    """No formula of left-implication depth < n agrees with alpha_n on y_{n+1} and x_{n+1}."""
    if n < 1:
        raise ValueError("n must be at least 1")
    names = [f"p{i}" for i in range(n + 1)]
    model = model_M(n + 1, names)
    y, x = model.index(str(Y(n + 1))), model.index(str(X(n + 1)))
    alpha_mask = model.truth_mask(_alpha(n))
    alpha_separates = bool(alpha_mask >> y & 1) and not alpha_mask >> x & 1
    classes = limd_classes(model, names, n - 1, max_size)
    separating = next((f for mask, f in sorted(classes.items(), key=lambda kv: kv[1].size)
                       if mask >> y & 1 and not mask >> x & 1), None)
    report = LimdReport(n, len(classes), separating, alpha_separates)
    logger.info(f"Depth check n={n}: {len(classes)} classes, confirmed={report.confirmed}")
    return report
