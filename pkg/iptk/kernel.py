"""
IPTK - Formula Kernel

Hash-consed formula trees over the connectives {->, &, |, F}: construction,
parsing and printing, fragments, substitutions, occurrence paths and
polarity, heads, structural measures and the essential-disjunction
classifier.

Formulas are interned: two structurally equal formulas are the same Python
object, so equality and hashing are identity based and O(1), and identical
subterms are shared in memory the way gates of a circuit are.
"""

import logging
import re
import weakref
from dataclasses import dataclass
from threading import Lock
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

VAR = "var"
BOT_OP = "F"
IMP = "->"
AND = "&"
OR = "|"

CONNECTIVES = (IMP, AND, OR, BOT_OP)
TOP_VAR = "x"

Path = Tuple[int, ...]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ParseError(ValueError):
    """Syntax error in formula text, carrying the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class FragmentError(ValueError):
    pass


class FreshnessError(ValueError):
    pass


class Formula:
    """Interned formula node. Build through Var/Impl/And/Or and BOT."""

    __slots__ = ("op", "left", "right", "name", "size", "_text", "__weakref__")

    @property
    def is_var(self) -> bool:
        return self.op == VAR

    @property
    def is_bot(self) -> bool:
        return self.op == BOT_OP

    @property
    def is_imp(self) -> bool:
        return self.op == IMP

    @property
    def is_and(self) -> bool:
        return self.op == AND

    @property
    def is_or(self) -> bool:
        return self.op == OR

    @property
    def is_atom(self) -> bool:
        return self.op == VAR or self.op == BOT_OP

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        if self.size > 200:
            return f"Formula(<{self.op} of size {self.size}>)"
        return f"Formula({to_text(self)!r})"

    def __reduce__(self):
        return (parse, (to_text(self),))


_table: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()
_table_lock = Lock()


def _intern(op: str, left: Optional[Formula], right: Optional[Formula], name: Optional[str]) -> Formula:
    key = (op, left, right, name)
    with _table_lock:
        f = _table.get(key)
        if f is None:
            f = object.__new__(Formula)
            f.op = op
            f.left = left
            f.right = right
            f.name = name
            f.size = 1 if left is None else 1 + left.size + right.size
            f._text = None
            _table[key] = f
    return f


def Var(name: str) -> Formula:
    if not isinstance(name, str) or not _IDENT.fullmatch(name) or name == BOT_OP:
        raise ValueError(f"Invalid variable name: {name!r}")
    return _intern(VAR, None, None, name)


BOT = _intern(BOT_OP, None, None, None)


def _check_args(a, b):
    if not isinstance(a, Formula) or not isinstance(b, Formula):
        raise TypeError("connectives take Formula arguments")


def Impl(a: Formula, b: Formula) -> Formula:
    _check_args(a, b)
    return _intern(IMP, a, b, None)


def And(a: Formula, b: Formula) -> Formula:
    _check_args(a, b)
    return _intern(AND, a, b, None)


def Or(a: Formula, b: Formula) -> Formula:
    _check_args(a, b)
    return _intern(OR, a, b, None)


def make(op: str, a: Formula, b: Formula) -> Formula:
    """Rebuild a binary node with the given connective."""
    return _intern(op, a, b, None)


def neg(f: Formula) -> Formula:
    return Impl(f, BOT)


def top(fragment: Optional["Fragment"] = None) -> Formula:
    """The top abbreviation: F -> F when F is available, else x -> x."""
    if fragment is None or BOT_OP in fragment.connectives:
        return Impl(BOT, BOT)
    x = Var(TOP_VAR)
    return Impl(x, x)


def is_top_constant(f: Formula) -> bool:
    return f.op == IMP and f.left is f.right and (f.left.op == BOT_OP or (f.left.op == VAR and f.left.name == TOP_VAR))


def big_and(fs: Sequence[Formula], fragment: Optional["Fragment"] = None) -> Formula:
    if not fs:
        return top(fragment)
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def big_or(fs: Sequence[Formula]) -> Formula:
    if not fs:
        return BOT
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def join(premises: Sequence[Formula], head_: Formula) -> Formula:
    """Gamma -> xi, right-associated; just xi for empty Gamma."""
    out = head_
    for p in reversed(premises):
        out = Impl(p, out)
    return out


def head(f: Formula) -> Tuple[List[Formula], Formula]:
    premises = []
    while f.op == IMP:
        premises.append(f.left)
        f = f.right
    return premises, f


def conjuncts(f: Formula) -> List[Formula]:
    """Flatten a (left or right nested) conjunction into its conjuncts."""
    if f.op != AND:
        return [f]
    return conjuncts(f.left) + conjuncts(f.right)


# --- printing and parsing ---------------------------------------------------

def _needs_parens(parent: str, child: Formula, side: int) -> bool:
    c = child.op
    if parent == IMP:
        return side == 0 and c == IMP
    if parent == OR:
        return c == IMP or (side == 1 and c == OR)
    if parent == AND:
        return c in (IMP, OR) or (side == 1 and c == AND)
    return False


def to_text(f: Formula) -> str:
    """Canonical ASCII text with minimal brackets (inverse of parse)."""
    if f._text is not None:
        return f._text
    parts: List[str] = []

    def emit(g: Formula):
        if g.op == VAR:
            parts.append(g.name)
            return
        if g.op == BOT_OP:
            parts.append("F")
            return
        for side, child in ((0, g.left), (1, g.right)):
            wrap = _needs_parens(g.op, child, side)
            if wrap:
                parts.append("(")
            emit(child)
            if wrap:
                parts.append(")")
            if side == 0:
                parts.append(f" {g.op} ")

    emit(f)
    text = "".join(parts)
    f._text = text
    return text


_TOKEN = re.compile(r"\s*(?:(->|→)|(&|∧)|(\||∨)|(\()|(\))|(⊥)|([A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"Unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append((IMP, IMP, start))
        elif m.group(2):
            tokens.append((AND, AND, start))
        elif m.group(3):
            tokens.append((OR, OR, start))
        elif m.group(4):
            tokens.append(("(", "(", start))
        elif m.group(5):
            tokens.append((")", ")", start))
        elif m.group(6):
            tokens.append((BOT_OP, BOT_OP, start))
        else:
            ident = m.group(7)
            tokens.append((BOT_OP, BOT_OP, start) if ident == "F" else ("id", ident, start))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    """Recursive-descent parser for the formula grammar."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self, kind: str) -> Tuple[str, str, int]:
        tok = self.tokens[self.i]
        if tok[0] != kind:
            found = tok[1] or "end of input"
            raise ParseError(f"Expected {kind!r} but found {found!r}", tok[2])
        self.i += 1
        return tok

    def formula(self) -> Formula:
        left = self.disj()
        if self.peek() == IMP:
            self.i += 1
            return Impl(left, self.formula())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == OR:
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.atom()
        while self.peek() == AND:
            self.i += 1
            f = And(f, self.atom())
        return f

    def atom(self) -> Formula:
        kind, value, pos = self.tokens[self.i]
        if kind == "id":
            self.i += 1
            return Var(value)
        if kind == BOT_OP:
            self.i += 1
            return BOT
        if kind == "(":
            self.i += 1
            f = self.formula()
            self.take(")")
            return f
        raise ParseError(f"Expected a formula but found {value or 'end of input'!r}", pos)


def parse(text: str) -> Formula:
    if not isinstance(text, str):
        raise ParseError("Formula text must be a string", 0)
    p = _Parser(text)
    f = p.formula()
    p.take("eof")
    return f


def parse_list(texts: Iterable[str]) -> List[Formula]:
    return [parse(t) for t in texts]


# --- fragments --------------------------------------------------------------

_ORDER = {IMP: 0, AND: 1, OR: 2, BOT_OP: 3}


@dataclass(frozen=True)
class Fragment:
    """A connective set containing implication."""

    connectives: FrozenSet[str]

    def __post_init__(self):
        unknown = set(self.connectives) - set(CONNECTIVES)
        if unknown:
            raise FragmentError(f"Unknown connectives: {sorted(unknown)}")
        if IMP not in self.connectives:
            raise FragmentError("Fragments must contain implication")

    @classmethod
    def of(cls, *ops: str) -> 'Fragment':
        return cls(frozenset(ops) | {IMP})

    @classmethod
    def parse(cls, text: str) -> 'Fragment':
        aliases = {"->": IMP, "→": IMP, "&": AND, "∧": AND, "|": OR, "∨": OR,
                   "F": BOT_OP, "⊥": BOT_OP, "bot": BOT_OP}
        ops = set()
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if part not in aliases:
                raise FragmentError(f"Unknown connective {part!r}")
            ops.add(aliases[part])
        return cls(frozenset(ops))

    def admits(self, f: Formula) -> bool:
        return connectives(f) <= self.connectives

    def __contains__(self, op: str) -> bool:
        return op in self.connectives

    def __str__(self) -> str:
        return ",".join(sorted(self.connectives, key=_ORDER.get))


FULL = Fragment(frozenset(CONNECTIVES))
IMPLICATIONAL = Fragment(frozenset({IMP}))
IMP_BOT = Fragment(frozenset({IMP, BOT_OP}))
IMP_AND = Fragment(frozenset({IMP, AND}))
POSITIVE = Fragment(frozenset({IMP, AND, OR}))


# --- traversal helpers --------------------------------------------------------

def _dag_nodes(f: Formula) -> List[Formula]:
    """Distinct nodes in post-order (children before parents, left first)."""
    seen = set()
    order: List[Formula] = []
    stack = [(f, False)]
    while stack:
        g, done = stack.pop()
        if done:
            order.append(g)
            continue
        if g in seen:
            continue
        seen.add(g)
        stack.append((g, True))
        if g.left is not None:
            stack.append((g.right, False))
            stack.append((g.left, False))
    return order


def subformulas(f: Formula) -> List[Formula]:
    return _dag_nodes(f)


def dag_size(f: Formula) -> int:
    return len(_dag_nodes(f))


def connectives(f: Formula) -> FrozenSet[str]:
    return frozenset(g.op for g in _dag_nodes(f) if g.op != VAR)


def variables(f: Formula) -> FrozenSet[str]:
    return frozenset(g.name for g in _dag_nodes(f) if g.op == VAR)


def var_list(f: Formula) -> List[str]:
    """Variables in order of first occurrence."""
    return [g.name for g in _dag_nodes(f) if g.op == VAR]


def variables_of(fs: Iterable[Formula]) -> FrozenSet[str]:
    out = set()
    for f in fs:
        out |= variables(f)
    return frozenset(out)


def sort_key(f: Formula) -> Tuple[int, str]:
    return (f.size, to_text(f))


def occurs(sub: Formula, f: Formula) -> bool:
    return sub in set(_dag_nodes(f))


def size_polish(f: Formula) -> int:
    return f.size


def limd(f: Formula) -> int:
    memo: Dict[Formula, int] = {}
    for g in _dag_nodes(f):
        if g.op in (VAR, BOT_OP):
            memo[g] = 0
        elif g.op == IMP:
            memo[g] = max(memo[g.left] + 1, memo[g.right])
        else:
            memo[g] = max(memo[g.left], memo[g.right])
    return memo[f]


def is_implicational(f: Formula) -> bool:
    return connectives(f) <= {IMP}


def is_positive(f: Formula) -> bool:
    return BOT_OP not in connectives(f)


def is_monotone(f: Formula) -> bool:
    if is_top_constant(f):
        return True
    if f.op in (VAR, BOT_OP):
        return True
    if f.op in (AND, OR):
        return is_monotone(f.left) and is_monotone(f.right)
    return False


def is_strict_monotone(f: Formula) -> bool:
    return connectives(f) <= {AND, OR}


# --- substitutions --------------------------------------------------------------

def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Apply a substitution as a homomorphism; identity on unmapped variables."""
    if not mapping:
        return f
    memo: Dict[Formula, Formula] = {}

    def go(g: Formula) -> Formula:
        r = memo.get(g)
        if r is not None:
            return r
        if g.op == VAR:
            r = mapping.get(g.name, g)
        elif g.op == BOT_OP:
            r = g
        else:
            a = go(g.left)
            b = go(g.right)
            r = g if (a is g.left and b is g.right) else _intern(g.op, a, b, None)
        memo[g] = r
        return r

    return go(f)


def replace_subterm(f: Formula, old: Formula, new: Formula) -> Formula:
    """Replace every occurrence of the subterm old by new."""
    memo: Dict[Formula, Formula] = {}

    def go(g: Formula) -> Formula:
        if g is old:
            return new
        r = memo.get(g)
        if r is not None:
            return r
        if g.left is None:
            r = g
        else:
            a = go(g.left)
            b = go(g.right)
            r = g if (a is g.left and b is g.right) else _intern(g.op, a, b, None)
        memo[g] = r
        return r

    return go(f)


class Substitution:
    """Finite map from variable names to formulas, applied homomorphically."""

    __slots__ = ("mapping",)

    def __init__(self, mapping: Optional[Mapping[str, Formula]] = None):
        self.mapping: Dict[str, Formula] = {}
        for k, v in (mapping or {}).items():
            if not isinstance(v, Formula):
                raise TypeError(f"Substitution value for {k!r} is not a Formula")
            if not (v.op == VAR and v.name == k):
                self.mapping[k] = v

    def __call__(self, f: Formula) -> Formula:
        return substitute(f, self.mapping)

    def apply_all(self, fs: Iterable[Formula]) -> List[Formula]:
        return [substitute(f, self.mapping) for f in fs]

    def compose(self, inner: 'Substitution') -> 'Substitution':
        """self after inner: x -> self(inner(x))."""
        out = {k: self(v) for k, v in inner.mapping.items()}
        for k, v in self.mapping.items():
            out.setdefault(k, v)
        return Substitution(out)

    def restrict(self, names: Iterable[str]) -> 'Substitution':
        keep = set(names)
        return Substitution({k: v for k, v in self.mapping.items() if k in keep})

    def get(self, name: str, default: Optional[Formula] = None) -> Optional[Formula]:
        return self.mapping.get(name, default)

    def __getitem__(self, name: str) -> Formula:
        return self.mapping.get(name, Var(name))

    def __len__(self) -> int:
        return len(self.mapping)

    def items(self):
        return self.mapping.items()

    def is_identity(self) -> bool:
        return not self.mapping

    def to_json(self) -> Dict[str, str]:
        return {k: to_text(v) for k, v in sorted(self.mapping.items())}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> 'Substitution':
        return cls({k: parse(v) for k, v in data.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self.mapping == other.mapping

    def __hash__(self) -> int:
        return hash(frozenset((k, id(v)) for k, v in self.mapping.items()))

    def __repr__(self) -> str:
        return f"Substitution({self.to_json()})"


class FreshNames:
    """Per-call generator of fresh variable names '<prefix><counter>'."""

    def __init__(self, reserved: Iterable[str] = (), prefix: str = "_t"):
        self.reserved = set(reserved)
        self.prefix = prefix
        self.counter = 0
        self.issued: List[str] = []

    def fresh(self) -> str:
        name = f"{self.prefix}{self.counter}"
        self.counter += 1
        if name in self.reserved:
            raise FreshnessError(f"Fresh name {name} collides with an input variable")
        self.issued.append(name)
        return name

    def var(self) -> Formula:
        return Var(self.fresh())


# --- occurrences and polarity ------------------------------------------------------

def subterm_at(f: Formula, path: Path) -> Formula:
    for step in path:
        if f.left is None:
            raise ValueError(f"Path {path} leaves the formula")
        f = f.left if step == 0 else f.right
    return f


def replace_at(f: Formula, path: Path, new: Formula) -> Formula:
    if not path:
        return new
    if f.left is None:
        raise ValueError(f"Path {path} leaves the formula")
    if path[0] == 0:
        return _intern(f.op, replace_at(f.left, path[1:], new), f.right, None)
    return _intern(f.op, f.left, replace_at(f.right, path[1:], new), None)


def polarity_at(f: Formula, path: Path) -> bool:
    positive = True
    for step in path:
        if f.op == IMP and step == 0:
            positive = not positive
        f = f.left if step == 0 else f.right
    return positive


def polarity_map(f: Formula) -> List[Tuple[Path, bool, Formula]]:
    """Every occurrence in pre-order with its polarity (True = positive)."""
    out: List[Tuple[Path, bool, Formula]] = []
    stack: List[Tuple[Formula, Path, bool]] = [(f, (), True)]
    while stack:
        g, path, positive = stack.pop()
        out.append((path, positive, g))
        if g.left is not None:
            flip = g.op == IMP
            stack.append((g.right, path + (1,), positive))
            stack.append((g.left, path + (0,), (not positive) if flip else positive))
    return out


def essential_disjunctions(f: Formula) -> List[Path]:
    """Occurrences of disjunctions that none of the inessential clauses cover.

    A disjunction is inessential when it is positive, lies inside some
    subformula a -> F, or reaches the antecedent of an implication through
    a chain of conjunctions and disjunctions only.
    """
    out: List[Path] = []
    stack: List[Tuple[Formula, Path, bool, bool, bool]] = [(f, (), True, False, False)]
    while stack:
        g, path, positive, in_neg, anchored = stack.pop()
        if g.op == OR and not positive and not in_neg and not anchored:
            out.append(path)
        if g.op == IMP:
            scope = in_neg or g.right.op == BOT_OP
            stack.append((g.right, path + (1,), positive, scope, False))
            stack.append((g.left, path + (0,), not positive, scope, True))
        elif g.op in (AND, OR):
            stack.append((g.right, path + (1,), positive, in_neg, anchored))
            stack.append((g.left, path + (0,), positive, in_neg, anchored))
    return sorted(out)


def negative_disjunctions(f: Formula) -> List[Path]:
    return sorted(p for p, pos, g in polarity_map(f) if g.op == OR and not pos)


def conj_free_decompose(f: Formula) -> List[Formula]:
    """A list of conjunction-free formulas whose conjunction is equivalent to f."""
    memo: Dict[Formula, List[Formula]] = {}

    def dedupe(fs: List[Formula]) -> List[Formula]:
        seen = set()
        out = []
        for g in fs:
            if g not in seen:
                seen.add(g)
                out.append(g)
        return out

    for g in _dag_nodes(f):
        if g.op in (VAR, BOT_OP):
            memo[g] = [g]
        elif g.op == AND:
            memo[g] = dedupe(memo[g.left] + memo[g.right])
        elif g.op == OR:
            memo[g] = dedupe([Or(a, b) for a in memo[g.left] for b in memo[g.right]])
        else:
            antecedents = memo[g.left]
            memo[g] = dedupe([join(antecedents, b) for b in memo[g.right]])
    return memo[f]
