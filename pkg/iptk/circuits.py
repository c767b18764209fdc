"""
IPTK - Circuits

Explicit gate tables for formulas: the shared-DAG view used to move
CF/EF-scale objects in and out of the toolkit (text format, proof JSON) and
to embed substituted circuits exactly once.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

from iptk.config import config
from iptk.kernel import AND, BOT, BOT_OP, IMP, OR, VAR, Formula, _dag_nodes, make, Var

logger = logging.getLogger(__name__)

Gate = Tuple[str, int, int, Optional[str]]

_OP_NAMES = {VAR: "var", BOT_OP: "bot", IMP: "imp", AND: "and", OR: "or"}
_NAME_OPS = {v: k for k, v in _OP_NAMES.items()}
_GATE_LINE = re.compile(r"^g(\d+)\s*:=\s*(var|bot|imp|and|or)\(([^)]*)\)$")


class BlowUp(ValueError):
    """Unfolding a circuit would exceed the requested size bound."""

    def __init__(self, size: int, bound: int):
        super().__init__(f"Unfolded size {size} exceeds bound {bound}")
        self.size = size
        self.bound = bound


@dataclass
class Circuit:
    """Append-only table of structurally hashed gates; arguments point backwards."""

    gates: List[Gate] = field(default_factory=list)
    root: int = -1
    _index: Dict[Gate, int] = field(default_factory=dict, repr=False)

    def add(self, op: str, a: int = -1, b: int = -1, name: Optional[str] = None) -> int:
        if op in (IMP, AND, OR):
            if not (0 <= a < len(self.gates) and 0 <= b < len(self.gates)):
                raise ValueError(f"Gate arguments {a}, {b} out of range")
        gate = (op, a, b, name)
        idx = self._index.get(gate)
        if idx is None:
            idx = len(self.gates)
            self.gates.append(gate)
            self._index[gate] = idx
        return idx

    def var(self, name: str) -> int:
        return self.add(VAR, name=name)

    def bot(self) -> int:
        return self.add(BOT_OP)

    def gate_count(self) -> int:
        return len(self.gates)

    def ref(self, index: Optional[int] = None) -> 'GateRef':
        return GateRef(self, self.root if index is None else index)

    def unfolded_sizes(self) -> List[int]:
        sizes: List[int] = []
        for op, a, b, _ in self.gates:
            sizes.append(1 if op in (VAR, BOT_OP) else 1 + sizes[a] + sizes[b])
        return sizes

    def unfolded_size(self, index: Optional[int] = None) -> int:
        return self.unfolded_sizes()[self.root if index is None else index]

    def embed(self, other: 'Circuit', index: int, memo: Optional[Dict[int, int]] = None) -> int:
        """Copy the sub-circuit of other rooted at index into self."""
        memo = {} if memo is None else memo
        for i in _cone(other, index):
            if i in memo:
                continue
            op, a, b, name = other.gates[i]
            if op in (VAR, BOT_OP):
                memo[i] = self.add(op, name=name)
            else:
                memo[i] = self.add(op, memo[a], memo[b])
        return memo[index]

    def to_text(self) -> str:
        lines = []
        for i, (op, a, b, name) in enumerate(self.gates):
            if op == VAR:
                args = name
            elif op == BOT_OP:
                args = ""
            else:
                args = f"g{a}, g{b}"
            lines.append(f"g{i} := {_OP_NAMES[op]}({args})")
        lines.append(f"root g{self.root}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str) -> 'Circuit':
        circuit = cls()
        renumber: Dict[int, int] = {}
        root = None
        for raw in text.strip().splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("root"):
                root = int(line.split()[1].lstrip("g"))
                continue
            m = _GATE_LINE.match(line)
            if m is None:
                raise ValueError(f"Malformed gate line: {line!r}")
            idx, op, args = int(m.group(1)), _NAME_OPS[m.group(2)], m.group(3).strip()
            if op == VAR:
                renumber[idx] = circuit.var(args)
            elif op == BOT_OP:
                renumber[idx] = circuit.bot()
            else:
                a, b = (int(x.strip().lstrip("g")) for x in args.split(","))
                if a not in renumber or b not in renumber:
                    raise ValueError(f"Gate g{idx} refers forward")
                renumber[idx] = circuit.add(op, renumber[a], renumber[b])
        if root is None or root not in renumber:
            raise ValueError("Circuit text has no valid root marker")
        circuit.root = renumber[root]
        return circuit


@dataclass(frozen=True)
class GateRef:
    circuit: Circuit
    index: int

    def __post_init__(self):
        if not 0 <= self.index < len(self.circuit.gates):
            raise ValueError(f"Invalid gate index {self.index}")


def _cone(circuit: Circuit, index: int) -> List[int]:
    seen = set()
    stack = [index]
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        op, a, b, _ = circuit.gates[i]
        if op not in (VAR, BOT_OP):
            stack.append(a)
            stack.append(b)
    return sorted(seen)


def from_formula(phi: Formula, circuit: Optional[Circuit] = None) -> Circuit:
    circuit = Circuit() if circuit is None else circuit
    ids: Dict[Formula, int] = {}
    for g in _dag_nodes(phi):
        if g.op == VAR:
            ids[g] = circuit.var(g.name)
        elif g.op == BOT_OP:
            ids[g] = circuit.bot()
        else:
            ids[g] = circuit.add(g.op, ids[g.left], ids[g.right])
    circuit.root = ids[phi]
    return circuit


def gate_formula(circuit: Circuit, index: int) -> Formula:
    """The formula computed by a gate, as a shared (interned) DAG."""
    memo: Dict[int, Formula] = {}
    for i in _cone(circuit, index):
        op, a, b, name = circuit.gates[i]
        if op == VAR:
            memo[i] = Var(name)
        elif op == BOT_OP:
            memo[i] = BOT
        else:
            memo[i] = make(op, memo[a], memo[b])
    return memo[index]


def to_formula(circuit: Circuit, size_bound: Optional[int] = None) -> Formula:
    bound = config.unfold_bound if size_bound is None else size_bound
    size = circuit.unfolded_size()
    if size > bound:
        logger.warning(f"Refusing to unfold circuit with {circuit.gate_count()} gates to size {size}")
        raise BlowUp(size, bound)
    return gate_formula(circuit, circuit.root)


Replacement = Union[GateRef, Circuit, Formula]


def substitute_gates(circuit: Circuit, sigma: Mapping[str, Replacement]) -> Circuit:
    """Replace variable gates, embedding every substituted circuit exactly once."""
    out = Circuit()
    if not sigma:
        for op, a, b, name in circuit.gates:
            out.add(op, a, b, name)
        out.root = circuit.root
        return out
    targets: Dict[str, int] = {}
    memos: Dict[int, Dict[int, int]] = {}
    for name, rep in sigma.items():
        if isinstance(rep, Formula):
            rep = from_formula(rep)
        if isinstance(rep, Circuit):
            rep = rep.ref()
        memo = memos.setdefault(id(rep.circuit), {})
        targets[name] = out.embed(rep.circuit, rep.index, memo)
    mapping: Dict[int, int] = {}
    for i, (op, a, b, name) in enumerate(circuit.gates):
        if op == VAR and name in targets:
            mapping[i] = targets[name]
        elif op in (VAR, BOT_OP):
            mapping[i] = out.add(op, name=name)
        else:
            mapping[i] = out.add(op, mapping[a], mapping[b])
    out.root = mapping[circuit.root]
    return out
