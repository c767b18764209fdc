"""
IPTK - Formula Families

Generators for the tautology families the toolkit is exercised on: the
left-nested implications alpha_n and their doubled-conjunction variants, the
conjunction substitutions xi_n, the Rieger-Nishimura circuits, the
disjunction-premise shapes built from monotone bodies, and the shipped
proper axioms.
"""

import itertools
import logging
import re
from typing import Dict, List, Optional, Tuple

from iptk.circuits import Circuit, to_formula
from iptk.kernel import (And, FragmentError, Formula, Impl, Or, Substitution, Var, big_and, big_or,
                         is_strict_monotone, neg, parse, substitute, variables)

logger = logging.getLogger(__name__)

_INDEXED = re.compile(r"^p(\d+)$")


def p(i: int) -> Formula:
    return Var(f"p{i}")


def primed(name: str) -> Formula:
    """The partner variable of a disjunction block: p0 and p0_."""
    return Var(f"{name}_")


# --- alpha_n --------------------------------------------------------------------------

def alpha(n: int) -> Formula:
    """alpha_0 = p0, alpha_{n+1} = alpha_n -> p_{n+1}."""
    if n < 0:
        raise ValueError("alpha needs n >= 0")
    out = p(0)
    for i in range(1, n + 1):
        out = Impl(out, p(i))
    return out


def _pair(i: int, side: int) -> Formula:
    return Var(f"p{i}_{side}")


def alpha_conj2(n: int) -> Formula:
    """alpha_n with p_i replaced by p{i}_0 & p{i}_1 for every i < n."""
    sigma = {f"p{i}": And(_pair(i, 0), _pair(i, 1)) for i in range(n)}
    return substitute(alpha(n), sigma)


def alpha_conj2_impl(n: int) -> Formula:
    """Conjunction-free equivalent of alpha_conj2(n) of Polish size 2^(n+2) - 3."""
    if n < 0:
        raise ValueError("alpha needs n >= 0")
    out = p(0)
    for k in range(n):
        left = substitute(out, {f"p{k}": _pair(k, 0)})
        right = substitute(out, {f"p{k}": _pair(k, 1)})
        out = Impl(left, Impl(right, p(k + 1)))
    return out


# --- xi_n -----------------------------------------------------------------------------

def index_variables(phi: Formula) -> Tuple[Formula, Substitution]:
    """Rename the variables of phi to p0, p1, ... (sorted order); returns the renamed formula and the way back."""
    names = sorted(variables(phi))
    if all(_INDEXED.match(n) for n in names):
        return phi, Substitution()
    forward = {name: p(i) for i, name in enumerate(names)}
    back = Substitution({f"p{i}": Var(name) for i, name in enumerate(names)})
    return substitute(phi, forward), back


def xi_substitution(n: int, names) -> Substitution:
    out = {}
    for name in names:
        m = _INDEXED.match(name)
        if m is None:
            raise FragmentError(f"xi needs indexed variables p<i>, got {name}")
        i = int(m.group(1))
        out[name] = big_and([p(i * n + j) for j in range(n)])
    return Substitution(out)


def xi(n: int, phi: Formula) -> Formula:
    """xi_n(p_i) = p_{in} & ... & p_{in+n-1}."""
    if n < 1:
        raise ValueError("xi needs n >= 1")
    return xi_substitution(n, variables(phi))(phi)


# --- Rieger-Nishimura ------------------------------------------------------------------

def rn(k: int, name: str = "p") -> Circuit:
    """rn_0 = F, rn_1 = p, rn_2 = ~p, rn_{2n+3} = rn_{2n+1} | rn_{2n+2}, rn_{2n+4} = rn_{2n+2} -> rn_{2n+1}."""
    if k < 0:
        raise ValueError("rn needs k >= 0")
    c = Circuit()
    bot = c.bot()
    gates = [bot, c.var(name), None]
    gates[2] = c.add("->", gates[1], bot)
    for i in range(3, k + 1):
        if i % 2:
            gates.append(c.add("|", gates[i - 2], gates[i - 1]))
        else:
            gates.append(c.add("->", gates[i - 2], gates[i - 3]))
    c.root = gates[k]
    return c


def rn_formula(k: int, bound: Optional[int] = None, name: str = "p") -> Formula:
    return to_formula(rn(k, name), bound)


def rn_classes(k: int) -> List[List[int]]:
    """Group rn_0..rn_k by IPC-equivalence; every group is a singleton."""
    from iptk.decision import equiv_ipc
    groups: List[List[int]] = []
    forms: List[Formula] = []
    for i in range(k + 1):
        f = rn_formula(i)
        for group, rep in zip(groups, forms):
            if equiv_ipc(rep, f):
                group.append(i)
                break
        else:
            groups.append([i])
            forms.append(f)
    return groups


# --- disjunction-premise families ------------------------------------------------------

def block(prefix: str, m: int) -> Formula:
    """(x0 | x0_) & ... & (x_{m-1} | x_{m-1}_)."""
    return big_and([Or(Var(f"{prefix}{i}"), primed(f"{prefix}{i}")) for i in range(m)])


def family_eq1(n: int, a: Formula, b: Formula) -> Formula:
    """/\\_{i<n}(p_i | p_i_) -> ~a | ~b."""
    return Impl(block("p", n), Or(neg(a), neg(b)))


def _require_strict_monotone(*fs: Formula):
    for f in fs:
        if not is_strict_monotone(f):
            raise FragmentError("expected a strict monotone body")


def family_eq2(n: int, gamma: Formula, delta: Formula) -> Formula:
    """/\\(p|p_) -> (/\\(s|s_) -> gamma) | (/\\(r|r_) -> delta), all blocks of size n."""
    _require_strict_monotone(gamma, delta)
    return Impl(block("p", n), Or(Impl(block("s", n), gamma), Impl(block("r", n), delta)))


def family_eq6(n: int, gamma: Formula, delta: Formula) -> Formula:
    """The implicational separation formula over u, v, w."""
    from iptk.negtrans import separation_formula
    return separation_formula(n, gamma, delta)


def default_clique_colour(n: int) -> Tuple[Formula, Formula]:
    """Triangle versus 2-colouring on the complete graph with n + 2 vertices.

    Edge e is absent via p<e> and present via p<e>_. The s block picks a set
    of vertices (s<v> in, s<v>_ out) and gamma says the set has fewer than
    three vertices or misses an edge. The r block picks a colour per vertex
    (r<v> or r<v>_) and delta says some present edge is monochromatic. So
    gamma holds for every s exactly when the graph has no triangle, and
    delta holds for every r exactly when it is not 2-colourable.
    """
    if n < 1:
        raise ValueError("the clique-colouring instance needs n >= 1")
    vertices = list(range(n + 2))
    edges = list(itertools.combinations(vertices, 2))
    s, s_ = (lambda v: Var(f"s{v}")), (lambda v: primed(f"s{v}"))
    r, r_ = (lambda v: Var(f"r{v}")), (lambda v: primed(f"r{v}"))
    small = [big_and([s_(v) for v in out]) for out in itertools.combinations(vertices, len(vertices) - 2)]
    gaps = [big_and([s(u), s(v), p(e)]) for e, (u, v) in enumerate(edges)]
    gamma = big_or(small + gaps)
    delta = big_or([And(primed(f"p{e}"), Or(And(r(u), r(v)), And(r_(u), r_(v))))
                    for e, (u, v) in enumerate(edges)])
    return gamma, delta


def clique_colour_size(n: int) -> int:
    """Block size for the default instance: one p pair per edge, s and r padded to match."""
    return (n + 2) * (n + 1) // 2


def clique_colour_family(n: int) -> Formula:
    gamma, delta = default_clique_colour(n)
    return family_eq2(clique_colour_size(n), gamma, delta)


def clique_colour_separation(n: int) -> Formula:
    gamma, delta = default_clique_colour(n)
    return family_eq6(clique_colour_size(n), gamma, delta)


def conj_cnf_family(n: int) -> Formula:
    """(p0 & q0) | ... | (p_{n-1} & q_{n-1})."""
    return big_or([And(p(i), Var(f"q{i}")) for i in range(n)])


# --- shipped axioms -------------------------------------------------------------------

SHIPPED_AXIOMS = {
    "kc": "(p -> F) | ((p -> F) -> F)",
    "lc-disj": "(p -> q) | (q -> p)",
    "lc": "((p -> q) -> r) -> ((q -> p) -> r) -> r",
    "lc-conj2": "((p -> pp -> q) -> (p -> pp -> qq) -> r) -> ((q -> qq -> p) -> (q -> qq -> pp) -> r) -> r",
}


def shipped_axioms() -> Dict[str, Formula]:
    return {name: parse(text) for name, text in SHIPPED_AXIOMS.items()}


FAMILIES = ("alpha", "alpha2", "alpha2-impl", "rn", "eq2", "eq6", "cnf", "axiom")


def generate(family: str, n: int) -> Formula:
    """Dispatch used by the command line."""
    if family == "alpha":
        return alpha(n)
    if family == "alpha2":
        return alpha_conj2(n)
    if family == "alpha2-impl":
        return alpha_conj2_impl(n)
    if family == "rn":
        return rn_formula(n)
    if family == "eq2":
        return clique_colour_family(n)
    if family == "eq6":
        return clique_colour_separation(n)
    if family == "cnf":
        return conj_cnf_family(n)
    if family == "axiom":
        names = sorted(SHIPPED_AXIOMS)
        return shipped_axioms()[names[n % len(names)]]
    raise ValueError(f"Unknown family {family}")
