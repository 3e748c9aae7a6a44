"""Brute-force ground truth on small digraphs.

Every digraph of the D2 model (``2^(n(n-1))`` arc subsets) or of the SD
model (``3^(n(n-1)/2)`` states, one per unordered pair) is enumerated and
classified by its strong components.  Summing ``p^m (1-p)^(M-m)`` (or the
strict analogue) over the members of a family gives its probability as an
exact polynomial in ``p``.

For multidigraphs the strong components depend only on which ordered
pairs carry at least one arc, so :func:`md_probability_capped` walks the
``2^(n^2)`` supports and sums Poisson weights over the multiplicities.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpf

from .families import FamilySpec, ModelKind
from .scalar_core import DomainError, workprec

__all__ = [
    "ComplexComponent",
    "DigraphCensus",
    "SccProfile",
    "SmallDigraph",
    "census",
    "classify",
    "exact_poly",
    "family_key",
    "md_probability_capped",
    "strongly_connected_components",
]

MAX_N = 6


@dataclass(frozen=True)
class SmallDigraph:
    """``n`` vertices and a multiset of arcs ``(u, v)``; loops and repeats allowed."""

    n: int
    arcs: tuple[tuple[int, int], ...]

    @classmethod
    def from_arcs(cls, n: int, arcs) -> "SmallDigraph":
        arcs = tuple(sorted(tuple(a) for a in arcs))
        for u, v in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"arc {(u, v)} out of range for n = {n}")
        return cls(n, arcs)


def strongly_connected_components(n: int, succ: list[list[int]]) -> list[list[int]]:
    """Tarjan's algorithm with an explicit stack (no recursion)."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


@dataclass(frozen=True)
class ComplexComponent:
    excess: int
    kernel_vertices: int
    kernel_edges: int

    @property
    def deficiency(self) -> int:
        return 2 * self.excess - self.kernel_vertices


@dataclass(frozen=True)
class SccProfile:
    """``components`` holds ``(size, internal_edges, excess)`` per strong component."""

    components: tuple[tuple[int, int, int], ...]
    complex_list: tuple[ComplexComponent, ...] = field(default=())

    @property
    def is_acyclic(self) -> bool:
        return all(size == 1 and exc == -1 for size, _, exc in self.components)

    @property
    def is_elementary(self) -> bool:
        return all(exc <= 0 for _, _, exc in self.components)

    @property
    def is_strong(self) -> bool:
        return len(self.components) == 1

    def one_complex(self) -> ComplexComponent | None:
        """The unique complex component when all the others are elementary."""
        if len(self.complex_list) == 1:
            return self.complex_list[0]
        return None


def _kernel(vertices: list[int], arcs: list[tuple[int, int]]) -> tuple[int, int]:
    """Suppress in-degree-1/out-degree-1 vertices; return (vertices, edges) of the kernel."""
    arcs = list(arcs)
    alive = set(vertices)
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            ins = [i for i, (a, b) in enumerate(arcs) if b == v]
            outs = [i for i, (a, b) in enumerate(arcs) if a == v]
            if len(ins) == 1 and len(outs) == 1 and ins[0] != outs[0]:
                u = arcs[ins[0]][0]
                w = arcs[outs[0]][1]
                for i in sorted((ins[0], outs[0]), reverse=True):
                    arcs.pop(i)
                arcs.append((u, w))
                alive.discard(v)
                changed = True
                break
    return len(alive), len(arcs)


def classify(g: SmallDigraph) -> SccProfile:
    """Strong components with sizes, internal arc counts, excess and kernels."""
    succ: list[list[int]] = [[] for _ in range(g.n)]
    for u, v in g.arcs:
        if v not in succ[u]:
            succ[u].append(v)
    comps = strongly_connected_components(g.n, succ)
    where = {}
    for ci, comp in enumerate(comps):
        for v in comp:
            where[v] = ci
    inner: list[list[tuple[int, int]]] = [[] for _ in comps]
    for u, v in g.arcs:
        if where[u] == where[v]:
            inner[where[u]].append((u, v))
    rows, complex_list = [], []
    for comp, arcs in zip(comps, inner):
        exc = len(arcs) - len(comp)
        rows.append((len(comp), len(arcs), exc))
        if exc > 0:
            kv, ke = _kernel(comp, arcs)
            complex_list.append(ComplexComponent(exc, kv, ke))
    return SccProfile(tuple(sorted(rows)), tuple(complex_list))


def family_key(family: FamilySpec) -> tuple:
    if family.tag in ("acyclic", "elementary"):
        return (family.tag,)
    if family.tag == "bicyclic":
        return ("excess", 1)
    if family.tag == "excess":
        return ("excess", family.r)
    return ("kernel", family.r, family.d)


def _member_keys(profile: SccProfile) -> list[tuple]:
    keys = [("all",)]
    if profile.is_acyclic:
        keys.append(("acyclic",))
    if profile.is_elementary:
        keys.append(("elementary",))
    if profile.is_strong:
        keys.append(("strong",))
    one = profile.one_complex()
    if one is not None:
        keys.append(("excess", one.excess))
        keys.append(("kernel", one.excess, one.deficiency))
    return keys


@dataclass
class DigraphCensus:
    """``counts[key][m]``: number of digraphs with ``m`` arcs in the family ``key``."""

    n: int
    model: str
    counts: dict[tuple, Counter]

    def total(self, key: tuple) -> int:
        return sum(self.counts.get(key, Counter()).values())

    def rows(self):
        """``(n, m, family, count)`` tuples, sorted."""
        out = []
        for key in sorted(self.counts, key=str):
            name = "_".join(str(k) for k in key)
            for m in sorted(self.counts[key]):
                out.append((self.n, m, name, self.counts[key][m]))
        return out


def _simple_graphs(n: int, model: str):
    if model == ModelKind.D2:
        pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
        for mask in range(1 << len(pairs)):
            yield [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
    else:
        pairs = list(itertools.combinations(range(n), 2))
        for states in itertools.product((0, 1, 2), repeat=len(pairs)):
            arcs = []
            for (u, v), s in zip(pairs, states):
                if s == 1:
                    arcs.append((u, v))
                elif s == 2:
                    arcs.append((v, u))
            yield arcs


def _check_simple(n: int, model: str) -> str:
    model = ModelKind.parse(model)
    if model == ModelKind.MD:
        raise DomainError("census and exact_poly cover the D2 and SD models")
    if not 0 <= n <= MAX_N:
        raise DomainError(f"n must be between 0 and {MAX_N}")
    return model


def census(n: int, model: str) -> DigraphCensus:
    """Exhaustive counts per family and arc count."""
    model = _check_simple(n, model)
    counts: dict[tuple, Counter] = {}
    for arcs in _simple_graphs(n, model):
        profile = classify(SmallDigraph(n, tuple(arcs)))
        for key in _member_keys(profile):
            counts.setdefault(key, Counter())[len(arcs)] += 1
    return DigraphCensus(n, model, counts)


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_pow(base: list[Fraction], e: int) -> list[Fraction]:
    out = [Fraction(1)]
    for _ in range(e):
        out = _poly_mul(out, base)
    return out


def exact_poly(n: int, model: str, family: FamilySpec) -> list[Fraction]:
    """Probability of the family as a polynomial in ``p`` (low degree first)."""
    model = _check_simple(n, model)
    family.check_model(model)
    counts = census(n, model).counts.get(family_key(family), Counter())
    if model == ModelKind.D2:
        slots, absent = n * (n - 1), [Fraction(1), Fraction(-1)]
    else:
        slots, absent = n * (n - 1) // 2, [Fraction(1), Fraction(-2)]
    total = [Fraction(0)] * (slots + 1)
    for m, c in counts.items():
        term = [Fraction(0)] * m + [Fraction(c)]
        term = _poly_mul(term, _poly_pow(absent, slots - m))
        for i, x in enumerate(term):
            total[i] += x
    while len(total) > 1 and total[-1] == 0:
        total.pop()
    return total


# -- multidigraphs -----------------------------------------------------------


def _max_excess(key: tuple) -> int:
    if key[0] == "acyclic":
        return -1
    if key[0] == "elementary":
        return 0
    return key[1]


def _in_family(profile: SccProfile, key: tuple) -> bool:
    return key in _member_keys(profile)


def md_probability_capped(n: int, p, family: FamilySpec, M: int = 20, bits: int = 128) -> tuple[mpf, mpf]:
    """Probability of the family among multidigraphs with every multiplicity ``<= M``.

    Returns ``(value, tail)`` with ``value <= P <= value + tail``, where
    ``tail = 1 - P(Poisson(p) <= M)^(n^2)`` is the mass of all configurations
    having some multiplicity above ``M``.  Inside a strong component only
    multiplicity vectors whose excess stays within the family's limit are
    enumerated: any component above that limit excludes the digraph.
    """
    if not 1 <= n <= 3:
        raise DomainError("md_probability_capped supports 1 <= n <= 3")
    if M < 1:
        raise DomainError("M must be at least 1")
    family.check_model(ModelKind.MD)
    key = family_key(family)
    limit = _max_excess(key)
    with workprec(bits):
        p = mpmath.mpmathify(p) if not isinstance(p, Fraction) else mpf(p.numerator) / p.denominator
        if p < 0:
            raise DomainError("p must be non-negative")
        e = mpmath.exp(-p)
        pois = [e]
        for m in range(1, M + 1):
            pois.append(pois[-1] * p / m)
        p_zero = pois[0]
        p_some = mpmath.fsum(pois[1:])
        pairs = [(u, v) for u in range(n) for v in range(n)]
        total = mpf(0)
        for mask in range(1 << len(pairs)):
            support = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
            weight = p_zero ** (len(pairs) - len(support))
            base = classify(SmallDigraph(n, tuple(support)))
            if any(exc > limit for _, _, exc in base.components) and limit >= 0:
                continue
            if limit < 0 and not base.is_acyclic:
                continue
            succ: list[list[int]] = [[] for _ in range(n)]
            for u, v in support:
                succ[u].append(v)
            where = {}
            for ci, comp in enumerate(strongly_connected_components(n, succ)):
                for v in comp:
                    where[v] = ci
            inner = [a for a in support if where[a[0]] == where[a[1]]]
            outer = len(support) - len(inner)
            weight *= p_some**outer
            budget = max(0, limit - min((exc for _, _, exc in base.components), default=0))
            budget = min(budget, M - 1)
            acc = mpf(0)
            for extra in _extras(len(inner), budget):
                arcs = [a for a in support if where[a[0]] != where[a[1]]]
                w = mpf(1)
                for a, x in zip(inner, extra):
                    arcs.extend([a] * (1 + x))
                    w *= pois[1 + x]
                if _in_family(classify(SmallDigraph(n, tuple(arcs))), key):
                    acc += w
            total += weight * acc
        # P(X > M) summed directly so that tiny tails do not cancel to zero
        term, upper, m = pois[-1], mpf(0), M
        while True:
            m += 1
            term = term * p / m
            upper += term
            if term <= upper * mpf(2) ** (-bits) or term == 0:
                break
        tail = -mpmath.expm1(len(pairs) * mpmath.log1p(-upper))
        return total, tail


def _extras(k: int, budget: int):
    """All ``k``-tuples of non-negative integers with sum ``<= budget``."""
    if k == 0:
        yield ()
        return
    for first in range(budget + 1):
        for rest in _extras(k - 1, budget - first):
            yield (first,) + rest
