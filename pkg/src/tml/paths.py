"""Closed vertex paths and exact trace moments by path summation.

The trace of the 2s-th power of a symmetric random matrix expands over all
closed vertex sequences i_0 -> i_1 -> ... -> i_{2s-1} -> i_0 with vertices
in [1..n].  The expected weight of one path factorizes over its non-oriented
edges: each edge {u, v} seen k times contributes the k-th moment of the
entry law.  Summing the weights of all n^(2s) sequences gives the exact
expected trace; this module is the brute-force oracle for that sum, plus
the structural path notions the combinatorial analysis is built on:

* an instant j (1-based, the step i_{j-1} -> i_j) is *marked* when its edge
  has been seen an odd number of times up to and including j;
* an edge with odd total multiplicity is an *odd edge*; the instant of its
  last occurrence is *non-returned*;
* a path is *even* when it has no odd edges;
* the detour lift reroutes each non-returned step through a fresh vertex
  n+1, producing an even closed path of length 2s + 2l.

Closed paths arising from traces always have even length, but closed odd-
length walks are legitimate objects here (weight bookkeeping and the gluing
machinery both handle them), so the container only enforces closedness.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .ensemble import EntryDistribution, moment

ENUMERATION_GUARD = 10**8
PATTERN_LENGTH_GUARD = 12


class PathSizeError(ValueError):
    """Raised when an exact enumeration would exceed its size guard."""


@dataclass(frozen=True)
class ClosedPath:
    """A closed walk on vertices 1..n, stored as the full vertex sequence.

    ``vertices`` has length+1 entries, with the first equal to the last.
    Trace expansions only produce even lengths; odd-length closed walks are
    allowed so decompositions can pass through them.
    """

    vertices: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if len(self.vertices) < 1:
            raise ValueError("a closed path needs at least its origin")
        if self.vertices[0] != self.vertices[-1]:
            raise ValueError("path is not closed")
        if self.n < 1:
            raise ValueError("vertex count must be positive")
        for v in self.vertices:
            if not (1 <= v <= self.n):
                raise ValueError(f"vertex {v} outside [1..{self.n}]")

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def origin(self) -> int:
        return self.vertices[0]

    def step(self, j: int) -> tuple[int, int]:
        """The directed step at instant j, 1-based."""
        return self.vertices[j - 1], self.vertices[j]


def edge_key(u: int, v: int) -> tuple[int, int]:
    """Canonical non-oriented edge; loops are ordinary edges {v, v}."""
    return (u, v) if u <= v else (v, u)


def edge_multiplicities(p: ClosedPath) -> Counter:
    """Non-oriented edge -> number of traversals."""
    c: Counter = Counter()
    vs = p.vertices
    for j in range(1, len(vs)):
        c[edge_key(vs[j - 1], vs[j])] += 1
    return c


def is_even_path(p: ClosedPath) -> bool:
    """True when every edge multiplicity is even."""
    return all(k % 2 == 0 for k in edge_multiplicities(p).values())


def path_weight(p: ClosedPath, dist: EntryDistribution, normalized: bool = True) -> float:
    """Expected product of the entry variables along the path.

    The weight is the product over non-oriented edges of the entry moment at
    that edge's multiplicity.  With ``normalized`` each of the 2s factors
    carries 1/sqrt(n), i.e. the product is divided by n**s.
    """
    w = 1.0
    for k in edge_multiplicities(p).values():
        w *= moment(dist, k)
        if w == 0.0:
            break
    if normalized:
        if p.length % 2 != 0:
            raise ValueError("normalized weights are defined for even lengths only")
        w /= float(p.n) ** (p.length // 2)
    return w


def marked_instants(p: ClosedPath) -> set[int]:
    """Instants whose edge has odd running multiplicity (1-based)."""
    seen: Counter = Counter()
    out: set[int] = set()
    vs = p.vertices
    for j in range(1, len(vs)):
        e = edge_key(vs[j - 1], vs[j])
        seen[e] += 1
        if seen[e] % 2 == 1:
            out.add(j)
    return out


def nonreturned_edges(p: ClosedPath) -> list[int]:
    """Sorted instants of the last occurrences of odd edges.

    The length of the result is 2l, twice the number of odd edge pairs.
    """
    mult = edge_multiplicities(p)
    last: dict[tuple[int, int], int] = {}
    vs = p.vertices
    for j in range(1, len(vs)):
        last[edge_key(vs[j - 1], vs[j])] = j
    return sorted(last[e] for e, k in mult.items() if k % 2 == 1)


def fk_lift(p: ClosedPath) -> ClosedPath:
    """Reroute every non-returned step through the fresh vertex n+1.

    Each non-returned step u -> v becomes u -> n+1 -> v.  The result is an
    even closed path of length 2s + 2l on n+1 vertices in which the new
    vertex occurs exactly 2l times.
    """
    bad = set(nonreturned_edges(p))
    fresh = p.n + 1
    out = [p.vertices[0]]
    for j in range(1, len(p.vertices)):
        if j in bad:
            out.append(fresh)
        out.append(p.vertices[j])
    return ClosedPath(vertices=tuple(out), n=fresh)


def _closed_sequences(n: int, length: int):
    """All closed vertex sequences of the given length, odometer order."""
    for head in itertools.product(range(1, n + 1), repeat=length):
        yield head + (head[0],)


def exact_expected_trace(
    dist: EntryDistribution, n: int, s: int, normalized: bool = True
) -> float:
    """E[Tr M^(2s)] (or the normalized E[Tr A^(2s)]) by brute enumeration.

    Walks all n^(2s) closed sequences in odometer order.  Guarded so the
    enumeration stays below 1e8 sequences; use the relabeling-class variant
    for large n at small s.
    """
    _check_enumeration_size(n, s)
    total = 0.0
    for vs in _closed_sequences(n, 2 * s):
        c: Counter = Counter()
        for j in range(1, len(vs)):
            c[edge_key(vs[j - 1], vs[j])] += 1
        w = 1.0
        for k in c.values():
            w *= moment(dist, k)
            if w == 0.0:
                break
        total += w
    if normalized:
        total /= float(n) ** s
    return total


def even_path_contribution(
    dist: EntryDistribution, n: int, s: int, normalized: bool = True
) -> float:
    """Share of the exact expected trace carried by even paths (Z_e)."""
    return _trace_sums(dist, n, s, normalized)[1]


def odd_path_contribution(
    dist: EntryDistribution, n: int, s: int, normalized: bool = True
) -> float:
    """Share of the exact expected trace carried by odd paths (Z_o)."""
    total, even = _trace_sums(dist, n, s, normalized)
    return total - even


def _trace_sums(
    dist: EntryDistribution, n: int, s: int, normalized: bool
) -> tuple[float, float]:
    """(total, even-path share) in one enumeration pass."""
    _check_enumeration_size(n, s)
    total = 0.0
    even = 0.0
    for vs in _closed_sequences(n, 2 * s):
        c: Counter = Counter()
        for j in range(1, len(vs)):
            c[edge_key(vs[j - 1], vs[j])] += 1
        w = 1.0
        all_even = True
        for k in c.values():
            w *= moment(dist, k)
            if k % 2 == 1:
                all_even = False
        if w != 0.0:
            total += w
            if all_even:
                even += w
    if normalized:
        scale = float(n) ** s
        return total / scale, even / scale
    return total, even


def _check_enumeration_size(n: int, s: int) -> None:
    if s < 1:
        raise ValueError("s must be at least 1")
    if n < 1:
        raise ValueError("n must be at least 1")
    if n ** (2 * s) > ENUMERATION_GUARD:
        raise PathSizeError(
            f"n**(2s) = {n}**{2 * s} exceeds the enumeration guard {ENUMERATION_GUARD}"
        )


def exact_expected_trace_patterns(
    dist: EntryDistribution,
    n: int,
    s: int,
    normalized: bool = True,
    even_only: bool = False,
) -> float:
    """Exact expected trace via first-occurrence relabeling classes.

    Two closed sequences that differ only by a vertex relabeling have the
    same weight, and a class with v distinct vertices has
    n * (n-1) * ... * (n-v+1) labeled members.  Enumerating one canonical
    representative per class makes the sum affordable for any n at small s.
    Guarded to path length 2s <= 12.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    if 2 * s > PATTERN_LENGTH_GUARD:
        raise PathSizeError(
            f"pattern enumeration supports 2s <= {PATTERN_LENGTH_GUARD}"
        )
    length = 2 * s
    total = 0.0

    def rec(seq: list[int], vmax: int, counts: Counter):
        nonlocal total
        pos = len(seq)
        if pos == length:
            # close the walk back to vertex 1
            c = counts.copy()
            c[edge_key(seq[-1], 1)] += 1
            if even_only and any(k % 2 == 1 for k in c.values()):
                return
            w = 1.0
            for k in c.values():
                w *= moment(dist, k)
                if w == 0.0:
                    return
            ways = 1.0
            for i in range(vmax):
                ways *= n - i
            total += w * ways
            return
        top = min(vmax + 1, n)
        for nxt in range(1, top + 1):
            e = edge_key(seq[-1], nxt)
            counts[e] += 1
            seq.append(nxt)
            rec(seq, max(vmax, nxt), counts)
            seq.pop()
            counts[e] -= 1
            if counts[e] == 0:
                del counts[e]

    rec([1], 1, Counter())
    if normalized:
        total /= float(n) ** s
    return total


def random_closed_path(n: int, s: int, rng: np.random.Generator) -> ClosedPath:
    """A uniform random closed sequence of length 2s on [1..n]."""
    head = rng.integers(1, n + 1, size=2 * s)
    verts = tuple(int(v) for v in head) + (int(head[0]),)
    return ClosedPath(vertices=verts, n=n)
