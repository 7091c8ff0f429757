"""The graph lemma behind KCA: a checker for single instances and an exhaustive enumerator.

Graphs have loops but no multiedges.  Two readings of "closed neighborhood"
are supported:

* ``loop``: a vertex is its own neighbor iff it has a loop (the counting used
  in the proof, E[x][x] = 1 iff there is a loop at x);
* ``closed``: every vertex always counts itself, loop or not.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

SEMANTICS = ("loop", "closed")


class PreconditionError(ValueError):
    """The instance does not satisfy the lemma's hypotheses."""


def lemma_bound(n: int, t: int, a) -> Fraction:
    a = Fraction(a)
    return n - (3 + 2 * a / (1 - a)) * t


@dataclass(frozen=True)
class LoopGraph:
    """Symmetric adjacency on vertices 0..m-1; ``adj[v][v]`` marks a loop."""

    adj: tuple

    @classmethod
    def from_edges(cls, m: int, edges: Iterable[tuple]) -> "LoopGraph":
        a = [[0] * m for _ in range(m)]
        for x, y in edges:
            a[x][y] = a[y][x] = 1
        return cls(tuple(tuple(r) for r in a))

    @classmethod
    def complete(cls, m: int) -> "LoopGraph":
        return cls(tuple(tuple(1 for _ in range(m)) for _ in range(m)))

    @property
    def size(self) -> int:
        return len(self.adj)

    def neighbors_in(self, v: int, S, semantics: str = "loop") -> int:
        return sum(1 for u in S if self.adj[v][u] or (semantics == "closed" and u == v))


def check_graph_lemma(g: LoopGraph, C, a, n: int, t: int, semantics: str = "loop") -> tuple[frozenset, bool]:
    """Return (D, bound_ok) for one instance; raise PreconditionError if the hypotheses fail."""
    a = Fraction(a)
    C = frozenset(C)
    m = g.size
    if semantics not in SEMANTICS:
        raise ValueError(f"unknown semantics {semantics!r}")
    if not n > 3 * t >= 0:
        raise PreconditionError("need n > 3t >= 0")
    if m != n - t:
        raise PreconditionError(f"need |V| = n - t = {n - t}, got {m}")
    if not 0 < a < 1:
        raise PreconditionError("need 0 < a < 1")
    if len(C) != n - 3 * t or not C <= set(range(m)):
        raise PreconditionError(f"need C to be {n - 3 * t} vertices of G")
    for r in range(m):
        for c in range(m):
            if g.adj[r][c] != g.adj[c][r]:
                raise PreconditionError("adjacency is not symmetric")
    for v in C:
        if g.neighbors_in(v, range(m), semantics) < n - 3 * t:
            raise PreconditionError(f"vertex {v} in C has a closed neighborhood smaller than n - 3t")
    need = a * (n - 3 * t)
    D = frozenset(v for v in range(m) if g.neighbors_in(v, C, semantics) >= need)
    return D, len(D) >= lemma_bound(n, t, a)


def valid_nt(max_vertices: int) -> list[tuple[int, int]]:
    """All (n, t) with n > 3t >= 0 and 1 <= n - t <= max_vertices."""
    out = []
    for t in range(0, max_vertices):
        for n in range(3 * t + 1, max_vertices + t + 1):
            if n - t >= 1:
                out.append((n, t))
    return out


def _all_graphs(m: int) -> np.ndarray:
    """Every loop-graph on m vertices as a (2^(m(m+1)/2), m, m) uint8 array."""
    pairs = [(i, j) for i in range(m) for j in range(i, m)]
    count = 1 << len(pairs)
    codes = np.arange(count, dtype=np.int64)
    adj = np.zeros((count, m, m), dtype=np.uint8)
    for bit, (i, j) in enumerate(pairs):
        col = ((codes >> bit) & 1).astype(np.uint8)
        adj[:, i, j] = col
        adj[:, j, i] = col
    return adj


@dataclass
class SuiteResult:
    instances: int = 0
    checked: int = 0
    violations: int = 0
    rejected: int = 0
    min_slack: Optional[Fraction] = None
    first_violation: Optional[tuple] = None

    def merge(self, other: "SuiteResult") -> None:
        self.instances += other.instances
        self.checked += other.checked
        self.violations += other.violations
        self.rejected += other.rejected
        if other.min_slack is not None and (self.min_slack is None or other.min_slack < self.min_slack):
            self.min_slack = other.min_slack
        if self.first_violation is None:
            self.first_violation = other.first_violation


def _check_batch(adj: np.ndarray, n: int, t: int, alphas, semantics: str, res: SuiteResult) -> None:
    m = n - t
    c_size = n - 3 * t
    if semantics == "closed":
        adj = adj | np.eye(m, dtype=np.uint8)[None, :, :]
    deg = adj.sum(axis=2, dtype=np.int16)
    for C in itertools.combinations(range(m), c_size):
        idx = list(C)
        ok = (deg[:, idx] >= c_size).all(axis=1)
        res.instances += len(adj) * len(alphas)
        res.rejected += int((~ok).sum()) * len(alphas)
        sub = adj[ok][:, :, idx].sum(axis=2, dtype=np.int16)  # neighbors in C per vertex
        for a in alphas:
            a = Fraction(a)
            # count >= a * c_size  <=>  count * den >= num * c_size
            inD = sub.astype(np.int64) * a.denominator >= a.numerator * c_size
            dsize = inD.sum(axis=1)
            bound = lemma_bound(n, t, a)
            # |D| >= bound  <=>  |D| * den >= num  for the rational bound
            bad = dsize * bound.denominator < bound.numerator
            res.checked += int(ok.sum())
            nbad = int(bad.sum())
            if len(dsize):
                slack = Fraction(int(dsize.min())) - bound
                if res.min_slack is None or slack < res.min_slack:
                    res.min_slack = slack
            if nbad:
                res.violations += nbad
                if res.first_violation is None:
                    g = int(np.flatnonzero(ok)[np.flatnonzero(bad)[0]])
                    res.first_violation = (n, t, str(a), semantics, C, g)


def exhaustive(max_vertices: int = 6, alphas=(Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)),
               semantics: Iterable[str] = SEMANTICS) -> dict:
    """Check the lemma on every loop-graph with at most ``max_vertices`` vertices,
    every valid C and every ``a``.  Returns a per-(n, t) breakdown and a total."""
    total = SuiteResult()
    per: dict = {}
    graphs: dict = {}
    for n, t in valid_nt(max_vertices):
        m = n - t
        if m not in graphs:
            graphs = {m: _all_graphs(m)}  # keep one size in memory at a time
        r = SuiteResult()
        for sem in semantics:
            _check_batch(graphs[m], n, t, alphas, sem, r)
        per[(n, t)] = r
        total.merge(r)
    return {"per": per, "total": total}


def sample(vertices: int, trials: int, seed=0, alphas=(Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))) -> SuiteResult:
    """Random instances above the exhaustive range.  Graphs are biased towards dense
    neighborhoods around C so that the hypotheses hold often."""
    rng = random.Random(f"{seed}/graph/{vertices}")
    res = SuiteResult()
    pairs = [(n, t) for n, t in valid_nt(vertices) if n - t == vertices]
    for _ in range(trials):
        n, t = rng.choice(pairs)
        m = n - t
        p = rng.random()
        edges = [(i, j) for i in range(m) for j in range(i, m) if rng.random() < p]
        g = LoopGraph.from_edges(m, edges)
        C = rng.sample(range(m), n - 3 * t)
        for sem in SEMANTICS:
            for a in alphas:
                res.instances += 1
                try:
                    D, ok = check_graph_lemma(g, C, a, n, t, sem)
                except PreconditionError:
                    res.rejected += 1
                    continue
                res.checked += 1
                slack = len(D) - lemma_bound(n, t, a)
                if res.min_slack is None or slack < res.min_slack:
                    res.min_slack = slack
                if not ok:
                    res.violations += 1
                    if res.first_violation is None:
                        res.first_violation = (n, t, str(a), sem, tuple(C), g)
    return res
