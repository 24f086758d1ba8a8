"""Brute-force ground truth for small instances.

Coverage here is computed by building the shortest-path DAG of each pair from
BFS parent layers and intersecting its interior with X. It deliberately uses
none of the distance predicates in :mod:`centrex.coverage`.
"""

import itertools
import math
from dataclasses import dataclass

from centrex.errors import GuardError
from centrex.graph import Graph, with_edges
from centrex.problem import ProblemInstance, Setting, build_candidates

DAG_MAX_NODES = 200
SUBSET_LIMIT = 10**6
CERTIFY_MAX_CANDIDATES = 12


def _parent_layers(adj, s, n):
    dist = [-1] * n
    preds = [[] for _ in range(n)]
    dist[s] = 0
    frontier = [s]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
                if dist[v] == dist[u] + 1:
                    preds[v].append(u)
        frontier = nxt
    return dist, preds


def _dag_nodes(preds, t):
    """Every node on some shortest path ending at ``t`` (walks parent links back)."""
    seen = {t}
    stack = [t]
    while stack:
        for w in preds[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _pair_list(g, targets, universe):
    if universe is not None and universe.mode == "explicit":
        return [(int(s), int(t)) for s, t in universe.pairs]
    rest = [v for v in range(g.n) if v not in targets]
    if g.directed:
        return [(s, t) for s in rest for t in rest if s != t]
    return [(s, t) for s in rest for t in rest if s < t]


def covered_pairs(g, targets, universe=None):
    """Set of pairs in Z whose shortest-path DAG has an interior node in X."""
    if g.n > DAG_MAX_NODES:
        raise GuardError(f"DAG coverage is limited to n <= {DAG_MAX_NODES}; got n={g.n}")
    targets = set(targets)
    by_source = {}
    for s, t in _pair_list(g, targets, universe):
        by_source.setdefault(s, []).append(t)
    out = set()
    for s, ts in by_source.items():
        dist, preds = _parent_layers(g.adjacency, s, g.n)
        for t in ts:
            if dist[t] <= 0:
                continue
            inner = _dag_nodes(preds, t)
            inner.discard(s)
            inner.discard(t)
            if inner & targets:
                out.add((s, t))
    return out


def dag_coverage(g, targets, universe=None):
    """Group coverage by explicit shortest-path DAG enumeration."""
    return len(covered_pairs(g, targets, universe))


def _subset_count(m, k):
    return sum(math.comb(m, j) for j in range(min(k, m) + 1))


def brute_force_opt(p, limit=SUBSET_LIMIT):
    """Best coverage gain over all candidate subsets of size <= k.

    Returns ``(subset, gain)``; among ties the lexicographically first tuple of
    candidate indices wins, so an all-zero instance returns the empty subset.
    """
    m = len(p.candidates)
    if _subset_count(m, p.k) > limit:
        raise GuardError(f"{_subset_count(m, p.k)} subsets exceed the limit of {limit}")
    base = dag_coverage(p.graph, p.targets, p.pairs)
    subsets = sorted(c for j in range(min(p.k, m) + 1) for c in itertools.combinations(range(m), j))
    best, best_gain = (), None
    for idx in subsets:
        edges = [p.candidates[i] for i in idx]
        gain = dag_coverage(with_edges(p.graph, edges), p.targets, p.pairs) - base
        if best_gain is None or gain > best_gain:
            best, best_gain = idx, gain
    return tuple(p.candidates[i] for i in best), best_gain


def _edge_key(u, v, directed):
    return (u, v) if directed or u < v else (v, u)


def _multi_edge_x_path(g, added, targets, s, t):
    """True if some shortest s-t path through X uses two or more added edges."""
    dist, preds = _parent_layers(g.adjacency, s, g.n)
    if dist[t] <= 0:
        return False
    nodes = sorted(_dag_nodes(preds, t), key=lambda v: dist[v])
    states = {s: {(0, False)}}
    for v in nodes:
        if v == s:
            continue
        acc = set()
        inside = v in targets and v != t
        for u in preds[v]:
            step = 1 if _edge_key(u, v, g.directed) in added else 0
            for c, through in states.get(u, ()):
                acc.add((min(c + step, 2), through or inside))
        states[v] = acc
    return (2, True) in states.get(t, set())


class _S2Checker:
    def __init__(self, p):
        self.p = p
        self.targets = set(p.targets)
        self.base = covered_pairs(p.graph, p.targets, p.pairs)
        self._single = {}

    def single(self, e):
        if e not in self._single:
            g1 = with_edges(self.p.graph, [e])
            self._single[e] = covered_pairs(g1, self.p.targets, self.p.pairs) - self.base
        return self._single[e]

    def check(self, subset):
        subset = [tuple(e) for e in subset]
        if not subset:
            return True
        g = self.p.graph
        g1 = with_edges(g, subset)
        newly = covered_pairs(g1, self.p.targets, self.p.pairs) - self.base
        added = {_edge_key(u, v, g.directed) for u, v in subset if not g.has_edge(u, v)}
        for pair in newly:
            if sum(pair in self.single(e) for e in subset) != 1:
                return False
            if _multi_edge_x_path(g1, added, self.targets, *pair):
                return False
        return True


def certify_s2(p, subset):
    """Whether every pair newly covered by ``subset`` owes it to exactly one edge.

    Each newly covered pair must be covered by exactly one edge of ``subset``
    when that edge is added alone, and no shortest X-path in ``g + subset`` may
    use two added edges.
    """
    if p.graph.n > DAG_MAX_NODES:
        raise GuardError(f"S2 certification is limited to n <= {DAG_MAX_NODES}")
    return _S2Checker(p).check(subset)


def certify_instance_s2(p):
    """:func:`certify_s2` over every nonempty subset of the candidate set."""
    m = len(p.candidates)
    if m > CERTIFY_MAX_CANDIDATES or p.graph.n > DAG_MAX_NODES:
        raise GuardError(f"instance certification needs |candidates| <= {CERTIFY_MAX_CANDIDATES}")
    checker = _S2Checker(p)
    for j in range(1, m + 1):
        for subset in itertools.combinations(p.candidates, j):
            if not checker.check(subset):
                return False
    return True


@dataclass
class Witness:
    """A violation of diminishing returns: f(A+e)-f(A) < f(B+e)-f(B) with A a subset of B."""

    instance: ProblemInstance
    smaller: tuple
    larger: tuple
    edge: tuple
    values: dict
    tries: int


def _random_graph(rng, n, directed):
    density = rng.uniform(0.15, 0.6)
    if directed:
        pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    else:
        pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < density
    return Graph(n, [e for e, k in zip(pairs, keep) if k], directed=directed)


def find_non_submodular_witness(setting, rng, max_tries=10**5, *, require_s2=False, max_nodes=8):
    """Random search for a diminishing-returns violation on graphs with n <= ``max_nodes``.

    With ``require_s2`` a violation only counts when the instance built from
    ``larger + {edge}`` passes :func:`certify_instance_s2`; by the
    submodularity theorem none should ever be found.
    """
    setting = Setting(setting)
    directed = setting.directed
    for attempt in range(1, max_tries + 1):
        n = int(rng.integers(3, max_nodes + 1))
        g = _random_graph(rng, n, directed)
        size_x = 1 if n < 5 else int(rng.integers(1, 3))
        targets = sorted(int(x) for x in rng.choice(n, size=size_x, replace=False))
        try:
            cands = build_candidates(g, targets, setting)
        except ValueError:
            continue
        if len(cands) < 2:
            continue
        order = rng.permutation(len(cands))
        e = cands[order[0]]
        rest = [cands[i] for i in order[1:]]
        nb = int(rng.integers(1, min(3, len(rest)) + 1))
        larger = rest[:nb]
        na = int(rng.integers(0, nb))
        smaller = larger[:na]
        memo = {}

        def f(edges):
            key = frozenset(edges)
            if key not in memo:
                memo[key] = dag_coverage(with_edges(g, edges), targets)
            return memo[key]

        lhs = f(smaller + [e]) - f(smaller)
        rhs = f(larger + [e]) - f(larger)
        if lhs >= rhs:
            continue
        inst = ProblemInstance.build(g, targets, len(larger) + 1, setting,
                                     candidates=larger + [e])
        if require_s2 and not certify_instance_s2(inst):
            continue
        values = {"f_smaller": f(smaller), "f_smaller_plus_e": f(smaller + [e]),
                  "f_larger": f(larger), "f_larger_plus_e": f(larger + [e])}
        return Witness(inst, tuple(smaller), tuple(larger), tuple(e), values, attempt)
    return None
