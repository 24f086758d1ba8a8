"""Comparison strategies: High-Degree, High-ACC and Random edge picks.

High-Degree and High-ACC rank nodes outside X and connect each ranked node to
a target, cycling through X in id order. A node is skipped when no target gives
an edge that is in the candidate set and not yet chosen.
"""

import logging

import numpy as np

from centrex.coverage import ALL_PAIRS, _draw_pairs, _outside, group_coverage
from centrex.graph import UNREACHABLE, distance_rows
from centrex.problem import check, finish_report

log = logging.getLogger(__name__)

PAIRING_NOTE = "node-to-target pairing: round-robin over targets sorted by id"


def _require_incident(p):
    if not p.setting.target_incident:
        raise ValueError(f"this baseline needs an X-incident setting (S1/S4), got {p.setting.value}")


def _pair_nodes(p, ranked):
    """Edges from ranked nodes to targets, round-robin, until k are chosen."""
    allowed = set(p.candidates)
    if not p.graph.directed:
        allowed |= {(b, a) for a, b in p.candidates}
    X = sorted(p.targets)
    chosen, taken = [], set()
    turn = 0
    for v in ranked:
        if len(chosen) == p.k:
            break
        for step in range(len(X)):
            x = X[(turn + step) % len(X)]
            options = [(x, v), (v, x)] if p.graph.directed else [(x, v)]
            edge = next((e for e in options if e in allowed and e not in taken), None)
            if edge is not None:
                chosen.append(edge)
                taken.add(edge)
                if not p.graph.directed:
                    taken.add((edge[1], edge[0]))
                turn = (turn + step + 1) % len(X)
                break
    return chosen


def _report(p, algorithm, selected, workers, notes, seed=None, details=None):
    if len(selected) < p.k:
        msg = f"only {len(selected)} feasible edges for k={p.k}"
        log.warning(msg)
        notes = notes + [msg]
    before = group_coverage(p.graph, p.targets, p.pairs, workers=workers)
    return finish_report(p, algorithm, selected, [], "final-only", before, seed=seed,
                         notes=notes, details=details, workers=workers)


def high_degree(p, rng=None, *, seed=None, workers=None):
    """Connect X to the highest-degree nodes (ties to the lower id)."""
    check(p)
    _require_incident(p)
    g = p.graph
    in_x = set(p.targets)
    ranked = sorted((v for v in range(g.n) if v not in in_x), key=lambda v: (-g.degree(v), v))
    selected = _pair_nodes(p, ranked)
    return _report(p, "high-degree", selected, workers, [PAIRING_NOTE], seed)


def _on_path(pairs, ds, dt):
    """``(q, n)`` mask: node v lies on a shortest s-t path, strictly inside it."""
    q = len(pairs)
    idx = np.arange(q)
    d_st = ds[idx, pairs[:, 1]]
    mask = (ds + dt == d_st[:, None]) & (d_st < UNREACHABLE)[:, None]
    mask[idx, pairs[:, 0]] = False
    mask[idx, pairs[:, 1]] = False
    return mask


def adaptive_ranking(g, targets, pairs, ds, dt):
    """Nodes outside X in adaptive greedy order over the sampled pairs.

    Each pick maximizes the number of sampled pairs on whose shortest paths it
    lies and that no earlier pick already covers; ties go to the lower id. The
    node set starts empty, so the first pick is the plain coverage argmax.
    Yields ``(node, newly_covered)``.
    """
    mask = _on_path(pairs, ds, dt)
    X = sorted(targets)
    flagged = np.zeros(len(pairs), dtype=bool)
    free = np.ones(g.n, dtype=bool)
    free[X] = False
    while free.any():
        counts = mask[~flagged].sum(axis=0)
        counts[~free] = -1
        v = int(np.argmax(counts))
        free[v] = False
        flagged |= mask[:, v]
        yield v, int(counts[v])


def high_acc(p, q, rng, *, seed=None, workers=None):
    """Connect X to the nodes picked by sampled adaptive coverage greedy.

    The ``q`` pairs are drawn uniformly from the whole pair universe, covered or not.
    """
    check(p)
    _require_incident(p)
    if q < 1:
        raise ValueError("q must be >= 1")
    g = p.graph
    outside, _ = _outside(g, np.array(sorted(p.targets), dtype=np.int64))
    pairs = _draw_pairs(rng, g, outside, p.pairs or ALL_PAIRS, int(q))
    ds = distance_rows(g, pairs[:, 0], workers=workers)
    dt = distance_rows(g, pairs[:, 1], reverse=True, workers=workers)
    picks = []

    def ranked():
        for v, c in adaptive_ranking(g, p.targets, pairs, ds, dt):
            picks.append((v, c))
            yield v

    selected = _pair_nodes(p, ranked())
    details = {"picked_nodes": [v for v, _ in picks], "node_gains": [c for _, c in picks],
               "q": int(q)}
    return _report(p, "high-acc", selected, workers, [PAIRING_NOTE], seed, details)


def random_edges(p, rng, *, seed=None, workers=None):
    """``k`` distinct candidates drawn uniformly without replacement."""
    check(p)
    idx = rng.choice(len(p.candidates), size=p.k, replace=False)
    selected = [p.candidates[int(i)] for i in idx]
    return _report(p, "random", selected, workers, [], seed)
