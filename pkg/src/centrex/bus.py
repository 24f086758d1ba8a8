"""Greedy edge selection on a sample of uncovered pairs, and its sample-size rules.

The sample is drawn once. Each round refreshes the distance fields of the
still-unflagged sampled pairs on the current graph, scores every remaining
candidate in O(1) per (candidate, pair), commits the best one, and flags the
pairs it covers.

Sample sizes use natural logarithms. ``m_u`` and any OPT bound passed to
:func:`sample_size_thm4` must be in the same pair convention; only their ratio
enters the formula.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from centrex.coverage import (SampleSet, _as_targets, _pairs_covered,  # noqa: F401
                              group_coverage, sample_uncovered_pairs)
from centrex.graph import UNREACHABLE, distance_rows, with_edges
from centrex.problem import check, finish_report

log = logging.getLogger(__name__)

LOG_BASE = "e"
_SCORE_CHUNK = 2048


def sample_size_cor3(l, k, gamma_size, epsilon):
    """``ceil(12 (l + k) ln|Gamma| / eps^2)``: sample size independent of OPT."""
    _check_sizing(l, k, gamma_size, epsilon)
    return math.ceil(12 * (l + k) * math.log(gamma_size) / epsilon**2)


def sample_size_thm4(m_u, l, k, gamma_size, epsilon, opt_bound):
    """``ceil(12 m_u (l + k) ln|Gamma| / (eps^2 OPT))`` with a lower bound standing in for OPT.

    A smaller bound gives a larger sample, so the guarantee is preserved.
    """
    _check_sizing(l, k, gamma_size, epsilon)
    if not 0 < opt_bound <= m_u:
        raise ValueError(f"opt_bound must lie in (0, m_u]; got {opt_bound} with m_u={m_u}")
    return math.ceil(12 * m_u * (l + k) * math.log(gamma_size) / (epsilon**2 * opt_bound))


def _check_sizing(l, k, gamma_size, epsilon):
    if gamma_size < 2:
        raise ValueError("sample sizing needs at least 2 candidate edges (log|Gamma| must be > 0)")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if l < 1 or int(l) != l:
        raise ValueError("confidence exponent l must be a positive integer")
    if k < 1:
        raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class SamplePlan:
    q: int
    formula: str  # "thm4", "cor3", "manual", "paper-cg" or "exhaustive"
    epsilon: float = None
    l: int = None
    k: int = None
    gamma_size: int = None
    m_u: float = None
    opt_bound: float = None
    log_base: str = LOG_BASE

    @classmethod
    def cor3(cls, l, k, gamma_size, epsilon):
        return cls(sample_size_cor3(l, k, gamma_size, epsilon), "cor3", epsilon, l, k, gamma_size)

    @classmethod
    def thm4(cls, m_u, l, k, gamma_size, epsilon, opt_bound):
        q = sample_size_thm4(m_u, l, k, gamma_size, epsilon, opt_bound)
        return cls(q, "thm4", epsilon, l, k, gamma_size, m_u, opt_bound)

    @classmethod
    def manual(cls, q):
        if q < 1:
            raise ValueError("q must be >= 1")
        return cls(int(q), "manual")

    @classmethod
    def paper_cg(cls, k):
        """256 samples per unit of budget, as in the published CG runs. Carries no guarantee."""
        return cls(256 * int(k), "paper-cg", k=int(k))

    @classmethod
    def exhaustive(cls):
        return cls(0, "exhaustive")

    def as_dict(self):
        return asdict(self)


def estimate_coverage(sample, m_u=None, flags=None):
    """``(m_u / q) * (# flagged pairs)``: the scaled sample estimate of newly covered pairs."""
    if sample.q == 0:
        raise ValueError("empty sample")
    m_u = sample.m_u if m_u is None else m_u
    flags = sample.covered if flags is None else flags
    return m_u / sample.q * int(np.count_nonzero(flags))


def estimate_gain(sample, g, edges, targets, m_u=None, workers=None):
    """f^q of an edge set: ``(m_u / q) * #(sampled pairs covered on g + edges)``.

    ``sample`` must have been drawn from M_u on ``g``; its fields are left untouched.
    """
    g1 = with_edges(g, edges)
    ds = distance_rows(g1, sample.pairs[:, 0], workers=workers)
    dt = distance_rows(g1, sample.pairs[:, 1], reverse=True, workers=workers)
    hit = _pairs_covered(sample.pairs, ds, dt, _as_targets(targets))
    return estimate_coverage(sample, m_u, hit)


def _newly_covered(ds, dt, d_st, a, b, directed):
    """Mask (pairs x candidates) of pairs whose new path through a-b is shortest.

    ``a`` and ``b`` are arrays of candidate endpoints; distances saturate at
    ``UNREACHABLE`` so a saturated length never counts.
    """
    length = ds[:, a] + 1 + dt[:, b]
    if not directed:
        length = np.minimum(length, ds[:, b] + 1 + dt[:, a])
    return (length < UNREACHABLE) & (length <= d_st[:, None])


def score_candidates(sample, edges, targets, setting, rows=None):
    """Sampled score of each edge: unflagged pairs it would newly cover.

    Outside the target-incident settings, edges with no endpoint in X score 0.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if rows is None:
        rows = np.flatnonzero(~sample.covered)
    scores = np.zeros(len(edges), dtype=np.int64)
    if rows.size == 0 or len(edges) == 0:
        return scores
    ds, dt = sample.ds[rows], sample.dt[rows]
    d_st = ds[np.arange(rows.size), sample.pairs[rows, 1]]
    directed = setting.directed
    eligible = np.ones(len(edges), dtype=bool)
    if not setting.target_incident:
        in_x = np.zeros(ds.shape[1], dtype=bool)
        in_x[list(targets)] = True
        eligible = in_x[edges[:, 0]] | in_x[edges[:, 1]]
    for start in range(0, len(edges), _SCORE_CHUNK):
        part = edges[start:start + _SCORE_CHUNK]
        mask = _newly_covered(ds, dt, d_st, part[:, 0], part[:, 1], directed)
        scores[start:start + len(part)] = mask.sum(axis=0)
    scores[~eligible] = 0
    return scores


def score_candidate(sample, edge, targets, setting):
    return int(score_candidates(sample, [edge], targets, setting)[0])


def run_bus(p, plan, rng, *, seed=None, workers=None, sample=None):
    """Sampling-based greedy selection.

    ``plan.formula == "exhaustive"`` enumerates M_u and uses every uncovered
    pair once, which reproduces the exact greedy choices under S1.
    """
    check(p)
    g0 = p.graph
    notes = []
    timings = {}
    t0 = time.perf_counter()
    before = group_coverage(g0, p.targets, p.pairs, workers=workers)
    timings["initial_coverage"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if sample is None:
        exhaustive = plan.formula == "exhaustive"
        sample = sample_uncovered_pairs(g0, p.targets, p.pairs, max(plan.q, 1), rng,
                                        exhaustive=exhaustive, workers=workers)
    m_u_estimate = None if sample.m_u_exact else sample.m_u
    if not sample.m_u_exact and before.uncovered:
        # the exact initial recount is needed for the report anyway
        sample.m_u = before.uncovered
        sample.m_u_exact = True
    timings["sampling"] = time.perf_counter() - t0
    if not p.setting.target_incident:
        notes.append("heuristic: candidates without an endpoint in X are scored 0 by the sampler")

    g = g0
    cand = np.asarray(p.candidates, dtype=np.int64)
    remaining = np.ones(len(cand), dtype=bool)
    selected, gains, hits, estimates = [], [], [], []
    t_bfs = t_score = 0.0
    first = True
    for _ in range(p.k):
        if not remaining.any():
            break
        rows = np.flatnonzero(~sample.covered)
        t = time.perf_counter()
        if not first:
            sample.refresh(g, rows, workers=workers)
        first = False
        t_bfs += time.perf_counter() - t
        t = time.perf_counter()
        idx = np.flatnonzero(remaining)
        scores = score_candidates(sample, cand[idx], p.targets, p.setting, rows)
        best = int(np.argmax(scores))
        i = int(idx[best])
        a, b = cand[i]
        if rows.size:
            d_st = sample.ds[rows, sample.pairs[rows, 1]]
            hit = _newly_covered(sample.ds[rows], sample.dt[rows], d_st,
                                 np.array([a]), np.array([b]), p.setting.directed)[:, 0]
            if p.setting.target_incident or a in p.targets or b in p.targets:
                sample.covered[rows[hit]] = True
        t_score += time.perf_counter() - t
        remaining[i] = False
        selected.append((int(a), int(b)))
        hits.append(int(scores[best]))
        gains.append(sample.m_u / sample.q * int(scores[best]))
        estimates.append(estimate_coverage(sample))
        g = with_edges(g, [(int(a), int(b))])
    timings["bfs"] = t_bfs
    timings["scoring"] = t_score

    plan_info = plan.as_dict()
    plan_info.update(q=sample.q, m_u=sample.m_u, m_u_exact=bool(sample.m_u_exact),
                     m_u_ordered=sample.m_u * sample.ordered_factor, sample_source=sample.source,
                     m_u_estimate=m_u_estimate, draws=sample.draws,
                     rejections=sample.rejections)
    if plan.formula != "exhaustive" and plan.q and sample.q != plan.q:
        notes.append(f"sample size clamped from {plan.q} to {sample.q}")
    t0 = time.perf_counter()
    report = finish_report(p, "bus", selected, gains, "sampled", before, seed=seed,
                           plan=plan_info, timings=timings, notes=notes,
                           details={"estimated_gain": estimates, "sample_hits": hits},
                           workers=workers)
    report.timings["final_eval"] = time.perf_counter() - t0
    return report
