"""Side metrics tracked alongside coverage: average distance, group closeness, cascade reach."""

from dataclasses import asdict, dataclass

import numpy as np

from centrex import _kernels
from centrex.graph import UNREACHABLE, distance_rows

IC_BLOCK = 1024


@dataclass(frozen=True)
class MetricValue:
    value: float
    pairs: int = 0
    unreachable: int = 0

    def as_dict(self):
        return asdict(self)


def avg_distance(g, sample_pairs="exhaustive", rng=None, workers=None):
    """Mean hop distance over reachable ordered pairs s != t.

    ``sample_pairs`` is ``"exhaustive"`` or a number of uniformly drawn pairs.
    Unreachable pairs are left out of the mean and counted separately.
    """
    if g.n < 2:
        raise ValueError("average distance needs at least 2 nodes")
    if sample_pairs == "exhaustive":
        D = distance_rows(g, np.arange(g.n), workers=workers)
        np.fill_diagonal(D, UNREACHABLE)
        off_diag = g.n * (g.n - 1)
        d = D[D < UNREACHABLE]
        unreachable = off_diag - d.size
    else:
        if rng is None:
            raise ValueError("sampled average distance needs an rng")
        size = int(sample_pairs)
        s = rng.integers(0, g.n, size=size)
        t = rng.integers(0, g.n - 1, size=size)
        t = t + (t >= s)
        sources, inverse = np.unique(s, return_inverse=True)
        rows = distance_rows(g, sources, workers=workers)
        d_all = rows[inverse, t]
        d = d_all[d_all < UNREACHABLE]
        unreachable = size - d.size
    mean = float(d.mean()) if d.size else float("nan")
    return MetricValue(mean, int(d.size), int(unreachable))


def closeness(g, targets, workers=None):
    """Group closeness of X: reachable count over the summed distances d(X, v), v outside X.

    With every node reachable this is ``|V \\ X| / sum d(X, v)``.
    """
    X = sorted({int(x) for x in targets})
    if not X:
        raise ValueError("closeness needs a nonempty target set")
    d = distance_rows(g, X, workers=workers).min(axis=0)
    outside = np.ones(g.n, dtype=bool)
    outside[X] = False
    d = d[outside]
    reach = d[d < UNREACHABLE]
    total = int(reach.sum())
    value = reach.size / total if total else 0.0
    return MetricValue(float(value), int(reach.size), int(d.size - reach.size))


def ic_influence(g, targets, p, trials, rng):
    """Monte Carlo mean size of the independent-cascade activation set seeded at X.

    Every arc is live with probability ``p``. Trials run in fixed blocks of
    ``IC_BLOCK``, each with its own generator spawned from ``rng``, so the
    result depends only on the seed.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seeds = np.array(sorted({int(x) for x in targets}), dtype=np.int64)
    indptr, indices = g.csr
    arcs = indices.size
    blocks = -(-trials // IC_BLOCK)
    children = np.random.SeedSequence(int(rng.integers(2**63))).spawn(blocks)
    total = 0
    for b, child in enumerate(children):
        size = min(IC_BLOCK, trials - b * IC_BLOCK)
        live = np.random.default_rng(child).random((size, arcs)) < p
        out = np.empty(size, dtype=np.int64)
        _kernels.cascade_sizes(indptr, indices, seeds, live, out)
        total += int(out.sum())
    return total / trials


def reachable_from(g, targets):
    """Number of nodes outside X reachable from X."""
    X = sorted({int(x) for x in targets})
    d = distance_rows(g, X).min(axis=0)
    d[X] = UNREACHABLE
    return int(np.count_nonzero(d < UNREACHABLE))


def percent_improvement(before, after, lower_is_better=False):
    """``100 (after - before) / before``, negated when a decrease is the improvement."""
    if before == 0:
        return float("nan")
    change = 100.0 * (after - before) / before
    return -change if lower_is_better else change


def metric_block(g_before, g_after, targets, rng, *, distance_pairs="exhaustive",
                 ic_p=0.1, ic_trials=1000, workers=None):
    """Before/after values and percentage improvements for the report."""
    out = {}
    pair_seed = int(rng.integers(2**63))
    ic_seed = int(rng.integers(2**63))
    for name, fn, lower in (
        ("avg_distance",
         lambda g: avg_distance(g, distance_pairs, np.random.default_rng(pair_seed), workers).value,
         True),
        ("closeness", lambda g: closeness(g, targets, workers).value, False),
        ("ic_influence",
         lambda g: ic_influence(g, targets, ic_p, ic_trials, np.random.default_rng(ic_seed)),
         False),
    ):
        b, a = fn(g_before), fn(g_after)
        out[name] = {"before": b, "after": a, "improvement_pct": percent_improvement(b, a, lower)}
    out["ic_p"] = ic_p
    out["ic_trials"] = ic_trials
    out["distance_pairs"] = distance_pairs
    return out
