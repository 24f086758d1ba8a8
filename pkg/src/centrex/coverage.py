"""Group coverage of a target set, the uncovered-pair universe, and sampling from it.

A pair (s, t) with s, t outside X is covered when some shortest s-t path
passes through a member of X. With ``ds = d(s, .)`` and ``dt = d(., t)`` that
is ``min over x of ds[x] + dt[x] == ds[t]`` for a finite ``ds[t]``.

Pair accounting: for undirected graphs the default universe holds unordered
pairs, so coverage counts each pair once. Sample-size formulas are stated for
ordered pairs; :class:`CoverageState` exposes both counts.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from centrex.errors import SamplingError
from centrex.graph import UNREACHABLE, distance_rows, read_token_pairs, resolve_workers

log = logging.getLogger(__name__)

MATERIALIZE_LIMIT = 10**6
_CHUNK = 256


@dataclass(frozen=True)
class PairUniverse:
    """The pairs Z whose coverage is counted.

    ``mode`` is ``"all"`` (every pair outside X) or ``"explicit"`` (``pairs``
    is a ``(k, 2)`` array of node ids).
    """

    mode: str = "all"
    pairs: np.ndarray = None

    @classmethod
    def all(cls):
        return cls("all", None)

    @classmethod
    def explicit(cls, pairs):
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("explicit pair universe contains a pair (s, s)")
        arr.flags.writeable = False
        return cls("explicit", arr)

    def size(self, g, targets):
        """|Z| in the native convention (unordered pairs for undirected all-mode)."""
        if self.mode == "explicit":
            return len(self.pairs)
        r = g.n - len(set(targets))
        return r * (r - 1) if g.directed else r * (r - 1) // 2

    def ordered_factor(self, g):
        return 2 if (self.mode == "all" and not g.directed) else 1

    def __eq__(self, other):
        if not isinstance(other, PairUniverse):
            return NotImplemented
        if self.mode != other.mode:
            return False
        return self.mode == "all" or np.array_equal(self.pairs, other.pairs)

    def __hash__(self):
        return hash(self.mode)


ALL_PAIRS = PairUniverse.all()


def read_pair_file(path, g):
    with open(path, "rb") as fh:
        return PairUniverse.explicit((g.node(a), g.node(b)) for _, a, b in read_token_pairs(fh))


@dataclass(frozen=True)
class CoverageState:
    """Covered/uncovered counts over Z.

    ``covered + uncovered == total`` always. ``ordered_factor`` converts the
    native counts to ordered-pair counts (2 for undirected all-pairs mode).
    """

    covered: int
    uncovered: int
    total: int
    ordered_factor: int = 1
    flags: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def m_u(self):
        return self.uncovered

    @property
    def m_u_ordered(self):
        return self.uncovered * self.ordered_factor

    @property
    def covered_ordered(self):
        return self.covered * self.ordered_factor

    def as_dict(self):
        return {
            "covered": self.covered,
            "uncovered": self.uncovered,
            "total": self.total,
            "covered_ordered": self.covered_ordered,
            "uncovered_ordered": self.m_u_ordered,
        }


def _as_targets(targets):
    return np.array(sorted({int(x) for x in targets}), dtype=np.int64)


def _field(d):
    return d.dist if hasattr(d, "dist") else np.asarray(d)


def pair_covered(g, s, t, targets, ds, dt):
    """True iff X lies on at least one shortest s-t path.

    ``ds`` is d(s, .) and ``dt`` is d(., t) (a reverse BFS from t when the graph
    is directed). Unreachable pairs are never covered.
    """
    ds, dt = _field(ds), _field(dt)
    d_st = int(ds[t])
    if d_st >= UNREACHABLE:
        return False
    for x in targets:
        if x != s and x != t and int(ds[x]) + int(dt[x]) == d_st:
            return True
    return False


def _covered_block(rows, row_sources, targets, to_target, from_target):
    """Covered mask for a block of source rows against every node t.

    ``to_target[i, j]`` is d(row_sources[i], targets[j]) and ``from_target`` is
    the ``(|X|, n)`` array of d(x, .). Entries with t == s are false.
    """
    best = np.full(rows.shape, UNREACHABLE, dtype=np.int32)
    for j in range(len(targets)):
        np.minimum(best, to_target[:, j:j + 1] + from_target[j][None, :], out=best)
    mask = (rows < UNREACHABLE) & (best == rows)
    mask[np.arange(len(row_sources)), row_sources] = False
    return mask


def _outside(g, targets):
    inside = np.zeros(g.n, dtype=bool)
    inside[targets] = True
    return np.flatnonzero(~inside), inside


def group_coverage(g, targets, universe=ALL_PAIRS, workers=None):
    """Exact coverage state of ``targets`` over ``universe``."""
    targets = _as_targets(targets)
    total = universe.size(g, targets)
    factor = universe.ordered_factor(g)
    if total == 0 or targets.size == 0:
        return CoverageState(0, total, total, factor)
    from_target = distance_rows(g, targets, workers=1)
    if universe.mode == "explicit":
        flags = _explicit_flags(g, targets, from_target, universe.pairs)
        covered = int(flags.sum())
        return CoverageState(covered, total - covered, total, factor, flags)
    outside, inside = _outside(g, targets)

    def count(chunk):
        rows = distance_rows(g, chunk, workers=1)
        mask = _covered_block(rows, chunk, targets, rows[:, targets], from_target)
        mask[:, inside] = False
        return int(mask.sum())

    chunks = [outside[i:i + _CHUNK] for i in range(0, outside.size, _CHUNK)]
    workers = min(resolve_workers(workers), len(chunks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            covered = sum(pool.map(count, chunks))
    else:
        covered = sum(map(count, chunks))
    if not g.directed:
        assert covered % 2 == 0
        covered //= 2
    return CoverageState(covered, total - covered, total, factor)


def _explicit_flags(g, targets, from_target, pairs):
    flags = np.zeros(len(pairs), dtype=bool)
    if len(pairs) == 0:
        return flags
    sources, inverse = np.unique(pairs[:, 0], return_inverse=True)
    for start in range(0, sources.size, _CHUNK):
        chunk = sources[start:start + _CHUNK]
        rows = distance_rows(g, chunk, workers=1)
        sel = np.flatnonzero((inverse >= start) & (inverse < start + chunk.size))
        r = inverse[sel] - start
        t = pairs[sel, 1]
        d_st = rows[r, t]
        via = (rows[r][:, targets] + from_target[:, t].T).min(axis=1)
        flags[sel] = (d_st < UNREACHABLE) & (via == d_st)
    return flags


def uncovered_pairs(g, targets, universe=ALL_PAIRS, workers=None):
    """Enumerate M_u as a ``(m_u, 2)`` array in the universe's native convention.

    Undirected all-pairs mode lists each unordered pair once as ``s < t``.
    """
    targets = _as_targets(targets)
    if universe.mode == "explicit":
        state = group_coverage(g, targets, universe)
        return universe.pairs[~state.flags].copy()
    if targets.size == 0:
        raise ValueError("target set must be nonempty")
    from_target = distance_rows(g, targets, workers=1)
    outside, inside = _outside(g, targets)
    found = []
    for i in range(0, outside.size, _CHUNK):
        chunk = outside[i:i + _CHUNK]
        rows = distance_rows(g, chunk, workers=workers)
        unc = ~_covered_block(rows, chunk, targets, rows[:, targets], from_target)
        unc[:, inside] = False
        unc[np.arange(chunk.size), chunk] = False
        if not g.directed:
            unc &= np.arange(g.n)[None, :] > chunk[:, None]
        r, t = np.nonzero(unc)
        found.append(np.stack([chunk[r], t], axis=1))
    if not found:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(found).astype(np.int64)


@dataclass
class SampleSet:
    """Sampled uncovered pairs with their distance fields.

    ``ds[i]`` is d(s_i, .) and ``dt[i]`` is d(., t_i) on the graph state the
    fields were last refreshed against. ``covered`` flags only ever flip from
    false to true. ``m_u`` is in the universe's native convention; it is
    exact when ``m_u_exact`` and otherwise ``|Z|`` times the acceptance rate.
    """

    pairs: np.ndarray
    ds: np.ndarray
    dt: np.ndarray
    covered: np.ndarray
    m_u: float
    m_u_exact: bool
    ordered_factor: int = 1
    draws: int = 0
    rejections: int = 0
    source: str = "rejection"

    @property
    def q(self):
        return len(self.pairs)

    @property
    def d_st(self):
        return self.ds[np.arange(self.q), self.pairs[:, 1]]

    def refresh(self, g, rows=None, workers=None):
        """Recompute distance fields on ``g`` for ``rows`` (default: all unflagged)."""
        if rows is None:
            rows = np.flatnonzero(~self.covered)
        if rows.size:
            self.ds[rows] = distance_rows(g, self.pairs[rows, 0], workers=workers)
            self.dt[rows] = distance_rows(g, self.pairs[rows, 1], reverse=True, workers=workers)


def _draw_pairs(rng, g, outside, universe, size):
    if universe.mode == "explicit":
        idx = rng.integers(0, len(universe.pairs), size=size)
        return universe.pairs[idx]
    r = outside.size
    s = rng.integers(0, r, size=size)
    t = rng.integers(0, r - 1, size=size)
    t = t + (t >= s)
    return np.stack([outside[s], outside[t]], axis=1)


def _pairs_covered(pairs, ds, dt, targets):
    idx = np.arange(len(pairs))
    d_st = ds[idx, pairs[:, 1]]
    via = (ds[:, targets] + dt[:, targets]).min(axis=1)
    return (d_st < UNREACHABLE) & (via == d_st)


def sample_uncovered_pairs(g, targets, universe, q, rng, *, exhaustive=False,
                           rejection_cap=None, materialize_limit=MATERIALIZE_LIMIT,
                           workers=None):
    """Draw ``q`` pairs uniformly with replacement from M_u.

    Pairs are drawn uniformly from Z and rejected when covered. More than
    ``rejection_cap`` (default ``10 * n``) consecutive rejections switch to
    exact enumeration of M_u when ``|Z| <= materialize_limit``; otherwise a
    :class:`SamplingError` reports the estimated covered fraction.

    With ``exhaustive=True`` M_u is enumerated and every uncovered pair appears
    exactly once (``q`` is ignored).
    """
    targets = _as_targets(targets)
    if targets.size == 0:
        raise ValueError("target set must be nonempty")
    total = universe.size(g, targets)
    factor = universe.ordered_factor(g)
    if total == 0:
        raise SamplingError("pair universe is empty")
    if exhaustive:
        if total > materialize_limit:
            raise SamplingError(f"|Z| = {total} exceeds the materialization limit {materialize_limit}")
        pairs = uncovered_pairs(g, targets, universe, workers=workers)
        if len(pairs) == 0:
            raise SamplingError("no uncovered pairs: X already covers every pair in Z")
        return _build_sample(g, pairs, len(pairs), True, factor, 0, 0, "exhaustive", workers)
    if q < 1:
        raise ValueError("q must be >= 1")
    cap = 10 * g.n if rejection_cap is None else rejection_cap
    outside, _ = _outside(g, targets)
    accepted, acc_ds, acc_dt = [], [], []
    n_acc = draws = rejections = streak = 0
    while n_acc < q:
        batch = int(min(max(64, 2 * (q - n_acc)), 4096))
        cand = _draw_pairs(rng, g, outside, universe, batch)
        ds = distance_rows(g, cand[:, 0], workers=workers)
        dt = distance_rows(g, cand[:, 1], reverse=True, workers=workers)
        cov = _pairs_covered(cand, ds, dt, targets)
        keep = []
        for i in range(batch):
            draws += 1
            if cov[i]:
                rejections += 1
                streak += 1
                if streak > cap:
                    break
            else:
                streak = 0
                keep.append(i)
                n_acc += 1
                if n_acc == q:
                    break
        if keep:
            keep = np.asarray(keep)
            accepted.append(cand[keep])
            acc_ds.append(ds[keep])
            acc_dt.append(dt[keep])
        if streak > cap:
            return _fallback(g, targets, universe, q, rng, total, factor, draws, rejections,
                             materialize_limit, workers)
    pairs = np.concatenate(accepted)
    m_u = total * (draws - rejections) / draws
    sample = SampleSet(pairs, np.concatenate(acc_ds), np.concatenate(acc_dt),
                       np.zeros(q, dtype=bool), m_u, False, factor, draws, rejections)
    return sample


def _fallback(g, targets, universe, q, rng, total, factor, draws, rejections,
              materialize_limit, workers):
    covered_frac = rejections / draws
    if total > materialize_limit:
        raise SamplingError(
            f"rejection sampling stalled: estimated covered fraction {covered_frac:.6f} "
            f"after {draws} draws; |Z| = {total} is too large to enumerate")
    log.warning("rejection streak exceeded cap; enumerating M_u exactly (|Z| = %d)", total)
    pairs = uncovered_pairs(g, targets, universe, workers=workers)
    if len(pairs) == 0:
        raise SamplingError("no uncovered pairs: X already covers every pair in Z")
    pick = rng.integers(0, len(pairs), size=q)
    return _build_sample(g, pairs[pick], len(pairs), True, factor, draws, rejections,
                         "enumeration", workers)


def _build_sample(g, pairs, m_u, exact, factor, draws, rejections, source, workers):
    pairs = np.asarray(pairs, dtype=np.int64)
    ds = distance_rows(g, pairs[:, 0], workers=workers)
    dt = distance_rows(g, pairs[:, 1], reverse=True, workers=workers)
    return SampleSet(pairs, ds, dt, np.zeros(len(pairs), dtype=bool), m_u, exact, factor,
                     draws, rejections, source)
