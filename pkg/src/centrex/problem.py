"""Problem instances: target set, candidate edges, budget, and the selection report."""

import enum
from dataclasses import dataclass, field

from centrex.coverage import ALL_PAIRS, PairUniverse, group_coverage
from centrex.errors import ValidationError
from centrex.graph import with_edges


class Setting(str, enum.Enum):
    """Candidate-edge regime.

    S0: undirected, any absent edge. S1: undirected, every edge touches X.
    S3: directed, any absent edge. S4: directed, every edge touches X (either
    orientation).
    """

    S0 = "S0"
    S1 = "S1"
    S3 = "S3"
    S4 = "S4"

    @property
    def directed(self):
        return self in (Setting.S3, Setting.S4)

    @property
    def target_incident(self):
        return self in (Setting.S1, Setting.S4)

    @classmethod
    def parse(cls, value, directed=False):
        """Accept ``S1``, ``s1``, ``auto:S1``, ``auto-s1``; map S0/S1 to S3/S4 on directed graphs."""
        v = value.value if isinstance(value, cls) else str(value)
        v = v.lower().replace("auto:", "").replace("auto-", "").upper()
        setting = cls(v)
        if directed and setting is cls.S0:
            setting = cls.S3
        elif directed and setting is cls.S1:
            setting = cls.S4
        return setting


def build_candidates(g, targets, setting):
    """All absent edges allowed by ``setting``, sorted by endpoint ids.

    Under S1 each edge is written ``(x, v)`` with ``x`` in X.
    """
    setting = Setting.parse(setting, g.directed)
    if setting.directed != g.directed:
        raise ValueError(f"setting {setting.value} does not match graph directedness")
    X = sorted(set(targets))
    in_x = set(X)
    out = []
    if setting is Setting.S1:
        out = [(x, v) for x in X for v in range(g.n) if v not in in_x and not g.has_edge(x, v)]
    elif setting is Setting.S4:
        for u in range(g.n):
            for v in range(g.n):
                if u != v and (u in in_x or v in in_x) and not g.has_edge(u, v):
                    out.append((u, v))
    elif setting is Setting.S0:
        out = [(u, v) for u in range(g.n) for v in range(u + 1, g.n) if not g.has_edge(u, v)]
    else:
        out = [(u, v) for u in range(g.n) for v in range(g.n) if u != v and not g.has_edge(u, v)]
    out.sort()
    if not out:
        raise ValueError("no candidate edges")
    return out


@dataclass(frozen=True)
class ProblemInstance:
    graph: object
    targets: tuple
    candidates: tuple
    k: int
    setting: Setting = Setting.S1
    pairs: PairUniverse = ALL_PAIRS
    enforce_s2: bool = False

    @classmethod
    def build(cls, graph, targets, k, setting=Setting.S1, candidates=None,
              pairs=ALL_PAIRS, enforce_s2=False):
        setting = Setting.parse(setting, graph.directed)
        targets = tuple(sorted({int(x) for x in targets}))
        if candidates is None:
            candidates = build_candidates(graph, targets, setting)
        candidates = tuple((int(a), int(b)) for a, b in candidates)
        return cls(graph, targets, candidates, int(k), setting, pairs, enforce_s2)

    def with_k(self, k):
        return ProblemInstance(self.graph, self.targets, self.candidates, k, self.setting,
                               self.pairs, self.enforce_s2)

    def with_candidates(self, candidates, k=None):
        return ProblemInstance(self.graph, self.targets, tuple(candidates),
                               self.k if k is None else k, self.setting, self.pairs,
                               self.enforce_s2)


def validate(p):
    """Every invariant violation of ``p`` as a list of messages (empty if valid)."""
    g = p.graph
    errors = []
    in_x = set(p.targets)
    if not p.targets:
        errors.append("target set is empty")
    if any(not 0 <= x < g.n for x in p.targets):
        errors.append("target node outside graph")
    if len(in_x) >= g.n:
        errors.append("target set must be a proper subset of V")
    if p.setting.directed != g.directed:
        errors.append(f"setting {p.setting.value} does not match graph directedness")
    seen = set()
    for a, b in p.candidates:
        key = (a, b) if g.directed else (min(a, b), max(a, b))
        if not (0 <= a < g.n and 0 <= b < g.n):
            errors.append(f"candidate ({a}, {b}) references a node outside the graph")
            continue
        if a == b:
            errors.append(f"candidate ({a}, {b}) is a self-loop")
            continue
        if g.has_edge(a, b):
            errors.append(f"candidate present: ({a}, {b}) is already an edge")
        if key in seen:
            errors.append(f"duplicate candidate ({a}, {b})")
        seen.add(key)
        if p.setting.target_incident and a not in in_x and b not in in_x:
            errors.append(f"candidate ({a}, {b}) has no endpoint in the target set")
    if p.k < 1:
        errors.append("budget k must be at least 1")
    if p.k > len(p.candidates):
        errors.append(f"budget exceeds candidates: k={p.k} > |candidates|={len(p.candidates)}")
    if p.pairs.mode == "explicit":
        pairs = p.pairs.pairs
        if pairs.size and (pairs.min() < 0 or pairs.max() >= g.n):
            errors.append("pair universe references a node outside the graph")
        elif any(int(s) in in_x or int(t) in in_x for s, t in pairs):
            errors.append("pair universe contains a target node")
    return errors


def check(p):
    errors = validate(p)
    if errors:
        raise ValidationError(errors)
    return p


@dataclass
class SelectionReport:
    """Outcome of one selection run.

    ``coverage_after`` is always an exact recount on the final graph.
    ``gains`` are exact per-round gains for GES, ``(m_u / q) * hits`` estimates
    for BUS, and empty for the baselines (see ``gain_kind``).
    """

    algorithm: str
    selected: list
    gains: list
    gain_kind: str
    coverage_before: object
    coverage_after: object
    seed: int = None
    plan: dict = None
    timings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def gain(self):
        return self.coverage_after.covered - self.coverage_before.covered


def finish_report(p, algorithm, selected, gains, gain_kind, before, *, seed=None, plan=None,
                  timings=None, notes=None, details=None, workers=None):
    """Assemble a report, recounting coverage exactly on ``g + selected``."""
    final = with_edges(p.graph, selected)
    after = group_coverage(final, p.targets, p.pairs, workers=workers)
    return SelectionReport(algorithm, list(selected), list(gains), gain_kind, before, after,
                           seed=seed, plan=plan, timings=dict(timings or {}),
                           notes=list(notes or []), details=dict(details or {}))
