"""Immutable graphs over dense node ids, BFS distances, edge addition by copy.

Node ids are always ``0..n-1``. External names ("tokens") read from an edge
list are kept in ``Graph.tokens`` so reports can translate ids back.
"""

import io
import logging
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from centrex import _kernels
from centrex.errors import EdgeListError

log = logging.getLogger(__name__)

#: Distance assigned to unreachable nodes. Larger than any hop count, and small
#: enough that ``UNREACHABLE + 1 + UNREACHABLE`` still fits in int32.
UNREACHABLE = 1 << 29
DIST_DTYPE = np.int32


def sat_add(*terms):
    """Add distance arrays/scalars, saturating at ``UNREACHABLE``.

    Operands must each be ``<= UNREACHABLE``; at most three operands keep the
    intermediate sum inside int32.
    """
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return np.minimum(total, UNREACHABLE)


def resolve_workers(workers=None):
    """Worker count: explicit value, else ``$CENTREX_THREADS``, else CPU count."""
    if workers is None:
        env = os.environ.get("CENTREX_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def _normalize(u, v, directed):
    if directed or u < v:
        return (u, v)
    return (v, u)


class Graph:
    """Unweighted simple graph, directed or undirected.

    Instances are treated as immutable; use :func:`with_edges` to derive a new
    graph. Adjacency lists are sorted by neighbour id.
    """

    __slots__ = ("n", "directed", "adjacency", "reverse_adjacency", "edge_set",
                 "tokens", "meta", "__dict__")

    def __init__(self, n, edges, directed=False, tokens=None, meta=None):
        if n <= 0:
            raise ValueError("graph must have at least one node")
        self.n = int(n)
        self.directed = bool(directed)
        edge_set = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
            edge_set.add(_normalize(u, v, directed))
        self.edge_set = frozenset(edge_set)
        out = [[] for _ in range(n)]
        rev = [[] for _ in range(n)] if directed else None
        for u, v in self.edge_set:
            out[u].append(v)
            if directed:
                rev[v].append(u)
            else:
                out[v].append(u)
        self.adjacency = tuple(tuple(sorted(a)) for a in out)
        self.reverse_adjacency = tuple(tuple(sorted(a)) for a in rev) if directed else None
        if tokens is not None:
            tokens = tuple(str(t) for t in tokens)
            if len(tokens) != n:
                raise ValueError("token table length must equal node count")
        self.tokens = tokens
        self.meta = dict(meta or {})

    @property
    def m(self):
        return len(self.edge_set)

    def has_edge(self, u, v):
        return _normalize(u, v, self.directed) in self.edge_set

    def degree(self, v):
        if self.directed:
            return len(self.adjacency[v]) + len(self.reverse_adjacency[v])
        return len(self.adjacency[v])

    def label(self, v):
        return self.tokens[v] if self.tokens is not None else str(v)

    @cached_property
    def _index(self):
        if self.tokens is None:
            return {str(i): i for i in range(self.n)}
        return {t: i for i, t in enumerate(self.tokens)}

    def node(self, token):
        """Dense id of an external token (raises KeyError if unknown)."""
        try:
            return self._index[str(token)]
        except KeyError:
            raise KeyError(f"unknown node {token!r}") from None

    def edges(self):
        """Edges in sorted order."""
        return sorted(self.edge_set)

    @cached_property
    def csr(self):
        return _csr(self.adjacency)

    @cached_property
    def reverse_csr(self):
        return _csr(self.reverse_adjacency if self.directed else self.adjacency)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n, self.directed, self.edge_set) == (other.n, other.directed, other.edge_set)

    def __hash__(self):
        return hash((self.n, self.directed, self.edge_set))

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, m={self.m}, {kind})"


def _csr(adjacency):
    indptr = np.zeros(len(adjacency) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in adjacency])
    indices = np.fromiter((v for a in adjacency for v in a), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


@dataclass(frozen=True)
class DistanceField:
    """Hop distances from ``source`` (or to it, when ``reverse``)."""

    source: int
    dist: np.ndarray
    reverse: bool = False

    def __getitem__(self, v):
        return int(self.dist[v])


def _lines(source):
    if isinstance(source, bytes):
        source = source.decode()
    if isinstance(source, str):
        source = io.StringIO(source)
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode()
        yield lineno, raw


def read_token_pairs(source):
    """Yield ``(lineno, tok_a, tok_b)`` from whitespace-separated text.

    Lines starting with ``#`` and blank lines are skipped; extra tokens after
    the first two (weights, timestamps) are ignored.
    """
    for lineno, raw in _lines(source):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise EdgeListError(f"expected two endpoint tokens, got {line!r}", line=lineno)
        yield lineno, parts[0], parts[1]


def load_edge_list(source, directed=False):
    """Parse an edge list into a :class:`Graph`.

    ``source`` may be bytes, a string, or an open (text or binary) file.
    Tokens get dense ids in first-seen order. Duplicate edges and self-loops
    are dropped; their counts land in ``graph.meta``.
    """
    ids = {}
    tokens = []
    edges = set()
    dup = loops = 0
    for _, a, b in read_token_pairs(source):
        for tok in (a, b):
            if tok not in ids:
                ids[tok] = len(tokens)
                tokens.append(tok)
        u, v = ids[a], ids[b]
        if u == v:
            loops += 1
            continue
        key = _normalize(u, v, directed)
        if key in edges:
            dup += 1
            continue
        edges.add(key)
    if not tokens:
        raise EdgeListError("edge list contains no edges")
    if dup or loops:
        log.info("edge list: dropped %d duplicate edges and %d self-loops", dup, loops)
    return Graph(len(tokens), edges, directed=directed, tokens=tokens,
                 meta={"duplicates_dropped": dup, "self_loops_dropped": loops})


def read_edge_list(path, directed=False):
    with open(path, "rb") as fh:
        return load_edge_list(fh, directed=directed)


def from_networkx(nxg, directed=None):
    """Convert a networkx graph with integer-like nodes ``0..n-1``."""
    nodes = sorted(nxg.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    if directed is None:
        directed = nxg.is_directed()
    edges = [(index[u], index[v]) for u, v in nxg.edges() if u != v]
    return Graph(len(nodes), edges, directed=directed, tokens=[str(v) for v in nodes])


def with_edges(g, added):
    """Return a new graph with ``added`` edges; ``g`` is left unchanged."""
    added = [(int(u), int(v)) for u, v in added]
    for u, v in added:
        if u == v:
            raise ValueError(f"cannot add self-loop on node {u}")
    if all(g.has_edge(u, v) for u, v in added):
        return g
    return Graph(g.n, list(g.edge_set) + added, directed=g.directed, tokens=g.tokens, meta=g.meta)


def bfs(g, source, reverse=False):
    """Single-source BFS. With ``reverse`` on a directed graph, gives d(v, source)."""
    if not 0 <= source < g.n:
        raise ValueError(f"source {source} outside 0..{g.n - 1}")
    adj = g.reverse_adjacency if (reverse and g.directed) else g.adjacency
    dist = np.full(g.n, UNREACHABLE, dtype=DIST_DTYPE)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if dist[v] == UNREACHABLE:
                dist[v] = du
                queue.append(v)
    dist.flags.writeable = False
    return DistanceField(source, dist, reverse)


def distance_rows(g, sources, reverse=False, workers=None):
    """BFS from many sources at once; returns a ``(len(sources), n)`` int32 array.

    Row ``i`` equals ``bfs(g, sources[i], reverse).dist``. Work is split into
    contiguous chunks across threads; the output does not depend on the split.
    """
    sources = np.asarray(sources, dtype=np.int64).reshape(-1)
    out = np.empty((sources.size, g.n), dtype=DIST_DTYPE)
    if sources.size == 0:
        return out
    indptr, indices = g.reverse_csr if reverse else g.csr
    workers = min(resolve_workers(workers), max(1, sources.size // 64))
    if workers == 1:
        _kernels.bfs_rows(indptr, indices, sources, out)
        return out
    bounds = np.linspace(0, sources.size, workers + 1).astype(int)
    with ThreadPoolExecutor(workers) as pool:
        list(pool.map(lambda i: _kernels.bfs_rows(indptr, indices, sources[bounds[i]:bounds[i + 1]],
                                                  out[bounds[i]:bounds[i + 1]]), range(workers)))
    return out


def all_pairs_distances(g, workers=None):
    return distance_rows(g, np.arange(g.n), workers=workers)
