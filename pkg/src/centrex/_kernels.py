"""Compiled inner loops. Kept tiny; everything else is plain numpy."""

import numba
import numpy as np

# Must match centrex.graph.UNREACHABLE.
_UNREACHABLE = np.int32(1 << 29)


@numba.njit(cache=True, nogil=True)
def bfs_rows(indptr, indices, sources, out):
    n = indptr.shape[0] - 1
    queue = np.empty(n, np.int64)
    for r in range(sources.shape[0]):
        row = out[r]
        row[:] = _UNREACHABLE
        s = sources[r]
        row[s] = 0
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            du = row[u] + 1
            for j in range(indptr[u], indptr[u + 1]):
                v = indices[j]
                if row[v] == _UNREACHABLE:
                    row[v] = du
                    queue[tail] = v
                    tail += 1


@numba.njit(cache=True, nogil=True)
def cascade_sizes(indptr, indices, seeds, live, out):
    """Reach of ``seeds`` over live arcs, one row of ``live`` per trial."""
    n = indptr.shape[0] - 1
    queue = np.empty(n, np.int64)
    seen = np.zeros(n, np.int64)
    for r in range(live.shape[0]):
        stamp = r + 1
        tail = 0
        for s in seeds:
            if seen[s] != stamp:
                seen[s] = stamp
                queue[tail] = s
                tail += 1
        head = 0
        while head < tail:
            u = queue[head]
            head += 1
            for j in range(indptr[u], indptr[u + 1]):
                v = indices[j]
                if live[r, j] and seen[v] != stamp:
                    seen[v] = stamp
                    queue[tail] = v
                    tail += 1
        out[r] = tail
