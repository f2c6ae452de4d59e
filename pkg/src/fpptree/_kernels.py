"""Compiled inner loops for shortest-path extraction.

numba is used when importable; otherwise the same functions run as plain
Python (correct, but far slower on large graphs).
"""
import heapq

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True, nogil=True)
def dijkstra_csr(offsets, nbrs, eids, weights, source, blocked):
    """Binary-heap Dijkstra with lazy deletion on an incidence index.

    ``blocked`` is a vertex treated as removed (-1 for none).
    """
    n = offsets.size - 1
    dist = np.full(n, np.inf)
    par_e = np.full(n, -1, np.int64)
    par_v = np.full(n, -1, np.int64)
    hops = np.full(n, -1, np.int64)
    done = np.zeros(n, np.bool_)
    order = np.empty(n, np.int64)
    cnt = 0
    dist[source] = 0.0
    hops[source] = 0
    heap = [(0.0, np.int64(source))]
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        order[cnt] = u
        cnt += 1
        for idx in range(offsets[u], offsets[u + 1]):
            v = nbrs[idx]
            if done[v] or v == blocked:
                continue
            e = eids[idx]
            nd = d + weights[e]
            if nd < dist[v]:
                dist[v] = nd
                par_e[v] = e
                par_v[v] = u
                hops[v] = hops[u] + 1
                heapq.heappush(heap, (nd, v))
    return dist, par_e, par_v, hops, order[:cnt]


@njit(cache=True, nogil=True)
def dijkstra_seeded(offsets, nbrs, eids, weights, seeds, seed_dist, blocked):
    """Multi-seed Dijkstra: vertex ``seeds[i]`` starts at ``seed_dist[i]``.

    Returns distances and, per vertex, the index of the seed its shortest
    path starts from (-1 if unreached).
    """
    n = offsets.size - 1
    dist = np.full(n, np.inf)
    origin = np.full(n, -1, np.int64)
    done = np.zeros(n, np.bool_)
    heap = [(0.0, np.int64(0), np.int64(0))]
    heap.pop()
    for i in range(seeds.size):
        v = seeds[i]
        if seed_dist[i] < dist[v]:
            dist[v] = seed_dist[i]
            origin[v] = i
            heapq.heappush(heap, (seed_dist[i], v, np.int64(i)))
    while len(heap) > 0:
        d, u, o = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for idx in range(offsets[u], offsets[u + 1]):
            v = nbrs[idx]
            if done[v] or v == blocked:
                continue
            nd = d + weights[eids[idx]]
            if nd < dist[v]:
                dist[v] = nd
                origin[v] = o
                heapq.heappush(heap, (nd, v, o))
    return dist, origin


@njit(cache=True, nogil=True)
def dijkstra_dense(w, base, n, source):
    """Array-scan Dijkstra for a complete graph with condensed weights.

    Unsettled vertices are kept compacted in ``live``; relaxation and the
    search for the next vertex share one pass over them.
    """
    dist = np.full(n, np.inf)
    par_v = np.full(n, -1, np.int64)
    hops = np.full(n, -1, np.int64)
    order = np.empty(n, np.int64)
    live = np.arange(n)
    m = n
    dist[source] = 0.0
    hops[source] = 0
    pos = source
    best = 0.0
    for it in range(n):
        u = live[pos]
        m -= 1
        live[pos] = live[m]
        order[it] = u
        bu = base[u]
        nxt = np.inf
        pos = -1
        for k in range(m):
            j = live[k]
            if j < u:
                nd = best + w[base[j] + u]
            else:
                nd = best + w[bu + j]
            dj = dist[j]
            if nd < dj:
                dist[j] = nd
                par_v[j] = u
                hops[j] = hops[u] + 1
                dj = nd
            if dj < nxt:
                nxt = dj
                pos = k
        if pos < 0:
            return dist, par_v, hops, order[: it + 1]
        best = nxt
    return dist, par_v, hops, order


@njit(cache=True, nogil=True)
def dijkstra_square(W, source):
    """Same as :func:`dijkstra_dense` on a full symmetric weight matrix;
    contiguous rows make this several times faster."""
    n = W.shape[0]
    dist = np.full(n, np.inf)
    par_v = np.full(n, -1, np.int64)
    hops = np.full(n, -1, np.int64)
    order = np.empty(n, np.int64)
    live = np.arange(n)
    m = n
    dist[source] = 0.0
    hops[source] = 0
    pos = source
    best = 0.0
    for it in range(n):
        u = live[pos]
        m -= 1
        live[pos] = live[m]
        order[it] = u
        row = W[u]
        nxt = np.inf
        pos = -1
        for k in range(m):
            j = live[k]
            nd = best + row[j]
            dj = dist[j]
            if nd < dj:
                dist[j] = nd
                par_v[j] = u
                hops[j] = hops[u] + 1
                dj = nd
            if dj < nxt:
                nxt = dj
                pos = k
        if pos < 0:
            return dist, par_v, hops, order[: it + 1]
        best = nxt
    return dist, par_v, hops, order


@njit(cache=True, nogil=True)
def bfs_random_parent(offsets, nbrs, eids, keys, source):
    """Level-synchronous BFS; a vertex at level h+1 takes as parent the
    incident edge from level h with the smallest key."""
    n = offsets.size - 1
    par_e = np.full(n, -1, np.int64)
    par_v = np.full(n, -1, np.int64)
    hops = np.full(n, -1, np.int64)
    best = np.full(n, np.inf)
    order = np.empty(n, np.int64)
    order[0] = source
    hops[source] = 0
    head = 0
    tail = 1
    while head < tail:
        u = order[head]
        head += 1
        h = hops[u] + 1
        for idx in range(offsets[u], offsets[u + 1]):
            v = nbrs[idx]
            e = eids[idx]
            if hops[v] == -1:
                hops[v] = h
                order[tail] = v
                tail += 1
            if hops[v] == h and keys[e] < best[v]:
                best[v] = keys[e]
                par_e[v] = e
                par_v[v] = u
    return par_e, par_v, hops, order[:tail]


@njit(cache=True, nogil=True)
def tree_degrees(par_v, n):
    deg = np.zeros(n, np.int64)
    for v in range(n):
        p = par_v[v]
        if p >= 0:
            deg[v] += 1
            deg[p] += 1
    return deg
