"""Max-flow/min-cut on sparse graphs via Dinic's algorithm (numba-compiled).

Edges are stored as forward/reverse pairs at indices 2i and 2i+1, so the
residual partner of edge e is e ^ 1. Undirected grid links are expressed as
a pair with equal capacities on both directions.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def build_adjacency(n_nodes, frm, to):
    """Linked-list adjacency (head/next) over a fixed edge array."""
    m = frm.shape[0]
    head = np.full(n_nodes, -1, dtype=np.int64)
    nxt = np.full(m, -1, dtype=np.int64)
    for e in range(m):
        nxt[e] = head[frm[e]]
        head[frm[e]] = e
    return head, nxt


@numba.njit(cache=True)
def _bfs_levels(head, nxt, to, cap, source, sink, level, queue):
    level[:] = -1
    level[source] = 0
    queue[0] = source
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        e = head[u]
        while e != -1:
            v = to[e]
            if cap[e] > 1e-12 and level[v] < 0:
                level[v] = level[u] + 1
                queue[qt] = v
                qt += 1
            e = nxt[e]
    return level[sink] >= 0


@numba.njit(cache=True)
def max_flow(head, nxt, to, cap, source, sink):
    """Dinic max flow; mutates ``cap`` into the residual capacities."""
    n = head.shape[0]
    level = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    iters = np.empty(n, dtype=np.int64)
    path = np.empty(n + 1, dtype=np.int64)
    flow = 0.0
    while _bfs_levels(head, nxt, to, cap, source, sink, level, queue):
        iters[:] = head
        depth = 0
        u = source
        while True:
            if u == sink:
                bottleneck = np.inf
                for i in range(depth):
                    e = path[i]
                    if cap[e] < bottleneck:
                        bottleneck = cap[e]
                for i in range(depth):
                    e = path[i]
                    cap[e] -= bottleneck
                    cap[e ^ 1] += bottleneck
                flow += bottleneck
                # retreat to the first saturated edge on the path
                depth_new = 0
                for i in range(depth):
                    if cap[path[i]] <= 1e-12:
                        break
                    depth_new += 1
                depth = depth_new
                u = source if depth == 0 else to[path[depth - 1]]
                continue
            e = iters[u]
            advanced = False
            while e != -1:
                v = to[e]
                if cap[e] > 1e-12 and level[v] == level[u] + 1:
                    path[depth] = e
                    depth += 1
                    u = v
                    advanced = True
                    break
                e = nxt[e]
                iters[u] = e
            if advanced:
                continue
            level[u] = -1  # dead end in this phase
            if depth == 0:
                break
            depth -= 1
            u = source if depth == 0 else to[path[depth - 1]]
            iters[u] = nxt[iters[u]] if iters[u] != -1 else -1
    return flow


@numba.njit(cache=True)
def source_side(head, nxt, to, cap, source):
    """Nodes reachable from the source in the residual graph (the min cut's S set)."""
    n = head.shape[0]
    seen = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    seen[source] = True
    queue[0] = source
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        e = head[u]
        while e != -1:
            v = to[e]
            if cap[e] > 1e-12 and not seen[v]:
                seen[v] = True
                queue[qt] = v
                qt += 1
            e = nxt[e]
    return seen


def solve_min_cut(n_nodes: int, frm: np.ndarray, to: np.ndarray, cap: np.ndarray,
                  source: int, sink: int) -> tuple[float, np.ndarray]:
    """Run max flow and return (flow value, source-side membership per node)."""
    frm = np.ascontiguousarray(frm, dtype=np.int64)
    to = np.ascontiguousarray(to, dtype=np.int64)
    cap = np.ascontiguousarray(cap, dtype=np.float64)
    if frm.shape[0] % 2 != 0:
        raise ValueError("edges must come in forward/reverse pairs")
    head, nxt = build_adjacency(n_nodes, frm, to)
    flow = max_flow(head, nxt, to, cap, source, sink)
    return float(flow), np.asarray(source_side(head, nxt, to, cap, source))
