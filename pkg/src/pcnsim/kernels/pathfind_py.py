"""Pure-Python route-search kernels.

Reference implementation of the compiled extension in _pathfind.pyx; both must
stay step-for-step identical so either backend yields the same routes.
"""
from __future__ import annotations

from array import array

INF_DIST = 0x3FFFFFFF


def bfs_dist(n, indptr, nbr, chan, open_flags, dst):
    """Hop distance from every node to dst over open channels."""
    dist = array("i", [INF_DIST]) * n
    dist[dst] = 0
    queue = array("i", [0]) * n
    queue[0] = dst
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        du1 = dist[u] + 1
        for e in range(indptr[u], indptr[u + 1]):
            if not open_flags[chan[e]]:
                continue
            v = nbr[e]
            if dist[v] > du1:
                dist[v] = du1
                queue[tail] = v
                tail += 1
    return dist


def feasible_route(n, indptr, nbr, chan, dirslot, base, ppm, balances, open_flags,
                   src, dst, amount, dist, hop_cap, expand_cap):
    """Minimum-hop path src->dst where every hop can carry amount plus the
    downstream fees, lexicographic tie-break on the node sequence.

    dist must be a hop-distance column toward dst for the current topology.
    Returns the node path or None. Fees accumulate toward the source: the flow
    over hop i equals amount plus the fees of all intermediaries after i.
    """
    if src == dst:
        return [src]
    d0 = dist[src]
    if d0 >= INF_DIST or d0 > hop_cap:
        return None

    path_nodes = array("i", [0]) * (hop_cap + 2)
    path_edges = array("i", [0]) * (hop_cap + 2)
    edge_iter = array("i", [0]) * (hop_cap + 2)
    visited = bytearray(n)
    expansions = 0

    for k in range(d0, hop_cap + 1):
        depth = 0
        path_nodes[0] = src
        for i in range(n):
            visited[i] = 0
        visited[src] = 1
        edge_iter[0] = indptr[src]
        while True:
            u = path_nodes[depth]
            e = edge_iter[depth]
            if e >= indptr[u + 1]:
                if depth == 0:
                    break
                visited[u] = 0
                depth -= 1
                continue
            edge_iter[depth] = e + 1
            if not open_flags[chan[e]]:
                continue
            v = nbr[e]
            rem = k - depth - 1
            if v == dst:
                if rem != 0:
                    continue
                path_edges[depth] = e
                # exact feasibility: accumulate fees from dst back to src
                flow = amount
                ok = True
                i = k - 1
                while True:
                    ee = path_edges[i]
                    if balances[dirslot[ee]] < flow:
                        ok = False
                        break
                    if i == 0:
                        break
                    flow += base[ee] + flow * ppm[ee] // 1_000_000
                    i -= 1
                if ok:
                    return [path_nodes[i] for i in range(k)] + [dst]
                continue
            if visited[v]:
                continue
            if dist[v] > rem:
                continue
            if balances[dirslot[e]] < amount:
                continue
            expansions += 1
            if expansions > expand_cap:
                return None
            path_edges[depth] = e
            depth += 1
            path_nodes[depth] = v
            visited[v] = 1
            edge_iter[depth] = indptr[v]
    return None
