# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled route-search kernels; mirrors pathfind_py step for step."""

from cpython.list cimport PyList_New

cdef int INF_DIST_C = 0x3FFFFFFF
INF_DIST = INF_DIST_C


def bfs_dist(int n, indptr_o, nbr_o, chan_o, open_o, int dst):
    """Hop distance from every node to dst over open channels."""
    from array import array
    out = array("i", [INF_DIST_C]) * n
    cdef int[:] dist = out
    cdef const int[:] indptr = indptr_o
    cdef const int[:] nbr = nbr_o
    cdef const int[:] chan = chan_o
    cdef const signed char[:] open_flags = open_o
    cdef int head = 0, tail = 1, u, v, e, du1
    queue_arr = array("i", [0]) * n
    cdef int[:] queue = queue_arr
    dist[dst] = 0
    queue[0] = dst
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
    return out


def feasible_route(int n, indptr_o, nbr_o, chan_o, dirslot_o, base_o, ppm_o,
                   balances_o, open_o, int src, int dst, long long amount,
                   dist_o, int hop_cap, long long expand_cap):
    """Minimum-hop balance-feasible path with lexicographic tie-break.

    Same contract as pathfind_py.feasible_route.
    """
    from array import array
    if src == dst:
        return [src]
    cdef const int[:] indptr = indptr_o
    cdef const int[:] nbr = nbr_o
    cdef const int[:] chan = chan_o
    cdef const int[:] dirslot = dirslot_o
    cdef const long long[:] base = base_o
    cdef const long long[:] ppm = ppm_o
    cdef const long long[:] balances = balances_o
    cdef const signed char[:] open_flags = open_o
    cdef const int[:] dist = dist_o

    cdef int d0 = dist[src]
    if d0 >= INF_DIST_C or d0 > hop_cap:
        return None

    pn_arr = array("i", [0]) * (hop_cap + 2)
    pe_arr = array("i", [0]) * (hop_cap + 2)
    ei_arr = array("i", [0]) * (hop_cap + 2)
    vis_arr = bytearray(n)
    cdef int[:] path_nodes = pn_arr
    cdef int[:] path_edges = pe_arr
    cdef int[:] edge_iter = ei_arr
    cdef unsigned char[:] visited = vis_arr
    cdef long long expansions = 0, flow
    cdef int k, depth, u, e, v, rem, i, ee
    cdef bint ok

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
                    flow += base[ee] + flow * ppm[ee] // 1000000
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
