# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; semantics identical to ``_pykernels``."""

from libc.stdlib cimport malloc, free


cdef int _cmp_sig(int a, int b, int* col, int* deg, int* off, int* nbc) noexcept nogil:
    cdef int i
    if col[a] != col[b]:
        return -1 if col[a] < col[b] else 1
    if deg[a] != deg[b]:
        return -1 if deg[a] < deg[b] else 1
    for i in range(deg[a]):
        if nbc[off[a] + i] != nbc[off[b] + i]:
            return -1 if nbc[off[a] + i] < nbc[off[b] + i] else 1
    return 0


cdef void _sort_ints(int* xs, int n) noexcept nogil:
    cdef int i, j, x
    for i in range(1, n):
        x = xs[i]
        j = i - 1
        while j >= 0 and xs[j] > x:
            xs[j + 1] = xs[j]
            j -= 1
        xs[j + 1] = x


def refine_colors(list adj, list colors):
    cdef int n = len(colors)
    if n == 0:
        return []
    cdef int total = 0
    cdef int v, w, i, j, k, ncells, nnew
    for v in range(n):
        total += len(adj[v])
    cdef int* col = <int*> malloc(n * sizeof(int))
    cdef int* nxt = <int*> malloc(n * sizeof(int))
    cdef int* deg = <int*> malloc(n * sizeof(int))
    cdef int* off = <int*> malloc((n + 1) * sizeof(int))
    cdef int* nbr = <int*> malloc((total + 1) * sizeof(int))
    cdef int* nbc = <int*> malloc((total + 1) * sizeof(int))
    cdef int* order = <int*> malloc(n * sizeof(int))
    try:
        ranks = {c: r for r, c in enumerate(sorted(set(colors)))}
        ncells = len(ranks)
        k = 0
        for v in range(n):
            col[v] = ranks[colors[v]]
            off[v] = k
            deg[v] = len(adj[v])
            for w in adj[v]:
                nbr[k] = w
                k += 1
        off[n] = k
        while True:
            for v in range(n):
                for i in range(deg[v]):
                    nbc[off[v] + i] = col[nbr[off[v] + i]]
                _sort_ints(nbc + off[v], deg[v])
                order[v] = v
            # insertion sort of vertices by signature
            for i in range(1, n):
                v = order[i]
                j = i - 1
                while j >= 0 and _cmp_sig(order[j], v, col, deg, off, nbc) > 0:
                    order[j + 1] = order[j]
                    j -= 1
                order[j + 1] = v
            nnew = 0
            nxt[order[0]] = 0
            for i in range(1, n):
                if _cmp_sig(order[i - 1], order[i], col, deg, off, nbc) != 0:
                    nnew += 1
                nxt[order[i]] = nnew
            nnew += 1
            for v in range(n):
                col[v] = nxt[v]
            if nnew == ncells:
                return [col[v] for v in range(n)]
            ncells = nnew
    finally:
        free(col)
        free(nxt)
        free(deg)
        free(off)
        free(nbr)
        free(nbc)
        free(order)


cdef bint _augment(int u, int* start, int* flat, int* match_right, char* seen):
    cdef int i, w
    for i in range(start[u], start[u + 1]):
        w = flat[i]
        if seen[w]:
            continue
        seen[w] = 1
        if match_right[w] < 0 or _augment(match_right[w], start, flat, match_right, seen):
            match_right[w] = u
            return True
    return False


def max_bipartite_matching(list left_adj, int n_right):
    cdef int n_left = len(left_adj)
    cdef int total = 0
    cdef int u, k, w, size = 0
    for u in range(n_left):
        total += len(left_adj[u])
    cdef int* start = <int*> malloc((n_left + 1) * sizeof(int))
    cdef int* flat = <int*> malloc((total + 1) * sizeof(int))
    cdef int* match_right = <int*> malloc((n_right + 1) * sizeof(int))
    cdef char* seen = <char*> malloc((n_right + 1) * sizeof(char))
    try:
        k = 0
        for u in range(n_left):
            start[u] = k
            for w in left_adj[u]:
                flat[k] = w
                k += 1
        start[n_left] = k
        for w in range(n_right):
            match_right[w] = -1
        for u in range(n_left):
            for w in range(n_right):
                seen[w] = 0
            if _augment(u, start, flat, match_right, seen):
                size += 1
        return size
    finally:
        free(start)
        free(flat)
        free(match_right)
        free(seen)
