"""Pure-Python versions of the hot kernels (see ``_ckernels.pyx``).

Both implementations must produce identical results; the test-suite checks it.
"""

from __future__ import annotations


def refine_colors(adj: list, colors: list) -> list:
    """Colour refinement to the coarsest stable partition below ``colors``.

    ``adj[v]`` lists the neighbours of vertex ``v``.  A vertex's signature is
    ``(colour, degree, sorted neighbour colours)``; new colours are the ranks of
    the signatures, so cell order is preserved and the result does not depend on
    vertex numbering.
    """
    n = len(colors)
    cur = list(colors)
    # normalise input colours to dense ranks
    ranks = {c: i for i, c in enumerate(sorted(set(cur)))}
    cur = [ranks[c] for c in cur]
    ncells = len(ranks)
    while True:
        sigs = [(cur[v], len(adj[v]), tuple(sorted(cur[w] for w in adj[v]))) for v in range(n)]
        order = {s: i for i, s in enumerate(sorted(set(sigs)))}
        nxt = [order[s] for s in sigs]
        if len(order) == ncells:
            return nxt
        cur, ncells = nxt, len(order)


def max_bipartite_matching(left_adj: list, n_right: int) -> int:
    """Size of a maximum matching; ``left_adj[i]`` lists right vertices of left vertex ``i``."""
    match_right = [-1] * n_right

    def augment(u: int, seen: list) -> bool:
        for w in left_adj[u]:
            if seen[w]:
                continue
            seen[w] = True
            if match_right[w] < 0 or augment(match_right[w], seen):
                match_right[w] = u
                return True
        return False

    size = 0
    for u in range(len(left_adj)):
        if augment(u, [False] * n_right):
            size += 1
    return size
