"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Times colour refinement on random graphs and bipartite matching on random
barb requests with each backend, after checking that both agree.
"""

import argparse
import random
import timeit

from vccts import _pykernels, kernels


def random_graph(rng, n, p):
    adj = [[] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                adj[a].append(b)
                adj[b].append(a)
    return adj, [rng.randrange(3) for _ in range(n)]


def random_bipartite(rng, n_left, n_right, p):
    return [[j for j in range(n_right) if rng.random() < p] for _ in range(n_left)], n_right


def bench(label, fn, cases, repeat):
    t = min(timeit.repeat(lambda: [fn(*c) for c in cases], number=1, repeat=repeat))
    print(f"  {label:<8} {t * 1e3:9.2f} ms")
    return t


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    if kernels.BACKEND != "cython":
        print("compiled kernels are not built; only the fallback is timed")

    graphs = [random_graph(rng, n, 0.3) for n in (6, 12, 24, 48) for _ in range(50)]
    print("colour refinement, 200 graphs (6-48 vertices)")
    py = bench("python", _pykernels.refine_colors, graphs, args.repeat)
    if kernels.BACKEND == "cython":
        from vccts import _ckernels

        assert all(_ckernels.refine_colors(*g) == _pykernels.refine_colors(*g) for g in graphs)
        cy = bench("cython", _ckernels.refine_colors, graphs, args.repeat)
        print(f"  speedup  {py / cy:9.1f}x")

    matchings = [random_bipartite(rng, n, n + 2, 0.3) for n in (3, 6, 12, 24) for _ in range(100)]
    print("bipartite matching, 400 instances (3-24 requests)")
    py = bench("python", _pykernels.max_bipartite_matching, matchings, args.repeat)
    if kernels.BACKEND == "cython":
        assert all(_ckernels.max_bipartite_matching(*m) == _pykernels.max_bipartite_matching(*m)
                   for m in matchings)
        cy = bench("cython", _ckernels.max_bipartite_matching, matchings, args.repeat)
        print(f"  speedup  {py / cy:9.1f}x")


if __name__ == "__main__":
    main()
