#!/usr/bin/env python3
"""Benchmark the two simplex pivot kernels (numba JIT vs pure numpy).

Three workloads, all dominated by small dense LPs:
  random   -- batches of random bounded LPs of growing size
  hull     -- membership queries against taste-hull cells
  sentence -- full evaluation of the food-world golden sentences

Both kernels pivot identically, so besides timing we assert the answers
agree bit for bit.  Run:  python3 benchmarks/bench_simplex.py [--repeat N]
"""

import argparse
import time

import numpy as np

from convexsem import feasibility as fe
from convexsem.convexalg import VertexHull, hull
from convexsem.lexicon import builtin_food


def random_systems(rng, count, n_vars, n_rows):
    out = []
    for _ in range(count):
        rows = [(rng.normal(size=n_vars), "<=", float(rng.normal() + 1.0)) for _ in range(n_rows)]
        rows += [(e, "<=", 5.0) for e in np.eye(n_vars)]
        rows += [(-e, "<=", 5.0) for e in np.eye(n_vars)]
        out.append((fe.LinearSystem.from_rows(n_vars, rows), rng.normal(size=n_vars)))
    return out


def run_random(loop, systems):
    results = []
    for system, c in systems:
        results.append(fe._solve(system, c, loop=loop))
    return results


def run_hull(loop, queries, cell):
    results = []
    a_aux = cell.a[:, cell.n_base:]
    for q in queries:
        resid = cell.a[:, : cell.n_base] @ q - cell.b
        rows = []
        for coeffs, eq, rhs in zip(a_aux, cell.is_eq, -resid):
            rows.append((coeffs, "=" if eq else "<=", rhs))
        results.append(fe.feasible(fe.LinearSystem.from_rows(cell.n_aux, rows), loop=loop) is not None)
    return results


def run_sentences(loop, food, phrases):
    # The evaluator reaches the kernel through the module-level default, so
    # swap it in temporarily.
    old = fe._simplex_loop
    fe._simplex_loop = loop
    try:
        out = []
        for phrase in phrases:
            out.append(sorted(food.evaluate_phrase(phrase).relation.finite_enumeration() or ()))
        return out
    finally:
        fe._simplex_loop = old


def timed(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    kernels = [("numpy", fe._simplex_loop_numpy)]
    try:
        jit = fe._load_jit_loop()
        kernels.append(("numba", jit))
    except ImportError:
        print("numba not installed; benchmarking the numpy kernel only")

    rng = np.random.default_rng(0)
    taste = VertexHull(("t_sweet", "t_sour", "t_bitter", "t_salt"))
    hull_cell = hull(taste, [[1, 0, 0, 0], [0.25, 0, 0.75, 0], [0.7, 0.3, 0, 0]])
    hull_queries = [rng.dirichlet(np.ones(4)) for _ in range(400)]
    food = builtin_food()
    phrases = ["bananas taste sweet", "beer tastes sweet", "yellow banana", "soft apple"]

    workloads = [
        ("random  40x(8 vars, 12 rows)", run_random, (random_systems(rng, 40, 8, 12),)),
        ("random  20x(20 vars, 30 rows)", run_random, (random_systems(rng, 20, 20, 30),)),
        ("hull    400 membership queries", run_hull, (hull_queries, hull_cell)),
        ("sentence 4 golden evaluations", run_sentences, (food, phrases)),
    ]

    if len(kernels) == 2:  # compile outside the timed region
        run_random(kernels[1][1], random_systems(rng, 1, 3, 3))

    print(f"{'workload':<34}" + "".join(f"{name:>12}" for name, _ in kernels) + f"{'speedup':>10}")
    for label, fn, wargs in workloads:
        times = []
        answers = []
        for _, loop in kernels:
            t, result = timed(fn, loop, *wargs, repeat=args.repeat)
            times.append(t)
            answers.append(result)
        if len(answers) == 2:
            _assert_same(answers[0], answers[1], label)
        cols = "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        speedup = f"{times[0] / times[-1]:>9.1f}x" if len(times) == 2 else f"{'-':>10}"
        print(f"{label:<34}{cols}{speedup}")
    if len(kernels) == 2:
        print("answers from both kernels agree exactly")


def _assert_same(a, b, label):
    for x, y in zip(a, b):
        if isinstance(x, tuple) and len(x) == 3 and isinstance(x[0], str):
            assert x[0] == y[0], label
            if x[0] == "optimal":
                assert x[1] == y[1] and np.array_equal(x[2], y[2]), label
        else:
            assert np.array_equal(np.asarray(x, dtype=object), np.asarray(y, dtype=object)), label


if __name__ == "__main__":
    main()
