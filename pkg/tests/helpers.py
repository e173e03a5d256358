"""Shared oracles for the test suite.

Everything here is deliberately independent of the package's LP path:
vertex enumeration solves small linear systems directly, and hull
membership is decided by dense weight-grid search.
"""

from __future__ import annotations

import itertools

import numpy as np

from convexsem.convexalg import FiniteSemilattice


def enumerate_vertices(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> list[np.ndarray]:
    """All vertices of {x : a x <= b} by solving every n-subset of rows.

    Only sensible for small dense systems (the bounded regions used in
    tests); returns an empty list when the region is empty.
    """
    m, n = a.shape
    verts = []
    for rows in itertools.combinations(range(m), n):
        sub = a[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if (a @ x - b <= tol).all():
            verts.append(x)
    return verts


def brute_force_max(c: np.ndarray, a: np.ndarray, b: np.ndarray) -> float | None:
    """Maximum of c.x over a bounded polytope by vertex enumeration."""
    verts = enumerate_vertices(a, b)
    if not verts:
        return None
    return max(float(c @ v) for v in verts)


_GRID_CACHE: dict = {}


def weight_grid(k: int, step: float) -> np.ndarray:
    """All convex-weight vectors of length k on a grid of the given step."""
    key = (k, step)
    if key in _GRID_CACHE:
        return _GRID_CACHE[key]
    ticks = int(round(1.0 / step))
    rows: list[list[int]] = []

    def rec(prefix, remaining, depth):
        if depth == k - 1:
            rows.append(prefix + [remaining])
            return
        for t in range(remaining + 1):
            rec(prefix + [t], remaining - t, depth + 1)

    rec([], ticks, 0)
    grid = np.asarray(rows, dtype=float) * step
    _GRID_CACHE[key] = grid
    return grid


def grid_hull_distance(query: np.ndarray, vertices: np.ndarray, step: float = 0.01) -> float:
    """Min-over-grid sup-norm distance from query to the hull of vertices.

    A dense grid of convex weights stands in for true hull membership; the
    answer is exact up to the grid resolution and entirely LP-free.
    """
    pts = weight_grid(vertices.shape[0], step) @ vertices
    return float(np.abs(pts - query).max(axis=1).min())


def random_join_semilattice(rng: np.random.Generator, max_bits: int = 3) -> FiniteSemilattice:
    """A random semilattice with <= 2**max_bits elements: a subset of the
    bitmask lattice closed under bitwise or."""
    universe = 2 ** max_bits
    masks = set(int(m) for m in rng.integers(0, universe, size=rng.integers(2, 7)))
    changed = True
    while changed:
        changed = False
        for x, y in list(itertools.combinations(sorted(masks), 2)):
            if (x | y) not in masks:
                masks.add(x | y)
                changed = True
    names = {m: f"e{m}" for m in sorted(masks)}
    joins = {(names[x], names[y]): names[x | y] for x in masks for y in masks if x < y}
    return FiniteSemilattice([names[m] for m in sorted(masks)], joins)


def food_tree() -> FiniteSemilattice:
    return FiniteSemilattice.from_tree(
        {"fruit": "food", "beer": "food", "apples": "fruit", "bananas": "fruit"}
    )
