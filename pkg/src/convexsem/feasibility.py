"""Linear feasibility and optimization kernel.

Everything geometric in this package (membership, emptiness, composition)
bottoms out in small dense LPs over free variables.  They are solved with a
two-phase simplex using Bland's rule; the pivot loop is the hot spot and is
JIT-compiled with numba unless ``CONVEXSEM_PURE_NUMPY=1`` selects the
vectorized numpy fallback.  Both kernels pivot identically, so results are
bit-for-bit reproducible across the two paths.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NumericalFailure

PIVOT_TOL = 1e-9
ITERATION_CAP = 10_000
WITNESS_TOL = 1e-7

_STATUS_OPTIMAL = 0
_STATUS_UNBOUNDED = 1
_STATUS_CAPPED = 2


def _simplex_loop_numpy(T, basis, max_iter, tol):
    """Pure-numpy pivot loop. T has the objective in its last row, the rhs in
    its last column; maximizes until no reduced cost is below -tol."""
    m = T.shape[0] - 1
    n = T.shape[1] - 1
    it = 0
    while it < max_iter:
        it += 1
        below = np.nonzero(T[m, :n] < -tol)[0]
        if below.size == 0:
            return _STATUS_OPTIMAL, it
        enter = int(below[0])  # Bland: smallest improving index
        col = T[:m, enter]
        pos = np.nonzero(col > tol)[0]
        if pos.size == 0:
            return _STATUS_UNBOUNDED, it
        ratios = T[pos, n] / col[pos]
        rmin = ratios.min()
        ties = pos[ratios == rmin]
        leave = int(ties[np.argmin(basis[ties])])  # Bland tie-break
        T[leave, :] /= T[leave, enter]
        factors = T[:, enter].copy()
        factors[leave] = 0.0
        T -= np.outer(factors, T[leave, :])
        basis[leave] = enter
    return _STATUS_CAPPED, it


def _simplex_loop_scalar(T, basis, max_iter, tol):
    """Same pivoting as _simplex_loop_numpy, written loop-wise for numba."""
    m = T.shape[0] - 1
    n = T.shape[1] - 1
    it = 0
    while it < max_iter:
        it += 1
        enter = -1
        for j in range(n):
            if T[m, j] < -tol:
                enter = j
                break
        if enter == -1:
            return _STATUS_OPTIMAL, it
        leave = -1
        best = np.inf
        for i in range(m):
            a = T[i, enter]
            if a > tol:
                r = T[i, n] / a
                if r < best or (r == best and (leave == -1 or basis[i] < basis[leave])):
                    best = r
                    leave = i
        if leave == -1:
            return _STATUS_UNBOUNDED, it
        piv = T[leave, enter]
        for j in range(n + 1):
            T[leave, j] /= piv
        for i in range(m + 1):
            if i != leave:
                f = T[i, enter]
                if f != 0.0:
                    for j in range(n + 1):
                        T[i, j] -= f * T[leave, j]
        basis[leave] = enter
    return _STATUS_CAPPED, it


def _load_jit_loop():
    from numba import njit  # deferred so the numpy path never imports numba

    return njit(cache=True)(_simplex_loop_scalar)


PURE_NUMPY = os.environ.get("CONVEXSEM_PURE_NUMPY", "0") not in ("", "0")
if PURE_NUMPY:
    USING_NUMBA = False
    _simplex_loop = _simplex_loop_numpy
else:
    try:
        _simplex_loop = _load_jit_loop()
        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _simplex_loop = _simplex_loop_numpy
        USING_NUMBA = False


@dataclass(frozen=True)
class LinearSystem:
    """Rows a_i . x REL b_i over n_vars free (sign-unrestricted) variables.

    a is (m, n_vars); is_eq marks '=' rows, the rest are '<='.
    """

    n_vars: int
    a: np.ndarray
    is_eq: np.ndarray
    b: np.ndarray

    @classmethod
    def from_rows(cls, n_vars: int, rows: Sequence[tuple]) -> "LinearSystem":
        """Build from (coefficients, relation, rhs) triples, relation in {'<=', '='}."""
        m = len(rows)
        a = np.zeros((m, n_vars))
        is_eq = np.zeros(m, dtype=bool)
        b = np.zeros(m)
        for i, (coeffs, rel, rhs) in enumerate(rows):
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.shape != (n_vars,):
                raise ValueError(f"row {i}: expected {n_vars} coefficients, got {coeffs.shape}")
            if rel not in ("<=", "="):
                raise ValueError(f"row {i}: relation must be '<=' or '=', got {rel!r}")
            a[i] = coeffs
            is_eq[i] = rel == "="
            b[i] = rhs
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("non-finite coefficient in linear system")
        return cls(n_vars, a, is_eq, b)

    @property
    def n_rows(self) -> int:
        return self.a.shape[0]

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """Positive entries are violations: a.x - b for '<=', |a.x - b| for '='."""
        if self.n_rows == 0:
            return np.zeros(0)
        r = self.a @ x - self.b
        return np.where(self.is_eq, np.abs(r), r)

    def stacked(self, other: "LinearSystem") -> "LinearSystem":
        assert self.n_vars == other.n_vars
        return LinearSystem(
            self.n_vars,
            np.vstack([self.a, other.a]),
            np.concatenate([self.is_eq, other.is_eq]),
            np.concatenate([self.b, other.b]),
        )


@dataclass(frozen=True)
class LPResult:
    status: str  # 'optimal' | 'unbounded' | 'infeasible'
    value: Optional[float] = None
    x: Optional[np.ndarray] = None


def _as_le(system: LinearSystem) -> tuple[np.ndarray, np.ndarray]:
    """Split equality rows into opposite inequalities: returns A, b with Ax <= b."""
    eq = system.is_eq
    a = np.vstack([system.a, -system.a[eq]]) if eq.any() else system.a
    b = np.concatenate([system.b, -system.b[eq]]) if eq.any() else system.b
    return a, b


def _solve(system: LinearSystem, objective: Optional[np.ndarray], loop=None):
    """Two-phase simplex over free variables (split x = u - v internally).

    Returns (status, value, x) where status in {'optimal', 'unbounded',
    'infeasible'}; for pure feasibility pass objective=None (treated as 0).
    """
    if loop is None:
        loop = _simplex_loop
    n = system.n_vars
    a_le, b_le = _as_le(system)
    m = a_le.shape[0]
    if m == 0:
        x = np.zeros(n)
        return "optimal", 0.0 if objective is None else float(objective @ x), x

    # Standard form: [A, -A] y + s = b, y >= 0, with rows flipped to b >= 0.
    width = 2 * n + m  # u, v, slacks
    rows = np.zeros((m, width))
    rows[:, :n] = a_le
    rows[:, n:2 * n] = -a_le
    rows[np.arange(m), 2 * n + np.arange(m)] = 1.0
    rhs = b_le.copy()
    neg = rhs < 0
    rows[neg] *= -1.0
    rhs[neg] *= -1.0

    art_rows = np.nonzero(neg)[0]
    n_art = art_rows.size
    total = width + n_art
    T = np.zeros((m + 1, total + 1))
    T[:m, :width] = rows
    T[:m, total] = rhs
    basis = np.empty(m, dtype=np.int64)
    basis[:] = 2 * n + np.arange(m)  # slack basic where possible
    for k, r in enumerate(art_rows):
        T[r, width + k] = 1.0
        basis[r] = width + k

    if n_art:
        # Phase 1: maximize -(sum of artificials); price out the artificial basis.
        T[m, :] = -T[art_rows, :].sum(axis=0)
        T[m, width:total] = 0.0
        status, _ = loop(T, basis, ITERATION_CAP, PIVOT_TOL)
        if status == _STATUS_CAPPED:
            raise NumericalFailure("phase-1 simplex exceeded iteration cap")
        if T[m, total] < -PIVOT_TOL:
            return "infeasible", None, None
        # Drive leftover artificials out of the basis; rows that cannot pivot
        # are redundant and dropped.
        redundant = []
        for r in range(m):
            if basis[r] >= width:
                piv_col = -1
                for j in range(width):
                    if abs(T[r, j]) > WITNESS_TOL:
                        piv_col = j
                        break
                if piv_col == -1:
                    redundant.append(r)
                    continue
                piv = T[r, piv_col]
                T[r, :] /= piv
                factors = T[:, piv_col].copy()
                factors[r] = 0.0
                T -= np.outer(factors, T[r, :])
                basis[r] = piv_col
        keep = np.array([r for r in range(m) if r not in set(redundant)], dtype=int)
        body = T[keep][:, :width]
        rhs2 = T[keep][:, total]
        basis = basis[keep]
        m2 = keep.size
        T = np.zeros((m2 + 1, width + 1))
        T[:m2, :width] = body
        T[:m2, width] = rhs2
        m = m2
    else:
        T = np.hstack([T[:, :width], T[:, total:total + 1]])

    # Phase 2 objective: maximize c.u - c.v (zero when only feasibility is asked).
    cost = np.zeros(width)
    if objective is not None:
        cost[:n] = objective
        cost[n:2 * n] = -objective
    T[m, :width] = -cost
    T[m, width] = 0.0
    for r in range(m):
        cb = cost[basis[r]]
        if cb != 0.0:
            T[m, :] += cb * T[r, :]
    status, _ = loop(T, basis, ITERATION_CAP, PIVOT_TOL)
    if status == _STATUS_CAPPED:
        raise NumericalFailure("phase-2 simplex exceeded iteration cap")
    y = np.zeros(width)
    y[basis] = T[:m, width]
    x = y[:n] - y[n:2 * n]
    if status == _STATUS_UNBOUNDED:
        return "unbounded", None, None
    value = float(cost[:2 * n] @ y[:2 * n])
    return "optimal", value, x


def feasible(system: LinearSystem, loop=None) -> Optional[np.ndarray]:
    """Return a witness point satisfying every row, or None if infeasible.

    Witnesses are independently re-checked; a bad one raises NumericalFailure
    rather than being returned.
    """
    status, _, x = _solve(system, None, loop=loop)
    if status == "infeasible":
        return None
    worst = float(system.residuals(x).max()) if system.n_rows else 0.0
    if worst > WITNESS_TOL:
        raise NumericalFailure(f"witness violates a row by {worst:.3g}")
    return x


def maximize(objective: Sequence[float], system: LinearSystem, loop=None) -> LPResult:
    """Maximize objective . x over the system; standard LP semantics."""
    c = np.asarray(objective, dtype=float)
    if c.shape != (system.n_vars,):
        raise ValueError(f"objective length {c.shape} != n_vars {system.n_vars}")
    status, value, x = _solve(system, c, loop=loop)
    return LPResult(status, value, x)
