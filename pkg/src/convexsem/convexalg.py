"""Convex algebras (domains) and convex regions (cells).

A domain is one factor of a conceptual space: a box, a halfspace-bounded
region, a vertex hull (simplex), a finite join semilattice, or a space of
timed trajectories.  A cell is one convex region over a product of domains,
held as linear constraints over base coordinates plus auxiliary variables
(hull weights and the like), together with explicit subsets for finite
factors and endpoint-region references for path factors.

Keeping every continuous region as "a polyhedron seen through a coordinate
projection" makes intersection and product closed operations and makes
membership a single LP; no vertex/halfspace conversions are ever needed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    CarrierError,
    DimensionMismatch,
    LatticeError,
    ShapeMismatch,
    WeightSumError,
)
from .feasibility import LinearSystem, feasible, maximize

#: Strict inequalities like "t < 0" are realized as t <= -STRICT_EPS;
#: truly strict constraints would break LP feasibility and convex closure.
STRICT_EPS = 1e-6

#: Absolute tolerance on constraint residuals for membership/emptiness.
FEAS_TOL = 1e-9

Row = tuple[Sequence[float], str, float]  # (coefficients, '<=' or '=', rhs)


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """An axis-aligned box with named coordinates."""

    names: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.names) != len(self.bounds):
            raise DimensionMismatch("box needs one (lo, hi) pair per coordinate")
        for name, (lo, hi) in zip(self.names, self.bounds):
            if not lo <= hi:
                raise ValueError(f"box coordinate {name}: lo {lo} > hi {hi}")

    @property
    def dim(self) -> int:
        return len(self.names)

    def carrier_rows(self) -> list[Row]:
        rows: list[Row] = []
        for i, (lo, hi) in enumerate(self.bounds):
            e = np.zeros(self.dim)
            e[i] = 1.0
            rows.append((-e, "<=", -lo))
            rows.append((e, "<=", hi))
        return rows


@dataclass(frozen=True)
class HalfspaceRegion:
    """A domain carved out of R^dim by fixed linear inequalities."""

    names: tuple[str, ...]
    rows: tuple[tuple[tuple[float, ...], str, float], ...]

    @property
    def dim(self) -> int:
        return len(self.names)

    def carrier_rows(self) -> list[Row]:
        return [(np.asarray(c, dtype=float), rel, rhs) for c, rel, rhs in self.rows]


@dataclass(frozen=True)
class VertexHull:
    """A simplex domain: formal convex combinations of a finite label basis.

    Coordinates are the basis weights, so the carrier is x >= 0, sum(x) = 1.
    ``ambient_rows`` may add further linear constraints.
    """

    labels: tuple[str, ...]
    ambient_rows: tuple[tuple[tuple[float, ...], str, float], ...] = ()

    @property
    def names(self) -> tuple[str, ...]:
        return self.labels

    @property
    def dim(self) -> int:
        return len(self.labels)

    def carrier_rows(self) -> list[Row]:
        rows: list[Row] = []
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            rows.append((-e, "<=", 0.0))
        rows.append((np.ones(self.dim), "=", 1.0))
        rows.extend((np.asarray(c, dtype=float), rel, rhs) for c, rel, rhs in self.ambient_rows)
        return rows


class FiniteSemilattice:
    """A finite join semilattice; mixing joins the support and drops weights."""

    def __init__(self, elements: Sequence[str], joins: dict[tuple[str, str], str]):
        self.elements: tuple[str, ...] = tuple(elements)
        table = {}
        for (a, b), c in joins.items():
            table[(a, b)] = c
            table[(b, a)] = c
        for e in self.elements:
            table[(e, e)] = e
        self._joins = table
        self._validate()

    def _validate(self) -> None:
        es = self.elements
        if len(set(es)) != len(es):
            raise LatticeError("duplicate lattice elements")
        for a, b in itertools.product(es, es):
            if (a, b) not in self._joins:
                raise LatticeError(f"join of ({a}, {b}) undeclared")
            if self._joins[(a, b)] not in es:
                raise LatticeError(f"join of ({a}, {b}) is not an element")
            if self._joins[(a, b)] != self._joins[(b, a)]:
                raise LatticeError(f"join not commutative on ({a}, {b})")
        for a in es:
            if self._joins[(a, a)] != a:
                raise LatticeError(f"join not idempotent on {a}")
        for a, b, c in itertools.product(es, es, es):
            if self.join(self.join(a, b), c) != self.join(a, self.join(b, c)):
                raise LatticeError(f"join not associative on ({a}, {b}, {c})")

    def join(self, a: str, b: str) -> str:
        return self._joins[(a, b)]

    def join_all(self, items: Sequence[str]) -> str:
        out = items[0]
        for x in items[1:]:
            out = self.join(out, x)
        return out

    @classmethod
    def from_tree(cls, parent: dict[str, str]) -> "FiniteSemilattice":
        """Build the semilattice of a finite tree with join = least common ancestor.

        ``parent`` maps each non-root node to its parent; the root is the one
        node never appearing as a key.
        """
        nodes = set(parent) | set(parent.values())
        roots = [n for n in nodes if n not in parent]
        if len(roots) != 1:
            raise LatticeError(f"tree must have exactly one root, found {sorted(roots)}")

        def ancestors(x: str) -> list[str]:
            chain = [x]
            while chain[-1] in parent:
                chain.append(parent[chain[-1]])
            return chain

        joins = {}
        for a, b in itertools.combinations(sorted(nodes), 2):
            up = ancestors(b)
            for anc in ancestors(a):
                if anc in up:
                    joins[(a, b)] = anc
                    break
        return cls(sorted(nodes), joins)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteSemilattice)
            and self.elements == other.elements
            and self._joins == other._joins
        )

    def __repr__(self):
        return f"FiniteSemilattice({list(self.elements)})"

    @property
    def dim(self) -> int:
        return 0


@dataclass(frozen=True)
class PathDomain:
    """Piecewise-linear trajectories over a continuous location domain.

    A point of this domain is a :class:`Trajectory`: a start time t <= 0 and
    k waypoints at evenly spaced parameters over [t_start, 0].
    """

    loc: Union[Box, HalfspaceRegion, VertexHull]
    k: int = 8

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("path domain needs at least 2 waypoints")

    @property
    def loc_dim(self) -> int:
        return self.loc.dim

    @property
    def dim(self) -> int:
        return 0


Domain = Union[Box, HalfspaceRegion, VertexHull, FiniteSemilattice, PathDomain]
ContinuousDomain = (Box, HalfspaceRegion, VertexHull)


def continuous_dim(d: Domain) -> int:
    return d.dim


def coord_names(d: Domain) -> tuple[str, ...]:
    return d.names if isinstance(d, ContinuousDomain) else ()


def carrier_contains(d: Domain, x, tol: float = FEAS_TOL) -> bool:
    """Whether a raw value lies in the domain's carrier set."""
    if isinstance(d, FiniteSemilattice):
        return x in d.elements
    if isinstance(d, PathDomain):
        return (
            isinstance(x, Trajectory)
            and x.loc_dim == d.loc_dim
            and x.k == d.k
            and x.t_start <= tol
        )
    v = np.asarray(x, dtype=float)
    if v.shape != (d.dim,):
        return False
    for coeffs, rel, rhs in d.carrier_rows():
        r = float(np.asarray(coeffs) @ v) - rhs
        if (rel == "=" and abs(r) > tol) or (rel == "<=" and r > tol):
            return False
    return True


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


class Trajectory:
    """A start time t_start <= 0 and k waypoints in the location space."""

    __slots__ = ("t_start", "waypoints")

    def __init__(self, t_start: float, waypoints):
        w = np.asarray(waypoints, dtype=float)
        if w.ndim != 2:
            raise ShapeMismatch("waypoints must be a (k, loc_dim) array")
        if not np.isfinite(w).all() or not np.isfinite(t_start):
            raise ValueError("trajectory values must be finite")
        if t_start > 0:
            raise ValueError("trajectory must start in the past (t_start <= 0)")
        self.t_start = float(t_start)
        self.waypoints = w

    @property
    def k(self) -> int:
        return self.waypoints.shape[0]

    @property
    def loc_dim(self) -> int:
        return self.waypoints.shape[1]

    def __repr__(self):
        pts = " ".join("(" + ",".join(f"{v:g}" for v in p) + ")" for p in self.waypoints)
        return f"Trajectory(t={self.t_start:g}; {pts})"


def mix_trajectories(p: float, f1: Trajectory, f2: Trajectory) -> Trajectory:
    """Pointwise mixture of two trajectories after rescaling both to [-1, 0].

    The mixture starts at p*t1 + (1-p)*t2 and its i-th waypoint is the
    weighted average of the i-th waypoints.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight {p} outside [0, 1]")
    if f1.k != f2.k or f1.loc_dim != f2.loc_dim:
        raise ShapeMismatch(
            f"trajectory shapes differ: ({f1.k},{f1.loc_dim}) vs ({f2.k},{f2.loc_dim})"
        )
    return Trajectory(
        p * f1.t_start + (1.0 - p) * f2.t_start,
        p * f1.waypoints + (1.0 - p) * f2.waypoints,
    )


# ---------------------------------------------------------------------------
# mixing (the convex-algebra operation) and join closure
# ---------------------------------------------------------------------------


def mix(d: Domain, weights: Sequence[float], points: Sequence) -> object:
    """Form the convex combination of ``points`` in domain ``d``.

    Continuous domains mix coordinatewise; finite semilattices join the
    support (weights are discarded); path domains mix trajectories pointwise.
    """
    w = np.asarray(weights, dtype=float)
    if len(points) != w.shape[0] or w.shape[0] == 0:
        raise WeightSumError("need one weight per point, at least one point")
    if (w < -FEAS_TOL).any():
        raise WeightSumError("negative mixing weight")
    if abs(float(w.sum()) - 1.0) > 1e-9:
        raise WeightSumError(f"weights sum to {float(w.sum())!r}, not 1")

    if isinstance(d, FiniteSemilattice):
        support = [p for wi, p in zip(w, points) if wi > 0]
        for p in support:
            if p not in d.elements:
                raise CarrierError(f"{p!r} is not an element of the lattice")
        return d.join_all(support)

    if isinstance(d, PathDomain):
        for p in points:
            if not carrier_contains(d, p):
                raise CarrierError("point is not a trajectory of this path domain")
        t = float(sum(wi * p.t_start for wi, p in zip(w, points)))
        waypoints = sum(wi * p.waypoints for wi, p in zip(w, points))
        return Trajectory(min(t, 0.0), waypoints)

    vs = []
    for p in points:
        v = np.asarray(p, dtype=float)
        if v.shape != (d.dim,):
            raise CarrierError(f"point of dimension {v.shape} in {d.dim}-dimensional domain")
        if not carrier_contains(d, v):
            raise CarrierError(f"point {v} outside the domain carrier")
        vs.append(v)
    return w @ np.vstack(vs)


def join_closure(d: FiniteSemilattice, s: Sequence[str]) -> frozenset[str]:
    """Smallest join-closed superset of ``s`` (the semilattice convex hull)."""
    out = set(s)
    for e in out:
        if e not in d.elements:
            raise CarrierError(f"{e!r} is not an element of the lattice")
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(sorted(out), 2):
            j = d.join(a, b)
            if j not in out:
                out.add(j)
                changed = True
    return frozenset(out)


# ---------------------------------------------------------------------------
# cells
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class PathConstraint:
    """Constraints a path cell places on a trajectory-valued factor.

    ``start``/``end`` are cells over the location domain alone; ``point``
    marks the degenerate single-timepoint variant (t_start = 0, exempted from
    the strictness rule), otherwise t_start <= t_max is required.
    """

    start: "Cell"
    end: "Cell"
    t_max: float = -STRICT_EPS
    point: bool = False

    def merged(self, other: "PathConstraint") -> Optional["PathConstraint"]:
        """Conjunction with constraints on the same trajectory; None if absurd."""
        point = self.point or other.point
        t_max = min(self.t_max, other.t_max)
        if point and t_max < 0.0:
            return None
        return PathConstraint(
            intersect(self.start, other.start),
            intersect(self.end, other.end),
            t_max,
            point,
        )

    def is_infeasible(self, tol: float = FEAS_TOL) -> bool:
        if self.point:
            return intersect(self.start, self.end).is_empty(tol)
        return self.start.is_empty(tol) or self.end.is_empty(tol)

    def contains(self, traj: Trajectory, tol: float = FEAS_TOL) -> bool:
        if self.point:
            if abs(traj.t_start) > tol:
                return False
            if np.abs(traj.waypoints - traj.waypoints[0]).max() > tol:
                return False
            p = (traj.waypoints[0],)
            return self.start.contains(p, tol) and self.end.contains(p, tol)
        if traj.t_start > self.t_max + tol:
            return False
        return self.start.contains((traj.waypoints[0],), tol) and self.end.contains(
            (traj.waypoints[-1],), tol
        )


@dataclass(eq=False)
class Cell:
    """One convex region over a product of domains.

    Continuous factors contribute base variables (in factor order); ``n_aux``
    extra columns hold auxiliary variables such as hull weights.  Rows are
    a . (base, aux) REL b and always include the domains' carrier rows.
    ``finite_parts`` maps finite-factor indices to join-closed subsets;
    ``path_parts`` maps path-factor indices to endpoint constraints.

    Cells are immutable after construction.
    """

    domains: tuple[Domain, ...]
    n_aux: int
    a: np.ndarray
    is_eq: np.ndarray
    b: np.ndarray
    finite_parts: dict[int, frozenset[str]]
    path_parts: dict[int, PathConstraint]
    aux_names: Optional[tuple[str, ...]] = None

    @cached_property
    def factor_slices(self) -> tuple[slice, ...]:
        out = []
        off = 0
        for d in self.domains:
            w = continuous_dim(d)
            out.append(slice(off, off + w))
            off += w
        return tuple(out)

    @property
    def n_base(self) -> int:
        return sum(continuous_dim(d) for d in self.domains)

    @property
    def n_vars(self) -> int:
        return self.n_base + self.n_aux

    @cached_property
    def var_names(self) -> tuple[str, ...]:
        names = []
        for d in self.domains:
            names.extend(coord_names(d))
        return tuple(names) + _unique_aux_names(self.domains, self.n_aux, self.aux_names)

    def system(self) -> LinearSystem:
        return LinearSystem(self.n_vars, self.a, self.is_eq, self.b)

    def is_empty(self, tol: float = FEAS_TOL) -> bool:
        if any(not part for part in self.finite_parts.values()):
            return True
        if any(pc.is_infeasible(tol) for pc in self.path_parts.values()):
            return True
        return self._continuous_witness() is None

    def _continuous_witness(self):
        if not hasattr(self, "_witness_cache"):
            object.__setattr__(self, "_witness_cache", feasible(self.system()))
        return self._witness_cache

    def contains(self, point: Sequence, tol: float = FEAS_TOL) -> bool:
        """Whether a point (one value per factor) lies in this cell."""
        if len(point) != len(self.domains):
            raise ShapeMismatch(
                f"point has {len(point)} components for {len(self.domains)} factors"
            )
        xs = []
        for idx, (d, comp) in enumerate(zip(self.domains, point)):
            if isinstance(d, FiniteSemilattice):
                if comp not in d.elements:
                    raise ShapeMismatch(f"{comp!r} is not an element of factor {idx}")
                if comp not in self.finite_parts.get(idx, frozenset()):
                    return False
            elif isinstance(d, PathDomain):
                if not isinstance(comp, Trajectory) or comp.loc_dim != d.loc_dim or comp.k != d.k:
                    raise ShapeMismatch(f"factor {idx} expects a ({d.k},{d.loc_dim}) trajectory")
                pc = self.path_parts.get(idx)
                if pc is not None and not pc.contains(comp, tol):
                    return False
            else:
                v = np.asarray(comp, dtype=float)
                if v.shape != (d.dim,):
                    raise ShapeMismatch(
                        f"factor {idx} expects {d.dim} coordinates, got {v.shape}"
                    )
                xs.append(v)
        if not xs and self.a.shape[0] == 0:
            return True
        x = np.concatenate(xs) if xs else np.zeros(0)

        a_base, a_aux = self.a[:, : self.n_base], self.a[:, self.n_base:]
        resid = a_base @ x - self.b
        free = ~np.any(a_aux != 0.0, axis=1)
        direct = np.where(self.is_eq[free], np.abs(resid[free]), resid[free])
        if direct.size and float(direct.max()) > tol:
            return False
        rest = ~free
        if not rest.any():
            return True
        # Remaining rows couple auxiliaries: membership is LP feasibility over
        # them, with rows relaxed by tol so near-boundary points count.
        rows = []
        for coeffs, eq, rhs in zip(a_aux[rest], self.is_eq[rest], -resid[rest]):
            if eq:
                rows.append((coeffs, "<=", rhs + tol))
                rows.append((-coeffs, "<=", -rhs + tol))
            else:
                rows.append((coeffs, "<=", rhs + tol))
        return feasible(LinearSystem.from_rows(self.n_aux, rows)) is not None

    # --- helpers for assembling joint systems (used by relsem) -----------

    def violated_row(self, point: Sequence, tol: float = FEAS_TOL) -> Optional[str]:
        """Human-readable description of one reason the point is excluded."""
        if self.contains(point, tol):
            return None
        for idx, (d, comp) in enumerate(zip(self.domains, point)):
            if isinstance(d, FiniteSemilattice):
                if comp not in self.finite_parts.get(idx, frozenset()):
                    allowed = sorted(self.finite_parts.get(idx, frozenset()))
                    return f"factor {idx}: {comp!r} not in {{{', '.join(allowed)}}}"
            elif isinstance(d, PathDomain):
                pc = self.path_parts.get(idx)
                if pc is not None and not pc.contains(comp, tol):
                    return f"factor {idx}: trajectory violates its endpoint/time constraints"
        xs = [np.asarray(c, dtype=float) for d, c in zip(self.domains, point)
              if isinstance(d, ContinuousDomain)]
        x = np.concatenate(xs) if xs else np.zeros(0)
        a_base, a_aux = self.a[:, : self.n_base], self.a[:, self.n_base:]
        resid = a_base @ x - self.b
        free = ~np.any(a_aux != 0.0, axis=1)
        vals = np.where(self.is_eq, np.abs(resid), resid)
        bad = [i for i in np.argsort(-vals) if free[i] and vals[i] > tol]
        if bad:
            return f"violates: {self.row_text(int(bad[0]))}"
        # The exclusion happens through the auxiliary system; find one row
        # whose removal would admit the point.
        coupled = np.nonzero(~free)[0]
        for drop in coupled:
            keep = [i for i in coupled if i != drop]
            rows = []
            for i in keep:
                if self.is_eq[i]:
                    rows.append((a_aux[i], "<=", -resid[i] + tol))
                    rows.append((-a_aux[i], "<=", resid[i] + tol))
                else:
                    rows.append((a_aux[i], "<=", -resid[i] + tol))
            if feasible(LinearSystem.from_rows(self.n_aux, rows)) is not None:
                return f"violates: {self.row_text(int(drop))}"
        return "no assignment of hidden variables satisfies the coupled rows"

    def row_text(self, i: int) -> str:
        terms = []
        for c, name in zip(self.a[i], self.var_names):
            if c == 0.0:
                continue
            if c == 1.0:
                terms.append(f"+ {name}")
            elif c == -1.0:
                terms.append(f"- {name}")
            else:
                terms.append(f"{'+' if c > 0 else '-'} {abs(c):g}*{name}")
        lhs = " ".join(terms).lstrip("+ ") or "0"
        rel = "=" if self.is_eq[i] else "<="
        return f"{lhs} {rel} {self.b[i] + 0.0:g}"


def _unique_aux_names(domains, n_aux: int, given: Optional[tuple]) -> tuple[str, ...]:
    """Auxiliary display names, deduplicated against coordinates and each other."""
    taken = set()
    for i, d in enumerate(domains):
        for nm in coord_names(d):
            taken.add(nm)
            taken.add(f"f{i}.{nm}")
    out = []
    k = 0
    for j in range(n_aux):
        nm = given[j] if given is not None and j < len(given) else None
        if nm is None:
            nm = f"aux{k}"
            k += 1
        while nm in taken:
            nm += "_"
        taken.add(nm)
        out.append(nm)
    return tuple(out)


def _carrier_block(domains: Sequence[Domain]) -> tuple[list, list, list]:
    """Carrier rows of the continuous factors, embedded in the product space."""
    n_base = sum(continuous_dim(d) for d in domains)
    rows_a, rows_eq, rows_b = [], [], []
    off = 0
    for d in domains:
        w = continuous_dim(d)
        if w:
            for coeffs, rel, rhs in d.carrier_rows():
                full = np.zeros(n_base)
                full[off:off + w] = coeffs
                rows_a.append(full)
                rows_eq.append(rel == "=")
                rows_b.append(rhs)
        off += w
    return rows_a, rows_eq, rows_b


def _finalize(
    domains, n_aux, rows_a, rows_eq, rows_b, finite_parts, path_parts, aux_names=None
) -> Cell:
    n = sum(continuous_dim(d) for d in domains) + n_aux
    a = np.vstack(rows_a) if rows_a else np.zeros((0, n))
    if a.shape[1] != n:
        pad = np.zeros((a.shape[0], n - a.shape[1]))
        a = np.hstack([a, pad])
    finite_parts = dict(finite_parts)
    path_parts = dict(path_parts)
    for idx, d in enumerate(domains):
        if isinstance(d, FiniteSemilattice) and idx not in finite_parts:
            finite_parts[idx] = frozenset(d.elements)
        if isinstance(d, PathDomain) and idx not in path_parts:
            path_parts[idx] = PathConstraint(full((d.loc,)), full((d.loc,)), 0.0, False)
    return Cell(
        tuple(domains),
        n_aux,
        a,
        np.asarray(rows_eq, dtype=bool),
        np.asarray(rows_b, dtype=float),
        finite_parts,
        path_parts,
        tuple(aux_names) if aux_names is not None else None,
    )


def full(domains: Sequence[Domain]) -> Cell:
    """The whole product space as a cell (carrier rows only)."""
    rows_a, rows_eq, rows_b = _carrier_block(domains)
    return _finalize(domains, 0, rows_a, rows_eq, rows_b, {}, {})


def unit_cell() -> Cell:
    """The unique cell over the empty product (a scalar 'true')."""
    return _finalize((), 0, [], [], [], {}, {})


def from_inequalities(domain: Domain, constraints: Sequence[Row]) -> Cell:
    """A region of one continuous domain cut out by linear rows.

    Rows are over the domain's coordinates; the carrier is always included.
    Contradictory rows simply give an empty cell.
    """
    if not isinstance(domain, ContinuousDomain):
        raise ShapeMismatch("from_inequalities needs a continuous domain")
    rows_a, rows_eq, rows_b = _carrier_block((domain,))
    for coeffs, rel, rhs in constraints:
        v = np.asarray(coeffs, dtype=float)
        if v.shape != (domain.dim,):
            raise DimensionMismatch(
                f"constraint has {v.shape} coefficients for a {domain.dim}-dim domain"
            )
        rows_a.append(v)
        rows_eq.append(rel == "=")
        rows_b.append(float(rhs))
    return _finalize((domain,), 0, rows_a, rows_eq, rows_b, {}, {})


def hull(domain: Domain, points: Sequence[Sequence[float]]) -> Cell:
    """The convex hull of finitely many points, as a cell with weight auxiliaries.

    Encodes x = sum_i lam_i v_i with lam >= 0, sum lam = 1.
    """
    if not isinstance(domain, ContinuousDomain):
        raise ShapeMismatch("hull needs a continuous domain")
    vs = [np.asarray(p, dtype=float) for p in points]
    if not vs:
        raise DimensionMismatch("hull needs at least one point")
    for v in vs:
        if v.shape != (domain.dim,):
            raise DimensionMismatch(
                f"hull point of dimension {v.shape} in {domain.dim}-dim domain"
            )
    k = len(vs)
    dim = domain.dim
    rows_a, rows_eq, rows_b = _carrier_block((domain,))
    rows_a = [np.concatenate([r, np.zeros(k)]) for r in rows_a]
    v_mat = np.vstack(vs)  # (k, dim)
    for i in range(dim):
        row = np.zeros(dim + k)
        row[i] = 1.0
        row[dim:] = -v_mat[:, i]
        rows_a.append(row)
        rows_eq.append(True)
        rows_b.append(0.0)
    for j in range(k):
        row = np.zeros(dim + k)
        row[dim + j] = -1.0
        rows_a.append(row)
        rows_eq.append(False)
        rows_b.append(0.0)
    row = np.zeros(dim + k)
    row[dim:] = 1.0
    rows_a.append(row)
    rows_eq.append(True)
    rows_b.append(1.0)
    names = [f"lam{j}" for j in range(k)]
    return _finalize((domain,), k, rows_a, rows_eq, rows_b, {}, {}, aux_names=names)


def _embed_columns(cell: Cell, base_map: np.ndarray, aux_off: int, width: int) -> np.ndarray:
    """Re-lay a cell's rows into a wider variable space.

    ``base_map[i]`` is the destination column of the cell's i-th base
    variable; its auxiliaries land at ``aux_off``.
    """
    out = np.zeros((cell.a.shape[0], width))
    if cell.n_base:
        out[:, base_map] = cell.a[:, : cell.n_base]
    if cell.n_aux:
        out[:, aux_off:aux_off + cell.n_aux] = cell.a[:, cell.n_base:]
    return out


def intersect(a: Cell, b: Cell) -> Cell:
    """Conjunction of two cells over the same product of domains."""
    if a.domains != b.domains:
        raise ShapeMismatch("cells have different domain shapes")
    n_base = a.n_base
    width = n_base + a.n_aux + b.n_aux
    ident = np.arange(n_base)
    rows = np.vstack([
        _embed_columns(a, ident, n_base, width),
        _embed_columns(b, ident, n_base + a.n_aux, width),
    ])
    is_eq = np.concatenate([a.is_eq, b.is_eq])
    rhs = np.concatenate([a.b, b.b])
    finite = {}
    for idx in set(a.finite_parts) | set(b.finite_parts):
        finite[idx] = a.finite_parts[idx] & b.finite_parts[idx]
    paths = {}
    for idx in set(a.path_parts) | set(b.path_parts):
        m = a.path_parts[idx].merged(b.path_parts[idx])
        if m is None:
            d = a.domains[idx]
            empty = from_inequalities(d.loc, [(np.zeros(d.loc.dim), "<=", -1.0)])
            m = PathConstraint(empty, empty, a.path_parts[idx].t_max, True)
        paths[idx] = m
    names = a.var_names[a.n_base:] + b.var_names[b.n_base:]
    return _finalize(
        a.domains, a.n_aux + b.n_aux, list(rows), list(is_eq), list(rhs), finite, paths,
        aux_names=names,
    )


def product(a: Cell, b: Cell) -> Cell:
    """Cartesian/tensor product: domains concatenate, constraints union disjointly."""
    domains = a.domains + b.domains
    n_base = a.n_base + b.n_base
    width = n_base + a.n_aux + b.n_aux
    rows = np.vstack([
        _embed_columns(a, np.arange(a.n_base), n_base, width),
        _embed_columns(b, a.n_base + np.arange(b.n_base), n_base + a.n_aux, width),
    ])
    is_eq = np.concatenate([a.is_eq, b.is_eq])
    rhs = np.concatenate([a.b, b.b])
    shift = len(a.domains)
    finite = dict(a.finite_parts)
    finite.update({idx + shift: part for idx, part in b.finite_parts.items()})
    paths = dict(a.path_parts)
    paths.update({idx + shift: pc for idx, pc in b.path_parts.items()})
    names = a.var_names[a.n_base:] + b.var_names[b.n_base:]
    return _finalize(
        domains, a.n_aux + b.n_aux, list(rows), list(is_eq), list(rhs), finite, paths,
        aux_names=names,
    )


def hull_union(cells: Sequence[Cell]) -> Cell:
    """Convex hull of a union of bounded continuous cells.

    Uses the disjunctive encoding x = sum_i u_i with each u_i in lam_i * C_i
    and lam a probability vector; exact because every carrier here is bounded.
    Only defined for purely continuous shapes.
    """
    cells = list(cells)
    if not cells:
        raise ShapeMismatch("hull_union needs at least one cell")
    domains = cells[0].domains
    for c in cells:
        if c.domains != domains:
            raise ShapeMismatch("cells have different domain shapes")
        if c.finite_parts or c.path_parts:
            raise ShapeMismatch("hull_union supports continuous factors only")
    if len(cells) == 1:
        return cells[0]
    n = cells[0].n_base
    k = len(cells)
    # Columns: x (n) | per cell: u_i (n), aux_i | lambda (k).
    aux_width = sum(n + c.n_aux for c in cells) + k
    width = n + aux_width
    lam_off = width - k
    rows_a, rows_eq, rows_b = [], [], []
    off = n
    for i, c in enumerate(cells):
        u_cols = np.arange(off, off + n)
        block = _embed_columns(c, u_cols, off + n, width)
        block[:, lam_off + i] = -c.b  # scale the rhs by lambda_i
        for r, eq in zip(block, c.is_eq):
            rows_a.append(r)
            rows_eq.append(bool(eq))
            rows_b.append(0.0)
        off += n + c.n_aux
    for j in range(n):
        row = np.zeros(width)
        row[j] = 1.0
        for i in range(k):
            row[n + sum(n + c.n_aux for c in cells[:i]) + j] = -1.0
        rows_a.append(row)
        rows_eq.append(True)
        rows_b.append(0.0)
    for i in range(k):
        row = np.zeros(width)
        row[lam_off + i] = -1.0
        rows_a.append(row)
        rows_eq.append(False)
        rows_b.append(0.0)
    row = np.zeros(width)
    row[lam_off:] = 1.0
    rows_a.append(row)
    rows_eq.append(True)
    rows_b.append(1.0)
    names = []
    base_names = [nm for d in domains for nm in coord_names(d)]
    for i, c in enumerate(cells):
        names.extend(f"u{i}.{nm}" for nm in base_names)
        names.extend(f"u{i}.{nm}" for nm in c.var_names[c.n_base:])
    names.extend(f"lam{i}" for i in range(k))
    return _finalize(domains, aux_width, rows_a, rows_eq, rows_b, {}, {}, aux_names=names)


def contains(cell: Cell, point: Sequence, tol: float = FEAS_TOL) -> bool:
    """Module-level alias for :meth:`Cell.contains`."""
    return cell.contains(point, tol)


# ---------------------------------------------------------------------------
# point mixing and sampling
# ---------------------------------------------------------------------------


def mix_points(domains: Sequence[Domain], weights: Sequence[float], points: Sequence) -> tuple:
    """Mix whole product-space points factor by factor."""
    out = []
    for idx, d in enumerate(domains):
        comps = [p[idx] for p in points]
        if isinstance(d, PathDomain):
            w = np.asarray(weights, dtype=float)
            t = float(sum(wi * c.t_start for wi, c in zip(w, comps)))
            wp = sum(wi * c.waypoints for wi, c in zip(w, comps))
            out.append(Trajectory(min(t, 0.0), wp))
        else:
            out.append(mix(d, weights, comps))
    return tuple(out)


def _vertices(cell: Cell, n_dirs: int) -> list[np.ndarray]:
    # Directions come from a private fixed-seed stream so that cache warmth
    # never changes a caller's rng sequence (samples must be reproducible).
    if not hasattr(cell, "_vertex_cache"):
        object.__setattr__(cell, "_vertex_cache", {})
    cache = cell._vertex_cache
    key = n_dirs
    if key in cache:
        return cache[key]
    rng = np.random.default_rng(0x5EED)
    system = cell.system()
    verts = []
    w = cell._continuous_witness()
    if w is not None:
        verts.append(w)
    for _ in range(n_dirs):
        direction = rng.standard_normal(cell.n_vars)
        res = maximize(direction, system)
        if res.status == "optimal":
            verts.append(res.x)
    cache[key] = verts
    return verts


def sample_point(cell: Cell, rng: np.random.Generator) -> Optional[tuple]:
    """Draw a member of the cell, or None if it is empty.

    Continuous coordinates come from Dirichlet mixtures of LP vertices (not
    uniform, but supported everywhere in the polytope); finite factors pick a
    uniformly random allowed element; trajectories get feasibility-sampled
    endpoints and uniform interior waypoints.
    """
    if cell.is_empty():
        return None
    x = None
    if cell.n_vars:
        verts = _vertices(cell, max(8, 2 * cell.n_vars))
        if not verts:
            return None
        weights = rng.dirichlet(np.ones(len(verts)))
        x = weights @ np.vstack(verts)
    out = []
    for idx, d in enumerate(cell.domains):
        if isinstance(d, FiniteSemilattice):
            part = sorted(cell.finite_parts[idx])
            if not part:
                return None
            out.append(part[rng.integers(len(part))])
        elif isinstance(d, PathDomain):
            pc = cell.path_parts[idx]
            traj = _sample_trajectory(d, pc, rng)
            if traj is None:
                return None
            out.append(traj)
        else:
            out.append(x[cell.factor_slices[idx]])
    return tuple(out)


def _sample_trajectory(d: PathDomain, pc: PathConstraint, rng) -> Optional[Trajectory]:
    if pc.point:
        both = intersect(pc.start, pc.end)
        p = sample_point(both, rng)
        if p is None:
            return None
        return Trajectory(0.0, np.tile(p[0], (d.k, 1)))
    start = sample_point(pc.start, rng)
    end = sample_point(pc.end, rng)
    if start is None or end is None:
        return None
    t_start = pc.t_max - rng.uniform(0.0, 8.0)
    if t_start > 0.0:
        t_start = 0.0
    lo = np.array([b[0] for b in d.loc.bounds]) if isinstance(d.loc, Box) else None
    pts = np.empty((d.k, d.loc_dim))
    pts[0] = start[0]
    pts[-1] = end[0]
    for i in range(1, d.k - 1):
        if lo is not None:
            hi = np.array([b[1] for b in d.loc.bounds])
            pts[i] = rng.uniform(lo, hi)
        else:
            interior = sample_point(full((d.loc,)), rng)
            pts[i] = interior[0]
    return Trajectory(t_start, pts)
