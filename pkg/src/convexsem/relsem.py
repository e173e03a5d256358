"""Convex relations and the evaluation of wiring diagrams.

A :class:`Relation` is a state in the category of convex algebras and
convexity-respecting relations: a finite union of cells over a product of
domains.  Cups, caps and Frobenius spiders are the structural relations that
equate all attached wires; :func:`evaluate` interprets a grammar's reduction
wiring by conjoining word cells along those equalities and projecting onto
the output wires.

Quantified-away variables are kept as auxiliaries inside the output cells
(projection by auxiliary), so composition never eliminates variables and
membership in a result costs one LP.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce as _functools_reduce
from typing import Optional, Sequence

import numpy as np

from . import convexalg as ca
from .convexalg import (
    Box,
    Cell,
    ContinuousDomain,
    Domain,
    FiniteSemilattice,
    PathConstraint,
    PathDomain,
    Trajectory,
    VertexHull,
    continuous_dim,
)
from .errors import DegenerateSpider, DomainMismatch, ShapeMismatch
from .feasibility import LinearSystem, feasible
from .pregroup import SpiderGroup, Wiring


@dataclass(frozen=True)
class SemanticObject:
    """The interpretation of a grammatical type: an ordered list of domains."""

    factors: tuple[Domain, ...]

    def __len__(self) -> int:
        return len(self.factors)

    def tensor(self, other: "SemanticObject") -> "SemanticObject":
        return SemanticObject(self.factors + other.factors)

    @property
    def n_continuous(self) -> int:
        return sum(continuous_dim(d) for d in self.factors)


@dataclass(eq=False)
class Relation:
    """A finite union of cells typed by a semantic object.

    ``convexity_status`` is 'verified' when convexity is known (single cells
    are projections of polyhedra, hence convex), 'assumed' when declared but
    unchecked, 'unknown' otherwise.
    """

    shape: SemanticObject
    cells: tuple[Cell, ...]
    convexity_status: str = "unknown"

    def __post_init__(self):
        for c in self.cells:
            if c.domains != self.shape.factors:
                raise ShapeMismatch("cell domains differ from the relation's shape")

    def is_empty(self, tol: float = ca.FEAS_TOL) -> bool:
        return all(c.is_empty(tol) for c in self.cells)

    def contains(self, point: Sequence, tol: float = ca.FEAS_TOL) -> bool:
        return any(c.contains(point, tol) for c in self.cells)

    def finite_enumeration(self) -> Optional[frozenset]:
        """The denotation as a set of element tuples, for all-finite shapes."""
        if not all(isinstance(d, FiniteSemilattice) for d in self.shape.factors):
            return None
        out = set()
        for c in self.cells:
            if c.is_empty():
                continue
            parts = [sorted(c.finite_parts[i]) for i in range(len(c.domains))]
            out.update(itertools.product(*parts))
        return frozenset(out)

    def to_text(self) -> str:
        lines = [f"relation over {len(self.shape.factors)} factor(s), {len(self.cells)} cell(s)"]
        for k, c in enumerate(self.cells):
            lines.append(f"cell {k}:")
            for i in range(c.a.shape[0]):
                lines.append(f"  {c.row_text(i)}")
            for idx in sorted(c.finite_parts):
                elems = ", ".join(sorted(c.finite_parts[idx]))
                lines.append(f"  finite[{idx}]: {{{elems}}}")
            for idx in sorted(c.path_parts):
                pc = c.path_parts[idx]
                kind = "point" if pc.point else f"t_max={pc.t_max:g}"
                lines.append(f"  path[{idx}]: {kind}, start/end region cells attached")
        lines.append(f"convexity: {self.convexity_status}")
        return "\n".join(lines)

    def summary(self) -> dict:
        cells = []
        for c in self.cells:
            cells.append(
                {
                    "constraints": [c.row_text(i) for i in range(c.a.shape[0])],
                    "finite_parts": {
                        str(idx): sorted(part) for idx, part in sorted(c.finite_parts.items())
                    },
                    "path_parts": {
                        str(idx): {
                            "point": pc.point,
                            "t_max": pc.t_max,
                            "start": [pc.start.row_text(i) for i in range(pc.start.a.shape[0])],
                            "end": [pc.end.row_text(i) for i in range(pc.end.a.shape[0])],
                        }
                        for idx, pc in sorted(c.path_parts.items())
                    },
                }
            )
        out = {"cells": cells, "convexity_status": self.convexity_status}
        fe = self.finite_enumeration()
        if fe is not None:
            out["finite_enumeration"] = sorted(",".join(t) for t in fe)
        return out


def empty_relation(shape: SemanticObject) -> Relation:
    return Relation(shape, (), "verified")


def scalar_relation(nonempty_count: int) -> Relation:
    """A relation over the empty product: 'true' iff any cell survived."""
    return Relation(
        SemanticObject(()), tuple(ca.unit_cell() for _ in range(nonempty_count)), "verified"
    )


# ---------------------------------------------------------------------------
# structural relations: cups, caps, spiders
# ---------------------------------------------------------------------------


def _diagonal_cells(d: SemanticObject, copies: int) -> list[Cell]:
    """Cells of the relation equating ``copies`` wires of object d.

    Continuous factors get coordinatewise equality rows between copies;
    finite factors are enumerated (one cell per element, all copies pinned).
    Path factors cannot be materialized this way - evaluate() handles path
    identification through constraint merging instead.
    """
    for f in d.factors:
        if isinstance(f, PathDomain):
            raise ShapeMismatch(
                "cups/caps/spiders over path domains exist only inside evaluate()"
            )
    domains = d.factors * copies
    base = ca.full(domains)
    n_total = base.n_base
    width = n_total
    per_copy = d.n_continuous
    rows_a = list(base.a)
    rows_eq = list(base.is_eq)
    rows_b = list(base.b)
    if copies > 1 and per_copy:
        for c in range(1, copies):
            for j in range(per_copy):
                row = np.zeros(width)
                row[j] = 1.0
                row[c * per_copy + j] = -1.0
                rows_a.append(row)
                rows_eq.append(True)
                rows_b.append(0.0)
    finite_idx = [i for i, f in enumerate(d.factors) if isinstance(f, FiniteSemilattice)]
    cells = []
    if finite_idx and copies > 1:
        pools = [d.factors[i].elements for i in finite_idx]
        for assignment in itertools.product(*pools):
            parts = {}
            for c in range(copies):
                for i, e in zip(finite_idx, assignment):
                    parts[c * len(d.factors) + i] = frozenset({e})
            cells.append(
                ca._finalize(domains, 0, list(rows_a), list(rows_eq), list(rows_b), parts, {})
            )
    else:
        cells.append(ca._finalize(domains, 0, rows_a, rows_eq, rows_b, {}, {}))
    return cells


def cup(d: SemanticObject) -> Relation:
    """The effect identifying two copies of d: {((a, a), *)}."""
    return Relation(SemanticObject(d.factors * 2), tuple(_diagonal_cells(d, 2)), "verified")


def cap(d: SemanticObject) -> Relation:
    """The state placing equal values on two copies of d: {(*, (a, a))}."""
    return Relation(SemanticObject(d.factors * 2), tuple(_diagonal_cells(d, 2)), "verified")


def spider(d: SemanticObject, m: int, n: int) -> Relation:
    """The Frobenius multi-wire with m inputs and n outputs on object d.

    All m + n wire copies are constrained equal; (1,1) is the identity,
    (2,0) the cup, (0,2) the cap, (2,1) the merge, (1,0) the delete.
    """
    if m < 0 or n < 0 or m + n < 1:
        raise DegenerateSpider("spider needs at least one leg")
    copies = m + n
    return Relation(SemanticObject(d.factors * copies), tuple(_diagonal_cells(d, copies)), "verified")


# ---------------------------------------------------------------------------
# evaluation of wiring diagrams
# ---------------------------------------------------------------------------


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def evaluate(
    wiring: Wiring,
    words: Sequence[Relation],
    wire_objects: Sequence[SemanticObject],
    tol: float = ca.FEAS_TOL,
) -> Relation:
    """Interpret a reduction wiring over the given word relations.

    ``wire_objects`` assigns a semantic object to each wire position (the
    image of its simple type); their factor concatenation must equal the
    concatenation of the words' shapes.  For each choice of one cell per
    word, connected positions are linked (equality rows for continuous
    factors, intersected subsets for finite ones, merged endpoint constraints
    for paths); infeasible combinations are dropped and the survivors are
    projected onto the output positions.
    """
    wiring.validate()
    if len(wire_objects) != wiring.n_wires:
        raise ShapeMismatch(
            f"wiring has {wiring.n_wires} wires but {len(wire_objects)} objects were given"
        )
    flat: list[Domain] = [f for obj in wire_objects for f in obj.factors]
    word_flat: list[Domain] = [f for rel in words for f in rel.shape.factors]
    if flat != word_flat:
        raise ShapeMismatch("concatenated word shapes do not match the wire objects")

    spans = []
    off = 0
    for obj in wire_objects:
        spans.append(range(off, off + len(obj.factors)))
        off += len(obj.factors)

    uf = _UnionFind(wiring.n_wires)
    for i, j in wiring.cups:
        if wire_objects[i] != wire_objects[j]:
            raise DomainMismatch(f"cup ({i},{j}) connects unequal objects")
        uf.union(i, j)
    for g in wiring.spiders:
        ps = sorted(g.positions)
        for p in ps[1:]:
            if wire_objects[p] != wire_objects[ps[0]]:
                raise DomainMismatch(f"spider {ps} connects unequal objects")
            uf.union(ps[0], p)

    # Factor-level equivalence classes, aligned positionally within a component.
    comp_wires: dict[int, list[int]] = {}
    for w in range(wiring.n_wires):
        comp_wires.setdefault(uf.find(w), []).append(w)
    factor_class: dict[int, list[int]] = {}
    for wires in comp_wires.values():
        width = len(spans[wires[0]])
        for k in range(width):
            members = [spans[w][k] for w in wires]
            for f in members:
                factor_class[f] = members

    n_factors = len(flat)
    factor_off = np.zeros(n_factors + 1, dtype=int)
    for f, d in enumerate(flat):
        factor_off[f + 1] = factor_off[f] + continuous_dim(d)
    n_base = int(factor_off[-1])

    word_factor_start = []
    off = 0
    for rel in words:
        word_factor_start.append(off)
        off += len(rel.shape.factors)

    out_factor_idx: list[int] = [f for p in wiring.outputs for f in spans[p]]
    out_domains = tuple(flat[f] for f in out_factor_idx)

    survivors: list[Cell] = []
    for combo in itertools.product(*[rel.cells for rel in words]):
        cell = _assemble(
            combo, words, word_factor_start, flat, factor_off, n_base,
            factor_class, out_factor_idx, tol,
        )
        if cell is not None:
            survivors.extend(_enumerate_finite(cell))

    status = "verified" if len(survivors) <= 1 else "unknown"
    return Relation(SemanticObject(out_domains), tuple(survivors), status)


def _assemble(
    combo, words, word_factor_start, flat, factor_off, n_base, factor_class,
    out_factor_idx, tol,
) -> Optional[Cell]:
    n_aux_total = sum(c.n_aux for c in combo)
    width = n_base + n_aux_total
    blocks = []
    eqs = []
    rhss = []
    aux_off = n_base
    cell_of_factor: dict[int, Cell] = {}
    local_of_factor: dict[int, int] = {}
    for w, c in enumerate(combo):
        start_f = word_factor_start[w]
        for lf in range(len(c.domains)):
            cell_of_factor[start_f + lf] = c
            local_of_factor[start_f + lf] = lf
        base_cols = np.arange(factor_off[start_f], factor_off[start_f] + c.n_base)
        blocks.append(ca._embed_columns(c, base_cols, aux_off, width))
        eqs.append(c.is_eq)
        rhss.append(c.b)
        aux_off += c.n_aux

    link_rows = []
    seen_classes = set()
    for members in factor_class.values():
        key = tuple(members)
        if key in seen_classes or len(members) < 2:
            continue
        seen_classes.add(key)
        d = flat[members[0]]
        if isinstance(d, ContinuousDomain):
            rep = members[0]
            for other in members[1:]:
                for j in range(d.dim):
                    row = np.zeros(width)
                    row[factor_off[rep] + j] = 1.0
                    row[factor_off[other] + j] = -1.0
                    link_rows.append(row)

    finite_class_part: dict[int, frozenset] = {}
    path_class_pc: dict[int, PathConstraint] = {}
    for members in factor_class.values():
        rep = members[0]
        if rep in finite_class_part or rep in path_class_pc:
            continue
        d = flat[rep]
        if isinstance(d, FiniteSemilattice):
            part = _functools_reduce(
                frozenset.__and__,
                (cell_of_factor[f].finite_parts[local_of_factor[f]] for f in members),
            )
            if not part:
                return None
            for f in members:
                finite_class_part[f] = part
        elif isinstance(d, PathDomain):
            pc = None
            for f in members:
                other = cell_of_factor[f].path_parts[local_of_factor[f]]
                pc = other if pc is None else pc.merged(other)
                if pc is None:
                    return None
            if pc.is_infeasible(tol):
                return None
            for f in members:
                path_class_pc[f] = pc

    a = np.vstack(blocks + [np.vstack(link_rows)]) if link_rows else (
        np.vstack(blocks) if blocks else np.zeros((0, width))
    )
    is_eq = np.concatenate(eqs + [np.ones(len(link_rows), dtype=bool)]) if link_rows else (
        np.concatenate(eqs) if eqs else np.zeros(0, dtype=bool)
    )
    b = np.concatenate(rhss + [np.zeros(len(link_rows))]) if link_rows else (
        np.concatenate(rhss) if rhss else np.zeros(0)
    )
    if feasible(LinearSystem(width, a, is_eq, b)) is None:
        return None

    # Project onto the output factors: their base columns lead, everything
    # else (hidden base + all word auxiliaries) becomes auxiliary.
    out_cols = [
        factor_off[f] + j for f in out_factor_idx for j in range(continuous_dim(flat[f]))
    ]
    other_cols = [c for c in range(width) if c not in set(out_cols)]
    out_domains = tuple(flat[f] for f in out_factor_idx)
    n_out_base = len(out_cols)
    finite_parts = {}
    path_parts = {}
    for new_idx, f in enumerate(out_factor_idx):
        if f in finite_class_part:
            finite_parts[new_idx] = finite_class_part[f]
        elif isinstance(flat[f], FiniteSemilattice):
            finite_parts[new_idx] = cell_of_factor[f].finite_parts[local_of_factor[f]]
        if f in path_class_pc:
            path_parts[new_idx] = path_class_pc[f]
        elif isinstance(flat[f], PathDomain):
            path_parts[new_idx] = cell_of_factor[f].path_parts[local_of_factor[f]]
    if n_out_base == 0:
        return ca._finalize(out_domains, 0, [], [], [], finite_parts, path_parts)
    joint_names = [
        f"f{f}.{nm}" for f, d in enumerate(flat) for nm in ca.coord_names(d)
    ]
    for w, c in enumerate(combo):
        joint_names.extend(f"w{w}.{nm}" for nm in c.var_names[c.n_base:])
    perm = out_cols + other_cols
    return Cell(
        out_domains,
        width - n_out_base,
        a[:, perm],
        is_eq,
        b,
        finite_parts,
        path_parts,
        tuple(joint_names[c] for c in other_cols),
    )


def _enumerate_finite(cell: Cell) -> list[Cell]:
    """Split multi-element finite parts into singleton cells (eager outputs)."""
    multi = {i: sorted(p) for i, p in cell.finite_parts.items() if len(p) > 1}
    if not multi:
        return [cell]
    out = []
    keys = sorted(multi)
    for assignment in itertools.product(*[multi[k] for k in keys]):
        parts = dict(cell.finite_parts)
        for k, e in zip(keys, assignment):
            parts[k] = frozenset({e})
        out.append(
            Cell(cell.domains, cell.n_aux, cell.a, cell.is_eq, cell.b, parts, cell.path_parts)
        )
    return out


def which_wiring(subject_len: int, verb_len: int, object_len: int) -> Wiring:
    """The built-in relative-pronoun diagram for 'X which VERB Y'.

    The subject noun, the verb's subject wire and the single output are fused
    by a merge spider; the verb's sentence wire is deleted; the verb's object
    wire is cupped with the object noun.
    """
    if subject_len != 1 or verb_len != 3 or object_len != 1:
        raise ShapeMismatch(
            "relative-pronoun wiring expects a 1-wire subject, a 3-wire "
            "transitive verb and a 1-wire object"
        )
    return Wiring(
        n_wires=5,
        cups=frozenset({(3, 4)}),
        spiders=(SpiderGroup(frozenset({0, 1}), 1), SpiderGroup(frozenset({2}), 0)),
        outputs=(0,),
        simples=None,
    )


# ---------------------------------------------------------------------------
# probing and convexity checking
# ---------------------------------------------------------------------------


def _factor_pool(d: Domain, n_random: int, rng: np.random.Generator) -> list:
    """Salient plus random values for one factor, all inside the carrier."""
    if isinstance(d, FiniteSemilattice):
        return list(d.elements)
    if isinstance(d, PathDomain):
        lo = np.array([b[0] for b in d.loc.bounds]) if isinstance(d.loc, Box) else np.zeros(d.loc_dim)
        hi = np.array([b[1] for b in d.loc.bounds]) if isinstance(d.loc, Box) else np.ones(d.loc_dim)
        pool = []
        for _ in range(max(4, n_random)):
            t = -float(rng.uniform(ca.STRICT_EPS, 6.0))
            pts = rng.uniform(lo, hi, size=(d.k, d.loc_dim))
            pool.append(Trajectory(t, pts))
        return pool
    if isinstance(d, VertexHull):
        pool = [np.eye(d.dim)[i] for i in range(d.dim)]
        pool.append(np.full(d.dim, 1.0 / d.dim))
        for _ in range(n_random):
            pool.append(rng.dirichlet(np.ones(d.dim)))
        return pool
    if isinstance(d, Box):
        lo = np.array([b[0] for b in d.bounds])
        hi = np.array([b[1] for b in d.bounds])
        grids = [lo, (lo + hi) / 2.0, hi]
        pool = list(grids)
        for _ in range(n_random):
            pool.append(rng.uniform(lo, hi))
        return pool
    pool = []
    for _ in range(n_random + 4):
        p = ca.sample_point(ca.full((d,)), rng)
        if p is not None:
            pool.append(p[0])
    return pool


def probe_points(obj: SemanticObject, n: int, seed: int = 0) -> list[tuple]:
    """A deterministic mix of grid-like and random probe points for an object.

    Points are drawn per factor from small grids (box corners/midpoints,
    simplex vertices) and carrier-uniform randoms, then combined; finite
    factors cycle through all their elements so they are covered exhaustively.
    """
    rng = np.random.default_rng(seed)
    pools = [_factor_pool(d, max(4, n // 8), rng) for d in obj.factors]
    probes = []
    for i in range(n):
        point = []
        for pool in pools:
            if i < len(pool) * 2:  # sweep the grid part first
                point.append(pool[i % len(pool)])
            else:
                point.append(pool[rng.integers(len(pool))])
        probes.append(tuple(point))
    return probes


@dataclass(frozen=True)
class ProbeVerdict:
    equal: bool
    counterexample: Optional[tuple]
    checked: int

    def __bool__(self) -> bool:
        return self.equal


def probe_equal(
    a: Relation, b: Relation, probes: Sequence[tuple], tol: float = ca.FEAS_TOL
) -> ProbeVerdict:
    """Compare two relations on the given probe points.

    Shapes whose factors are all finite are compared exactly by enumeration
    instead; otherwise membership is tested probe by probe and the first
    disagreement is reported.
    """
    if a.shape != b.shape:
        raise ShapeMismatch("relations have different shapes")
    ea, eb = a.finite_enumeration(), b.finite_enumeration()
    if ea is not None and eb is not None:
        if ea == eb:
            return ProbeVerdict(True, None, len(ea))
        diff = sorted(ea ^ eb)[0]
        return ProbeVerdict(False, diff, len(ea | eb))
    for k, p in enumerate(probes):
        if a.contains(p, tol) != b.contains(p, tol):
            return ProbeVerdict(False, p, k + 1)
    return ProbeVerdict(True, None, len(probes))


@dataclass(frozen=True)
class ConvexityReport:
    verdict: str  # 'verified' | 'counterexample' | 'inconclusive'
    counterexample: Optional[tuple] = None

    def __str__(self):
        return self.verdict


def check_convexity(r: Relation, samples: int, seed: int = 0) -> ConvexityReport:
    """Sample midpoints of member pairs and test membership in the union.

    Single-cell relations are convex by construction (coordinate projections
    of polyhedra) and report 'verified' without sampling.  A found midpoint
    outside the union is a counterexample; exhausting the sample budget
    without one is 'inconclusive' (sampling cannot prove convexity of a
    many-cell union).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    live = [c for c in r.cells if not c.is_empty()]
    if len(live) <= 1:
        return ConvexityReport("verified")
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        ca_, cb_ = live[rng.integers(len(live))], live[rng.integers(len(live))]
        p = ca.sample_point(ca_, rng)
        q = ca.sample_point(cb_, rng)
        if p is None or q is None:
            continue
        mid = ca.mix_points(r.shape.factors, [0.5, 0.5], [p, q])
        if not r.contains(mid, 1e-7):
            return ConvexityReport("counterexample", (p, q, mid))
    return ConvexityReport("inconclusive")


# ---------------------------------------------------------------------------
# brute-force finite relations (oracles for snake equations and fusion)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FinRel:
    """An extensional relation between finite products, for exhaustive checks."""

    dom: tuple[FiniteSemilattice, ...]
    cod: tuple[FiniteSemilattice, ...]
    pairs: frozenset[tuple[tuple, tuple]]

    @staticmethod
    def carrier(factors: Sequence[FiniteSemilattice]) -> list[tuple]:
        return list(itertools.product(*[f.elements for f in factors]))

    @classmethod
    def identity(cls, factors: Sequence[FiniteSemilattice]) -> "FinRel":
        fs = tuple(factors)
        return cls(fs, fs, frozenset((x, x) for x in cls.carrier(fs)))

    @classmethod
    def cup(cls, factors: Sequence[FiniteSemilattice]) -> "FinRel":
        fs = tuple(factors)
        return cls(fs + fs, (), frozenset(((x + x), ()) for x in cls.carrier(fs)))

    @classmethod
    def cap(cls, factors: Sequence[FiniteSemilattice]) -> "FinRel":
        fs = tuple(factors)
        return cls((), fs + fs, frozenset(((), (x + x)) for x in cls.carrier(fs)))

    @classmethod
    def spider(cls, factors: Sequence[FiniteSemilattice], m: int, n: int) -> "FinRel":
        fs = tuple(factors)
        return cls(
            fs * m,
            fs * n,
            frozenset((x * m, x * n) for x in cls.carrier(fs)),
        )

    def then(self, other: "FinRel") -> "FinRel":
        """Relational composition self ; other (apply self first)."""
        if self.cod != other.dom:
            raise ShapeMismatch("codomain/domain mismatch in finite composition")
        by_mid: dict[tuple, list[tuple]] = {}
        for x, y in self.pairs:
            by_mid.setdefault(y, []).append(x)
        pairs = set()
        for y, z in other.pairs:
            for x in by_mid.get(y, ()):
                pairs.add((x, z))
        return FinRel(self.dom, other.cod, frozenset(pairs))

    def tensor(self, other: "FinRel") -> "FinRel":
        pairs = frozenset(
            (x1 + x2, y1 + y2) for (x1, y1) in self.pairs for (x2, y2) in other.pairs
        )
        return FinRel(self.dom + other.dom, self.cod + other.cod, pairs)


def snake_equations_hold(lattice: FiniteSemilattice) -> bool:
    """Exhaustively verify both snake equations on a one-factor finite object."""
    fs = (lattice,)
    ident = FinRel.identity(fs)
    cap_ = FinRel.cap(fs)
    cup_ = FinRel.cup(fs)
    left = (cap_.tensor(ident)).then(ident.tensor(cup_))
    right = (ident.tensor(cap_)).then(cup_.tensor(ident))
    return left.pairs == ident.pairs and right.pairs == ident.pairs


def finite_relation_pairs(rel: Relation) -> frozenset:
    """Enumerate an all-finite relation's denotation as state tuples."""
    fe = rel.finite_enumeration()
    if fe is None:
        raise ShapeMismatch("relation has non-finite factors")
    return fe
