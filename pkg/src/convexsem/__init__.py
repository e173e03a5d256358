"""convexsem: pregroup-grammar sentence evaluation over convex conceptual spaces.

Phrases are parsed with a pregroup grammar, words denote unions of convex
regions (relations between convex algebras), and the grammar's reduction
diagram is interpreted by wiring those regions together with cups, caps and
Frobenius spiders.  Membership and emptiness questions reduce to small linear
programs.
"""

from .errors import (
    CarrierError,
    ConvexsemError,
    DanglingName,
    DegenerateSpider,
    DimensionMismatch,
    DomainMismatch,
    EmptyMeaning,
    LatticeError,
    MalformedSuffix,
    NoReduction,
    NumericalFailure,
    ParseError,
    ShapeError,
    ShapeMismatch,
    UnknownAtom,
    UnknownWord,
    WeightSumError,
)
from .feasibility import LinearSystem, LPResult, feasible, maximize
from .pregroup import PregroupType, SimpleType, SpiderGroup, Wiring, adjoint, contractible, parse_type, reduce
from .convexalg import (
    Box,
    Cell,
    FiniteSemilattice,
    HalfspaceRegion,
    PathConstraint,
    PathDomain,
    Trajectory,
    VertexHull,
    contains,
    from_inequalities,
    full,
    hull,
    hull_union,
    intersect,
    join_closure,
    mix,
    mix_points,
    mix_trajectories,
    product,
    sample_point,
)
from .relsem import (
    Relation,
    SemanticObject,
    cap,
    check_convexity,
    cup,
    evaluate,
    probe_equal,
    probe_points,
    spider,
    which_wiring,
)
from .lexicon import LexiconEntry, World, builtin_food, builtin_robot, load, serialize

__version__ = "0.1.0"

__all__ = [
    "Box",
    "CarrierError",
    "Cell",
    "ConvexsemError",
    "DanglingName",
    "DegenerateSpider",
    "DimensionMismatch",
    "DomainMismatch",
    "EmptyMeaning",
    "FiniteSemilattice",
    "HalfspaceRegion",
    "LatticeError",
    "LexiconEntry",
    "LinearSystem",
    "LPResult",
    "MalformedSuffix",
    "NoReduction",
    "NumericalFailure",
    "ParseError",
    "PathConstraint",
    "PathDomain",
    "PregroupType",
    "Relation",
    "SemanticObject",
    "ShapeError",
    "ShapeMismatch",
    "SimpleType",
    "SpiderGroup",
    "Trajectory",
    "UnknownAtom",
    "UnknownWord",
    "VertexHull",
    "WeightSumError",
    "Wiring",
    "World",
    "adjoint",
    "builtin_food",
    "builtin_robot",
    "cap",
    "check_convexity",
    "contains",
    "contractible",
    "cup",
    "evaluate",
    "feasible",
    "from_inequalities",
    "full",
    "hull",
    "hull_union",
    "intersect",
    "join_closure",
    "load",
    "maximize",
    "mix",
    "mix_points",
    "mix_trajectories",
    "parse_type",
    "probe_equal",
    "probe_points",
    "product",
    "reduce",
    "sample_point",
    "serialize",
    "spider",
    "which_wiring",
]
