"""Exception types shared across the package."""


class ConvexsemError(Exception):
    """Base class for all errors raised by this package."""


# --- grammar ---------------------------------------------------------------

class UnknownAtom(ConvexsemError):
    """A type expression uses an atomic symbol not declared in the grammar."""


class MalformedSuffix(ConvexsemError):
    """An adjoint suffix is not of the form ^l, ^r, ^ll, ^rr, ..."""


class NoReduction(ConvexsemError):
    """No cup-only reduction from the given types to the target exists."""


# --- convex algebra --------------------------------------------------------

class WeightSumError(ConvexsemError):
    """Mixing weights do not sum to one (beyond tolerance)."""


class CarrierError(ConvexsemError):
    """A point lies outside the carrier of its domain."""


class DimensionMismatch(ConvexsemError):
    """A vector has the wrong number of coordinates for its domain."""


class ShapeMismatch(ConvexsemError):
    """Two values that must share a shape (domain list) do not."""


class DomainMismatch(ConvexsemError):
    """A wiring connects positions interpreted in unequal domains."""


class DegenerateSpider(ConvexsemError):
    """A spider with zero legs (m = n = 0) was requested."""


# --- numerics --------------------------------------------------------------

class NumericalFailure(ConvexsemError):
    """The LP solver hit its iteration cap or produced an invalid witness."""


# --- lexicon ---------------------------------------------------------------

class ParseError(ConvexsemError):
    """A world document is syntactically malformed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class ShapeError(ConvexsemError):
    """An entry's meaning does not match the image of its pregroup type."""


class LatticeError(ConvexsemError):
    """A join table is not idempotent, commutative and associative."""


class DanglingName(ConvexsemError):
    """An undeclared property or domain name was referenced."""


class UnknownWord(ConvexsemError):
    """A token has no entry in the active world."""


class EmptyMeaning(ConvexsemError):
    """An operation that needs a nonempty relation received an empty one."""
