"""Pregroup types and cup-based type reductions.

A grammatical type is a sequence of simple types, each an atomic symbol with
an adjoint order (0 plain, +1 right adjoint, -1 left adjoint, iterable).
``reduce`` finds the canonical planar cup matching that contracts a sequence
of word types down to a target type, producing a :class:`Wiring` that the
semantics module interprets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import MalformedSuffix, NoReduction, UnknownAtom

DEFAULT_ATOMS = frozenset({"n", "s"})


@dataclass(frozen=True)
class SimpleType:
    """An atomic symbol with an adjoint order z (x^l has z=-1, x^r has z=+1)."""

    base: str
    z: int = 0

    def __str__(self) -> str:
        if self.z < 0:
            return self.base + "^" + "l" * (-self.z)
        if self.z > 0:
            return self.base + "^" + "r" * self.z
        return self.base


@dataclass(frozen=True)
class PregroupType:
    """An element of the free pregroup: a finite sequence of simple types."""

    simples: tuple[SimpleType, ...] = ()

    def __len__(self) -> int:
        return len(self.simples)

    def __iter__(self):
        return iter(self.simples)

    def __matmul__(self, other: "PregroupType") -> "PregroupType":
        return PregroupType(self.simples + other.simples)

    @property
    def is_unit(self) -> bool:
        return not self.simples

    def __str__(self) -> str:
        return " ".join(str(s) for s in self.simples) if self.simples else "1"


def parse_type(text: str, atoms: Optional[frozenset] = None) -> PregroupType:
    """Parse a whitespace-separated type expression like ``"n^r s n^l"``.

    The empty string denotes the unit type.  Suffixes iterate: ``n^ll`` is the
    double left adjoint.
    """
    atoms = DEFAULT_ATOMS if atoms is None else frozenset(atoms)
    simples = []
    for token in text.split():
        base, caret, suffix = token.partition("^")
        if not base:
            raise MalformedSuffix(f"type token {token!r} has no atomic symbol")
        if base not in atoms:
            raise UnknownAtom(f"unknown atomic type {base!r} (declared: {sorted(atoms)})")
        if caret:
            if not suffix or set(suffix) not in ({"l"}, {"r"}):
                raise MalformedSuffix(
                    f"suffix {suffix!r} in {token!r} must repeat a single 'l' or 'r'"
                )
            z = -len(suffix) if suffix[0] == "l" else len(suffix)
        else:
            z = 0
        simples.append(SimpleType(base, z))
    return PregroupType(tuple(simples))


def adjoint(t: PregroupType, side: str) -> PregroupType:
    """Left or right adjoint of a whole type: reverse and shift every order."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    shift = -1 if side == "left" else 1
    return PregroupType(tuple(SimpleType(s.base, s.z + shift) for s in reversed(t.simples)))


def contractible(a: SimpleType, b: SimpleType) -> bool:
    """Whether the adjacent pair ``a b`` contracts to the unit (a cup).

    ``a`` must precede ``b``; the pair contracts exactly when the bases agree
    and b's adjoint order is one above a's (covers both x x^r and x^l x).
    """
    return a.base == b.base and b.z == a.z + 1


@dataclass(frozen=True)
class SpiderGroup:
    """A set of wire positions fused by a Frobenius multi-wire.

    ``out_arity`` 1 means the merged wire survives as an output (listed in
    ``Wiring.outputs`` under the group's smallest position); 0 deletes it.
    """

    positions: frozenset[int]
    out_arity: int

    @property
    def representative(self) -> int:
        return min(self.positions)


@dataclass(frozen=True)
class Wiring:
    """A reduction diagram over ``n_wires`` simple-type positions.

    Every position belongs to exactly one cup, one spider group, or the
    outputs; a spider group with out_arity 1 additionally contributes its
    representative position to ``outputs``.
    """

    n_wires: int
    cups: frozenset[tuple[int, int]] = frozenset()
    spiders: tuple[SpiderGroup, ...] = ()
    outputs: tuple[int, ...] = ()
    simples: Optional[tuple[SimpleType, ...]] = None

    def validate(self) -> None:
        seen: dict[int, str] = {}

        def claim(pos: int, role: str) -> None:
            if not 0 <= pos < self.n_wires:
                raise ValueError(f"position {pos} out of range for {self.n_wires} wires")
            if pos in seen:
                raise ValueError(f"position {pos} used by both {seen[pos]} and {role}")
            seen[pos] = role

        for i, j in self.cups:
            if i >= j:
                raise ValueError(f"cup ({i},{j}) must be ordered")
            claim(i, "cup")
            claim(j, "cup")
        spider_reps = set()
        for g in self.spiders:
            if g.out_arity not in (0, 1):
                raise ValueError("spider out_arity must be 0 or 1")
            for p in g.positions:
                claim(p, "spider")
            if g.out_arity == 1:
                spider_reps.add(g.representative)
        for p in self.outputs:
            if p in spider_reps:
                continue
            claim(p, "output")
        if len(seen) != self.n_wires:
            missing = sorted(set(range(self.n_wires)) - set(seen))
            raise ValueError(f"positions {missing} appear in no cup, spider or output")
        if self.simples is not None:
            if len(self.simples) != self.n_wires:
                raise ValueError("simples length differs from n_wires")
            for i, j in self.cups:
                a, b = self.simples[i], self.simples[j]
                if not (contractible(a, b) or contractible(b, a)):
                    raise ValueError(f"cup ({i},{j}) connects non-contractible pair {a} {b}")

    def crossing_cups(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        """All pairs of cups that cross (planarity check)."""
        out = []
        for (i, j), (k, l) in itertools.combinations(sorted(self.cups), 2):
            if i < k < j < l:
                out.append(((i, j), (k, l)))
        return out

    def to_text(self) -> str:
        lines = [f"wires: {self.n_wires}"]
        if self.simples is not None:
            lines.append("types: " + " ".join(str(s) for s in self.simples))
        lines.append("cups: " + (" ".join(f"({i},{j})" for i, j in sorted(self.cups)) or "-"))
        lines.append(
            "spiders: "
            + (
                " ".join(
                    "{%s}->%d" % (",".join(str(p) for p in sorted(g.positions)), g.out_arity)
                    for g in self.spiders
                )
                or "-"
            )
        )
        lines.append("outputs: " + (" ".join(str(p) for p in self.outputs) or "-"))
        return "\n".join(lines)

    def summary(self) -> dict:
        return {
            "cups": [list(c) for c in sorted(self.cups)],
            "spiders": [
                {"positions": sorted(g.positions), "out_arity": g.out_arity} for g in self.spiders
            ],
            "outputs": list(self.outputs),
        }


def reduce(types: Sequence[PregroupType], target: PregroupType) -> Wiring:
    """Find the canonical cup-only reduction of ``types`` to ``target``.

    The concatenated simple types are matched so that the uncontracted residue
    equals the target in order; no expansions are attempted.  Among valid
    matchings the leftmost-innermost one (nearest-partner, as in stack-based
    bracket matching) is returned, so the result is deterministic.

    Raises :class:`NoReduction` when no cup-only reduction exists.
    """
    if not types:
        raise NoReduction("no input types given")
    simples: list[SimpleType] = []
    for t in types:
        simples.extend(t.simples)
    m = len(simples)
    goal = target.simples
    k = len(goal)

    empty_memo: dict[tuple[int, int], bool] = {}

    def can_empty(l: int, r: int) -> bool:
        # Whether simples[l:r] contracts fully to the unit.
        if l >= r:
            return True
        if (r - l) % 2:
            return False
        key = (l, r)
        if key not in empty_memo:
            ok = False
            for j in range(l + 1, r):
                if (
                    contractible(simples[l], simples[j])
                    and can_empty(l + 1, j)
                    and can_empty(j + 1, r)
                ):
                    ok = True
                    break
            empty_memo[key] = ok
        return empty_memo[key]

    align_memo: dict[tuple[int, int], bool] = {}

    def can_align(i: int, t: int) -> bool:
        # Whether simples[i:] can reduce to goal[t:].
        if t == k:
            return can_empty(i, m)
        key = (i, t)
        if key not in align_memo:
            ok = False
            for p in range(i, m):
                if simples[p] == goal[t] and can_empty(i, p) and can_align(p + 1, t + 1):
                    ok = True
                    break
            align_memo[key] = ok
        return align_memo[key]

    if not can_align(0, 0):
        raise NoReduction(
            f"cannot reduce {' '.join(str(s) for s in simples) or '1'} to {target}"
        )

    cups: list[tuple[int, int]] = []

    def build_empty(l: int, r: int) -> None:
        if l >= r:
            return
        for j in range(l + 1, r):
            if (
                contractible(simples[l], simples[j])
                and can_empty(l + 1, j)
                and can_empty(j + 1, r)
            ):
                cups.append((l, j))
                build_empty(l + 1, j)
                build_empty(j + 1, r)
                return
        raise AssertionError("build_empty called on irreducible segment")

    outputs: list[int] = []
    i = 0
    for t in range(k):
        for p in range(i, m):
            if simples[p] == goal[t] and can_empty(i, p) and can_align(p + 1, t + 1):
                build_empty(i, p)
                outputs.append(p)
                i = p + 1
                break
    build_empty(i, m)

    return Wiring(
        n_wires=m,
        cups=frozenset(cups),
        spiders=(),
        outputs=tuple(outputs),
        simples=tuple(simples),
    )
