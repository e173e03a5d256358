"""Worlds: declarative lexicons binding typed words to convex relations.

A world document is a line-oriented UTF-8 file with four sections.  Lines
starting with whitespace continue the previous logical line; ``#`` starts a
comment.  See ``docs/world-format.md`` for the full grammar.  Sketch::

    world food

    [types]
    atoms: n s
    n: colour taste texture shape
    s: outcome

    [domains]
    colour: box R [0,1] G [0,1] B [0,1]
    taste: simplex t_sweet t_sour t_bitter t_salt
    outcome: lattice (0,0) (0,1) join (0,0) (0,1) = (0,1)
    motion: paths location 8

    [properties]
    yellow : colour = { R >= 0.7 ; G >= 0.7 ; B <= 0.5 }
    banana_n : colour taste texture shape = banana_colour * banana_taste * [0.2,0.5] * [0,0.25]

    [words]
    banana, bananas : n = banana_n
    yellow : n n^l = diag( yellow * _ * _ * _ )
    which : n^r n s^l n = WHICH

Word expressions build unions of cells: ``*`` is the product along factors,
``&`` intersection, ``|`` union, ``_`` the full space of the next factor,
``diag(...)`` the doubled diagonal used by adjectives and verb agents,
``path(...)`` endpoint constraints on a trajectory factor, and ``cell(...)``
the explicit form the serializer writes.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from . import convexalg as ca
from .convexalg import (
    Box,
    Cell,
    FiniteSemilattice,
    HalfspaceRegion,
    PathConstraint,
    PathDomain,
    VertexHull,
)
from .errors import (
    DanglingName,
    NoReduction,
    ParseError,
    ShapeError,
    UnknownWord,
)
from .pregroup import PregroupType, Wiring, parse_type, reduce as pg_reduce
from .relsem import Relation, SemanticObject, evaluate, which_wiring

WHICH_TAG = "WHICH"


@dataclass(eq=False)
class LexiconEntry:
    surface: str
    aliases: tuple[str, ...]
    ptype: PregroupType
    meaning: Optional[Relation]  # None for builtin-diagram words
    builtin: Optional[str] = None


@dataclass(eq=False)
class World:
    name: str
    atomic_types: frozenset[str]
    images: dict[str, SemanticObject]
    domains: dict[str, "ca.Domain"]
    properties: dict[str, Cell]
    entries: dict[str, LexiconEntry]  # canonical surface -> entry
    surface_map: dict[str, str]  # every surface/alias -> canonical surface

    @property
    def noun_object(self) -> SemanticObject:
        return self.images["n"]

    @property
    def sentence_object(self) -> SemanticObject:
        return self.images["s"]

    def type_image(self, t: PregroupType) -> SemanticObject:
        factors: tuple = ()
        for simple in t.simples:
            factors += self.images[simple.base].factors
        return SemanticObject(factors)

    def domain_name(self, d) -> str:
        for name, dom in self.domains.items():
            if dom is d or dom == d:
                return name
        raise KeyError("domain is not part of this world")

    def lookup(self, surface: str) -> LexiconEntry:
        key = self.surface_map.get(surface.lower())
        if key is None:
            raise UnknownWord(f"no entry for {surface!r} in world {self.name!r}")
        return self.entries[key]

    def tokenize(self, text: str) -> list[str]:
        """Greedy longest-match tokenization against (possibly multiword) surfaces."""
        words = text.lower().split()
        max_len = max((s.count(" ") + 1 for s in self.surface_map), default=1)
        out = []
        i = 0
        while i < len(words):
            for span in range(min(max_len, len(words) - i), 0, -1):
                cand = " ".join(words[i:i + span])
                if cand in self.surface_map:
                    out.append(cand)
                    i += span
                    break
            else:
                raise UnknownWord(f"no entry for {words[i]!r} in world {self.name!r}")
        return out

    def evaluate_phrase(self, text: str, target: Optional[str] = None) -> "PhraseResult":
        tokens = self.tokenize(text)
        return self.evaluate_tokens(tokens, target)

    def evaluate_tokens(self, tokens: Sequence[str], target: Optional[str] = None) -> "PhraseResult":
        entries = [self.lookup(t) for t in tokens]
        which_at = [i for i, e in enumerate(entries) if e.builtin == WHICH_TAG]
        if which_at:
            return self._evaluate_which(tokens, entries, which_at, target)
        types = [e.ptype for e in entries]
        targets = [target] if target is not None else ["s", "n"]
        wiring = None
        last_err = None
        chosen = None
        for tgt in targets:
            try:
                wiring = pg_reduce(types, parse_type(tgt, self.atomic_types))
                chosen = tgt
                break
            except NoReduction as e:
                last_err = e
        if wiring is None:
            raise last_err
        wire_objects = [self.images[s.base] for s in wiring.simples]
        rel = evaluate(wiring, [e.meaning for e in entries], wire_objects)
        return PhraseResult(list(tokens), entries, chosen, wiring, rel)

    def _evaluate_which(self, tokens, entries, which_at, target) -> "PhraseResult":
        if len(which_at) > 1:
            raise NoReduction("nested relative pronouns are not supported")
        if target is not None and target != "n":
            raise NoReduction("relative-pronoun phrases reduce to n")
        k = which_at[0]
        if k == 0 or k + 1 >= len(entries):
            raise NoReduction("relative pronoun needs a subject before and a verb after")
        verb = entries[k + 1]
        if verb.meaning is None or len(verb.ptype) != 3:
            raise NoReduction(f"{verb.surface!r} cannot head a relative clause")
        subject = self.evaluate_tokens(tokens[:k], "n")
        object_ = self.evaluate_tokens(tokens[k + 2:], "n")
        wiring = which_wiring(1, len(verb.ptype), 1)
        n_obj, s_obj = self.noun_object, self.sentence_object
        rel = evaluate(
            wiring,
            [subject.relation, verb.meaning, object_.relation],
            [n_obj, n_obj, s_obj, n_obj, n_obj],
        )
        return PhraseResult(list(tokens), entries, "n", wiring, rel)


@dataclass(eq=False)
class PhraseResult:
    tokens: list[str]
    entries: list[LexiconEntry]
    target: str
    wiring: Wiring
    relation: Relation


# ---------------------------------------------------------------------------
# linear-expression rows
# ---------------------------------------------------------------------------

_NUM_RE = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_ROW_TOKEN = re.compile(rf"\s*(?:({_NUM_RE})|([A-Za-z_][A-Za-z0-9_.]*)|(\*)|(\+)|(-))")


def _parse_linear(
    expr: str, var_index: dict[str, int], n_cols: int, where: str
) -> tuple[np.ndarray, float]:
    """Parse a sum of terms like ``0.9*R - t_sour + 1e-6`` into (coeffs, const)."""
    coeffs = np.zeros(n_cols)
    const = 0.0
    pos = 0
    sign = 1.0
    pending: Optional[float] = None  # a number awaiting '*name'
    expect_operand = True
    while pos < len(expr.rstrip()):
        m = _ROW_TOKEN.match(expr, pos)
        if not m:
            raise ParseError(f"cannot read linear expression at {expr[pos:]!r} in {where}")
        pos = m.end()
        num, name, star, plus, minus = m.groups()
        if num is not None:
            if not expect_operand:
                raise ParseError(f"unexpected number {num} in {where}")
            pending = sign * float(num)
            sign = 1.0
            expect_operand = False
        elif name is not None:
            if name not in var_index:
                raise DanglingName(f"unknown coordinate {name!r} in {where}")
            c = sign if pending is None else pending
            coeffs[var_index[name]] += c
            pending = None
            sign = 1.0
            expect_operand = False
        elif star:
            if pending is None:
                raise ParseError(f"'*' without a coefficient in {where}")
            expect_operand = True
        elif plus or minus:
            if pending is not None:
                const += pending
                pending = None
            if expect_operand:
                sign *= -1.0 if minus else 1.0
            else:
                sign = -1.0 if minus else 1.0
                expect_operand = True
    if pending is not None:
        const += pending
    return coeffs, const


def _parse_row(row: str, var_index: dict[str, int], n_cols: int, where: str):
    for rel in ("<=", ">=", "="):
        if rel in row:
            lhs, rhs = row.split(rel, 1)
            cl, kl = _parse_linear(lhs, var_index, n_cols, where)
            cr, kr = _parse_linear(rhs, var_index, n_cols, where)
            coeffs = cl - cr
            b = kr - kl
            if rel == ">=":
                return -coeffs, "<=", -b
            return coeffs, ("=" if rel == "=" else "<="), b
    raise ParseError(f"constraint row {row!r} in {where} has no <=, >= or =")


# ---------------------------------------------------------------------------
# expression lexer
# ---------------------------------------------------------------------------

_PUNCT = {
    "*": "STAR", "&": "AMP", "|": "PIPE", "(": "LPAR", ")": "RPAR",
    "[": "LBRACK", "]": "RBRACK", ",": "COMMA", ";": "SEMI", "=": "EQ",
}


@dataclass
class _Tok:
    kind: str
    value: str


def _lex_expr(text: str, where: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "{":
            depth = 1
            j = i + 1
            while j < n and depth:
                if text[j] == "{":
                    depth += 1
                elif text[j] == "}":
                    depth -= 1
                j += 1
            if depth:
                raise ParseError(f"unbalanced '{{' in {where}")
            toks.append(_Tok("BRACE", text[i + 1:j - 1]))
            i = j
            continue
        if c in _PUNCT:
            toks.append(_Tok(_PUNCT[c], c))
            i += 1
            continue
        m = re.match(_NUM_RE, text[i:])
        if m and (c.isdigit() or c == "." or (
            c in "+-" and (not toks or toks[-1].kind in
                           ("STAR", "AMP", "PIPE", "LPAR", "LBRACK", "COMMA", "SEMI", "EQ"))
        )):
            toks.append(_Tok("NUM", m.group(0)))
            i += len(m.group(0))
            continue
        m = re.match(r"[A-Za-z_][A-Za-z0-9_.]*", text[i:])
        if m:
            toks.append(_Tok("NAME", m.group(0)))
            i += len(m.group(0))
            continue
        raise ParseError(f"unexpected character {c!r} in {where}")
    return toks


class _TokStream:
    def __init__(self, toks: list[_Tok], where: str):
        self.toks = toks
        self.pos = 0
        self.where = where

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> _Tok:
        t = self.peek()
        if t is None:
            raise ParseError(f"unexpected end of expression in {self.where}")
        self.pos += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.next()
        if t.kind != kind:
            raise ParseError(f"expected {kind} but found {t.value!r} in {self.where}")
        return t

    def accept(self, kind: str, value: Optional[str] = None) -> Optional[_Tok]:
        t = self.peek()
        if t is not None and t.kind == kind and (value is None or t.value == value):
            self.pos += 1
            return t
        return None

    @property
    def exhausted(self) -> bool:
        return self.pos >= len(self.toks)


# ---------------------------------------------------------------------------
# expression parser: terms over factor spans
# ---------------------------------------------------------------------------


class _ExprParser:
    """Recursive-descent parser for property and word expressions.

    Atoms consume factor spans of the expected shape left to right; products
    must cover the shape exactly.  Every construct yields a list of cells
    (a union); properties insist on exactly one.
    """

    def __init__(self, world_builder: "_WorldBuilder", where: str):
        self.wb = world_builder
        self.where = where

    # -- entry points ------------------------------------------------------

    def parse_union(self, ts: _TokStream, factors: tuple) -> list[Cell]:
        """Top-level expression: a union of terms, each covering all factors."""
        cells, width = self.parse_sub_term(ts, factors)
        self._check_cover(width, factors)
        while ts.accept("PIPE"):
            more, w2 = self.parse_sub_term(ts, factors)
            self._check_cover(w2, factors)
            cells = cells + more
        return cells

    def _check_cover(self, width: int, factors: tuple) -> None:
        if width != len(factors):
            raise ShapeError(
                f"expression covers {width} of {len(factors)} factors in {self.where}"
            )

    # -- atoms ---------------------------------------------------------------

    def parse_atom(self, ts: _TokStream, rest: tuple) -> tuple[list[Cell], int]:
        """Parse one atom against the remaining factors; returns (cells, span width)."""
        if not rest:
            raise ParseError(f"expression has more atoms than factors in {self.where}")
        t = ts.next()
        if t.kind == "LPAR":
            inner = self.parse_sub_union(ts, rest)
            ts.expect("RPAR")
            return inner
        if t.kind == "NAME":
            if t.value == "_":
                return [ca.full((rest[0],))], 1
            if t.value == "cell":
                return [self.parse_cell_literal(ts, rest)], len(rest)
            if t.value == "diag":
                ts.expect("LPAR")
                inner, width = self.parse_sub_union(ts, rest)
                ts.expect("RPAR")
                if rest[:2 * width] != rest[:width] * 2:
                    raise ShapeError(f"diag(...) needs two copies of its span in {self.where}")
                return [self._diagonalize(c) for c in inner], 2 * width
            if t.value == "hull":
                nxt = ts.peek()
                if nxt is not None and nxt.kind == "BRACE":
                    pts = self._parse_points(ts.next().value)
                    return [ca.hull(rest[0], pts)], 1
                ts.expect("LPAR")
                inner, width = self.parse_sub_union(ts, rest)
                ts.expect("RPAR")
                return [ca.hull_union(inner)], width
            if t.value == "path":
                if not isinstance(rest[0], PathDomain):
                    raise ShapeError(f"path(...) used on a non-path factor in {self.where}")
                return [self._parse_path(ts, rest[0])], 1
            cell = self.wb.property_cell(t.value, self.where)
            width = len(cell.domains)
            if tuple(rest[:width]) != cell.domains:
                raise ShapeError(
                    f"property {t.value!r} does not fit the factors at this position in {self.where}"
                )
            return [cell], width
        if t.kind == "LBRACK":
            lo = float(ts.expect("NUM").value)
            ts.expect("COMMA")
            hi = float(ts.expect("NUM").value)
            ts.expect("RBRACK")
            d = rest[0]
            if not isinstance(d, ca.ContinuousDomain) or d.dim != 1:
                raise ShapeError(f"[lo,hi] needs a 1-d continuous factor in {self.where}")
            return [ca.from_inequalities(d, [((-1.0,), "<=", -lo), ((1.0,), "<=", hi)])], 1
        if t.kind == "BRACE":
            d = rest[0]
            if isinstance(d, FiniteSemilattice):
                elems = t.value.split()
                for e in elems:
                    if e not in d.elements:
                        raise DanglingName(f"{e!r} is not an element of its lattice in {self.where}")
                closed = ca.join_closure(d, elems) if elems else frozenset()
                cell = ca._finalize((d,), 0, [], [], [], {0: closed}, {})
                return [cell], 1
            return [self._region_from_rows(t.value, d)], 1
        raise ParseError(f"unexpected token {t.value!r} in {self.where}")

    def parse_sub_union(self, ts: _TokStream, rest: tuple) -> tuple[list[Cell], int]:
        """A union of terms; its factor span is fixed by its first arm."""
        cells, width = self.parse_sub_term(ts, rest)
        while ts.accept("PIPE"):
            more, w2 = self.parse_sub_term(ts, rest[:width])
            if w2 != width:
                raise ShapeError(f"union arms cover different factor spans in {self.where}")
            cells = cells + more
        return cells, width

    def parse_sub_term(self, ts: _TokStream, rest: tuple) -> tuple[list[Cell], int]:
        """Intersections of product chains; '*' binds tighter than '&'."""
        cells, width = self.parse_product(ts, rest)
        while ts.accept("AMP"):
            more, w2 = self.parse_product(ts, rest[:width])
            if w2 != width:
                raise ShapeError(f"'&' joins different factor spans in {self.where}")
            cells = [ca.intersect(a, b) for a in cells for b in more]
        return cells, width

    def parse_product(self, ts: _TokStream, rest: tuple) -> tuple[list[Cell], int]:
        cells, width = self.parse_atom(ts, rest)
        while ts.accept("STAR"):
            more, w2 = self.parse_atom(ts, rest[width:])
            cells = [ca.product(a, b) for a in cells for b in more]
            width += w2
        return cells, width

    # -- helpers -------------------------------------------------------------

    def _diagonalize(self, cell: Cell) -> Cell:
        doubled = ca.product(cell, ca.full(cell.domains))
        n = cell.n_base
        width = doubled.n_base + doubled.n_aux
        rows_a = list(doubled.a)
        rows_eq = list(doubled.is_eq)
        rows_b = list(doubled.b)
        for j in range(n):
            row = np.zeros(width)
            row[j] = 1.0
            row[n + j] = -1.0
            rows_a.append(row)
            rows_eq.append(True)
            rows_b.append(0.0)
        finite = dict(doubled.finite_parts)
        half = len(cell.domains)
        for idx, d in enumerate(cell.domains):
            if isinstance(d, FiniteSemilattice):
                part = cell.finite_parts[idx]
                if len(part) != 1:
                    raise ShapeError(
                        f"diag over a finite factor needs a singleton subset in {self.where}"
                    )
                finite[idx] = part
                finite[half + idx] = part
            if isinstance(d, PathDomain):
                raise ShapeError(f"diag over path factors is not supported in {self.where}")
        return ca._finalize(
            doubled.domains, doubled.n_aux, rows_a, rows_eq, rows_b, finite, doubled.path_parts
        )

    def _parse_points(self, body: str) -> list[list[float]]:
        pts = []
        for chunk in body.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            if not (chunk.startswith("(") and chunk.endswith(")")):
                raise ParseError(f"hull point {chunk!r} must be parenthesized in {self.where}")
            pts.append([float(x) for x in chunk[1:-1].split(",")])
        if not pts:
            raise ParseError(f"hull{{...}} needs at least one point in {self.where}")
        return pts

    def _region_from_rows(self, body: str, d) -> Cell:
        if not isinstance(d, ca.ContinuousDomain):
            raise ShapeError(f"a row block needs a continuous factor in {self.where}")
        coords = list(ca.coord_names(d))
        rows, aux_names = self._split_rows(body)
        var_index = {name: i for i, name in enumerate(coords + aux_names)}
        parsed = [_parse_row(r, var_index, d.dim + len(aux_names), self.where) for r in rows]
        if not aux_names:
            return ca.from_inequalities(d, parsed)
        base = ca.full((d,))
        width = d.dim + len(aux_names)
        rows_a = [np.concatenate([r, np.zeros(len(aux_names))]) for r in base.a]
        rows_eq = list(base.is_eq)
        rows_b = list(base.b)
        for coeffs, rel, rhs in parsed:
            rows_a.append(np.asarray(coeffs))
            rows_eq.append(rel == "=")
            rows_b.append(rhs)
        return ca._finalize(
            (d,), len(aux_names), rows_a, rows_eq, rows_b, {}, {}, aux_names=aux_names
        )

    def _split_rows(self, body: str) -> tuple[list[str], list[str]]:
        rows = [r.strip() for r in body.split(";") if r.strip()]
        aux_names: list[str] = []
        if rows and rows[0].startswith("aux "):
            aux_names = rows[0].split()[1:]
            rows = rows[1:]
        return rows, aux_names

    def _parse_path(self, ts: _TokStream, d: PathDomain) -> Cell:
        ts.expect("LPAR")
        start = end = None
        t_max = -ca.STRICT_EPS
        point = False
        while True:
            key = ts.expect("NAME").value
            ts.expect("EQ")
            if key == "at":
                point = True
                t_max = 0.0
                start = end = self._parse_loc_region(ts, d)
            elif key == "from":
                start = self._parse_loc_region(ts, d)
            elif key == "to":
                end = self._parse_loc_region(ts, d)
            elif key == "tmax":
                t_max = float(ts.expect("NUM").value)
            else:
                raise ParseError(f"unknown path key {key!r} in {self.where}")
            if not ts.accept("COMMA"):
                break
        ts.expect("RPAR")
        if start is None or end is None:
            raise ParseError(f"path(...) needs at=... or from=.../to=... in {self.where}")
        pc = PathConstraint(start, end, t_max, point)
        return ca._finalize((d,), 0, [], [], [], {}, {0: pc})

    def _parse_loc_region(self, ts: _TokStream, d: PathDomain) -> Cell:
        t = ts.next()
        if t.kind == "NAME" and t.value == "_":
            return ca.full((d.loc,))
        if t.kind == "NAME":
            cell = self.wb.property_cell(t.value, self.where)
            if cell.domains != (d.loc,):
                raise ShapeError(f"path region {t.value!r} is not over the location domain")
            return cell
        if t.kind == "BRACE":
            return self._region_from_rows(t.value, d.loc)
        raise ParseError(f"unexpected path region {t.value!r} in {self.where}")

    # -- explicit cell literal ------------------------------------------------

    def parse_cell_literal(self, ts: _TokStream, factors: tuple) -> Cell:
        ts.expect("LPAR")
        body = ts.expect("BRACE").value
        # Coordinates may be written f<idx>.name, or bare when unique.
        var_names: list[str] = []
        index: dict[str, int] = {}
        bare_counts: dict[str, int] = {}
        for idx, d in enumerate(factors):
            for name in ca.coord_names(d):
                index[f"f{idx}.{name}"] = len(var_names)
                bare_counts[name] = bare_counts.get(name, 0) + 1
                var_names.append(name)
        for idx, d in enumerate(factors):
            off = 0
            for jdx in range(idx):
                off += ca.continuous_dim(factors[jdx])
            for j, name in enumerate(ca.coord_names(d)):
                if bare_counts[name] == 1:
                    index[name] = off + j
        rows, aux_names = self._split_rows(body)
        for k, aname in enumerate(aux_names):
            index[aname] = len(var_names) + k
        n_base = len(var_names)
        width = n_base + len(aux_names)
        base = ca.full(factors)
        rows_a = [np.concatenate([r, np.zeros(len(aux_names))]) for r in base.a]
        rows_eq = list(base.is_eq)
        rows_b = list(base.b)
        for r in rows:
            coeffs, rel, rhs = _parse_row(r, index, width, self.where)
            rows_a.append(np.asarray(coeffs))
            rows_eq.append(rel == "=")
            rows_b.append(rhs)
        finite = {}
        paths = {}
        while ts.accept("SEMI"):
            key = ts.expect("NAME").value
            if key == "finite":
                fref = ts.expect("NAME").value
                idx = self._factor_index(fref, factors)
                ts.expect("EQ")
                elems = ts.expect("BRACE").value.split()
                d = factors[idx]
                for e in elems:
                    if e not in d.elements:
                        raise DanglingName(f"{e!r} is not an element in {self.where}")
                finite[idx] = ca.join_closure(d, elems) if elems else frozenset()
            elif key == "path":
                fref = ts.expect("NAME").value
                idx = self._factor_index(fref, factors)
                ts.expect("EQ")
                name = ts.expect("NAME").value
                if name != "path":
                    raise ParseError(f"expected path(...) in {self.where}")
                paths[idx] = self._parse_path(ts, factors[idx]).path_parts[0]
            else:
                raise ParseError(f"unknown cell clause {key!r} in {self.where}")
        ts.expect("RPAR")
        return ca._finalize(
            factors, len(aux_names), rows_a, rows_eq, rows_b, finite, paths, aux_names=aux_names
        )

    def _factor_index(self, ref: str, factors: tuple) -> int:
        if not re.fullmatch(r"f\d+", ref):
            raise ParseError(f"factor reference {ref!r} must look like f0 in {self.where}")
        idx = int(ref[1:])
        if not 0 <= idx < len(factors):
            raise ParseError(f"factor reference {ref!r} out of range in {self.where}")
        return idx


# ---------------------------------------------------------------------------
# document loading
# ---------------------------------------------------------------------------


@dataclass
class _Line:
    number: int
    text: str


def _logical_lines(text: str) -> list[_Line]:
    out: list[_Line] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        if body[0].isspace() and out:
            out[-1].text += " " + body.strip()
        else:
            out.append(_Line(lineno, body.strip()))
    return out


class _WorldBuilder:
    def __init__(self):
        self.name = None
        self.atoms: Optional[frozenset] = None
        self.image_specs: dict[str, list[str]] = {}
        self.images: dict[str, SemanticObject] = {}
        self.domains: dict[str, object] = {}
        self.properties: dict[str, Cell] = {}
        self.entries: dict[str, LexiconEntry] = {}
        self.surface_map: dict[str, str] = {}

    def ensure_images(self) -> None:
        # Type images name domains, which are declared in a later section;
        # resolution is deferred until the domains exist.
        for atom, names in self.image_specs.items():
            if atom not in self.images:
                factors = tuple(self.domain(n, f"[types] {atom}") for n in names)
                self.images[atom] = SemanticObject(factors)

    def property_cell(self, name: str, where: str) -> Cell:
        if name not in self.properties:
            raise DanglingName(f"undeclared property {name!r} referenced in {where}")
        return self.properties[name]

    def domain(self, name: str, where: str):
        if name not in self.domains:
            raise DanglingName(f"undeclared domain {name!r} referenced in {where}")
        return self.domains[name]


def load(text: str) -> World:
    """Parse and fully validate a world document."""
    lines = _logical_lines(text)
    if not lines:
        raise ParseError("empty world document", line=1)
    wb = _WorldBuilder()
    section = None
    for ln in lines:
        try:
            if ln.text.startswith("world "):
                wb.name = ln.text.split(None, 1)[1]
                continue
            if ln.text.startswith("[") and ln.text.endswith("]"):
                section = ln.text[1:-1]
                if section not in ("types", "domains", "properties", "words"):
                    raise ParseError(f"unknown section {section!r}")
                if section in ("properties", "words"):
                    wb.ensure_images()
                continue
            if section == "types":
                _parse_types_line(wb, ln)
            elif section == "domains":
                _parse_domain_line(wb, ln)
            elif section == "properties":
                _parse_property_line(wb, ln)
            elif section == "words":
                _parse_word_line(wb, ln)
            else:
                raise ParseError(f"statement outside any section: {ln.text!r}")
        except ParseError as e:
            if e.line is None:
                raise ParseError(str(e), line=ln.number) from e
            raise
    if wb.name is None:
        raise ParseError("document never names its world ('world <name>')", line=lines[0].number)
    if wb.atoms is None:
        raise ParseError("missing [types] section with an atoms: line", line=lines[0].number)
    wb.ensure_images()
    for required in ("n", "s"):
        if required not in wb.images:
            raise ParseError(f"[types] gives no image for atom {required!r}", line=lines[0].number)
    return World(
        wb.name, wb.atoms, wb.images, wb.domains, wb.properties, wb.entries, wb.surface_map
    )


def _parse_types_line(wb: _WorldBuilder, ln: _Line) -> None:
    if ":" not in ln.text:
        raise ParseError(f"expected 'name: ...' in [types], got {ln.text!r}")
    head, rest = (p.strip() for p in ln.text.split(":", 1))
    if head == "atoms":
        wb.atoms = frozenset(rest.split())
        return
    if wb.atoms is None or head not in wb.atoms:
        raise ParseError(f"type image for undeclared atom {head!r}")
    wb.image_specs[head] = rest.split()


def _parse_domain_line(wb: _WorldBuilder, ln: _Line) -> None:
    if ":" not in ln.text:
        raise ParseError(f"expected 'name: variant ...' in [domains], got {ln.text!r}")
    name, rest = (p.strip() for p in ln.text.split(":", 1))
    if name in wb.domains:
        raise ParseError(f"domain {name!r} declared twice")
    tokens = rest.split()
    if not tokens:
        raise ParseError(f"domain {name!r} has no definition")
    kind = tokens[0]
    where = f"domain {name}"
    if kind == "box":
        spec = rest[len("box"):].strip()
        pairs = re.findall(rf"([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*({_NUM_RE})\s*,\s*({_NUM_RE})\s*\]", spec)
        joined = " ".join(f"{n} [{lo},{hi}]" for n, lo, hi in pairs)
        if not pairs or re.sub(r"\s+", "", joined) != re.sub(r"\s+", "", spec):
            raise ParseError(f"box domain wants 'coord [lo,hi]' pairs, got {spec!r}")
        wb.domains[name] = Box(
            tuple(p[0] for p in pairs), tuple((float(p[1]), float(p[2])) for p in pairs)
        )
    elif kind == "simplex":
        body = rest[len("simplex"):].strip()
        if "{" in body:
            labels_part, brace = body.split("{", 1)
            if not brace.endswith("}"):
                raise ParseError(f"unbalanced '{{' in {where}")
            labels = tuple(labels_part.split())
            var_index = {n: i for i, n in enumerate(labels)}
            ambient = tuple(
                _parse_row(r.strip(), var_index, len(labels), where)
                for r in brace[:-1].split(";") if r.strip()
            )
            ambient = tuple((tuple(c), rel, rhs) for c, rel, rhs in ambient)
            wb.domains[name] = VertexHull(labels, ambient)
        else:
            wb.domains[name] = VertexHull(tuple(body.split()))
    elif kind == "region":
        body = rest[len("region"):].strip()
        if "{" not in body or not body.endswith("}"):
            raise ParseError(f"region domain wants 'coords {{ rows }}', got {body!r}")
        coords_part, brace = body.split("{", 1)
        coords = tuple(coords_part.split())
        var_index = {n: i for i, n in enumerate(coords)}
        rows = tuple(
            _parse_row(r.strip(), var_index, len(coords), where)
            for r in brace[:-1].split(";") if r.strip()
        )
        rows = tuple((tuple(c), rel, rhs) for c, rel, rhs in rows)
        wb.domains[name] = HalfspaceRegion(coords, rows)
    elif kind == "lattice":
        words = tokens[1:]
        elems = []
        i = 0
        while i < len(words) and words[i] != "join":
            elems.append(words[i])
            i += 1
        joins = {}
        while i < len(words):
            if words[i] != "join" or i + 4 >= len(words) or words[i + 3] != "=":
                raise ParseError(f"lattice join clause malformed near {' '.join(words[i:i+5])!r}")
            joins[(words[i + 1], words[i + 2])] = words[i + 4]
            i += 5
        wb.domains[name] = FiniteSemilattice(elems, joins)
    elif kind == "tree":
        body = rest[len("tree"):].strip()
        parent: dict[str, str] = {}
        for edge in body.split(";"):
            edge = edge.strip()
            if not edge:
                continue
            if "->" not in edge:
                raise ParseError(f"tree edge {edge!r} wants 'parent -> child child ...'")
            par, kids = edge.split("->", 1)
            for kid in kids.split():
                parent[kid] = par.strip()
        wb.domains[name] = FiniteSemilattice.from_tree(parent)
    elif kind == "paths":
        if len(tokens) != 3:
            raise ParseError(f"paths domain wants 'paths <location-domain> <k>', got {rest!r}")
        loc = wb.domain(tokens[1], where)
        wb.domains[name] = PathDomain(loc, int(tokens[2]))
    else:
        raise ParseError(f"unknown domain variant {kind!r}")


def _split_def(text: str, what: str) -> tuple[str, str, str]:
    if ":" not in text:
        raise ParseError(f"{what} wants 'name : shape = expression', got {text!r}")
    head, rest = text.split(":", 1)
    if "=" not in rest:
        raise ParseError(f"{what} {head.strip()!r} has no '=' definition")
    shape, expr = rest.split("=", 1)
    return head.strip(), shape.strip(), expr.strip()


def _parse_property_line(wb: _WorldBuilder, ln: _Line) -> None:
    name, shape, expr = _split_def(ln.text, "property")
    if name in wb.properties:
        raise ParseError(f"property {name!r} declared twice")
    where = f"property {name}"
    factors = tuple(wb.domain(n, where) for n in shape.split())
    ts = _TokStream(_lex_expr(expr, where), where)
    cells = _ExprParser(wb, where).parse_union(ts, factors)
    if not ts.exhausted:
        raise ParseError(f"trailing tokens after {where}")
    if len(cells) != 1:
        raise ParseError(f"{where} must be a single convex cell, got a union of {len(cells)}")
    wb.properties[name] = cells[0]


def _parse_word_line(wb: _WorldBuilder, ln: _Line) -> None:
    surfaces_part, type_part, expr = _split_def(ln.text, "word")
    surfaces = [s.strip().lower() for s in surfaces_part.split(",") if s.strip()]
    if not surfaces:
        raise ParseError("word line has no surface form")
    canonical = surfaces[0]
    where = f"word {canonical}"
    if wb.atoms is None:
        raise ParseError("[words] before [types]")
    ptype = parse_type(type_part, wb.atoms)
    if expr.strip() == WHICH_TAG:
        entry = LexiconEntry(canonical, tuple(surfaces[1:]), ptype, None, WHICH_TAG)
    else:
        factors: tuple = ()
        for simple in ptype.simples:
            if simple.base not in wb.images:
                raise ParseError(f"atom {simple.base!r} has no declared image")
            factors += wb.images[simple.base].factors
        ts = _TokStream(_lex_expr(expr, where), where)
        cells = _ExprParser(wb, where).parse_union(ts, factors)
        if not ts.exhausted:
            raise ParseError(f"trailing tokens after {where}")
        shape = SemanticObject(factors)
        for c in cells:
            if c.domains != factors:
                raise ShapeError(f"{where}: a cell's shape differs from the type image")
        status = "verified" if len(cells) <= 1 else "assumed"
        entry = LexiconEntry(canonical, tuple(surfaces[1:]), ptype, Relation(shape, tuple(cells), status))
    if canonical in wb.entries:
        raise ParseError(f"word {canonical!r} declared twice")
    wb.entries[canonical] = entry
    for s in surfaces:
        if s in wb.surface_map:
            raise ParseError(f"surface {s!r} maps to two entries")
        wb.surface_map[s] = canonical


# ---------------------------------------------------------------------------
# serialization (structural; reload + probe_equal is the round-trip contract)
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def _emit_rows(cell: Cell, names: list[str]) -> str:
    aux_names = list(cell.var_names[cell.n_base:])
    parts = []
    if aux_names:
        parts.append("aux " + " ".join(aux_names))
    for i in range(cell.a.shape[0]):
        terms = []
        for c, nm in zip(cell.a[i], names + aux_names):
            if c != 0.0:
                terms.append(f"+ {_fmt(c)}*{nm}" if c > 0 else f"- {_fmt(-c)}*{nm}")
        lhs = " ".join(terms).lstrip("+ ") or "0"
        rel = "=" if cell.is_eq[i] else "<="
        parts.append(f"{lhs} {rel} {_fmt(cell.b[i])}")
    return "{ " + " ; ".join(parts) + " }"


def _emit_cell(cell: Cell, prefixed: bool) -> str:
    if prefixed:
        names = []
        for idx, d in enumerate(cell.domains):
            names.extend(f"f{idx}.{n}" for n in ca.coord_names(d))
    else:
        names = []
        for d in cell.domains:
            names.extend(ca.coord_names(d))
    chunks = [_emit_rows(cell, names)]
    for idx in sorted(cell.finite_parts):
        elems = " ".join(sorted(cell.finite_parts[idx]))
        chunks.append(f"finite f{idx} = {{ {elems} }}")
    for idx in sorted(cell.path_parts):
        pc = cell.path_parts[idx]
        loc_names = list(ca.coord_names(cell.domains[idx].loc))
        if pc.point:
            chunks.append(f"path f{idx} = path(at = {_emit_rows(pc.start, loc_names)})")
        else:
            chunks.append(
                f"path f{idx} = path(from = {_emit_rows(pc.start, loc_names)}, "
                f"to = {_emit_rows(pc.end, loc_names)}, tmax = {_fmt(pc.t_max)})"
            )
    return "cell( " + " ; ".join(chunks) + " )"


def _emit_domain(world: World, name: str) -> str:
    d = world.domains[name]
    if isinstance(d, Box):
        spec = " ".join(f"{n} [{_fmt(lo)},{_fmt(hi)}]" for n, (lo, hi) in zip(d.names, d.bounds))
        return f"{name}: box {spec}"
    if isinstance(d, VertexHull):
        out = f"{name}: simplex " + " ".join(d.labels)
        if d.ambient_rows:
            rows = " ; ".join(_row_str(c, rel, rhs, d.labels) for c, rel, rhs in d.ambient_rows)
            out += " { " + rows + " }"
        return out
    if isinstance(d, HalfspaceRegion):
        rows = " ; ".join(_row_str(c, rel, rhs, d.names) for c, rel, rhs in d.rows)
        return f"{name}: region " + " ".join(d.names) + " { " + rows + " }"
    if isinstance(d, FiniteSemilattice):
        joins = []
        for i, a in enumerate(d.elements):
            for b in d.elements[i + 1:]:
                joins.append(f"join {a} {b} = {d.join(a, b)}")
        return f"{name}: lattice " + " ".join(d.elements) + " " + " ".join(joins)
    if isinstance(d, PathDomain):
        return f"{name}: paths {world.domain_name(d.loc)} {d.k}"
    raise TypeError(f"unknown domain variant {type(d)}")


def _row_str(coeffs, rel, rhs, names) -> str:
    terms = []
    for c, nm in zip(coeffs, names):
        if c != 0.0:
            terms.append(f"+ {_fmt(c)}*{nm}" if c > 0 else f"- {_fmt(-c)}*{nm}")
    lhs = " ".join(terms).lstrip("+ ") or "0"
    return f"{lhs} {rel} {_fmt(rhs)}"


def serialize(world: World) -> str:
    """Write a world back to the document format (explicit-cell form)."""
    lines = [f"world {world.name}", "", "[types]"]
    lines.append("atoms: " + " ".join(sorted(world.atomic_types)))
    for atom, obj in world.images.items():
        lines.append(f"{atom}: " + " ".join(world.domain_name(d) for d in obj.factors))
    lines.append("")
    lines.append("[domains]")
    emitted = set()
    # paths domains reference their location domain, so emit dependencies first
    for name, d in world.domains.items():
        if isinstance(d, PathDomain) and world.domain_name(d.loc) not in emitted:
            loc_name = world.domain_name(d.loc)
            if loc_name != name and loc_name not in emitted:
                lines.append(_emit_domain(world, loc_name))
                emitted.add(loc_name)
        if name not in emitted:
            lines.append(_emit_domain(world, name))
            emitted.add(name)
    lines.append("")
    lines.append("[properties]")
    for name, cell in world.properties.items():
        shape = " ".join(world.domain_name(d) for d in cell.domains)
        lines.append(f"{name} : {shape} = {_emit_cell(cell, prefixed=len(cell.domains) > 1)}")
    lines.append("")
    lines.append("[words]")
    for entry in world.entries.values():
        head = ", ".join((entry.surface,) + entry.aliases)
        if entry.builtin:
            lines.append(f"{head} : {entry.ptype} = {entry.builtin}")
            continue
        cells = " | ".join(_emit_cell(c, prefixed=True) for c in entry.meaning.cells)
        if not entry.meaning.cells:
            cells = "cell( { 0 <= -1 } )"  # an explicitly empty meaning
        lines.append(f"{head} : {entry.ptype} = {cells}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# built-in worlds and lookup by name/path
# ---------------------------------------------------------------------------


def _read_builtin(filename: str) -> str:
    return resources.files("convexsem").joinpath("worlds").joinpath(filename).read_text("utf-8")


@lru_cache(maxsize=None)
def builtin_food() -> World:
    """The food-and-drink world: colours, tastes, textures and a 4-point outcome lattice."""
    return load(_read_builtin("food.world"))


@lru_cache(maxsize=None)
def builtin_robot() -> World:
    """The robot-movement world: located nouns and path-valued movement verbs."""
    return load(_read_builtin("robot.world"))


def find_world(spec: str) -> World:
    """Resolve a --world argument: builtin name, a file path, or a name found
    on the CONVEXSEM_WORLD_PATH search path."""
    if spec == "food":
        return builtin_food()
    if spec == "robot":
        return builtin_robot()
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            return load(fh.read())
    for d in os.environ.get("CONVEXSEM_WORLD_PATH", "").split(os.pathsep):
        if not d:
            continue
        cand = os.path.join(d, spec + ".world")
        if os.path.exists(cand):
            with open(cand, encoding="utf-8") as fh:
                return load(fh.read())
    raise UnknownWord(f"no world named {spec!r} (builtins: food, robot)")
