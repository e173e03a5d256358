"""Command-line interface: reduce types, evaluate phrases, query membership,
sample trajectories, and run the law-checking suites.

Exit codes: 0 success (including legitimately empty meanings), 1 input or
usage errors, 2 no-reduction / empty-where-forbidden.
"""

from __future__ import annotations

import argparse
import itertools
import json
import re
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import convexalg as ca
from .convexalg import FiniteSemilattice, PathDomain, Trajectory
from .errors import (
    ConvexsemError,
    EmptyMeaning,
    NoReduction,
    ShapeMismatch,
    UnknownWord,
)
from .lexicon import PhraseResult, World, find_world
from .pregroup import parse_type, reduce as pg_reduce
from .relsem import (
    FinRel,
    Relation,
    SemanticObject,
    check_convexity,
    probe_equal,
    probe_points,
    spider,
)
from .feasibility import maximize


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are exit code 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


@dataclass
class EvalReport:
    tokens: list[str]
    types: list[str]
    target: str
    wiring: dict
    result: dict
    wiring_text: str
    result_text: str

    def to_text(self) -> str:
        lines = [
            "tokens: " + " | ".join(self.tokens),
            "types:  " + " | ".join(self.types),
            f"target: {self.target}",
            self.wiring_text,
            self.result_text,
        ]
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "tokens": self.tokens,
                "types": self.types,
                "target": self.target,
                "wiring": self.wiring,
                "result": self.result,
            },
            indent=2,
        )


def _report(res: PhraseResult) -> EvalReport:
    return EvalReport(
        tokens=res.tokens,
        types=[str(e.ptype) for e in res.entries],
        target=res.target,
        wiring=res.wiring.summary(),
        result=res.relation.summary(),
        wiring_text=res.wiring.to_text(),
        result_text=res.relation.to_text(),
    )


# ---------------------------------------------------------------------------
# point documents
# ---------------------------------------------------------------------------

_TRAJ_RE = re.compile(r"traj\(\s*t\s*=\s*([^;]+);(.*)\)\s*$")


def format_point(point: Sequence) -> str:
    parts = []
    for comp in point:
        if isinstance(comp, str):
            parts.append(comp)
        elif isinstance(comp, Trajectory):
            pts = " ".join("(" + ",".join(repr(float(v)) for v in w) + ")" for w in comp.waypoints)
            parts.append(f"traj(t={repr(comp.t_start)}; {pts})")
        else:
            parts.append(",".join(repr(float(v)) for v in np.asarray(comp, dtype=float)))
    return " | ".join(parts)


def parse_point(shape: SemanticObject, text: str) -> tuple:
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read().strip()
    parts = [p.strip() for p in text.split("|")]
    if len(parts) != len(shape.factors):
        raise ShapeMismatch(
            f"point has {len(parts)} factor(s), the relation has {len(shape.factors)}"
        )
    out = []
    for d, part in zip(shape.factors, parts):
        if isinstance(d, FiniteSemilattice):
            out.append(part)
        elif isinstance(d, PathDomain):
            m = _TRAJ_RE.match(part)
            if not m:
                raise ShapeMismatch(f"expected traj(t=...; (..) (..) ...), got {part!r}")
            t = float(m.group(1))
            pts = [
                [float(v) for v in grp.split(",")]
                for grp in re.findall(r"\(([^()]*)\)", m.group(2))
            ]
            out.append(Trajectory(t, np.asarray(pts)))
        else:
            vals = [float(v) for v in re.split(r"[,\s]+", part) if v]
            if len(vals) != d.dim:
                raise ShapeMismatch(f"factor wants {d.dim} coordinates, got {len(vals)}")
            out.append(np.asarray(vals))
    return tuple(out)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_reduce(args) -> int:
    atoms = None
    if args.world:
        atoms = find_world(args.world).atomic_types
    types = [parse_type(part.strip(), atoms) for part in args.types.split(",")]
    wiring = pg_reduce(types, parse_type(args.target, atoms))
    print(wiring.to_text())
    return 0


def cmd_eval(args) -> int:
    world = find_world(args.world)
    res = world.evaluate_phrase(args.phrase, args.target)
    report = _report(res)
    print(report.to_json() if args.format == "json" else report.to_text())
    return 0


def _resolve_relation(world: World, spec: str) -> Relation:
    try:
        entry = world.lookup(spec)
        if entry.meaning is not None:
            return entry.meaning
    except UnknownWord:
        pass
    return world.evaluate_phrase(spec).relation


def cmd_member(args) -> int:
    world = find_world(args.world)
    rel = _resolve_relation(world, args.relation)
    point = parse_point(rel.shape, args.point)
    if rel.contains(point, args.tol):
        print("yes")
        return 0
    reason = "empty relation" if not rel.cells else None
    if reason is None:
        for c in rel.cells:
            reason = c.violated_row(point, args.tol)
            if reason:
                break
    print(f"no ({reason})" if reason else "no")
    return 0


def cmd_sample(args) -> int:
    world = find_world(args.world)
    res = world.evaluate_phrase(args.phrase)
    rel = res.relation
    if not any(isinstance(d, PathDomain) for d in rel.shape.factors):
        print("error: the phrase's meaning has no trajectory factor", file=sys.stderr)
        return 1
    live = [c for c in rel.cells if not c.is_empty()]
    if not live:
        raise EmptyMeaning(f"{args.phrase!r} has an empty meaning; nothing to sample")
    rng = np.random.default_rng(args.seed)
    emitted = 0
    while emitted < args.n:
        cell = live[rng.integers(len(live))]
        point = ca.sample_point(cell, rng)
        if point is None or not rel.contains(point, 1e-7):
            continue  # re-check every sample before emitting
        print(format_point(point))
        emitted += 1
    return 0


# --- check suites -----------------------------------------------------------


def _random_semilattice(rng: np.random.Generator) -> FiniteSemilattice:
    """A random join semilattice with <= 8 elements: a subset of the 3-bit
    powerset lattice closed under bitwise or."""
    masks = set(int(m) for m in rng.integers(0, 8, size=rng.integers(2, 7)))
    changed = True
    while changed:
        changed = False
        for a, b in list(itertools.combinations(sorted(masks), 2)):
            if (a | b) not in masks:
                masks.add(a | b)
                changed = True
    names = {m: f"e{m}" for m in sorted(masks)}
    joins = {
        (names[a], names[b]): names[a | b]
        for a in masks for b in masks if a < b
    }
    return FiniteSemilattice([names[m] for m in sorted(masks)], joins)


def _food_tree() -> FiniteSemilattice:
    return FiniteSemilattice.from_tree(
        {"fruit": "food", "beer": "food", "apples": "fruit", "bananas": "fruit"}
    )


def _suite_snakes(out: list[str]) -> bool:
    from .relsem import snake_equations_hold

    ok = True
    lattices = [("food-tree", _food_tree())]
    rng = np.random.default_rng(20240817)
    for i in range(20):
        lattices.append((f"random-{i}", _random_semilattice(rng)))
    for name, lat in lattices:
        good = snake_equations_hold(lat)
        ok &= good
        out.append(f"{'PASS' if good else 'FAIL'} snake equations on {name} ({len(lat.elements)} elements)")
    return ok


def _suite_spiders(world: World, out: list[str]) -> bool:
    from .relsem import evaluate
    from .pregroup import Wiring

    ok = True
    # Exact fusion on every finite domain of the world.
    for name, d in world.domains.items():
        if not isinstance(d, FiniteSemilattice):
            continue
        fs = (d,)
        mu = FinRel.spider(fs, 2, 1)
        one = FinRel.identity(fs)
        fused = mu.tensor(one).then(mu)
        expected = FinRel.spider(fs, 3, 1)
        good = fused.pairs == expected.pairs
        ok &= good
        out.append(f"{'PASS' if good else 'FAIL'} spider fusion (exact) on lattice {name}")
    # Probe-based fusion on the noun space.
    n_obj = world.noun_object
    mu_rel = spider(n_obj, 2, 1)
    wiring = Wiring(
        n_wires=6,
        cups=frozenset({(2, 3)}),
        spiders=(),
        outputs=(0, 1, 4, 5),
        simples=None,
    )
    composite = evaluate(wiring, [mu_rel, mu_rel], [n_obj] * 6)
    fused = spider(n_obj, 3, 1)
    probes = _diagonalish_probes(n_obj, 4, 500, seed=7)
    verdict = probe_equal(composite, fused, probes, tol=1e-7)
    ok &= verdict.equal
    out.append(
        f"{'PASS' if verdict.equal else 'FAIL'} spider fusion (500 probes) on the noun space"
    )
    return ok


def _diagonalish_probes(obj: SemanticObject, copies: int, n: int, seed: int) -> list[tuple]:
    """Probes for relations over `copies` copies of obj: half exact diagonals,
    half independent tuples (plus slight perturbations of diagonals)."""
    base = probe_points(obj, n, seed)
    rng = np.random.default_rng(seed + 1)
    probes = []
    for i, p in enumerate(base):
        if i % 2 == 0:
            probes.append(p * copies)
        else:
            parts = [base[rng.integers(len(base))] for _ in range(copies)]
            probes.append(tuple(x for part in parts for x in part))
    return probes[:n]


def _suite_convexity(world: World, out: list[str]) -> bool:
    for entry in world.entries.values():
        if entry.meaning is None:
            continue
        rep = check_convexity(entry.meaning, samples=120, seed=11)
        out.append(f"INFO convexity of {entry.surface!r}: {rep.verdict}")
    out.append("PASS convexity suite (reported per relation; no law is asserted)")
    return True


def _suite_golden(world: World, out: list[str]) -> bool:
    ok = True
    if world.name == "food":
        checks = [
            ("bananas taste sweet", {("(1,1)",), ("(1,0)",)}),
            ("beer tastes sweet", {("(0,1)",)}),
        ]
        for phrase, expected in checks:
            got = world.evaluate_phrase(phrase).relation.finite_enumeration()
            good = got == frozenset(expected)
            ok &= good
            out.append(f"{'PASS' if good else 'FAIL'} {phrase!r} -> {sorted(got or ())}")
        which = world.evaluate_phrase("fruit which tastes bitter").relation
        gb = Relation(world.noun_object, (world.properties["green_banana_n"],))
        verdict = probe_equal(which, gb, probe_points(world.noun_object, 300, seed=3), tol=1e-7)
        ok &= verdict.equal
        out.append(f"{'PASS' if verdict.equal else 'FAIL'} 'fruit which tastes bitter' = green banana")
        soft = world.evaluate_phrase("soft apple").relation
        lo, hi = _factor_interval(soft, 2)
        good = abs(lo - 0.5) < 1e-7 and abs(hi - 0.6) < 1e-7
        ok &= good
        out.append(f"{'PASS' if good else 'FAIL'} 'soft apple' texture = [{lo:.3f}, {hi:.3f}]")
    elif world.name == "robot":
        res = world.evaluate_phrase("cathy moves to the living room").relation
        good = not res.is_empty()
        ok &= good
        out.append(f"{'PASS' if good else 'FAIL'} 'cathy moves to the living room' nonempty")
        rng = np.random.default_rng(5)
        live = [c for c in res.cells if not c.is_empty()]
        mix_ok = True
        for _ in range(50):
            p = ca.sample_point(live[rng.integers(len(live))], rng)
            q = ca.sample_point(live[rng.integers(len(live))], rng)
            mid = ca.mix_points(res.shape.factors, [0.5, 0.5], [p, q])
            mix_ok &= res.contains(mid, 1e-7)
        ok &= mix_ok
        out.append(f"{'PASS' if mix_ok else 'FAIL'} trajectory mixtures stay members (50 pairs)")
    else:
        out.append(f"INFO no golden suite for world {world.name!r}")
    return ok


def _factor_interval(rel: Relation, factor: int) -> tuple[float, float]:
    lo, hi = np.inf, -np.inf
    for c in rel.cells:
        if c.is_empty():
            continue
        sl = c.factor_slices[factor]
        obj = np.zeros(c.n_vars)
        obj[sl.start] = 1.0
        hi = max(hi, maximize(obj, c.system()).value)
        lo = min(lo, -maximize(-obj, c.system()).value)
    return lo, hi


def cmd_check(args) -> int:
    world = find_world(args.world)
    suites = ["snakes", "spiders", "convexity", "golden"] if args.suite == "all" else [args.suite]
    out: list[str] = []
    ok = True
    for suite in suites:
        out.append(f"== suite: {suite} ==")
        if suite == "snakes":
            ok &= _suite_snakes(out)
        elif suite == "spiders":
            ok &= _suite_spiders(world, out)
        elif suite == "convexity":
            ok &= _suite_convexity(world, out)
        elif suite == "golden":
            ok &= _suite_golden(world, out)
    print("\n".join(out))
    print("ALL CHECKS PASSED" if ok else "SOME CHECKS FAILED")
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="convexsem", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", help="reduce a comma-separated type sequence to a target type")
    r.add_argument("types", help='e.g. "n, n^r s n^l, n"')
    r.add_argument("--target", required=True)
    r.add_argument("--world", default=None, help="world supplying the atomic types")
    r.set_defaults(func=cmd_reduce)

    e = sub.add_parser("eval", help="evaluate a phrase in a world")
    e.add_argument("phrase")
    e.add_argument("--world", required=True)
    e.add_argument("--target", default=None, help="target type (default: try s, then n)")
    e.add_argument("--format", choices=("text", "json"), default="text")
    e.set_defaults(func=cmd_eval)

    m = sub.add_parser("member", help="test whether a point belongs to a relation")
    m.add_argument("point", help="factor values separated by '|', or @file")
    m.add_argument("--world", required=True)
    m.add_argument("--relation", required=True, help="a phrase or a lexicon entry name")
    m.add_argument("--tol", type=float, default=1e-7)
    m.set_defaults(func=cmd_member)

    s = sub.add_parser("sample", help="sample member trajectories of a phrase meaning")
    s.add_argument("phrase")
    s.add_argument("--world", required=True)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_sample)

    c = sub.add_parser("check", help="run law-checking suites")
    c.add_argument("--world", default="food")
    c.add_argument("--suite", choices=("all", "snakes", "spiders", "convexity", "golden"), default="all")
    c.set_defaults(func=cmd_check)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as e:
        return int(e.code or 0)
    except (NoReduction, EmptyMeaning) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ConvexsemError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
