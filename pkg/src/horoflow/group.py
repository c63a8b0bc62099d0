"""Free Fuchsian groups from ping-pong data, with certified construction.

A group is given by generators, each with boundary-anchored regions: a
hyperbolic generator two closed half-discs (one around each fixed
point), a parabolic generator one region whose interior holds its fixed
point, split internally at the fixed point into two directed halves.
Construction certifies, and refuses to build on failure:

* declared kinds match the matrices;
* the footprint arcs are pairwise disjoint with positive margin;
* the ping-pong law: each directed letter maps the complement of its
  inverse's arc inside its own arc, including all two-letter nestings
  (the split of parabolic arcs is what makes p following p nest);
* the group is nonelementary (two generators, three distinct fixed
  points at least);
* each parabolic generator carries a horoball seed, and the horoball
  family up to a configured word depth is pairwise disjoint with the
  basepoint o strictly outside all of it.

Reduction into the standard fundamental domain (complement of all
regions) walks greedily: while the point sits strictly inside some
region, apply the pairing inverse (for parabolics, the power that
recenters the chart coordinate).  Orbit enumeration is length-lex
breadth-first with no backtracking; distance cutoffs prune through a
lower bound valid for whole subtrees, so no points are missed.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from horoflow.flows import Horoball
from horoflow.moebius import (
    BASEPOINT,
    TAU,
    BoundaryPoint,
    MoebiusMap,
    PlanePoint,
    attracting_fixed_point,
    classify,
    distance,
    fixed_points,
    repelling_fixed_point,
    transport_to_infinity,
)
from horoflow.words import GroupWord

REDUCE_TOL = 1e-9
MARGIN_TOL = 1e-3
DEFAULT_BUDGET = 10_000


class GroupBuildError(ValueError):
    """Construction rejected; .certificate names the violated check."""

    def __init__(self, certificate: str, detail: str):
        super().__init__(f"{certificate}: {detail}")
        self.certificate = certificate


class BudgetError(RuntimeError):
    """An iterative routine exhausted its step budget."""


def geodesic_distance_to(z: complex, a: float, b: float) -> float:
    """Distance from z to the geodesic with extended-real endpoints a, b."""
    if math.isinf(a):
        a, b = b, a
    if math.isinf(b):
        return math.asinh(abs(z.real - a) / z.imag)
    w = (z - a) / (z - b)
    return math.asinh(abs(w.real) / abs(w.imag))


@dataclass(frozen=True)
class Region:
    """Closed region anchored on the ccw boundary arc [start, end].

    Plane footprint: a half-disc when the arc misses infinity, the
    complement of one when infinity is interior, a vertical half-plane
    when an endpoint is infinity.  The bounding geodesic always joins
    the arc's endpoints.
    """

    start: BoundaryPoint
    end: BoundaryPoint

    @property
    def arc_length(self) -> float:
        return self.start.ccw_to(self.end)

    def contains_angle(self, theta: float, slack: float = 0.0) -> bool:
        off = (theta - self.start.angle) % TAU
        if off >= TAU - slack:  # roundoff just before the start wraps to ~2pi
            off = 0.0
        return off <= self.arc_length + slack

    def contains_boundary(self, xi: BoundaryPoint, slack: float = 0.0) -> bool:
        return self.contains_angle(xi.angle, slack)

    def contains_arc(self, other: "Region", slack: float = 0.0) -> bool:
        off = (other.start.angle - self.start.angle) % TAU
        if off >= TAU - slack:
            off = 0.0
        return off + other.arc_length <= self.arc_length + slack

    def midpoint(self) -> BoundaryPoint:
        return BoundaryPoint(self.start.angle + self.arc_length / 2.0)

    def contains_plane(self, z: complex, slack: float = 0.0) -> bool:
        """Membership with the boundary pushed outward by slack (euclidean)."""
        if self.start.is_infinity():
            return z.real <= self.end.halfplane() + slack
        if self.end.is_infinity():
            return z.real >= self.start.halfplane() - slack
        a, b = self.start.halfplane(), self.end.halfplane()
        if a < b:
            return abs(z - complex((a + b) / 2, 0.0)) <= (b - a) / 2 + slack
        # arc wraps through infinity: complement of the half-disc over (b, a)
        return abs(z - complex((a + b) / 2, 0.0)) >= (a - b) / 2 - slack

    def plane_distance(self, z: complex) -> float:
        """Hyperbolic distance from z to the region (0 inside)."""
        if self.contains_plane(z):
            return 0.0
        return geodesic_distance_to(z, self.start.halfplane(), self.end.halfplane())


@dataclass(frozen=True)
class Generator:
    name: str
    matrix: MoebiusMap
    kind: str
    region_pos: Region
    region_neg: Region
    # parabolic bookkeeping: a chart sending the fixed point to infinity,
    # the translation step there, and the chart coordinates of the region
    # edges (membership in the full region: w >= chart_hi or w <= chart_lo)
    chart: MoebiusMap | None = None
    chart_shift: float = 0.0
    chart_hi: float = 0.0
    chart_lo: float = 0.0


@dataclass(frozen=True)
class OrbitPoint:
    word: GroupWord
    image: PlanePoint
    dist: float


class FuchsianGroup:
    """Immutable certified group; build through build_group or the built-ins."""

    def __init__(self, name: str, generators: tuple[Generator, ...],
                 seeds: tuple[Horoball, ...], certificate: dict):
        self.name = name
        self.generators = generators
        self.seeds = seeds
        self.certificate = certificate
        self._letters = tuple(x for k in range(1, len(generators) + 1)
                              for x in (k, -k))

    # letters are signed 1-based generator indices, as in GroupWord
    @property
    def letters(self) -> tuple[int, ...]:
        return self._letters

    def generator(self, letter: int) -> Generator:
        return self.generators[abs(letter) - 1]

    def letter_matrix(self, letter: int) -> MoebiusMap:
        g = self.generator(letter)
        return g.matrix if letter > 0 else g.matrix.inverse()

    def letter_region(self, letter: int) -> Region:
        g = self.generator(letter)
        return g.region_pos if letter > 0 else g.region_neg

    def evaluate(self, word: GroupWord) -> MoebiusMap:
        m = MoebiusMap.identity()
        for x in word.letters:
            m = m @ self.letter_matrix(x)
        return m

    @property
    def has_parabolic(self) -> bool:
        return any(g.kind == "parabolic" for g in self.generators)

    def parabolic_fixed_points(self) -> list[BoundaryPoint]:
        return [fixed_points(g.matrix)[0][0]
                for g in self.generators if g.kind == "parabolic"]

    def in_domain(self, z: complex, tol: float = REDUCE_TOL) -> bool:
        """Closed fundamental domain membership (complement of all regions)."""
        for g in self.generators:
            if (g.region_pos.contains_plane(z, -tol)
                    or g.region_neg.contains_plane(z, -tol)):
                return False
        return True

    def reduce_point(self, x: PlanePoint, budget: int = DEFAULT_BUDGET,
                     start_word: GroupWord | None = None,
                     ) -> tuple[PlanePoint, GroupWord]:
        """Map x into the closed fundamental domain.

        Returns (image, word) with image = evaluate(word) applied to x.
        start_word warm-starts the walk (useful along continuous traces);
        the returned word includes it.
        """
        z = x.to_halfplane()
        applied: list[int] = []
        if start_word is not None and start_word:
            z = self.evaluate(start_word).apply(z)
        for _ in range(budget):
            moved = False
            for idx, g in enumerate(self.generators):
                k = idx + 1
                if g.kind == "parabolic":
                    w = g.chart.apply(z).real
                    if w >= g.chart_hi + REDUCE_TOL or w <= g.chart_lo - REDUCE_TOL:
                        n = math.floor(w / g.chart_shift + 0.5)
                        if n != 0:
                            letter = -k if n > 0 else k
                            step = self.letter_matrix(letter)
                            for _ in range(abs(n)):
                                z = step.apply(z)
                                applied.append(letter)
                            moved = True
                            break
                else:
                    if g.region_pos.contains_plane(z, -REDUCE_TOL):
                        z = g.matrix.inverse().apply(z)
                        applied.append(-k)
                        moved = True
                        break
                    if g.region_neg.contains_plane(z, -REDUCE_TOL):
                        z = g.matrix.apply(z)
                        applied.append(k)
                        moved = True
                        break
            if not moved:
                # composition order: the first letter applied acts innermost
                letters = tuple(reversed(applied))
                if start_word is not None:
                    letters = letters + start_word.letters
                return PlanePoint.halfplane(z), GroupWord(letters)
        raise BudgetError(f"point reduction exceeded {budget} steps")

    def _letter_tables(self):
        """Raw float tables for the enumeration inner loop.

        Region rows are (mode, center_or_edge, radius, height_cap): mode 0
        is a right half-plane, 1 a left half-plane, 2 a half-disc, 3 a
        half-disc complement.  The half-plane modes only occur for a
        parabolic fixing infinity; a word starting with that letter is a
        translation power applied to the basepoint or to a point of some
        other letter's half-disc, so its image height never exceeds
        max(Im o, other radii).  That cap is what makes the subtree bound
        grow like twice the log of the translation distance instead of
        once, killing pure translation chains at the right depth.
        """
        mats = []
        rows = []
        raw = []
        for x in self._letters:
            m = self.letter_matrix(x)
            mats.append((x, m.a, m.b, m.c, m.d))
            r = self.letter_region(x)
            if r.end.is_infinity():
                raw.append((0, r.start.halfplane(), 0.0))
            elif r.start.is_infinity():
                raw.append((1, r.end.halfplane(), 0.0))
            else:
                a, b = r.start.halfplane(), r.end.halfplane()
                if a < b:
                    raw.append((2, (a + b) / 2.0, (b - a) / 2.0))
                else:
                    raw.append((3, (a + b) / 2.0, (a - b) / 2.0))
        for i, x in enumerate(self._letters):
            mode, ctr, rad = raw[i]
            cap = math.inf
            if mode < 2 and self.generator(x).kind == "parabolic":
                others = [raw[j] for j, y in enumerate(self._letters)
                          if abs(y) != abs(x)]
                if all(o[0] == 2 for o in others):
                    cap = max([BASEPOINT.y] + [o[2] for o in others])
            rows.append((mode, ctr, rad, cap))
        return mats, rows

    def enumerate_orbit(self, max_word_length: int | None = None,
                        max_distance: float | None = None):
        """Yield OrbitPoints for all reduced words within the cutoff, once
        each, in deterministic length-lex order.

        With max_distance, a subtree is dropped only when every point in
        it provably lies beyond the cutoff: a reduced word starting with
        letter L lands in the directed region of L (capped in height for
        a translation letter, see _letter_tables), so the distance from o
        to the image of that set bounds all descendants from below.  The
        loop runs on raw floats; dataclasses are built only for emitted
        points.
        """
        if max_word_length is None and max_distance is None:
            raise ValueError("need a cutoff: max_word_length or max_distance")
        mats, rows = self._letter_tables()
        asinh, sqrt = math.asinh, math.sqrt
        yield OrbitPoint(GroupWord(), BASEPOINT, 0.0)
        frontier: list[tuple[tuple[int, ...], float, float, float, float]] = [
            ((), 1.0, 0.0, 0.0, 1.0)]
        length = 0
        prune = max_distance is not None
        while frontier:
            length += 1
            if max_word_length is not None and length > max_word_length:
                return
            nxt = []
            for letters, a, b, c, d in frontier:
                last = -letters[-1] if letters else 0
                if prune:
                    # m^{-1}(i) = (d*i - b)/(a - c*i); det stays 1 up to drift
                    back = complex(-b, d) / complex(a, -c)
                    bx, by = back.real, back.imag
                for i in range(len(mats)):
                    x, e, f, g, h = mats[i]
                    if x == last:
                        continue
                    if prune:
                        mode, ctr, rad, cap = rows[i]
                        if mode == 0:
                            out = bx < ctr
                        elif mode == 1:
                            out = bx > ctr
                        elif mode == 2:
                            out = abs(back - ctr) > rad
                        else:
                            out = abs(back - ctr) < rad
                        if out:
                            if mode < 2:
                                dx = abs(bx - ctr)
                                if dx * dx + by * by <= cap * cap:
                                    bd = asinh(dx / by)
                                else:
                                    # perpendicular foot above the cap:
                                    # nearest admissible point is the corner
                                    bd = 2.0 * asinh(
                                        math.hypot(dx, by - cap)
                                        / (2.0 * sqrt(by * cap)))
                            else:
                                w = (back - (ctr - rad)) / (back - (ctr + rad))
                                bd = asinh(abs(w.real) / abs(w.imag))
                            if bd > max_distance:
                                continue
                    ca, cb, cc, cd = (a * e + b * g, a * f + b * h,
                                      c * e + d * g, c * f + d * h)
                    z = complex(cb, ca) / complex(cd, cc)
                    dist_o = 2.0 * asinh(abs(z - 1j) / (2.0 * sqrt(z.imag)))
                    if max_distance is None or dist_o <= max_distance:
                        yield OrbitPoint(GroupWord(letters + (x,)),
                                         PlanePoint.halfplane(z), dist_o)
                    nxt.append((letters + (x,), ca, cb, cc, cd))
            frontier = nxt

    def __repr__(self):
        return f"FuchsianGroup({self.name!r}, {len(self.generators)} generators)"


def _assign_hyperbolic_regions(name: str, m: MoebiusMap,
                               regions: list[Region]) -> tuple[Region, Region]:
    afp, rfp = attracting_fixed_point(m), repelling_fixed_point(m)
    pos = [r for r in regions if r.contains_boundary(afp)]
    neg = [r for r in regions if r.contains_boundary(rfp)]
    if len(pos) != 1 or len(neg) != 1 or pos[0] is neg[0]:
        raise GroupBuildError(
            "fixed point placement",
            f"generator {name}: each fixed point must lie in exactly one region")
    return pos[0], neg[0]


def _split_parabolic(name: str, m: MoebiusMap, region: Region) -> Generator:
    fix = fixed_points(m)[0][0]
    if not region.contains_boundary(fix):
        raise GroupBuildError("fixed point placement",
                              f"generator {name}: parabolic fixed point outside its region")
    first = Region(region.start, fix)
    second = Region(fix, region.end)
    complement = Region(region.end, region.start)
    probe = m.apply_boundary(complement.midpoint())
    if first.contains_boundary(probe):
        pos, neg = first, second
    elif second.contains_boundary(probe):
        pos, neg = second, first
    else:
        raise GroupBuildError("ping-pong law",
                              f"generator {name}: image of the complement "
                              "misses its region")
    chart = transport_to_infinity(fix)
    conj = chart @ m @ chart.inverse()
    if abs(conj.c) > 1e-9:
        raise GroupBuildError("fixed point placement",
                              f"generator {name}: chart conjugation not a translation")
    shift = conj.b / conj.d
    c1 = chart.apply_boundary(region.start).halfplane()
    c2 = chart.apply_boundary(region.end).halfplane()
    return Generator(name, m, "parabolic", pos, neg, chart, shift,
                     max(c1, c2), min(c1, c2))


def _footprint_arcs(gens: list[Generator]) -> list[tuple[float, float, str]]:
    """(start angle, length, label) of each generator-direction footprint;
    parabolic halves rejoined into the one declared region."""
    arcs: list[tuple[float, float, str]] = []
    for g in gens:
        if g.kind == "parabolic":
            a = Region(g.region_pos.start, g.region_neg.end)
            b = Region(g.region_neg.start, g.region_pos.end)
            want = g.region_pos.arc_length + g.region_neg.arc_length
            full = a if abs(a.arc_length - want) < abs(b.arc_length - want) else b
            arcs.append((full.start.angle, full.arc_length, g.name))
        else:
            arcs.append((g.region_pos.start.angle, g.region_pos.arc_length, g.name + "+"))
            arcs.append((g.region_neg.start.angle, g.region_neg.arc_length, g.name + "-"))
    return arcs


def _certify_margins(gens: list[Generator], margin_tol: float) -> dict:
    arcs = sorted(_footprint_arcs(gens))
    total = sum(length for _, length, _ in arcs)
    if total >= TAU:
        raise GroupBuildError("region overlap", "footprint arcs cover the whole circle")
    min_gap, at = math.inf, ""
    min_euclid = math.inf
    for i, (s, length, lab) in enumerate(arcs):
        s2, _, lab2 = arcs[(i + 1) % len(arcs)]
        gap = (s2 - s) % TAU - length
        if gap < min_gap:
            min_gap, at = gap, f"{lab} .. {lab2}"
        x1 = BoundaryPoint(s + length).halfplane()
        x2 = BoundaryPoint(s2).halfplane()
        if math.isfinite(x1) and math.isfinite(x2):
            min_euclid = min(min_euclid, abs(x2 - x1))
    if min_gap <= margin_tol:
        raise GroupBuildError("region overlap",
                              f"margin {min_gap:.3g} rad at {at} (need > {margin_tol})")
    return {"min_angular_gap": min_gap, "at": at,
            "min_euclidean_gap": None if math.isinf(min_euclid) else min_euclid,
            "total_arc": total}


def _certify_pingpong(gens: list[Generator]) -> int:
    directed: list[tuple[str, MoebiusMap, Region, str]] = []
    for g in gens:
        directed.append((g.name + "+", g.matrix, g.region_pos, g.name + "-"))
        directed.append((g.name + "-", g.matrix.inverse(), g.region_neg, g.name + "+"))
    arcs = {lab: r for lab, _, r, _ in directed}
    checks = 0
    slack = 1e-9
    for lab, m, region, inv_lab in directed:
        inv_arc = arcs[inv_lab]
        comp = Region(inv_arc.end, inv_arc.start)
        image = Region(m.apply_boundary(comp.start), m.apply_boundary(comp.end))
        if not region.contains_arc(image, slack):
            raise GroupBuildError("ping-pong law",
                                  f"{lab} does not map the complement of {inv_lab} "
                                  "into its own arc")
        checks += 1
        for lab2, _, r2, _ in directed:
            if lab2 == inv_lab:
                continue
            nested = Region(m.apply_boundary(r2.start), m.apply_boundary(r2.end))
            if not region.contains_arc(nested, slack):
                raise GroupBuildError("ping-pong law",
                                      f"nesting failure: {lab} applied to arc({lab2}) "
                                      f"leaves arc({lab})")
            checks += 1
    return checks


def _certify_nonelementary(gens: list[Generator]) -> int:
    angles: list[float] = []
    for g in gens:
        for xi, _ in fixed_points(g.matrix):
            if all(min(abs(xi.angle - a), TAU - abs(xi.angle - a)) > 1e-9 for a in angles):
                angles.append(xi.angle)
    if len(gens) < 2 or len(angles) < 3:
        raise GroupBuildError("nonelementary",
                              f"need >= 2 generators and >= 3 fixed points, "
                              f"got {len(gens)} and {len(angles)}")
    return len(angles)


def build_group(name: str, gens: list[tuple], seeds: dict | None = None,
                margin_tol: float = MARGIN_TOL, horoball_depth: int = 3,
                ) -> FuchsianGroup:
    """Certify ping-pong data and assemble the group.

    gens: list of (name, MoebiusMap, kind, intervals); each interval a
    ccw (start, end) pair of extended-real boundary coordinates.  seeds:
    {generator name: horoball level} for parabolic generators.
    """
    seeds = dict(seeds or {})
    built: list[Generator] = []
    for gname, m, kind, intervals in gens:
        actual = classify(m)
        if actual != kind:
            raise GroupBuildError("generator kind",
                                  f"generator {gname}: declared {kind}, matrix is {actual}")
        regions = [Region(BoundaryPoint.from_halfplane(a), BoundaryPoint.from_halfplane(b))
                   for a, b in intervals]
        if kind == "hyperbolic":
            if len(regions) != 2:
                raise GroupBuildError("region count",
                                      f"generator {gname}: hyperbolic needs 2 regions")
            pos, neg = _assign_hyperbolic_regions(gname, m, regions)
            built.append(Generator(gname, m, kind, pos, neg))
        else:
            if len(regions) != 1:
                raise GroupBuildError("region count",
                                      f"generator {gname}: parabolic needs 1 region")
            built.append(_split_parabolic(gname, m, regions[0]))

    cert = {
        "margins": _certify_margins(built, margin_tol),
        "pingpong_checks": _certify_pingpong(built),
        "distinct_fixed_points": _certify_nonelementary(built),
    }

    seed_balls: list[Horoball] = []
    for g in built:
        if g.kind == "parabolic":
            if g.name not in seeds:
                raise GroupBuildError("horoball seed",
                                      f"parabolic generator {g.name} has no horoball seed")
            level = float(seeds[g.name])
            if level <= 0:
                raise GroupBuildError("horoball seed",
                                      f"seed level for {g.name} must be positive "
                                      "(o must stay outside)")
            seed_balls.append(Horoball(fixed_points(g.matrix)[0][0], level))

    group = FuchsianGroup(name, tuple(built), tuple(seed_balls), cert)
    if seed_balls:
        family = horoball_family(group, horoball_depth)
        cert["horoballs"] = {
            "depth": horoball_depth,
            "count": len(family),
            "entry_distance": min(h.entry_distance for h in family),
        }
    return group


def horoball_family(group: FuchsianGroup, depth: int) -> list[Horoball]:
    """Images of the seed horoballs under words of length <= depth,
    deduplicated, certified pairwise disjoint with o outside all."""
    if not group.seeds:
        raise GroupBuildError("horoball family", f"group {group.name} has no parabolic")
    seen: dict[tuple, Horoball] = {}
    for pt in group.enumerate_orbit(max_word_length=depth):
        m = group.evaluate(pt.word)
        for seed in group.seeds:
            h = seed.transform(m)
            key = (round(h.base.angle, 9), round(h.level, 9))
            seen.setdefault(key, h)
    family = sorted(seen.values(), key=lambda h: (round(h.base.angle, 12), h.level))
    for h in family:
        if h.level <= 0:
            raise GroupBuildError("horoball family",
                                  f"basepoint o inside the horoball at angle {h.base.angle:.6f}")
    for i, h1 in enumerate(family):
        for h2 in family[i + 1:]:
            if _horoballs_overlap(h1, h2):
                raise GroupBuildError(
                    "horoball family",
                    f"overlap between horoballs at angles "
                    f"{h1.base.angle:.6f} and {h2.base.angle:.6f}")
    return family


def _horoballs_overlap(h1: Horoball, h2: Horoball, tol: float = 1e-9) -> bool:
    if h1.base.close_to(h2.base, 1e-12):
        return True
    if h1.base.is_infinity() or h2.base.is_infinity():
        top, disc = (h1, h2) if h1.base.is_infinity() else (h2, h1)
        return disc.euclidean_diameter() > top.height_cut() + tol
    x1, x2 = h1.base.halfplane(), h2.base.halfplane()
    # tangent discs of diameters d1, d2 at x1, x2 meet iff (x1-x2)^2 < d1*d2
    return (x1 - x2) ** 2 < h1.euclidean_diameter() * h2.euclidean_diameter() - tol


@lru_cache(maxsize=None)
def schottky2() -> FuchsianGroup:
    """Reference convex-cocompact group, a one-holed torus cover:
    z -> 9z paired across {|z| <= 0.4} / {|z| >= 3.6}, and a hyperbolic
    map with fixed points -1, +1 paired across the half-discs over
    [-2, -1/2] and [1/2, 2]."""
    g1 = MoebiusMap(3.0, 0.0, 0.0, float(Fraction(1, 3)))
    g2 = MoebiusMap(float(Fraction(5, 3)), float(Fraction(4, 3)),
                    float(Fraction(4, 3)), float(Fraction(5, 3)))
    return build_group("schottky2", [
        ("g1", g1, "hyperbolic", [(-0.4, 0.4), (3.6, -3.6)]),
        ("g2", g2, "hyperbolic", [(-2.0, -0.5), (0.5, 2.0)]),
    ])


@lru_cache(maxsize=None)
def cusp1() -> FuchsianGroup:
    """Reference one-cusp group: parabolic z -> z + 6 over {|Re z| >= 3}
    plus the hyperbolic map with fixed points -1, +1 as in schottky2.

    The horoball seed at infinity sits at level 0.2, certified disjoint
    from its depth-3 images at build time."""
    p = MoebiusMap(1.0, 6.0, 0.0, 1.0)
    h = MoebiusMap(float(Fraction(5, 3)), float(Fraction(4, 3)),
                   float(Fraction(4, 3)), float(Fraction(5, 3)))
    return build_group("cusp1", [
        ("p", p, "parabolic", [(3.0, -3.0)]),
        ("h", h, "hyperbolic", [(-2.0, -0.5), (0.5, 2.0)]),
    ], seeds={"p": 0.2})


BUILTIN_GROUPS = {"schottky2": schottky2, "cusp1": cusp1}


def _parse_entry(v) -> float:
    if isinstance(v, str):
        s = v.strip()
        if s in ("inf", "+inf"):
            return math.inf
        if s == "-inf":
            return -math.inf
        return float(Fraction(s))
    return float(v)


def group_from_dict(data: dict) -> FuchsianGroup:
    """Build from the group spec schema (see load_group)."""
    gens = []
    for g in data["generators"]:
        a, b, c, d = (_parse_entry(v) for v in g["matrix"])
        intervals = [(_parse_entry(p), _parse_entry(q)) for p, q in g["regions"]]
        gens.append((g["name"], MoebiusMap(a, b, c, d), g["kind"], intervals))
    seeds = {s["generator"]: _parse_entry(s["level"])
             for s in data.get("horoballs", [])}
    return build_group(data.get("name", "custom"), gens, seeds,
                       horoball_depth=int(data.get("horoball_depth", 3)))


def load_group(spec: str) -> FuchsianGroup:
    """A built-in name, or a path to a JSON/TOML group spec file.

    File schema: name; generators, each {name, matrix (4 entries, exact
    rationals as strings allowed), kind, regions (ccw [start, end]
    coordinate pairs, "inf" allowed)}; horoballs, each {generator, level}.
    """
    if spec in BUILTIN_GROUPS:
        return BUILTIN_GROUPS[spec]()
    if not os.path.exists(spec):
        known = ", ".join(sorted(BUILTIN_GROUPS))
        raise ValueError(f"unknown group {spec!r}: not one of {known} "
                         "and no such spec file")
    if spec.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(spec, "rb") as fh:
            return group_from_dict(tomllib.load(fh))
    with open(spec, "r", encoding="utf-8") as fh:
        return group_from_dict(json.load(fh))


def enumerate_orbit(group: FuchsianGroup, max_word_length: int | None = None,
                    max_distance: float | None = None):
    """Module-level alias for FuchsianGroup.enumerate_orbit."""
    return group.enumerate_orbit(max_word_length, max_distance)
