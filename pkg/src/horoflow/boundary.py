"""Limit-set covers, ordinary intervals, and boundary-point classification.

The nested-arc picture drives everything here.  A reduced word w = x1..xd
sends the directed arc of its last letter to an arc A(w); the union over
words of length d covers the limit set, and the covers shrink onto it.
Inside A(w) the child arcs A(w y) sit in a circular order that depends
only on the last letter of w, so the address of an extreme endpoint of
any arc is eventually periodic with period at most the letter count.
That turns interval endpoints into exact objects: preperiod u, period v,
endpoint = u applied to the fixed point of v, certified by the single
conjugate word u v u^-1.

Verdicts returned by the classifiers are cutoff-qualified and never
silently collapse to yes/no; "unresolved" is a first-class answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from horoflow.flows import HopfFrame
from horoflow.group import FuchsianGroup, Region
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
    transport_to_infinity,
)
from horoflow.words import GroupWord

ANGLE_TOL = 1e-9


def _gap(a: float, b: float) -> float:
    d = abs(a - b) % TAU
    return min(d, TAU - d)


@dataclass(frozen=True)
class ArcSet:
    """Disjoint ccw arcs [start, start + length) on the circle, sorted."""

    arcs: tuple[tuple[float, float], ...]

    def __post_init__(self):
        arcs = sorted((s % TAU, l) for s, l in self.arcs if l > 1e-12)
        total = sum(l for _, l in arcs)
        if total > TAU + 1e-9:
            raise ValueError("arcs overlap: total length exceeds the circle")
        for (s1, l1), (s2, _) in zip(arcs, arcs[1:]):
            if s1 + l1 > s2 + 1e-12:
                raise ValueError(f"arcs overlap near angle {s2:.6f}")
        object.__setattr__(self, "arcs", tuple(arcs))

    @classmethod
    def from_regions(cls, regions) -> "ArcSet":
        return cls(tuple((r.start.angle, r.arc_length) for r in regions))

    @property
    def total_length(self) -> float:
        return sum(l for _, l in self.arcs)

    def contains_angle(self, angle: float, slack: float = 0.0) -> bool:
        a = angle % TAU
        for s, l in self.arcs:
            if -slack <= (a - s) % TAU <= l + slack:
                return True
            if (a - s) % TAU >= TAU - slack:
                return True
        return False

    def complement(self) -> "ArcSet":
        if not self.arcs:
            return ArcSet(((0.0, TAU),))
        out = []
        for (s1, l1), (s2, _) in zip(self.arcs, self.arcs[1:] + self.arcs[:1]):
            gap = (s2 - s1 - l1) % TAU
            if gap > 1e-12:
                out.append(((s1 + l1) % TAU, gap))
        return ArcSet(tuple(out))

    def __len__(self) -> int:
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)


# --- letter geometry cached per group -------------------------------------


class _LetterGeometry:
    """Per-letter child-arc configuration and the extreme-child maps."""

    def __init__(self, group: FuchsianGroup):
        self.group = group
        self.arc = {x: group.letter_region(x) for x in group.letters}
        self.children = {}
        self.first = {}
        self.last = {}
        for x in group.letters:
            m = group.letter_matrix(x)
            kids = []
            for y in group.letters:
                if y == -x:
                    continue
                img = Region(m.apply_boundary(self.arc[y].start),
                             m.apply_boundary(self.arc[y].end))
                kids.append((y, img))
            base = self.arc[x].start.angle
            kids.sort(key=lambda kr: (kr[1].start.angle - base) % TAU)
            self.children[x] = tuple(kids)
            self.first[x] = kids[0][0]
            self.last[x] = max(
                kids, key=lambda kr: (kr[1].end.angle - base) % TAU)[0]


_geometry_cache: dict[int, _LetterGeometry] = {}


def _geometry(group: FuchsianGroup) -> _LetterGeometry:
    geo = _geometry_cache.get(id(group))
    if geo is None or geo.group is not group:
        geo = _LetterGeometry(group)
        _geometry_cache[id(group)] = geo
    return geo


def _block_fixed_point(group: FuchsianGroup, block: GroupWord) -> BoundaryPoint:
    m = group.evaluate(block)
    kind = classify(m)
    if kind == "hyperbolic":
        return attracting_fixed_point(m)
    if kind == "parabolic":
        return fixed_points(m)[0][0]
    raise ValueError(f"period block {block} is {kind}, expected a translation "
                     "along or toward its fixed point")


@dataclass(frozen=True)
class EndpointCertificate:
    """Exact limit of an extreme chain of nested arcs.

    point is the fixed point of word (= preperiod * period * preperiod^-1),
    verified to be held fixed to 1e-9.
    """

    point: BoundaryPoint
    word: GroupWord
    preperiod: GroupWord
    period: GroupWord


def _extreme_chain(group: FuchsianGroup, word: GroupWord, side: str) -> EndpointCertificate:
    """Follow the ccw-extreme child map from an arc word until it cycles."""
    geo = _geometry(group)
    step = geo.last if side == "end" else geo.first
    tail = [word.letters[-1]]
    seen = {tail[0]: 0}
    while True:
        nxt = step[tail[-1]]
        if nxt in seen:
            cut = seen[nxt]
            break
        seen[nxt] = len(tail)
        tail.append(nxt)
    # the chain address is word, tail[1:], then tail[cut:] forever
    pre = GroupWord(word.letters[:-1] + tuple(tail[:cut]))
    block = GroupWord(tuple(tail[cut:]))
    fixed = _block_fixed_point(group, block)
    point = group.evaluate(pre).apply_boundary(fixed)
    # verify factored: the assembled conjugate has entries squared in the
    # preperiod and cancels catastrophically at its own fixed point
    moved = group.evaluate(block).apply_boundary(fixed)
    if _gap(moved.angle, fixed.angle) > 1e-9:
        raise ArithmeticError(
            f"extreme-chain block {block} fails to fix its point")
    if not group.letter_region(word.letters[0]).contains_angle(point.angle, 1e-9):
        raise ArithmeticError(
            f"extreme-chain endpoint escaped the arc of {word}")
    cert = pre * block * pre.inverse()
    return EndpointCertificate(point, cert, pre, block)


# --- limit-set cover ------------------------------------------------------


@dataclass(frozen=True)
class LimitSetCover:
    """Arcs containing the limit set, one per reduced word of the depth."""

    group: FuchsianGroup
    depth: int
    words: tuple[GroupWord, ...]
    arcs: tuple[Region, ...]

    @property
    def arcset(self) -> ArcSet:
        return ArcSet.from_regions(self.arcs)

    def contains(self, xi: BoundaryPoint, slack: float = ANGLE_TOL) -> bool:
        return any(r.contains_angle(xi.angle, slack) for r in self.arcs)


def limit_set_cover(group: FuchsianGroup, depth: int) -> LimitSetCover:
    """Nested arc cover from all reduced words of the given length."""
    if depth < 1:
        raise ValueError("cover depth must be >= 1")
    count = 2 * len(group.generators) * 3 ** (depth - 1)
    if count > 300_000:
        raise ValueError(f"cover at depth {depth} would hold {count} arcs")
    geo = _geometry(group)
    level = [(GroupWord((x,)), MoebiusMap.identity(), geo.arc[x])
             for x in group.letters]
    for _ in range(depth - 1):
        nxt = []
        for word, m, _ in level:
            m_full = m @ group.letter_matrix(word.letters[-1])
            for y in group.letters:
                if y == -word.letters[-1]:
                    continue
                arc = Region(m_full.apply_boundary(geo.arc[y].start),
                             m_full.apply_boundary(geo.arc[y].end))
                nxt.append((word * GroupWord((y,)), m_full, arc))
        level = nxt
    words = tuple(w for w, _, _ in level)
    arcs = tuple(a for _, _, a in level)
    return LimitSetCover(group, depth, words, arcs)


# --- ordinary intervals ---------------------------------------------------


@dataclass(frozen=True)
class IntervalRecord:
    """One maximal interval of the complement, ccw from start to end.

    start/end are the certified limits; the floats observed at the build
    depth are kept alongside for convergence diagnostics.
    """

    start: EndpointCertificate
    end: EndpointCertificate
    start_at_depth: float
    end_at_depth: float

    @property
    def arc_length(self) -> float:
        return (self.end.point.angle - self.start.point.angle) % TAU


@dataclass(frozen=True)
class OrdinaryIntervals:
    group: FuchsianGroup
    depth: int
    intervals: tuple[IntervalRecord, ...]

    @property
    def arcset(self) -> ArcSet:
        return ArcSet(tuple((iv.start.point.angle, iv.arc_length)
                            for iv in self.intervals))

    def widest(self) -> IntervalRecord:
        best = max(iv.arc_length for iv in self.intervals)
        ties = [iv for iv in self.intervals if iv.arc_length > best - 1e-12]
        return min(ties, key=lambda iv: iv.start.point.angle)


def ordinary_intervals(group: FuchsianGroup, depth: int) -> OrdinaryIntervals:
    """Complement gaps of the depth cover, with exact certified endpoints.

    Each gap of the cover lies inside exactly one maximal interval of the
    complement of the limit set; the bounding arcs' extreme chains certify
    the interval's true endpoints.  Deeper covers discover more (smaller)
    intervals; the ones found are exact at any depth.
    """
    cover = limit_set_cover(group, 1)
    if cover.arcset.total_length >= TAU - 1e-9:
        raise ValueError("group of the first kind: cover leaves no gaps")
    cover = limit_set_cover(group, depth)
    order = sorted(range(len(cover.arcs)),
                   key=lambda i: cover.arcs[i].start.angle)
    out = []
    for k, i in enumerate(order):
        j = order[(k + 1) % len(order)]
        left, right = cover.arcs[i], cover.arcs[j]
        gap = (right.start.angle - left.end.angle) % TAU
        if gap <= 1e-12 or gap > TAU - 1e-12:
            continue
        start = _extreme_chain(group, cover.words[i], "end")
        end = _extreme_chain(group, cover.words[j], "start")
        out.append(IntervalRecord(start, end,
                                  left.end.angle, right.start.angle))
    out.sort(key=lambda iv: iv.start.point.angle)
    return OrdinaryIntervals(group, depth, tuple(out))


# --- first-endpoint classification ----------------------------------------


@dataclass(frozen=True)
class FirstEndpointResult:
    verdict: str  # "yes" | "no" | "unresolved"
    certificate: EndpointCertificate | None
    detail: str


def _arc_defect(img: Region, angle: float) -> float:
    """Circular distance from the angle to the arc, 0 inside."""
    off = (angle - img.start.angle) % TAU
    if off <= img.arc_length:
        return 0.0
    return min(off - img.arc_length, TAU - off)


def _containing_child(children, m, xi, tol):
    """Best child by arc distance; ties at shared endpoints are harmless
    since either address classifies a touching point the same way."""
    imgs = []
    for y, arc in children:
        img = Region(m.apply_boundary(arc.start), m.apply_boundary(arc.end))
        imgs.append((y, img))
    best = min(imgs, key=lambda yi: _arc_defect(yi[1], xi.angle))
    if _arc_defect(best[1], xi.angle) <= tol:
        return best, imgs
    return None, imgs


def is_first_endpoint(xi: BoundaryPoint, group: FuchsianGroup,
                      depth: int = 12, tol: float = ANGLE_TOL) -> FirstEndpointResult:
    """Does xi start (ccw) a maximal interval of the complement of the
    limit set?

    Certified endpoint values are dense in the limit set, so closeness to
    one proves nothing by itself.  The decisive data is the address: walk
    the nested arcs containing xi to the given depth, then read the
    eventual period of the path.  A periodic tail that follows the
    ccw-extreme child map onto a genuine gap is exactly a first endpoint;
    any other periodic tail has limit points on both sides.  Points whose
    address stays aperiodic through the depth budget come back
    unresolved rather than guessed.

    Raises ValueError for a point deep inside an ordinary interval.
    """
    geo = _geometry(group)
    top = sorted(group.letters, key=lambda x: geo.arc[x].start.angle)
    holder = min(top, key=lambda x: _arc_defect(geo.arc[x], xi.angle))
    if _arc_defect(geo.arc[holder], xi.angle) > tol:
        # inside a depth-1 gap: bounded by the two neighboring arcs
        k = min(range(len(top)),
                key=lambda i: (xi.angle - geo.arc[top[i]].end.angle) % TAU)
        left, right = top[k], top[(k + 1) % len(top)]
        return _settle_gap(group, xi, GroupWord((left,)), GroupWord((right,)), tol)

    path = [holder]
    arcs = [geo.arc[holder]]
    m = MoebiusMap.identity()
    while len(path) < depth:
        last = path[-1]
        # children[last] holds the letter-level images; the prefix matrix
        # transports them into the current arc
        found, imgs = _containing_child(geo.children[last], m, xi, tol)
        if found is None:
            left, right = _gap_neighbors(imgs, xi)
            w = GroupWord(tuple(path))
            return _settle_gap(group, xi, w * GroupWord((left,)),
                               w * GroupWord((right,)), tol)
        y, child_arc = found
        path.append(y)
        arcs.append(child_arc)
        m = m @ group.letter_matrix(last)

    result = _classify_periodic_tail(group, xi, path, tol)
    if result is not None:
        return result
    flank = min((arcs[i - 1].arc_length for i in range(1, len(path))
                 if path[i] != geo.last[path[i - 1]]), default=math.inf)
    return FirstEndpointResult(
        "unresolved", None,
        f"address aperiodic through depth {depth}; "
        f"flanking arcs down to {flank:.3g}")


def _classify_periodic_tail(group: FuchsianGroup, xi: BoundaryPoint,
                            path: list, tol: float) -> FirstEndpointResult | None:
    """Verdict for a point whose arc address repeats, None otherwise.

    The tail must repeat for at least two full periods and the implied
    periodic point must coincide with xi; that rules out transient
    letter coincidences.
    """
    geo = _geometry(group)
    n = len(path)
    for q in range(1, len(group.letters) + 1):
        if n < 2 * q or any(path[n - 1 - i] != path[n - 1 - i - q]
                            for i in range(q)):
            continue
        entry = n - 2 * q
        while entry > 0 and path[entry - 1] == path[entry - 1 + q]:
            entry -= 1
        pre = GroupWord(tuple(path[:entry]))
        block = GroupWord(tuple(path[entry:entry + q]))
        try:
            fixed = _block_fixed_point(group, block)
        except ValueError:
            continue
        point = group.evaluate(pre).apply_boundary(fixed)
        if _gap(point.angle, xi.angle) > tol:
            continue
        cert = EndpointCertificate(point, pre * block * pre.inverse(),
                                   pre, block)
        cyc = tuple(path[entry:entry + q])
        follows_last = all(geo.last[cyc[i]] == cyc[(i + 1) % q]
                           for i in range(q))
        follows_first = all(geo.first[cyc[i]] == cyc[(i + 1) % q]
                            for i in range(q))
        if follows_last:
            if _right_gap_exists(group, GroupWord(tuple(path[:entry + 1]))):
                return FirstEndpointResult(
                    "yes", cert,
                    "periodic address follows the ccw-extreme chain onto a gap")
            return FirstEndpointResult(
                "no", cert, "extreme chain lands on touching arcs (two-sided)")
        if follows_first:
            return FirstEndpointResult(
                "no", cert, "address follows the chain bounding a gap end "
                "(second endpoint)")
        return FirstEndpointResult(
            "no", cert, "periodic point flanked by arcs on both sides")
    return None


def _right_gap_exists(group: FuchsianGroup, word: GroupWord) -> bool:
    """A gap truly follows the arc's end extreme unless the next arc over
    begins at the same point (parabolic halves touching at the cusp).

    Walks up past every level where the arc is its parent's last child;
    at the first ccw successor, touching is a letter-level fact since
    the joint prefix map preserves it.
    """
    geo = _geometry(group)
    letters = word.letters
    while len(letters) > 1:
        kids = geo.children[letters[-2]]
        idx = next(k for k, (y, _) in enumerate(kids) if y == letters[-1])
        if idx + 1 < len(kids):
            mine, nxt = kids[idx][1], kids[idx + 1][1]
            return _gap(mine.end.angle, nxt.start.angle) > 1e-12
        letters = letters[:-1]
    top = sorted(group.letters, key=lambda x: geo.arc[x].start.angle)
    i = top.index(letters[0])
    nxt = top[(i + 1) % len(top)]
    return _gap(geo.arc[letters[0]].end.angle,
                geo.arc[nxt].start.angle) > 1e-12


def _gap_neighbors(imgs, xi):
    left = max(imgs, key=lambda yi: TAU - (xi.angle - yi[1].end.angle) % TAU)
    right = min(imgs, key=lambda yi: (yi[1].start.angle - xi.angle) % TAU)
    return left[0], right[0]


def _settle_gap(group, xi, left_word, right_word, tol) -> FirstEndpointResult:
    start = _extreme_chain(group, left_word, "end")
    end = _extreme_chain(group, right_word, "start")
    if _gap(xi.angle, start.point.angle) <= tol:
        return FirstEndpointResult("yes", start, "matches the certified gap start")
    if _gap(xi.angle, end.point.angle) <= tol:
        return FirstEndpointResult("no", end,
                                   "matches a certified gap end (second endpoint)")
    raise ValueError(
        "not a limit point: the point lies inside an ordinary interval, "
        f"{_gap(xi.angle, start.point.angle):.3g} and "
        f"{_gap(xi.angle, end.point.angle):.3g} from its certified endpoints")


# --- radial / parabolic classification ------------------------------------


@dataclass(frozen=True)
class RadialWitness:
    word: GroupWord
    ray_parameter: float
    ray_distance: float


@dataclass(frozen=True)
class RadialVerdict:
    kind: str  # "radial" | "not-radial" | "parabolic-fixed"
    witnesses: tuple[RadialWitness, ...]
    distance_cutoff: float
    time_cutoff: float
    conjugator: GroupWord | None = None


def is_radial(xi: BoundaryPoint, group: FuchsianGroup,
              distance_cutoff: float = 2.0, time_cutoff: float = 8.0,
              conjugate_length: int = 6) -> RadialVerdict:
    """Classify approach to xi along the ray from o.

    Parabolic fixed points are recognized exactly first: xi equal (to
    1e-9 in angle) to a word conjugate of a cusp point.  Otherwise xi is
    radial when at least two orbit points sit within distance_cutoff of
    the transported vertical ray beyond parameter time_cutoff / 2; the
    negative verdict is explicitly cutoff-qualified.
    """
    for cusp in group.parabolic_fixed_points():
        for pt in group.enumerate_orbit(max_word_length=conjugate_length):
            img = group.evaluate(pt.word).apply_boundary(cusp)
            if _gap(img.angle, xi.angle) <= 1e-9:
                return RadialVerdict("parabolic-fixed", (), distance_cutoff,
                                     time_cutoff, conjugator=pt.word)

    chart = transport_to_infinity(xi, BASEPOINT)
    witnesses = []
    budget = time_cutoff + 2.0 * distance_cutoff + 1.0
    for pt in group.enumerate_orbit(max_distance=budget):
        if not pt.word:
            continue
        w = chart.apply(pt.image.to_halfplane())
        r2 = w.real * w.real + w.imag * w.imag
        if r2 <= 1.0:
            continue
        param = 0.5 * math.log(r2)
        dist = math.asinh(abs(w.real) / w.imag)
        if param >= time_cutoff / 2.0 and dist <= distance_cutoff:
            witnesses.append(RadialWitness(pt.word, param, dist))
    witnesses.sort(key=lambda wit: wit.ray_parameter)
    kind = "radial" if len(witnesses) >= 2 else "not-radial"
    return RadialVerdict(kind, tuple(witnesses), distance_cutoff, time_cutoff)


# --- right-horocyclic test ------------------------------------------------


@dataclass(frozen=True)
class ConeRegion:
    """Points within alpha of the backward ray of the frame flowed
    backward by depth; the companion half-horoball test lives in
    right_horoball_contains."""

    frame: HopfFrame
    alpha: float
    depth: float

    def contains(self, x: PlanePoint) -> bool:
        chart = transport_to_infinity(self.frame.xi_minus)
        b = chart.apply(self.frame.base_point().to_halfplane())
        w = chart.apply(x.to_halfplane())
        level = b.imag * math.exp(self.depth)
        if w.imag < level:
            return False
        if abs(w - complex(b.real, 0.0)) >= level:
            return math.asinh(abs(w.real - b.real) / w.imag) <= self.alpha
        return distance(PlanePoint.halfplane(w),
                        PlanePoint.halfplane(complex(b.real, level))) <= self.alpha


def right_horoball_contains(w: complex, x0: float, level: float) -> bool:
    """Transported membership for the forward-side half horoball: at least
    level high, on the non-positive side of the marked coordinate."""
    return w.imag >= level and w.real <= x0


@dataclass(frozen=True)
class WitnessCell:
    alpha: float
    depth: float
    count: int
    example: GroupWord | None


@dataclass(frozen=True)
class RightHorocyclicReport:
    point_angle: float
    direct: bool
    predicate: bool | None
    agree: bool
    cells: tuple[WitnessCell, ...]
    grid_max: dict
    first_endpoint: FirstEndpointResult
    orbit_cutoff: float


def is_right_horocyclic(xi: BoundaryPoint, group: FuchsianGroup,
                        alphas: tuple[float, ...] = (0.5, 1.25, 2.0),
                        depths: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0),
                        orbit_cutoff: float = 12.0,
                        endpoint_depth: int = 12,
                        tol: float = ANGLE_TOL) -> RightHorocyclicReport:
    """Two independent reads of the same property, returned together.

    Predicate form: xi fails to start an ordinary interval.  Direct form:
    for every (alpha, depth) in the grid, some orbit point lies in the
    forward-side half horoball at that depth but outside the cone of that
    width.  The grid is finite, so the direct verdict certifies only up
    to the reported maxima; disagreement between the two forms is a bug
    to report, not to paper over.

    Raises ValueError when xi is not horospherical (parabolic or not
    radial at the default cutoffs).
    """
    rad = is_radial(xi, group)
    if rad.kind != "radial":
        raise ValueError(f"not horospherical: classification gave {rad.kind}")

    fe = is_first_endpoint(xi, group, endpoint_depth, tol)
    predicate = {"yes": False, "no": True, "unresolved": None}[fe.verdict]

    chart = transport_to_infinity(xi, BASEPOINT)
    points = []
    for pt in group.enumerate_orbit(max_distance=orbit_cutoff):
        if pt.word:
            points.append((pt.word, chart.apply(pt.image.to_halfplane())))

    cells = []
    grid_max: dict = {"alpha": 0.0, "depth": 0.0}
    for alpha in alphas:
        slope = math.sinh(alpha)
        for depth in depths:
            level = math.exp(depth)
            count, example = 0, None
            for word, w in points:
                if (right_horoball_contains(w, 0.0, level)
                        and abs(w.real) > slope * w.imag):
                    count += 1
                    if example is None:
                        example = word
            cells.append(WitnessCell(alpha, depth, count, example))
            if count:
                grid_max["alpha"] = max(grid_max["alpha"], alpha)
                grid_max["depth"] = max(grid_max["depth"], depth)
    direct = all(c.count > 0 for c in cells)
    agree = predicate is None or predicate == direct
    return RightHorocyclicReport(xi.angle, direct, predicate, agree,
                                 tuple(cells), grid_max, fe, orbit_cutoff)
