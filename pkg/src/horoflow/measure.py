"""Orbit growth, conformal boundary measures, shadows, and flow densities.

The growth exponent of a group orbit is fitted from ln N(T') over the
window [T/2, T]; a Poincare series evaluated just below and just above
the fit crosses from growing to saturated there, which pins the
exponent independently of the fit.

Boundary measures are finite atom lists.  Each orbit point contributes
one atom at its radial projection from o with weight e^{-s d(o, point)},
the classical Patterson recipe truncated at a distance cutoff.  Arc
masses treat arcs as closed at the start and open at the end, so a
partition of the circle sums to the total mass exactly.

Shadows are computed in a chart sending the viewing direction to
infinity, where the projection of a boundary point w onto the vertical
ray is the apex of the perpendicular geodesic, at height |w|: the
shadow at depth t is exactly {|w| >= e^t}, and its two halves split at
the direction point, the positive half on the counterclockwise side.

The weight factors for the invariant measures on the frame bundle are
exponentials of Busemann cocycles at the frame endpoints: the product
of both factors for the geodesic-flow (Bowen-Margulis-Sullivan) form,
the forward factor alone for conditionals on expanding horocycles, the
backward factor alone for the horocycle-invariant density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from horoflow.boundary import ArcSet
from horoflow.flows import HopfFrame, QuotientFrame, horocycle_flow, reduce_frame
from horoflow.group import FuchsianGroup, Region
from horoflow.moebius import (
    BASEPOINT,
    BoundaryPoint,
    MoebiusMap,
    PlanePoint,
    busemann,
    transport_to_infinity,
)

TAU = 2.0 * math.pi

# default gap of the sampling exponent above the fitted growth rate
EXPONENT_MARGIN = 0.02
# arc distance below which a sampled endpoint pair counts as diagonal
NEAR_DIAGONAL_GAP = 0.05
# depth step used when checking that shadow mass sits near the shadow rim
ANNULUS_STEP = 2.0


def _angles_through(m: MoebiusMap, angles: np.ndarray) -> np.ndarray:
    """Boundary action of m on an angle array, via projective pairs."""
    half = 0.5 * angles
    p, q = -np.cos(half), np.sin(half)
    out = (2.0 * np.arctan2(m.c * p + m.d * q, -(m.a * p + m.b * q))) % TAU
    # a hair below zero wraps to the modulus itself after rounding
    out[out >= TAU] = 0.0
    return out


def _busemann_angles(angles: np.ndarray, x: PlanePoint, y: PlanePoint) -> np.ndarray:
    """busemann() over an angle array; the infinite branch covers angle 0
    and the denormal angles whose half-plane coordinate overflows."""
    zx, zy = x.to_halfplane(), y.to_halfplane()
    t = np.tan(0.5 * angles)
    out = np.full_like(angles, math.log(zy.imag / zx.imag))
    finite = (angles != 0.0) & (t != 0.0)
    x0 = -1.0 / t[finite]
    out[finite] = (math.log(zy.imag) - 2.0 * np.log(np.abs(zy - x0))
                   - math.log(zx.imag) + 2.0 * np.log(np.abs(zx - x0)))
    return out


def radial_projection(x: PlanePoint, origin: PlanePoint = BASEPOINT) -> BoundaryPoint:
    """Boundary point where the geodesic ray from origin through x exits.

    Closed form: after the affine change taking origin to i, the
    geodesic through i and a + bi is the semicircle centred at
    c = (a^2 + b^2 - 1) / 2a, whose feet multiply to -1; the ray leaves
    through the foot on the side of a.
    """
    zo, z = origin.to_halfplane(), x.to_halfplane()
    a = (z.real - zo.real) / zo.imag
    b = z.imag / zo.imag
    if a == 0.0:
        if b == 1.0:
            raise ValueError("radial projection undefined at the origin itself")
        exit_coord = math.inf if b > 1.0 else 0.0
    else:
        c = (a * a + b * b - 1.0) / (2.0 * a)
        # feet are c +- r with product -1; divide instead of subtracting
        # so the foot near zero keeps full precision
        positive_foot = c + math.hypot(c, 1.0) if c >= 0.0 else -1.0 / (c - math.hypot(c, 1.0))
        exit_coord = positive_foot if a > 0.0 else -1.0 / positive_foot
    if math.isinf(exit_coord):
        return BoundaryPoint.infinity()
    return BoundaryPoint.from_halfplane(zo.real + zo.imag * exit_coord)


# ---------------------------------------------------------------------------
# atomic boundary measures


@dataclass(frozen=True)
class AtomicBoundaryMeasure:
    """A finite positive measure on the circle given by weighted atoms.

    Angles are strictly increasing in [0, 2*pi); weights are positive.
    When ``normalized`` the weights sum to one within 1e-12.  The
    metadata records how the measure was built: the sampling exponent,
    the group, the orbit distance cutoff, and the deepest word length
    that contributed an atom.
    """

    angles: np.ndarray
    weights: np.ndarray
    exponent: float
    group_name: str
    cutoff: float
    depth: int
    basepoint: str = "i"
    normalized: bool = True

    def __post_init__(self):
        a, w = np.asarray(self.angles, float), np.asarray(self.weights, float)
        if a.ndim != 1 or a.shape != w.shape:
            raise ValueError("angles and weights must be matching 1-d arrays")
        if a.size and (a[0] < 0.0 or a[-1] >= TAU or np.any(np.diff(a) <= 0.0)):
            raise ValueError("atom angles must increase strictly within [0, 2*pi)")
        if np.any(w <= 0.0):
            raise ValueError("atom weights must be positive")
        if self.normalized and abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("normalized measure must have total mass 1 within 1e-12")
        object.__setattr__(self, "angles", a)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, angles, weights, exponent: float, group_name: str,
                   cutoff: float, depth: int, basepoint: str = "i",
                   normalize: bool = True) -> "AtomicBoundaryMeasure":
        """Sort, merge exactly coincident angles, optionally normalize."""
        a = np.asarray(angles, float)
        w = np.asarray(weights, float)
        if np.any(w <= 0.0):
            raise ValueError("atom weights must be positive")
        order = np.argsort(a, kind="stable")
        a, w = a[order], w[order]
        uniq, inverse = np.unique(a, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, w)
        if normalize:
            merged = merged / merged.sum()
        return cls(uniq, merged, exponent, group_name, cutoff, depth,
                   basepoint, normalize)

    def total_mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return int(self.angles.size)

    def atoms(self):
        for a, w in zip(self.angles, self.weights):
            yield BoundaryPoint(float(a)), float(w)

    def arc_mass(self, region) -> float:
        """Mass of an arc family, each arc closed at its start, open at its end."""
        arcs = _as_arcset(region)
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        total = 0.0
        for start, length in arcs:
            total += self._one_arc_mass(cum, start, length)
        return total

    def _one_arc_mass(self, cum: np.ndarray, start: float, length: float) -> float:
        if length <= 0.0:
            return 0.0
        if length >= TAU:
            return float(cum[-1])
        lo = start % TAU
        hi = (lo + length) % TAU
        left = np.searchsorted(self.angles, lo, side="left")
        right = np.searchsorted(self.angles, hi, side="left")
        if hi > lo:
            return float(cum[right] - cum[left])
        # wraps through angle 0
        return float(cum[-1] - cum[left] + cum[right])

    def push_forward(self, m: MoebiusMap) -> "AtomicBoundaryMeasure":
        """Image measure under an isometry; weights are carried unchanged."""
        moved = _angles_through(m, self.angles)
        return AtomicBoundaryMeasure.from_atoms(
            moved, self.weights, self.exponent, self.group_name, self.cutoff,
            self.depth, self.basepoint, normalize=self.normalized)

    def reweight_to(self, x: PlanePoint) -> "AtomicBoundaryMeasure":
        """The conformal family member seen from x: each atom picks up
        e^{-s b_eta(x, o)}.  Not normalized; its total is the density ratio."""
        factors = np.exp(-self.exponent * _busemann_angles(self.angles, x, BASEPOINT))
        return replace(self, weights=self.weights * factors, normalized=False)

    def to_csv_text(self) -> str:
        lines = [
            "# atomic boundary measure",
            f"# group={self.group_name} exponent={self.exponent:.17g}"
            f" cutoff={self.cutoff:.17g} depth={self.depth}"
            f" basepoint={self.basepoint} normalized={str(self.normalized).lower()}",
            "angle,weight",
        ]
        lines.extend(f"{a:.17g},{w:.17g}" for a, w in zip(self.angles, self.weights))
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.to_csv_text())

    @classmethod
    def from_csv_text(cls, text: str) -> "AtomicBoundaryMeasure":
        meta: dict[str, str] = {}
        angles, weights = [], []
        for line in text.splitlines():
            line = line.strip()
            if not line or line == "angle,weight":
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, _, value = token.partition("=")
                        meta[key] = value
                continue
            a, _, w = line.partition(",")
            angles.append(float(a))
            weights.append(float(w))
        if not {"group", "exponent", "cutoff", "depth"} <= meta.keys():
            raise ValueError("measure CSV is missing its metadata header")
        return cls(np.array(angles), np.array(weights),
                   float(meta["exponent"]), meta["group"], float(meta["cutoff"]),
                   int(meta["depth"]), meta.get("basepoint", "i"),
                   meta.get("normalized", "true") == "true")

    @classmethod
    def from_csv(cls, path) -> "AtomicBoundaryMeasure":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_csv_text(fh.read())


def _as_arcset(region) -> ArcSet:
    if isinstance(region, ArcSet):
        return region
    arcs = getattr(region, "arcset", None)
    if arcs is not None:
        return arcs
    if isinstance(region, Region):
        return ArcSet(((region.start.angle, region.arc_length),))
    raise TypeError(f"cannot take arc mass of {type(region).__name__}")


# ---------------------------------------------------------------------------
# critical exponent


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    rms_residual: float
    max_residual: float


def log_slope(x, y) -> SlopeFit:
    """Least-squares line through (x, ln y); every y must be positive."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.any(y <= 0.0):
        raise ValueError("log fit needs positive values throughout the grid")
    logs = np.log(y)
    coeffs = np.polyfit(x, logs, 1)
    resid = logs - np.polyval(coeffs, x)
    return SlopeFit(float(coeffs[0]), float(coeffs[1]),
                    float(np.sqrt(np.mean(resid * resid))),
                    float(np.max(np.abs(resid))))


@dataclass(frozen=True)
class ExponentFit:
    """Orbit growth rate with its fit diagnostics and series cross-check."""

    delta: float
    orbit_count: int
    residual: float
    grid: tuple[float, ...]
    counts: tuple[int, ...]
    poincare: dict


def orbit_distances(group: FuchsianGroup, cutoff: float) -> np.ndarray:
    """Sorted distances d(o, go) over the orbit, identity included."""
    return np.sort(np.fromiter(
        (pt.dist for pt in group.enumerate_orbit(max_distance=cutoff)), float))


def poincare_series(group: FuchsianGroup, s: float, cutoff: float,
                    distances: np.ndarray | None = None) -> float:
    """Partial sum of e^{-s d(o, go)} over orbit points within the cutoff."""
    d = orbit_distances(group, cutoff) if distances is None else distances
    return float(np.exp(-s * d[d <= cutoff]).sum())


def critical_exponent(group: FuchsianGroup, cutoff: float,
                      grid_points: int = 9) -> ExponentFit:
    """Growth exponent of N(T) = #{g : d(o, go) <= T}, fitted on [T/2, T].

    The diagnostics carry the grid, the counts, the fit residual, and a
    Poincare series evaluated at the fit plus and minus 0.05 with both
    the half and the full cutoff: below the exponent the partial sum
    keeps growing between the two cutoffs, above it the growth stalls.
    """
    if cutoff <= 0.0:
        raise ValueError("cutoff must be positive")
    dists = orbit_distances(group, cutoff)
    grid = np.linspace(cutoff / 2.0, cutoff, grid_points)
    counts = np.searchsorted(dists, grid, side="right")
    if counts[0] < 16 or counts[-1] <= counts[0]:
        raise ValueError(
            f"too few orbit points below {cutoff}: counts {counts[0]}..{counts[-1]};"
            " raise the cutoff")
    fit = log_slope(grid, counts)
    delta = fit.slope
    below, above = delta - 0.05, delta + 0.05
    half = dists[dists <= cutoff / 2.0]
    poincare = {
        "s_below": below,
        "s_above": above,
        "sum_below_half": float(np.exp(-below * half).sum()),
        "sum_below_full": float(np.exp(-below * dists).sum()),
        "sum_above_half": float(np.exp(-above * half).sum()),
        "sum_above_full": float(np.exp(-above * dists).sum()),
    }
    poincare["growth_below"] = poincare["sum_below_full"] / poincare["sum_below_half"]
    poincare["growth_above"] = poincare["sum_above_full"] / poincare["sum_above_half"]
    return ExponentFit(delta, int(counts[-1]), fit.rms_residual,
                       tuple(float(t) for t in grid),
                       tuple(int(c) for c in counts), poincare)


# ---------------------------------------------------------------------------
# Patterson measures


def patterson_measure(group: FuchsianGroup, cutoff: float = 12.0,
                      s: float | None = None,
                      delta: float | None = None) -> AtomicBoundaryMeasure:
    """Truncated Patterson measure: atoms at radial projections of orbit
    points within the cutoff, weights e^{-s d(o, go)}, normalized.

    Without an explicit s the growth exponent is fitted first and s is
    set just above it; the identity contributes no atom since it has no
    projection direction.
    """
    if s is None:
        if delta is None:
            delta = critical_exponent(group, cutoff).delta
        s = delta + EXPONENT_MARGIN
    if delta is not None and s < delta - 1e-9:
        raise ValueError(
            f"exponent {s} is below the growth rate {delta}: the series this"
            " truncates has no normalizable limit")
    angles, weights, depth = [], [], 0
    for pt in group.enumerate_orbit(max_distance=cutoff):
        if not len(pt.word):
            continue
        angles.append(radial_projection(pt.image).angle)
        weights.append(math.exp(-s * pt.dist))
        depth = max(depth, len(pt.word))
    if not angles:
        raise ValueError("no orbit points inside the cutoff")
    return AtomicBoundaryMeasure.from_atoms(
        angles, weights, s, group.name, cutoff, depth)


def conformality_gap(mu: AtomicBoundaryMeasure, group: FuchsianGroup,
                     letter: int, bins: int = 16) -> float:
    """Total-variation gap, on an equal angular partition, between the
    pushforward of mu by a generator and the conformal reweighting of mu
    toward the moved basepoint.  Both estimators are normalized first;
    truncation at the orbit cutoff shifts their totals but not their
    shape, and the shape is what conformality constrains."""
    m = group.letter_matrix(letter)
    pushed = mu.push_forward(m)
    rew = mu.reweight_to(PlanePoint.halfplane(m.apply(1j)))
    # Bins are rotated half a step: generator fixed points sit at nice
    # fractions of the circle, and an atom exactly on an edge can land on
    # either side of it depending on which estimator produced the angle.
    offset = math.pi / bins
    edges = np.linspace(0.0, TAU, bins + 1)
    one, _ = np.histogram((pushed.angles - offset) % TAU, bins=edges, weights=pushed.weights)
    two, _ = np.histogram((rew.angles - offset) % TAU, bins=edges, weights=rew.weights)
    return 0.5 * float(np.abs(one / one.sum() - two / two.sum()).sum())


# ---------------------------------------------------------------------------
# shadows


@dataclass(frozen=True)
class ShadowArc:
    """Directions whose ray projection passes depth t, as a boundary arc.

    side selects the whole shadow or one of its halves; the halves meet
    at the direction point, the positive one on its counterclockwise
    side.
    """

    origin: PlanePoint
    direction: BoundaryPoint
    depth: float
    side: str
    arcs: ArcSet

    @property
    def arcset(self) -> ArcSet:
        return self.arcs

    def contains(self, eta: BoundaryPoint, slack: float = 0.0) -> bool:
        return self.arcs.contains_angle(eta.angle, slack)


def shadow_arc(origin: PlanePoint, direction: BoundaryPoint, t: float,
               side: str = "full") -> ShadowArc:
    """The arc of boundary points projecting past distance t on [origin, direction)."""
    if t < 0.0:
        raise ValueError("shadow depth must be nonnegative")
    if side not in ("full", "positive", "negative"):
        raise ValueError(f"unknown shadow side {side!r}")
    inv = transport_to_infinity(direction, origin).inverse()
    reach = math.exp(min(t, 700.0))
    ccw_start = inv.apply_boundary(BoundaryPoint.from_halfplane(reach))
    ccw_end = inv.apply_boundary(BoundaryPoint.from_halfplane(-reach))
    if side == "negative":
        start, end = ccw_start, direction
    elif side == "positive":
        start, end = direction, ccw_end
    else:
        start, end = ccw_start, ccw_end
    return ShadowArc(origin, direction, t, side,
                     ArcSet(((start.angle, start.ccw_to(end)),)))


def shadow_mass_profile(mu: AtomicBoundaryMeasure, direction: BoundaryPoint,
                        depths, side: str = "full",
                        origin: PlanePoint = BASEPOINT) -> np.ndarray:
    return np.array([
        mu.arc_mass(shadow_arc(origin, direction, float(t), side))
        for t in depths])


# ---------------------------------------------------------------------------
# invariant-measure weight factors


@dataclass(frozen=True)
class BMSWeight:
    frame: HopfFrame
    weight: float


def bms_weight(f: HopfFrame, delta: float) -> BMSWeight:
    """Density factor of the geodesic-flow invariant product form at f.

    Grows like e^{2 delta (distance toward the boundary)} and depends
    only on the endpoint pair: sliding along the geodesic trades the
    two Busemann terms one for one.
    """
    base = f.base_point()
    weight = math.exp(delta * (busemann(f.xi_minus, BASEPOINT, base)
                               + busemann(f.xi_plus, BASEPOINT, base)))
    return BMSWeight(f, weight)


def horo_weight(f: HopfFrame, delta: float) -> float:
    """Forward-endpoint factor: the conditional density on the expanding
    horocycle through f."""
    return math.exp(delta * busemann(f.xi_plus, BASEPOINT, f.base_point()))


def br_weight(f: HopfFrame, delta: float) -> float:
    """Backward-endpoint factor: the density of the horocycle-invariant form."""
    return math.exp(delta * busemann(f.xi_minus, BASEPOINT, f.base_point()))


def horocycle_piece_mass(u: HopfFrame, length: float,
                         mu: AtomicBoundaryMeasure, delta: float) -> float:
    """Conditional mass of the horocycle piece {h^s u : 0 <= s < length}.

    Atoms of mu are pulled back to their flow parameter on the piece and
    weighted by the forward-endpoint factor there.
    """
    minv = u.matrix().inverse()
    half = mu.angles * 0.5
    p, q = -np.cos(half), np.sin(half)
    pp = minv.a * p + minv.b * q
    qq = minv.c * p + minv.d * q
    scale = np.hypot(pp, qq)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(np.abs(pp) > 1e-12 * scale, qq / pp, math.inf)
    total = 0.0
    for idx in np.flatnonzero((s >= 0.0) & (s < length)):
        moved = horocycle_flow(u, float(s[idx]))
        total += float(mu.weights[idx]) * horo_weight(moved, delta)
    return total


# ---------------------------------------------------------------------------
# sampling the product measure


@dataclass(frozen=True)
class BMSSamples:
    """Weighted quotient frames drawn from the endpoint-pair product.

    The raw Hopf coordinates of each draw are kept alongside the reduced
    frames; excluded_mass is the product-measure mass of the rejected
    near-diagonal pairs, so integral estimates can be bias-bounded.
    """

    frames: tuple[QuotientFrame, ...]
    backward_angles: np.ndarray
    forward_angles: np.ndarray
    taus: np.ndarray
    weights: np.ndarray
    excluded_mass: float
    seed: int
    tau_window: tuple[float, float]

    def __len__(self) -> int:
        return len(self.frames)


def _closed_window_mass(mu: AtomicBoundaryMeasure, cum: np.ndarray,
                        lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized closed-window atom mass with wrap past 0 and 2*pi."""

    def flat(lo_, hi_):
        left = np.searchsorted(mu.angles, lo_, side="left")
        right = np.searchsorted(mu.angles, hi_, side="right")
        return cum[right] - cum[left]

    mass = flat(np.clip(lo, 0.0, None), np.clip(hi, None, TAU))
    mass = mass + np.where(lo < 0.0, flat(lo + TAU, np.full_like(lo, TAU)), 0.0)
    mass = mass + np.where(hi > TAU, flat(np.zeros_like(hi), hi - TAU), 0.0)
    return mass


def sample_bms(group: FuchsianGroup, delta: float, mu: AtomicBoundaryMeasure,
               n: int, seed: int, tau_window: tuple[float, float] = (-3.0, 3.0),
               min_gap: float = NEAR_DIAGONAL_GAP) -> BMSSamples:
    """Draw n weighted frames: endpoints from mu x mu with near-diagonal
    pairs rejected, time coordinate uniform in the window, weight the
    product density factor, frames reduced to the quotient.

    Each sample derives its generator from (seed, index), so a run is
    deterministic and any prefix of it is reproducible on its own.
    """
    if n <= 0:
        raise ValueError("need a positive sample count")
    lo, hi = tau_window
    if not hi > lo:
        raise ValueError("empty time window")
    cum = np.concatenate([[0.0], np.cumsum(mu.weights)])
    total = cum[-1]
    window = _closed_window_mass(mu, cum, mu.angles - min_gap, mu.angles + min_gap)
    excluded = float(np.sum(mu.weights * window)) / (total * total)
    frames, wts = [], []
    back, forw, taus = [], [], []
    for index in range(n):
        rng = np.random.default_rng((seed, index))
        while True:
            u1, u2 = rng.random(2)
            ia = int(np.searchsorted(cum, u1 * total, side="right")) - 1
            ib = int(np.searchsorted(cum, u2 * total, side="right")) - 1
            a1 = float(mu.angles[min(ia, len(mu) - 1)])
            a2 = float(mu.angles[min(ib, len(mu) - 1)])
            gap = abs(a1 - a2)
            if min(gap, TAU - gap) >= min_gap:
                break
        tau = lo + (hi - lo) * rng.random()
        frame = HopfFrame(BoundaryPoint(a1), BoundaryPoint(a2), tau)
        back.append(a1)
        forw.append(a2)
        taus.append(tau)
        wts.append(bms_weight(frame, delta).weight)
        frames.append(reduce_frame(frame, group))
    return BMSSamples(tuple(frames), np.array(back), np.array(forw),
                      np.array(taus), np.array(wts), excluded, seed,
                      (float(lo), float(hi)))
