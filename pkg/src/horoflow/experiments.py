"""Desk-scale experiments along one expanding horocycle orbit.

Everything here follows a single orbit piece {h^s u : 0 <= s <= R} on
the frame bundle of the quotient and asks quantitative questions about
it: which parts of the bundle the piece visits, how mass accumulates
along it, how often and how deeply it runs into the cusp.  The pieces
are long, so the organizing concerns are floating-point collapse and
aliasing, and the module is built around both.

Precision.  The frame at parameter s has matrix U L(s) with L(s)
unipotent, so the covering base point collapses toward the backward
endpoint while the reduced representative stays in a compact part of
the fundamental domain.  Recomputing evaluate(word) @ U L(s) afresh
loses about eps * s^2 to cancellation between two large factors.
Instead the reduced matrix itself is carried from sample to sample,
advanced by the exact telescoping identity U L(s + ds) = (U L(s)) L(ds)
and corrected by the few letters the reduction walk emits whenever the
base point steps over a domain wall.  Applying letters one at a time to
the exact U L(s) follows the walk's own descent and stays conditioned,
which makes an independent rebuild cheap; traces rebuild periodically
and report the worst disagreement they saw.

Distances.  Samples and reference frames are compared after both are
reduced, so an honest quotient distance needs a minimum over deck
transformations.  Both sides sit in or near the domain, hence the
minimizing element is short: the identity, one letter, or two.  Each
reference frame is expanded once into its orbit under all such words,
and the gap from a sample to it is the minimum over that list of
base-point distance plus direction mismatch.  Test-function supports
are balls of this quasi-metric, kept small enough that the two-letter
horizon is never the binding constraint.

Leaf mass.  The conditional of the conformal-density construction on a
single expanding horocycle is atomic whenever the boundary measure is:
an atom whose preimage under the forward-endpoint map of the piece
lands at parameter s contributes its mass times the forward growth
factor there.  Plain ds quadrature against that conditional is a
different object and a vanishing one, so every weighted average here is
a ratio of atom sums.

Runs are deterministic functions of (group, configuration).  Random
draws derive a fresh generator from (seed, index), traces are strictly
sequential, and thread counts only partition independent read-only
evaluations, so artifacts rerun byte for byte.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from horoflow.boundary import ordinary_intervals
from horoflow.flows import (
    HopfFrame,
    Horoball,
    horocycle_flow,
    reduce_frame,
)
from horoflow.group import DEFAULT_BUDGET, FuchsianGroup
from horoflow.measure import (
    AtomicBoundaryMeasure,
    SlopeFit,
    br_weight,
    critical_exponent,
    horo_weight,
    log_slope,
    patterson_measure,
    sample_bms,
)
from horoflow.moebius import (
    TAU,
    BoundaryPoint,
    MoebiusMap,
    PlanePoint,
    fixed_points,
)
from horoflow.words import GroupWord


# ---------------------------------------------------------------------------
# frame charts and the quotient quasi-metric


def frame_coords(m: MoebiusMap) -> tuple[float, float, float]:
    """Chart (x, y, direction angle) of the frame with matrix m."""
    den = complex(m.d, m.c)
    z = complex(m.b, m.a) / den
    w = 1j / (den * den)
    return z.real, z.imag, math.atan2(w.imag, w.real)


_CORRECTIONS: dict[str, tuple[MoebiusMap, ...]] = {}


def correction_maps(group: FuchsianGroup) -> tuple[MoebiusMap, ...]:
    """Deck elements short enough to connect nearby reduced frames.

    Identity, single letters, and reduced two-letter words.  Reduced
    representatives of close frames differ by such an element; longer
    words would move any domain point further than the support radii
    used here.  Cached per group name.
    """
    maps = _CORRECTIONS.get(group.name)
    if maps is None:
        signed = group.letters
        words = [GroupWord(())]
        words += [GroupWord((l,)) for l in signed]
        words += [GroupWord((l1, l2)) for l1 in signed for l2 in signed
                  if l1 != -l2]
        maps = tuple(group.evaluate(w) for w in words)
        _CORRECTIONS[group.name] = maps
    return maps


def expand_reference(group: FuchsianGroup,
                     f: HopfFrame) -> tuple[tuple[float, float, float], ...]:
    """Chart coordinates of f and its images under the correction maps."""
    m = f.matrix()
    return tuple(frame_coords(c @ m) for c in correction_maps(group))


def _gap_to_reference(x, y, phi, refs) -> np.ndarray:
    """Vectorized quasi-distance from chart arrays to an expanded reference."""
    best = None
    for rx, ry, rphi in refs:
        base = 2.0 * np.arcsinh(np.hypot(x - rx, y - ry)
                                / (2.0 * np.sqrt(y * ry)))
        turn = np.abs(phi - rphi) % TAU
        d = base + np.minimum(turn, TAU - turn)
        best = d if best is None else np.minimum(best, d)
    return best


def quotient_gap(group: FuchsianGroup, f: HopfFrame, ref: HopfFrame) -> float:
    """Quasi-distance between two reduced frames, reference side expanded."""
    x, y, phi = frame_coords(f.matrix())
    refs = expand_reference(group, ref)
    return float(_gap_to_reference(np.array([x]), np.array([y]),
                                   np.array([phi]), refs)[0])


# ---------------------------------------------------------------------------
# test functions on the quotient frame bundle


@dataclass(frozen=True)
class Observable:
    """A Lipschitz bump on the reduced frame bundle, or a constant.

    Tent profile: amplitude * max(0, 1 - gap / radius) where gap is the
    quasi-distance to the expanded center.  refs[0] is always the
    unexpanded center chart.
    """

    kind: str  # "tent" | "constant"
    amplitude: float
    radius: float
    refs: tuple[tuple[float, float, float], ...]
    label: str

    def values(self, x, y, phi) -> np.ndarray:
        if self.kind == "constant":
            return np.full(np.shape(x), self.amplitude)
        gap = _gap_to_reference(x, y, phi, self.refs)
        return self.amplitude * np.maximum(0.0, 1.0 - gap / self.radius)

    def value_at(self, x: float, y: float, phi: float) -> float:
        """Scalar evaluation; chart coordinates of a reduced frame."""
        if self.kind == "constant":
            return self.amplitude
        best = math.inf
        for rx, ry, rphi in self.refs:
            base = 2.0 * math.asinh(math.hypot(x - rx, y - ry)
                                    / (2.0 * math.sqrt(y * ry)))
            turn = abs(phi - rphi) % TAU
            d = base + min(turn, TAU - turn)
            if d < best:
                best = d
        if best >= self.radius:
            return 0.0
        return self.amplitude * (1.0 - best / self.radius)


def tent_observable(group: FuchsianGroup, center: HopfFrame, radius: float,
                    amplitude: float = 1.0, label: str = "tent") -> Observable:
    if not radius > 0.0:
        raise ValueError("tent radius must be positive")
    reduced = reduce_frame(center, group).rep
    return Observable("tent", float(amplitude), float(radius),
                      expand_reference(group, reduced), label)


def constant_observable(value: float = 1.0, label: str = "one") -> Observable:
    return Observable("constant", float(value), math.inf, (), label)


def observables_disjoint(f: Observable, g: Observable) -> bool:
    """Whether two tent supports cannot meet.

    The gap is evaluated both ways because the quasi-metric is not
    symmetric; the smaller reading has to clear the summed radii.
    """
    if f.kind != "tent" or g.kind != "tent":
        return False
    fx, fy, fphi = f.refs[0]
    gx, gy, gphi = g.refs[0]
    d_fg = float(_gap_to_reference(np.array([fx]), np.array([fy]),
                                   np.array([fphi]), g.refs)[0])
    d_gf = float(_gap_to_reference(np.array([gx]), np.array([gy]),
                                   np.array([gphi]), f.refs)[0])
    return min(d_fg, d_gf) > f.radius + g.radius


# ---------------------------------------------------------------------------
# start frames


def axis_frame(group: FuchsianGroup, word: str | GroupWord) -> HopfFrame:
    """Unit-time-zero frame on the axis of a hyperbolic word."""
    w = GroupWord.from_string(word) if isinstance(word, str) else word
    pts = fixed_points(group.evaluate(w))
    if len(pts) != 2:
        raise ValueError(f"axis frame needs a hyperbolic word, got {w}")
    (att, _), (rep, _) = pts
    return HopfFrame(rep, att, 0.0)


def resolve_endpoint(group: FuchsianGroup, spec: str,
                     interval_depth: int = 6) -> BoundaryPoint:
    """Turn a symbolic endpoint specifier into a boundary point.

    fixed-point:WORD        attracting fixed point of the word (the
                            neutral point when the word is parabolic)
    first-endpoint:auto     start of the widest ordinary interval
    second-endpoint:auto    end of the widest ordinary interval

    The interval endpoints carry the certificates produced by the
    interval construction at the given refinement depth.
    """
    kind, _, arg = spec.partition(":")
    if kind == "fixed-point":
        if not arg:
            raise ValueError("fixed-point specifier needs a word")
        m = group.evaluate(GroupWord.from_string(arg))
        pts = fixed_points(m)
        if not pts:
            raise ValueError(f"word {arg!r} is elliptic, no boundary fixed point")
        return pts[0][0]
    if kind in ("first-endpoint", "second-endpoint"):
        if arg not in ("", "auto"):
            raise ValueError(f"{kind} only supports ':auto', got {spec!r}")
        widest = ordinary_intervals(group, interval_depth).widest()
        cert = widest.start if kind == "first-endpoint" else widest.end
        return cert.point
    raise ValueError(f"unknown endpoint specifier {spec!r}")


def start_frame(group: FuchsianGroup, uminus: str,
                uplus: str = "fixed-point:ab", tau: float = 0.0,
                interval_depth: int = 6) -> HopfFrame:
    """Resolve (backward spec, forward spec, time) into a start frame."""
    xm = resolve_endpoint(group, uminus, interval_depth)
    xp = resolve_endpoint(group, uplus, interval_depth)
    return HopfFrame(xm, xp, tau)


# ---------------------------------------------------------------------------
# orbit traces


@dataclass(frozen=True)
class TraceConfig:
    """Stepping policy for one orbit piece.

    Steps grow geometrically by rel_step with an absolute floor, and
    max_gap caps them.  The flow moves at unit quotient speed, so a cap
    on the parameter step is a cap on the quotient gap between
    consecutive reduced samples; None removes the cap for probe traces
    whose reach matters more than their gap.
    """

    length: float
    rel_step: float = 0.01
    min_step: float = 0.01
    max_gap: float | None = 0.5
    budget: int = DEFAULT_BUDGET
    rebuild_every: int = 65536

    def __post_init__(self):
        if not self.length > 0.0:
            raise ValueError("trace length must be positive")
        if not self.rel_step > 0.0 or not self.min_step > 0.0:
            raise ValueError("step parameters must be positive")
        if self.max_gap is not None and not self.max_gap > 0.0:
            raise ValueError("max_gap must be positive or None")
        if self.rebuild_every < 1:
            raise ValueError("rebuild_every must be at least 1")


@dataclass(frozen=True)
class OrbitTrace:
    """Reduced samples along {h^s u : 0 <= s <= length}."""

    group_name: str
    start: HopfFrame
    config: TraceConfig
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    phi: np.ndarray
    corrections: int
    max_word_length: int
    rebuild_drift: float

    def __len__(self) -> int:
        return int(self.s.size)


def _left_mul(m: MoebiusMap, a: float, b: float, c: float, d: float):
    return (m.a * a + m.b * c, m.a * b + m.b * d,
            m.c * a + m.d * c, m.c * b + m.d * d)


def trace_orbit(group: FuchsianGroup, start: HopfFrame,
                config: TraceConfig) -> OrbitTrace:
    """Walk the orbit piece, carrying the reduced matrix across samples.

    The carried quadruple equals evaluate(word) @ U L(s) for the current
    reducing word; advancing s multiplies by L(ds) on the right, which
    touches two entries.  Whenever the base point leaves the closed
    domain the reduction walk supplies the missing letters, applied on
    the left one at a time.  Every rebuild_every samples the same matrix
    is recomputed from the exact U L(s) through the stored word and the
    carried values are replaced, recording the drift.
    """
    U = start.matrix()
    ua, ub, uc, ud = U.a, U.b, U.c, U.d
    letter = group.letter_matrix

    ra, rb, rc, rd = ua, ub, uc, ud
    z = complex(rb, ra) / complex(rd, rc)
    _, word0 = group.reduce_point(PlanePoint.halfplane(z), config.budget)
    letters: deque[int] = deque(word0.letters)
    for l in reversed(word0.letters):
        ra, rb, rc, rd = _left_mul(letter(l), ra, rb, rc, rd)

    s_out: list[float] = []
    x_out: list[float] = []
    y_out: list[float] = []
    phi_out: list[float] = []

    s = 0.0
    samples = 0
    corrections = 0
    max_len = len(letters)
    drift = 0.0
    length = float(config.length)
    cap = math.inf if config.max_gap is None else config.max_gap

    while True:
        z = complex(rb, ra) / complex(rd, rc)
        if not group.in_domain(z):
            _, w2 = group.reduce_point(PlanePoint.halfplane(z), config.budget)
            if w2.letters:
                corrections += 1
                for l in reversed(w2.letters):
                    ra, rb, rc, rd = _left_mul(letter(l), ra, rb, rc, rd)
                new = list(w2.letters)
                while new and letters and new[-1] == -letters[0]:
                    new.pop()
                    letters.popleft()
                for l in reversed(new):
                    letters.appendleft(l)
                if len(letters) > max_len:
                    max_len = len(letters)
                z = complex(rb, ra) / complex(rd, rc)

        den = complex(rd, rc)
        w = 1j / (den * den)
        s_out.append(s)
        x_out.append(z.real)
        y_out.append(z.imag)
        phi_out.append(math.atan2(w.imag, w.real))

        rem = length - s
        if rem <= 1e-12 * max(1.0, length):
            break
        ds = config.rel_step * s
        if ds < config.min_step:
            ds = config.min_step
        if ds > cap:
            ds = cap
        if ds > rem:
            ds = rem
        ra += rb * ds
        rc += rd * ds
        s += ds
        samples += 1

        if samples % config.rebuild_every == 0:
            ea, eb, ec, ed = ua + ub * s, ub, uc + ud * s, ud
            for l in reversed(letters):
                ea, eb, ec, ed = _left_mul(letter(l), ea, eb, ec, ed)
            if ea * ra + eb * rb + ec * rc + ed * rd < 0.0:
                ea, eb, ec, ed = -ea, -eb, -ec, -ed
            d = max(abs(ea - ra), abs(eb - rb), abs(ec - rc), abs(ed - rd))
            if d > drift:
                drift = d
            ra, rb, rc, rd = ea, eb, ec, ed

    return OrbitTrace(group.name, start, config,
                      np.asarray(s_out), np.asarray(x_out),
                      np.asarray(y_out), np.asarray(phi_out),
                      corrections, max_len, drift)


def reduce_along(group: FuchsianGroup, start: HopfFrame, s_values,
                 budget: int = DEFAULT_BUDGET):
    """Reduced chart coordinates at selected parameters of one orbit.

    Independent of trace stepping: each parameter gets its own walk,
    warm-started from the previous word, and the reduced matrix is
    rebuilt by applying the walk's letters to the exact U L(s).  The
    covering base point carries an absolute error near eps * s^2, so
    this path is for parameters up to roughly 1e5 where that stays far
    below the wall tolerances.
    """
    svals = np.asarray(s_values, float)
    U = start.matrix()
    ua, ub, uc, ud = U.a, U.b, U.c, U.d
    letter = group.letter_matrix
    xs = np.empty(svals.size)
    ys = np.empty(svals.size)
    phis = np.empty(svals.size)
    prev: GroupWord | None = None
    for i, s in enumerate(svals):
        ea, eb, ec, ed = ua + ub * s, ub, uc + ud * s, ud
        z = complex(eb, ea) / complex(ed, ec)
        _, word = group.reduce_point(PlanePoint.halfplane(z), budget,
                                     start_word=prev)
        prev = word
        for l in reversed(word.letters):
            ea, eb, ec, ed = _left_mul(letter(l), ea, eb, ec, ed)
        den = complex(ed, ec)
        zr = complex(eb, ea) / den
        w = 1j / (den * den)
        xs[i] = zr.real
        ys[i] = zr.imag
        phis[i] = math.atan2(w.imag, w.real)
    return xs, ys, phis


# ---------------------------------------------------------------------------
# leaf conditionals


@dataclass(frozen=True)
class LeafAtoms:
    """Atoms of the horocycle conditional, pulled back to flow parameters.

    s is increasing; weights carry atom mass times the forward growth
    factor, so partial sums over s < R are the conditional masses of
    initial pieces.
    """

    s: np.ndarray
    weights: np.ndarray
    delta: float
    dropped: int  # atoms outside [0, length) or behind the backward endpoint


def leaf_pullback(u: HopfFrame, mu: AtomicBoundaryMeasure, delta: float,
                  length: float) -> LeafAtoms:
    """Pull the atoms of mu back through the forward-endpoint map.

    The forward endpoint of h^s u has projective pair U (1, s) up to
    scale, so the atom at unit pair v lands at s = Q / P where
    (P, Q) = U^{-1} v, and the growth factor there is P^{-2 delta},
    equivalently ((U_a + U_b s)^2 + (U_c + U_d s)^2)^delta.
    """
    if not length > 0.0:
        raise ValueError("piece length must be positive")
    U = u.matrix()
    minv = U.inverse()
    half = mu.angles * 0.5
    p, q = -np.cos(half), np.sin(half)
    pp = minv.a * p + minv.b * q
    qq = minv.c * p + minv.d * q
    scale = np.hypot(pp, qq)
    good = np.abs(pp) > 1e-14 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(good, qq / np.where(good, pp, 1.0), math.inf)
    keep = good & (s >= 0.0) & (s < length)
    sk = s[keep]
    growth = (U.a + U.b * sk) ** 2 + (U.c + U.d * sk) ** 2
    w = mu.weights[keep] * growth ** delta
    order = np.argsort(sk, kind="stable")
    return LeafAtoms(sk[order], w[order], float(delta),
                     int(mu.angles.size - sk.size))


def _cusp_seed(group: FuchsianGroup) -> Horoball:
    """The horoball seed at infinity; groups without one have no cusp here."""
    if not group.has_parabolic:
        raise ValueError(f"group {group.name} has no cusp")
    for h in group.seeds:
        if h.base.is_infinity():
            return h
    raise ValueError("cusp height readout needs the seed horoball at infinity")


def _resolve_delta(group: FuchsianGroup, delta: float | None,
                   cutoff: float) -> float:
    if delta is not None:
        if not 0.0 < delta <= 1.0:
            raise ValueError("growth exponent must lie in (0, 1]")
        return float(delta)
    return critical_exponent(group, cutoff).delta


# ---------------------------------------------------------------------------
# density of the forward half-orbit


@dataclass(frozen=True)
class DensityConfig:
    """Coverage scan of an epsilon-net by one forward half-orbit.

    The probe trace runs uncapped: reach decides the verdict here, and
    sampled first hits only ever undercount coverage, which is the safe
    direction for a positivity claim.
    """

    uminus: str = "first-endpoint:auto"
    uplus: str = "fixed-point:ab"
    tau: float = 0.0
    interval_depth: int = 6
    lengths: tuple[float, ...] = (1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8)
    net_eps: float = 0.3
    net_size: int = 400
    net_seed: int = 20
    delta: float | None = None
    exponent_cutoff: float = 16.0
    measure_cutoff: float = 12.0
    rel_step: float = 1e-4
    min_step: float = 0.01
    budget: int = DEFAULT_BUDGET
    threads: int = 1

    def __post_init__(self):
        if not self.lengths or list(self.lengths) != sorted(self.lengths):
            raise ValueError("lengths must be a nonempty increasing grid")
        if not self.net_eps > 0.0:
            raise ValueError("net_eps must be positive")
        if self.net_size < 1:
            raise ValueError("net_size must be positive")


@dataclass(frozen=True)
class DensityResult:
    group_name: str
    config: DensityConfig
    start: HopfFrame
    delta: float
    net_count: int
    first_hits: np.ndarray
    lengths: np.ndarray
    coverage: np.ndarray
    trace_samples: int
    rebuild_drift: float

    @property
    def final_coverage(self) -> float:
        return float(self.coverage[-1])


def _thin_net(group: FuchsianGroup, frames, eps: float):
    """Greedy eps-separated subset, kept in draw order for determinism."""
    kept_refs: list[tuple[tuple[float, float, float], ...]] = []
    flat: list[tuple[float, float, float]] = []
    for qf in frames:
        x, y, phi = frame_coords(qf.rep.matrix())
        if flat:
            arr = np.asarray(flat)
            gap = _gap_to_reference(np.array([x]), np.array([y]),
                                    np.array([phi]),
                                    [tuple(r) for r in arr])
            if float(gap[0]) <= eps:
                continue
        refs = expand_reference(group, qf.rep)
        kept_refs.append(refs)
        flat.extend(refs)
    return kept_refs


def density_scan(group: FuchsianGroup, config: DensityConfig) -> DensityResult:
    """First-hit coverage of a quotient net by the forward half-orbit."""
    delta = _resolve_delta(group, config.delta, config.exponent_cutoff)
    mu = patterson_measure(group, config.measure_cutoff, delta)
    draws = sample_bms(group, delta, mu, config.net_size, config.net_seed)
    nets = _thin_net(group, draws.frames, config.net_eps)

    u = start_frame(group, config.uminus, config.uplus, config.tau,
                    config.interval_depth)
    tcfg = TraceConfig(length=max(config.lengths), rel_step=config.rel_step,
                       min_step=config.min_step, max_gap=None,
                       budget=config.budget)
    trace = trace_orbit(group, u, tcfg)

    def first_hit(refs) -> float:
        gap = _gap_to_reference(trace.x, trace.y, trace.phi, refs)
        hit = gap <= config.net_eps
        if not hit.any():
            return math.inf
        return float(trace.s[int(np.argmax(hit))])

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            hits = np.asarray(list(pool.map(first_hit, nets)))
    else:
        hits = np.asarray([first_hit(refs) for refs in nets])

    lengths = np.asarray(config.lengths, float)
    coverage = np.array([float(np.mean(hits <= L)) for L in lengths])
    return DensityResult(group.name, config, u, delta, len(nets), hits,
                         lengths, coverage, len(trace), trace.rebuild_drift)


# ---------------------------------------------------------------------------
# weighted averages along the piece


@dataclass(frozen=True)
class ReferenceEstimate:
    """A sampled integral (or ratio) with its stability diagnostics."""

    value: float
    n: int
    ess: float
    halves: tuple[float, float]
    excluded_rate: float


@dataclass(frozen=True)
class AverageConfig:
    """Leaf-conditional averages of one observable against piece length."""

    psi_kind: str = "tent"  # "tent" | "constant"
    psi_center: str = "ba"
    psi_radius: float = 0.75
    psi_amplitude: float = 1.0
    uminus: str = "fixed-point:BA"
    uplus: str = "fixed-point:ab"
    tau: float = 0.0
    interval_depth: int = 6
    lengths: tuple[float, ...] = (1.0, 3.0, 10.0, 30.0, 100.0, 300.0)
    delta: float | None = None
    exponent_cutoff: float = 16.0
    measure_cutoff: float = 18.0
    reference_n: int = 12000
    reference_seed: int = 101
    tolerance: float = 0.15
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.psi_kind not in ("tent", "constant"):
            raise ValueError(f"unknown observable kind {self.psi_kind!r}")
        if not self.lengths or list(self.lengths) != sorted(self.lengths):
            raise ValueError("lengths must be a nonempty increasing grid")


@dataclass(frozen=True)
class AverageResult:
    group_name: str
    config: AverageConfig
    start: HopfFrame
    delta: float
    lengths: np.ndarray
    values: np.ndarray
    normalizers: np.ndarray
    reference: ReferenceEstimate
    atoms_used: int

    @property
    def errors(self) -> np.ndarray:
        scale = max(abs(self.reference.value), 1e-300)
        return np.abs(self.values - self.reference.value) / scale

    @property
    def passed(self) -> bool:
        return bool(self.errors[-1] <= self.config.tolerance)


def _observable_from(group: FuchsianGroup, kind: str, center: str,
                     radius: float, amplitude: float,
                     label: str) -> Observable:
    if kind == "constant":
        return constant_observable(amplitude, label)
    return tent_observable(group, axis_frame(group, center), radius,
                           amplitude, label)


def _bms_reference(group: FuchsianGroup, mu: AtomicBoundaryMeasure,
                   delta: float, psi: Observable, n: int,
                   seed: int) -> ReferenceEstimate:
    draws = sample_bms(group, delta, mu, n, seed)
    xs = np.empty(n)
    ys = np.empty(n)
    phis = np.empty(n)
    for i, qf in enumerate(draws.frames):
        xs[i], ys[i], phis[i] = frame_coords(qf.rep.matrix())
    vals = psi.values(xs, ys, phis)
    w = draws.weights
    value = float(np.sum(w * vals) / np.sum(w))
    ess = float(np.sum(w) ** 2 / np.sum(w * w))
    mid = n // 2
    halves = tuple(float(np.sum(w[a:b] * vals[a:b]) / np.sum(w[a:b]))
                   for a, b in ((0, mid), (mid, n)))
    return ReferenceEstimate(value, n, ess, halves, draws.excluded_mass)


def ps_average(group: FuchsianGroup, config: AverageConfig) -> AverageResult:
    """Normalized conditional averages of psi on growing orbit pieces.

    The running average is a ratio of leaf-atom sums; its companion is
    the same observable integrated against the product-measure sampler.
    A constant observable gives exactly one at every length, which pins
    the normalization path end to end.
    """
    delta = _resolve_delta(group, config.delta, config.exponent_cutoff)
    mu = patterson_measure(group, config.measure_cutoff, delta)
    u = start_frame(group, config.uminus, config.uplus, config.tau,
                    config.interval_depth)
    psi = _observable_from(group, config.psi_kind, config.psi_center,
                           config.psi_radius, config.psi_amplitude, "psi")

    atoms = leaf_pullback(u, mu, delta, max(config.lengths))
    lengths = np.asarray(config.lengths, float)
    counts = np.searchsorted(atoms.s, lengths, side="left")
    if atoms.s.size == 0 or counts[0] == 0:
        raise ValueError("zero normalizer: no leaf mass below the first "
                         "grid length")

    xs, ys, phis = reduce_along(group, u, atoms.s, config.budget)
    vals = psi.values(xs, ys, phis)
    cum_w = np.cumsum(atoms.weights)
    cum_wv = np.cumsum(atoms.weights * vals)
    normalizers = cum_w[counts - 1]
    values = cum_wv[counts - 1] / normalizers

    reference = _bms_reference(group, mu, delta, psi, config.reference_n,
                               config.reference_seed)
    return AverageResult(group.name, config, u, delta, lengths, values,
                         normalizers, reference, int(atoms.s.size))


# ---------------------------------------------------------------------------
# time-average ratios in the parameter


@dataclass(frozen=True)
class RatioConfig:
    """Ratios of plain ds integrals of two bumps along one piece.

    The companion value integrates both bumps against the
    horocycle-invariant form: backward endpoint from the boundary
    atoms, forward endpoint Lebesgue on the circle minus a diagonal
    gap, importance weight from both endpoint factors.  The gap trims
    the heavy tail of those weights; tent supports keep endpoints far
    apart, so the trimmed mass never meets the observables.
    """

    f_kind: str = "tent"
    f_center: str = "ab"
    f_radius: float = 0.75
    f_amplitude: float = 1.0
    g_kind: str = "tent"
    g_center: str = "ba"
    g_radius: float = 0.75
    g_amplitude: float = 1.0
    uminus: str = "fixed-point:BA"
    uplus: str = "fixed-point:ab"
    tau: float = 0.0
    start_shift: float = 0.0
    interval_depth: int = 6
    lengths: tuple[float, ...] = (1e2, 1e3, 1e4, 1e5, 1e6)
    rel_step: float = 2e-5
    min_step: float = 0.01
    max_gap: float | None = 0.5
    delta: float | None = None
    exponent_cutoff: float = 16.0
    measure_cutoff: float = 12.0
    reference_n: int = 1 << 18
    reference_seed: int = 202
    reference_gap: float = 0.10
    tau_window: tuple[float, float] = (-3.0, 3.0)
    tolerance: float = 0.15
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.lengths or list(self.lengths) != sorted(self.lengths):
            raise ValueError("lengths must be a nonempty increasing grid")
        if not 0.0 <= self.reference_gap < math.pi / 2:
            raise ValueError("reference gap must lie in [0, pi/2)")


@dataclass(frozen=True)
class RatioResult:
    group_name: str
    config: RatioConfig
    start: HopfFrame
    delta: float
    lengths: np.ndarray
    numerators: np.ndarray
    denominators: np.ndarray
    ratios: np.ndarray
    reference: ReferenceEstimate
    trace_samples: int
    rebuild_drift: float

    @property
    def errors(self) -> np.ndarray:
        scale = max(abs(self.reference.value), 1e-300)
        return np.abs(self.ratios - self.reference.value) / scale

    @property
    def passed(self) -> bool:
        return bool(self.errors[-1] <= self.config.tolerance)


def _invariant_reference(group: FuchsianGroup, mu: AtomicBoundaryMeasure,
                         delta: float, f: Observable, g: Observable,
                         n: int, seed: int, gap: float,
                         tau_window: tuple[float, float]) -> ReferenceEstimate:
    """Ratio of f and g against the horocycle-invariant form.

    Backward endpoints are drawn from the boundary atoms, forward
    endpoints uniformly outside the diagonal gap, times uniform in the
    window; the weight at the raw frame is the product of the backward
    delta-factor and the forward unit factor.  Per-index generators as
    in the product sampler, so prefixes reproduce.
    """
    cum = np.concatenate([[0.0], np.cumsum(mu.weights)])
    total = cum[-1]
    lo, hi = tau_window
    if not hi > lo:
        raise ValueError("empty time window")
    wf = np.empty(n)
    wg = np.empty(n)
    w_all = np.empty(n)
    excluded = 0
    for i in range(n):
        rng = np.random.default_rng((seed, i))
        r = rng.random()
        ia = min(int(np.searchsorted(cum, r * total, side="right")) - 1,
                 mu.angles.size - 1)
        a_minus = float(mu.angles[ia])
        while True:
            a_plus = TAU * rng.random()
            d = abs(a_plus - a_minus)
            if min(d, TAU - d) >= gap:
                break
            excluded += 1
        tau = lo + (hi - lo) * rng.random()
        raw = HopfFrame(BoundaryPoint(a_minus), BoundaryPoint(a_plus), tau)
        weight = br_weight(raw, delta) * horo_weight(raw, 1.0)
        rep = reduce_frame(raw, group).rep
        x, y, phi = frame_coords(rep.matrix())
        w_all[i] = weight
        wf[i] = weight * f.value_at(x, y, phi)
        wg[i] = weight * g.value_at(x, y, phi)

    def ratio(a: int, b: int) -> float:
        den = float(np.sum(wg[a:b]))
        if den == 0.0:
            return math.nan
        return float(np.sum(wf[a:b]) / den)

    ess = float(np.sum(w_all) ** 2 / np.sum(w_all * w_all))
    mid = n // 2
    return ReferenceEstimate(ratio(0, n), n, ess,
                             (ratio(0, mid), ratio(mid, n)),
                             excluded / float(n + excluded))


def birkhoff_ratio(group: FuchsianGroup, config: RatioConfig) -> RatioResult:
    """Trapezoid ds integrals of two bumps along the piece, as ratios.

    Identical observables give exactly one and a doubled amplitude
    exactly two, since the integrand arrays then agree up to the scalar
    factor.  A denominator that is zero at the top of the grid means
    the trace never met g at all, which is an error, not a curve.
    """
    delta = _resolve_delta(group, config.delta, config.exponent_cutoff)
    f = _observable_from(group, config.f_kind, config.f_center,
                         config.f_radius, config.f_amplitude, "f")
    g = _observable_from(group, config.g_kind, config.g_center,
                         config.g_radius, config.g_amplitude, "g")

    u = start_frame(group, config.uminus, config.uplus, config.tau,
                    config.interval_depth)
    if config.start_shift:
        u = horocycle_flow(u, config.start_shift)
    tcfg = TraceConfig(length=max(config.lengths), rel_step=config.rel_step,
                       min_step=config.min_step, max_gap=config.max_gap,
                       budget=config.budget)
    trace = trace_orbit(group, u, tcfg)

    fv = f.values(trace.x, trace.y, trace.phi)
    gv = g.values(trace.x, trace.y, trace.phi)
    dmid = np.diff(trace.s)
    cum_f = np.concatenate([[0.0], np.cumsum(0.5 * (fv[1:] + fv[:-1]) * dmid)])
    cum_g = np.concatenate([[0.0], np.cumsum(0.5 * (gv[1:] + gv[:-1]) * dmid)])

    lengths = np.asarray(config.lengths, float)
    idx = np.searchsorted(trace.s, lengths, side="right") - 1
    numerators = cum_f[idx]
    denominators = cum_g[idx]
    if denominators[-1] == 0.0:
        raise ValueError("empty denominator: the trace never met g over "
                         "the whole grid")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(denominators > 0.0, numerators / denominators,
                          math.nan)

    mu = patterson_measure(group, config.measure_cutoff, delta)
    reference = _invariant_reference(group, mu, delta, f, g,
                                     config.reference_n,
                                     config.reference_seed,
                                     config.reference_gap,
                                     config.tau_window)
    return RatioResult(group.name, config, u, delta, lengths, numerators,
                       denominators, ratios, reference, len(trace),
                       trace.rebuild_drift)


# ---------------------------------------------------------------------------
# cusp mass profile


@dataclass(frozen=True)
class CuspMassConfig:
    """Leaf-mass fraction inside shrinking horoball families."""

    uminus: str = "fixed-point:BA"
    uplus: str = "fixed-point:ab"
    tau: float = 0.0
    interval_depth: int = 6
    length: float = 1000.0
    shrink_levels: tuple[float, ...] = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5)
    delta: float | None = None
    exponent_cutoff: float = 16.0
    measure_cutoff: float = 20.0
    slope_tolerance: float = 0.25
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.shrink_levels or \
                list(self.shrink_levels) != sorted(self.shrink_levels):
            raise ValueError("shrink levels must be a nonempty increasing grid")


@dataclass(frozen=True)
class CuspMassResult:
    group_name: str
    config: CuspMassConfig
    start: HopfFrame
    delta: float
    horoball_level: float
    shrink_levels: np.ndarray
    fractions: np.ndarray
    normalizer: float
    atoms_used: int
    fit: SlopeFit | None
    fitted_points: int

    @property
    def target_slope(self) -> float:
        return -(2.0 * self.delta - 1.0)

    @property
    def nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.fractions) <= 0.0))

    @property
    def slope_ok(self) -> bool:
        if self.fit is None:
            return False
        tol = self.config.slope_tolerance * abs(self.target_slope)
        return abs(self.fit.slope - self.target_slope) <= tol


def cusp_mass_profile(group: FuchsianGroup,
                      config: CuspMassConfig) -> CuspMassResult:
    """Fraction of the piece's leaf mass at least N past the horoballs.

    Height is read off the reduced representative against the seed
    horoball at infinity; the orbit copies of that horoball are
    pairwise disjoint by the build certificate, so a reduced height
    above the cut is membership in exactly one of them.  Fractions are
    prefix sums over atoms ordered by height, hence exactly
    nonincreasing in N.
    """
    seed_ball = _cusp_seed(group)
    delta = _resolve_delta(group, config.delta, config.exponent_cutoff)
    mu = patterson_measure(group, config.measure_cutoff, delta)
    u = start_frame(group, config.uminus, config.uplus, config.tau,
                    config.interval_depth)

    atoms = leaf_pullback(u, mu, delta, config.length)
    if atoms.s.size == 0:
        raise ValueError("zero normalizer: no leaf mass on the piece")
    _, ys, _ = reduce_along(group, u, atoms.s, config.budget)
    heights = np.log(ys) - seed_ball.level

    order = np.argsort(-heights, kind="stable")
    cum = np.cumsum(atoms.weights[order])
    total = float(cum[-1])
    sorted_desc = heights[order]
    fractions = np.empty(len(config.shrink_levels))
    for j, level in enumerate(config.shrink_levels):
        k = int(np.count_nonzero(sorted_desc > level))
        fractions[j] = cum[k - 1] / total if k > 0 else 0.0

    levels = np.asarray(config.shrink_levels, float)
    positive = fractions > 0.0
    fit = None
    if int(np.count_nonzero(positive)) >= 2:
        fit = log_slope(levels[positive], fractions[positive])
    return CuspMassResult(group.name, config, u, delta, seed_ball.level,
                          levels, fractions, total, int(atoms.s.size),
                          fit, int(np.count_nonzero(positive)))


# ---------------------------------------------------------------------------
# cusp excursion windows


@dataclass(frozen=True)
class ExcursionWindow:
    """One completed run above the horoball cut."""

    deepest_s: float
    height: float
    half_width: float


@dataclass(frozen=True)
class ExcursionConfig:
    """Detection and refinement of cusp excursions along one piece."""

    uminus: str = "fixed-point:BA"
    uplus: str = "fixed-point:ab"
    tau: float = 0.0
    interval_depth: int = 6
    length: float = 3000.0
    rel_step: float = 2e-4
    min_step: float = 0.01
    max_gap: float | None = 0.5
    level: float | None = None
    h_floor: float = 1.0
    bisect_steps: int = 60
    scan_steps: int = 120
    budget: int = DEFAULT_BUDGET


@dataclass(frozen=True)
class ExcursionResult:
    group_name: str
    config: ExcursionConfig
    start: HopfFrame
    level: float
    windows: tuple[ExcursionWindow, ...]
    alpha: float
    slope: float
    slope_count: int
    trace_samples: int

    @property
    def sandwich_max(self) -> float:
        """Largest half-width over e^{h/2}; at most one when the window
        sits inside its depth budget."""
        if not self.windows:
            return math.nan
        return max(w.half_width * math.exp(-0.5 * w.height)
                   for w in self.windows)

    @property
    def sandwich_holds(self) -> bool:
        if not self.windows:
            return True
        lo = all(w.half_width >= math.exp(0.5 * (w.height - self.alpha))
                 * (1.0 - 1e-9) for w in self.windows)
        return lo and self.sandwich_max <= 1.0 + 1e-9


def excursion_windows(group: FuchsianGroup,
                      config: ExcursionConfig) -> ExcursionResult:
    """Entry, exit, and deepest point of each completed cusp excursion.

    Crossing parameters are refined by bisection between the straddling
    samples and the deepest point by ternary search: inside one horoball
    the lifted piece is a circular arc, so its height is unimodal in s.
    Runs already inside at the start or still inside at the end have no
    certified window and are discarded.  alpha is the smallest uniform
    depth discount that keeps every half-width above e^{(h - alpha)/2},
    read off the windows themselves.
    """
    seed_ball = _cusp_seed(group)
    level = seed_ball.level if config.level is None else float(config.level)
    u = start_frame(group, config.uminus, config.uplus, config.tau,
                    config.interval_depth)
    tcfg = TraceConfig(length=config.length, rel_step=config.rel_step,
                       min_step=config.min_step, max_gap=config.max_gap,
                       budget=config.budget)
    trace = trace_orbit(group, u, tcfg)
    depths = np.log(trace.y) - level
    inside = depths > 0.0

    U = u.matrix()
    ua, ub, uc, ud = U.a, U.b, U.c, U.d
    letter = group.letter_matrix
    hint: list[GroupWord | None] = [None]

    def depth_at(s: float) -> float:
        ea, eb, ec, ed = ua + ub * s, ub, uc + ud * s, ud
        z = complex(eb, ea) / complex(ed, ec)
        img, word = group.reduce_point(PlanePoint.halfplane(z), config.budget,
                                       start_word=hint[0])
        hint[0] = word
        return math.log(img.y) - level

    def crossing(lo: float, hi: float, rising: bool) -> float:
        # invariant kept: depth changes sign between lo and hi
        for _ in range(config.bisect_steps):
            mid = 0.5 * (lo + hi)
            if (depth_at(mid) > 0.0) == rising:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    flips = np.flatnonzero(np.diff(inside))
    bounds: list[tuple[int, int]] = []
    open_start: int | None = None if not inside[0] else -1
    for k in flips:
        if inside[k + 1]:
            open_start = k + 1
        else:
            if open_start is not None and open_start >= 0:
                bounds.append((open_start, int(k)))
            open_start = None

    windows: list[ExcursionWindow] = []
    for i, j in bounds:
        hint[0] = None
        sa = crossing(float(trace.s[i - 1]), float(trace.s[i]), rising=True)
        sb = crossing(float(trace.s[j]), float(trace.s[j + 1]), rising=False)
        a, b = sa, sb
        for _ in range(config.scan_steps):
            m1 = a + (b - a) / 3.0
            m2 = b - (b - a) / 3.0
            if depth_at(m1) < depth_at(m2):
                a = m1
            else:
                b = m2
        sigma = 0.5 * (a + b)
        h = depth_at(sigma)
        if h > 0.0:
            windows.append(ExcursionWindow(sigma, h, 0.5 * (sb - sa)))

    if windows:
        alpha = max(w.height - 2.0 * math.log(w.half_width) for w in windows)
    else:
        alpha = math.nan
    deep = [w for w in windows if w.height >= config.h_floor]
    if len(deep) >= 2:
        slope = float(np.polyfit([w.height for w in deep],
                                 [math.log(w.half_width) for w in deep], 1)[0])
    else:
        slope = math.nan
    return ExcursionResult(group.name, config, u, level, tuple(windows),
                           alpha, slope, len(deep), len(trace))
