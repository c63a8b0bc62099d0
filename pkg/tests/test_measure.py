"""Growth exponents, Patterson measures, shadows, and flow densities.

Exponents and measure statistics below were frozen from runs
cross-checked against an independent breadth-first orbit walk (matching
counts on the grid 4..8 for both built-in groups), and the slope
recipes against closed-form expectations where one exists.
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from horoflow.boundary import ArcSet, limit_set_cover
from horoflow.flows import HopfFrame, geodesic_flow, identity_frame
from horoflow.measure import (
    ANNULUS_STEP,
    EXPONENT_MARGIN,
    AtomicBoundaryMeasure,
    bms_weight,
    br_weight,
    conformality_gap,
    critical_exponent,
    horo_weight,
    horocycle_piece_mass,
    log_slope,
    orbit_distances,
    patterson_measure,
    poincare_series,
    radial_projection,
    sample_bms,
    shadow_arc,
    shadow_mass_profile,
)
from horoflow.moebius import (
    BASEPOINT,
    TAU,
    BoundaryPoint,
    PlanePoint,
    attracting_fixed_point,
    transport_to_infinity,
)

from conftest import boundary_points, circular_gap, moebius_maps, plane_points

fh = BoundaryPoint.from_halfplane

# growth exponents fitted at cutoff 16, frozen with their diagnostics
DELTA_S = 0.6515826918003516
DELTA_C = 0.6816847418660001


@pytest.fixture(scope="module")
def schottky_fit(schottky):
    return critical_exponent(schottky, 16.0)


@pytest.fixture(scope="module")
def cusped_fit(cusped):
    return critical_exponent(cusped, 16.0)


@pytest.fixture(scope="module")
def schottky_mu12(schottky, schottky_fit):
    return patterson_measure(schottky, cutoff=12.0, delta=schottky_fit.delta)


@pytest.fixture(scope="module")
def cusped_mu12(cusped, cusped_fit):
    return patterson_measure(cusped, cutoff=12.0, delta=cusped_fit.delta)


@pytest.fixture(scope="module")
def cusped_mu18(cusped, cusped_fit):
    return patterson_measure(cusped, cutoff=18.0, delta=cusped_fit.delta)


def toy_measure(angles, weights, normalize=True):
    return AtomicBoundaryMeasure.from_atoms(
        angles, weights, 0.7, "toy", 8.0, 3, normalize=normalize)


# --- radial projection ----------------------------------------------------


def test_radial_projection_spot_values():
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    assert radial_projection(PlanePoint.halfplane(1 + 1j)).halfplane() == (
        pytest.approx(golden, abs=1e-12))
    assert radial_projection(PlanePoint.halfplane(-1 + 1j)).halfplane() == (
        pytest.approx(-golden, abs=1e-12))
    assert radial_projection(PlanePoint.halfplane(2j)).is_infinity()
    assert radial_projection(PlanePoint.halfplane(0.5j)).angle == math.pi


def test_radial_projection_rejects_the_origin():
    with pytest.raises(ValueError):
        radial_projection(BASEPOINT)


@given(plane_points)
def test_radial_projection_puts_the_point_on_the_vertical_ray(x):
    z = x.to_halfplane()
    if abs(z - 1j) < 1e-3:
        return
    xi = radial_projection(x)
    w = transport_to_infinity(xi, BASEPOINT).apply(z)
    # the chart sends o to i and xi to infinity, so x must sit above o
    assert abs(w.real) < 1e-6 * abs(w.imag)
    assert w.imag > 1.0 - 1e-9


# --- atomic measures ------------------------------------------------------


def test_from_atoms_sorts_merges_and_normalizes():
    mu = toy_measure([3.0, 1.0, 3.0], [1.0, 2.0, 3.0])
    assert list(mu.angles) == [1.0, 3.0]
    assert list(mu.weights) == pytest.approx([2.0 / 6.0, 4.0 / 6.0], abs=1e-15)
    assert mu.total_mass() == pytest.approx(1.0, abs=1e-15)
    assert len(mu) == 2


def test_measure_constructor_validates():
    with pytest.raises(ValueError, match="increase"):
        AtomicBoundaryMeasure(np.array([2.0, 1.0]), np.array([0.5, 0.5]),
                              0.7, "toy", 8.0, 3)
    with pytest.raises(ValueError, match="positive"):
        toy_measure([1.0, 2.0], [1.0, -1.0])
    with pytest.raises(ValueError, match="total mass"):
        AtomicBoundaryMeasure(np.array([1.0]), np.array([0.5]),
                              0.7, "toy", 8.0, 3)


def test_arc_mass_is_closed_at_start_open_at_end():
    mu = toy_measure([1.0, 2.0], [1.0, 3.0])
    assert mu.arc_mass(ArcSet(((1.0, 0.5),))) == pytest.approx(0.25)
    assert mu.arc_mass(ArcSet(((0.5, 0.5),))) == 0.0
    assert mu.arc_mass(ArcSet(((1.5, 0.5),))) == 0.0


def test_arc_mass_wraps_through_zero():
    mu = toy_measure([0.1, 6.2], [1.0, 1.0])
    assert mu.arc_mass(ArcSet(((6.0, 0.5),))) == pytest.approx(1.0)
    assert mu.arc_mass(ArcSet(((6.25, 6.0),))) == pytest.approx(0.5)


@given(st.lists(st.tuples(st.floats(0.0, TAU - 1e-9), st.floats(0.1, 5.0)),
                min_size=1, max_size=12, unique_by=lambda t: t[0]),
       st.lists(st.floats(0.0, TAU - 1e-9), min_size=2, max_size=6, unique=True))
def test_arc_masses_of_a_partition_sum_to_the_total(atoms, cuts):
    mu = toy_measure([a for a, _ in atoms], [w for _, w in atoms],
                     normalize=False)
    cuts = sorted(cuts)
    # an atom a hair from a cut can cross it when ends are rebuilt as
    # start + length; exact coincidences are pinned in the half-open tests
    if min(circular_gap(a, c) for a, _ in atoms for c in cuts) < 1e-9:
        return
    arcs = [(a, b - a) for a, b in zip(cuts, cuts[1:])]
    arcs.append((cuts[-1], TAU - cuts[-1] + cuts[0]))
    pieces = sum(mu.arc_mass(ArcSet((arc,))) for arc in arcs)
    assert pieces == pytest.approx(mu.total_mass(), abs=1e-9)


@given(st.data(), moebius_maps)
def test_push_forward_round_trip(data, m):
    angles = data.draw(st.lists(st.floats(0.0, TAU - 1e-6), min_size=1,
                                max_size=8, unique=True))
    ordered = sorted(angles)
    if len(ordered) > 1 and min(
            circular_gap(a, b)
            for a, b in zip(ordered, ordered[1:] + ordered[:1])) < 1e-3:
        return
    mu = toy_measure(angles, [1.0] * len(angles), normalize=False)
    back = mu.push_forward(m).push_forward(m.inverse())
    assert back.total_mass() == pytest.approx(mu.total_mass(), abs=1e-9)
    assert len(back) == len(mu)
    for a in mu.angles:
        assert min(circular_gap(a, b) for b in back.angles) < 1e-6


def test_reweight_to_the_basepoint_changes_nothing_but_the_flag():
    mu = toy_measure([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    rew = mu.reweight_to(BASEPOINT)
    assert not rew.normalized
    assert rew.weights == pytest.approx(mu.weights, abs=1e-15)


def test_csv_round_trip(tmp_path, schottky_mu12):
    text = schottky_mu12.to_csv_text()
    back = AtomicBoundaryMeasure.from_csv_text(text)
    assert np.array_equal(back.angles, schottky_mu12.angles)
    assert np.array_equal(back.weights, schottky_mu12.weights)
    assert back.exponent == schottky_mu12.exponent
    assert back.group_name == "schottky2"
    assert back.cutoff == 12.0
    assert back.depth == schottky_mu12.depth
    assert back.normalized

    path = tmp_path / "mu.csv"
    schottky_mu12.to_csv(path)
    assert AtomicBoundaryMeasure.from_csv(path).to_csv_text() == text


def test_csv_requires_the_metadata_header():
    with pytest.raises(ValueError, match="metadata"):
        AtomicBoundaryMeasure.from_csv_text("angle,weight\n1.0,1.0\n")


# --- growth exponent ------------------------------------------------------


def test_growth_exponent_schottky(schottky_fit):
    fit = schottky_fit
    assert fit.delta == pytest.approx(DELTA_S, abs=1e-9)
    assert fit.orbit_count == 29669
    assert fit.counts == (157, 313, 601, 1165, 2125, 4189, 8041, 15265, 29669)
    assert fit.residual == pytest.approx(0.0162723428, abs=1e-8)
    assert fit.poincare["growth_below"] == pytest.approx(2.4584877778, abs=1e-8)
    assert fit.poincare["growth_above"] == pytest.approx(1.6366446464, abs=1e-8)


def test_growth_exponent_cusped(cusped_fit):
    fit = cusped_fit
    assert fit.delta == pytest.approx(DELTA_C, abs=1e-9)
    assert fit.orbit_count == 20181
    assert fit.counts == (85, 175, 331, 655, 1289, 2581, 5093, 10157, 20181)
    assert fit.residual == pytest.approx(0.0138861198, abs=1e-8)
    assert fit.poincare["growth_below"] == pytest.approx(2.2013262207, abs=1e-8)
    assert fit.poincare["growth_above"] == pytest.approx(1.4814874971, abs=1e-8)


def test_partial_sums_grow_below_and_stall_above(schottky_fit, cusped_fit):
    for fit in (schottky_fit, cusped_fit):
        assert fit.poincare["s_below"] == pytest.approx(fit.delta - 0.05)
        assert fit.poincare["s_above"] == pytest.approx(fit.delta + 0.05)
        assert fit.poincare["growth_below"] > fit.poincare["growth_above"] + 0.5


def test_count_grid_matches_independent_walk(schottky, cusped):
    # frozen from a plain word-length breadth-first search, no pruning
    grid = [4.0, 5.0, 6.0, 7.0, 8.0]
    ds = orbit_distances(schottky, 8.0)
    assert list(np.searchsorted(ds, grid, side="right")) == [13, 17, 49, 77, 157]
    dc = orbit_distances(cusped, 8.0)
    assert list(np.searchsorted(dc, grid, side="right")) == [5, 13, 21, 45, 85]


def test_poincare_series_is_monotone_in_s(schottky):
    d = orbit_distances(schottky, 10.0)
    a = poincare_series(schottky, 0.5, 10.0, distances=d)
    b = poincare_series(schottky, 0.9, 10.0, distances=d)
    assert a > b > 1.0


def test_exponent_fit_needs_enough_points(schottky):
    with pytest.raises(ValueError, match="raise the cutoff"):
        critical_exponent(schottky, 2.0)


def test_log_slope_rejects_nonpositive_values():
    with pytest.raises(ValueError):
        log_slope([1.0, 2.0], [1.0, 0.0])


# --- Patterson measures ---------------------------------------------------


def test_patterson_shapes(schottky_mu12, cusped_mu12, schottky_fit, cusped_fit):
    assert len(schottky_mu12) == 2065
    assert schottky_mu12.depth == 8
    assert schottky_mu12.exponent == pytest.approx(
        schottky_fit.delta + EXPONENT_MARGIN)
    assert schottky_mu12.total_mass() == pytest.approx(1.0, abs=1e-12)

    # the parabolic chain reaches word length 67 inside the same cutoff
    assert len(cusped_mu12) == 1281
    assert cusped_mu12.depth == 67
    assert cusped_mu12.exponent == pytest.approx(cusped_fit.delta + EXPONENT_MARGIN)
    assert cusped_mu12.total_mass() == pytest.approx(1.0, abs=1e-12)


def test_patterson_atoms_live_on_the_limit_set(schottky, cusped,
                                               schottky_mu12, cusped_mu12):
    for group, mu in ((schottky, schottky_mu12), (cusped, cusped_mu12)):
        cover = limit_set_cover(group, 1)
        assert mu.arc_mass(cover.arcset) == pytest.approx(mu.total_mass(),
                                                          abs=1e-12)
        for xi, _ in mu.atoms():
            assert cover.contains(xi)


def test_cusped_measure_is_mirror_symmetric(cusped_mu12):
    # conjugation by z -> -conj(z) swaps each generator with its inverse
    low = cusped_mu12.arc_mass(ArcSet(((0.0, math.pi),)))
    assert low == pytest.approx(0.5, abs=1e-9)


def test_patterson_rejects_an_exponent_below_the_growth_rate(schottky):
    with pytest.raises(ValueError, match="no normalizable limit"):
        patterson_measure(schottky, cutoff=8.0, s=0.3, delta=0.65)


def test_patterson_at_the_critical_exponent_itself(schottky, schottky_fit):
    mu = patterson_measure(schottky, cutoff=8.0, s=schottky_fit.delta,
                           delta=schottky_fit.delta)
    assert mu.exponent == schottky_fit.delta
    assert mu.total_mass() == pytest.approx(1.0, abs=1e-12)


# --- conformality ---------------------------------------------------------


def test_conformality_gap_schottky(schottky, schottky_mu12):
    gaps = [conformality_gap(schottky_mu12, schottky, letter)
            for letter in schottky.letters]
    # the four letters are related by symmetries of the group
    assert gaps == pytest.approx([0.0950926466] * 4, abs=1e-8)
    assert max(gaps) < 0.10


def test_conformality_gap_cusped(cusped, cusped_mu18):
    gaps = {letter: conformality_gap(cusped_mu18, cusped, letter)
            for letter in cusped.letters}
    assert gaps[1] == pytest.approx(0.0958266473, abs=1e-8)
    assert gaps[-1] == pytest.approx(gaps[1], abs=1e-8)
    # the hyperbolic letters sit higher: the basepoint lies on their axis,
    # so one merged atom at each fixed point carries the truncation error
    # of the missing identity term; it shrinks as the cutoff grows
    assert gaps[2] == pytest.approx(0.1559490434, abs=1e-8)
    assert gaps[-2] == pytest.approx(gaps[2], abs=1e-8)


def test_conformality_gap_shrinks_with_the_cutoff(schottky, schottky_fit,
                                                  schottky_mu12, cusped,
                                                  cusped_fit, cusped_mu12,
                                                  cusped_mu18):
    mu14 = patterson_measure(schottky, cutoff=14.0, delta=schottky_fit.delta)
    assert conformality_gap(mu14, schottky, 1) < conformality_gap(
        schottky_mu12, schottky, 1)
    assert conformality_gap(cusped_mu18, cusped, 2) < conformality_gap(
        cusped_mu12, cusped, 2)


# --- shadows --------------------------------------------------------------


@given(boundary_points)
def test_shadow_at_depth_zero_is_a_half_circle(direction):
    arc = shadow_arc(BASEPOINT, direction, 0.0)
    assert arc.arcs.total_length == pytest.approx(math.pi, abs=1e-9)


@given(boundary_points, st.floats(0.0, 5.0))
def test_shadow_halves_partition_the_shadow(direction, t):
    full = shadow_arc(BASEPOINT, direction, t)
    pos = shadow_arc(BASEPOINT, direction, t, side="positive")
    neg = shadow_arc(BASEPOINT, direction, t, side="negative")
    assert pos.arcs.total_length + neg.arcs.total_length == pytest.approx(
        full.arcs.total_length, abs=1e-9)
    assert pos.contains(direction)
    assert full.contains(direction)


@given(boundary_points, st.floats(0.0, 4.0), st.floats(0.1, 3.0))
def test_deeper_shadows_nest(direction, t, dt):
    outer = shadow_arc(BASEPOINT, direction, t)
    inner = shadow_arc(BASEPOINT, direction, t + dt)
    assert inner.arcs.total_length < outer.arcs.total_length
    for start, length in inner.arcs.arcs:
        assert outer.contains(BoundaryPoint(start), slack=1e-9)
        assert outer.contains(BoundaryPoint((start + length) % TAU), slack=1e-9)


def test_shadow_arc_spot_value():
    arc = shadow_arc(BASEPOINT, fh(1.0), 2.0)
    (start, length), = arc.arcs.arcs
    assert start == pytest.approx(4.4433529896, abs=1e-9)
    assert length == pytest.approx(0.5380719815, abs=1e-9)
    # symmetric about the direction point
    assert BoundaryPoint(start).ccw_to(fh(1.0)) == pytest.approx(
        length / 2.0, abs=1e-12)


def test_shadow_arc_validates_inputs():
    with pytest.raises(ValueError):
        shadow_arc(BASEPOINT, fh(1.0), -1.0)
    with pytest.raises(ValueError):
        shadow_arc(BASEPOINT, fh(1.0), 1.0, side="sideways")


def unstacked_directions(group):
    # attracting points of two-letter products; single letters are skipped
    # because the basepoint lies on both generator axes, which piles their
    # whole powers onto one exact atom at the fixed point
    out = []
    for a in group.letters:
        for b in group.letters:
            if a != b and a != -b:
                out.append(attracting_fixed_point(
                    group.letter_matrix(a) @ group.letter_matrix(b)))
    return out


def test_shadow_mass_decays_at_the_growth_exponent(schottky, schottky_fit):
    mu = patterson_measure(schottky, cutoff=16.0, s=schottky_fit.delta,
                           delta=schottky_fit.delta)
    depths = np.linspace(2.0, 6.0, 9)
    profiles = [shadow_mass_profile(mu, d, depths)
                for d in unstacked_directions(schottky)]
    fit = log_slope(depths, np.mean(profiles, axis=0))
    assert fit.slope == pytest.approx(-0.7402288438, abs=1e-8)
    assert abs(fit.slope / -schottky_fit.delta - 1.0) < 0.15


def test_cusp_half_shadow_decays_at_one_minus_twice_the_exponent(cusped,
                                                                 cusped_fit):
    mu = patterson_measure(cusped, cutoff=18.0, s=cusped_fit.delta,
                           delta=cusped_fit.delta)
    depths = np.linspace(0.5, 3.0, 9)
    prof = shadow_mass_profile(mu, BoundaryPoint.infinity(), depths,
                               side="positive")
    fit = log_slope(depths, prof)
    target = 1.0 - 2.0 * cusped_fit.delta
    assert fit.slope == pytest.approx(-0.4068659234, abs=1e-8)
    assert abs(fit.slope / target - 1.0) < 0.20


def test_annulus_mass_is_comparable_to_shadow_mass(schottky, schottky_fit):
    mu = patterson_measure(schottky, cutoff=16.0, s=schottky_fit.delta,
                           delta=schottky_fit.delta)
    depths = np.linspace(2.0, 6.0, 9)
    dirs = unstacked_directions(schottky)
    outer = np.mean([shadow_mass_profile(mu, d, depths) for d in dirs], axis=0)
    inner = np.mean([shadow_mass_profile(mu, d, depths + ANNULUS_STEP)
                     for d in dirs], axis=0)
    fit = log_slope(depths, outer)
    floor = 1.0 / (4.0 * math.exp(fit.max_residual) ** 2)
    ratios = (outer - inner) / outer
    assert np.all(ratios > floor)
    assert np.all(ratios <= 1.0)


# --- invariant density factors --------------------------------------------


def test_weight_factors_are_one_at_the_identity_frame():
    f = identity_frame()
    assert bms_weight(f, 0.65).weight == pytest.approx(1.0, abs=1e-12)
    assert horo_weight(f, 0.65) == pytest.approx(1.0, abs=1e-12)
    assert br_weight(f, 0.65) == pytest.approx(1.0, abs=1e-12)


frame_pairs = st.tuples(boundary_points, boundary_points,
                        st.floats(-2.0, 2.0)).filter(
    lambda t: circular_gap(t[0].angle, t[1].angle) > 0.1)


@given(frame_pairs, st.floats(-3.0, 3.0))
def test_bms_weight_rides_the_geodesic_flow(triple, t):
    f = HopfFrame(*triple)
    a = bms_weight(f, 0.6516).weight
    b = bms_weight(geodesic_flow(f, t), 0.6516).weight
    assert b == pytest.approx(a, rel=1e-9)


@given(frame_pairs, st.floats(-3.0, 3.0))
def test_one_sided_factors_scale_exponentially_under_the_flow(triple, t):
    f = HopfFrame(*triple)
    delta = 0.6516
    moved = geodesic_flow(f, t)
    assert horo_weight(moved, delta) == pytest.approx(
        math.exp(delta * t) * horo_weight(f, delta), rel=1e-9)
    assert br_weight(moved, delta) == pytest.approx(
        math.exp(-delta * t) * br_weight(f, delta), rel=1e-9)


def test_horocycle_piece_masses(schottky_mu12, schottky_fit):
    u = HopfFrame(fh(-1.0), fh(1.0), 0.0)
    delta = schottky_fit.delta
    got = [horocycle_piece_mass(u, r, schottky_mu12, delta)
           for r in (1.0, 4.0, 16.0)]
    assert got == pytest.approx(
        [0.3777271591, 0.5539900422, 1.9698062992], abs=1e-8)
    assert horocycle_piece_mass(u, 0.0, schottky_mu12, delta) == 0.0


def test_horocycle_piece_mass_commutes_with_the_flow(schottky_mu12,
                                                     schottky_fit):
    # flowing the piece backward scales its length by e^{-t} and its
    # conditional mass by e^{-delta t}, atom for atom
    u = HopfFrame(fh(-1.0), fh(1.0), 0.0)
    delta = schottky_fit.delta
    for r, t in ((1.0, 1.5), (4.0, 1.5), (16.0, 0.7)):
        direct = horocycle_piece_mass(u, r, schottky_mu12, delta)
        moved = horocycle_piece_mass(geodesic_flow(u, -t), r * math.exp(-t),
                                     schottky_mu12, delta)
        assert moved * math.exp(delta * t) == pytest.approx(direct, rel=1e-12)


# --- sampling the product measure -----------------------------------------


def test_sample_runs_are_deterministic_with_reproducible_prefixes(
        schottky, schottky_fit, schottky_mu12):
    delta = schottky_fit.delta
    a = sample_bms(schottky, delta, schottky_mu12, 60, seed=3)
    b = sample_bms(schottky, delta, schottky_mu12, 60, seed=3)
    assert np.array_equal(a.weights, b.weights)
    assert np.array_equal(a.taus, b.taus)
    assert a.frames == b.frames

    prefix = sample_bms(schottky, delta, schottky_mu12, 30, seed=3)
    assert np.array_equal(prefix.weights, a.weights[:30])
    assert np.array_equal(prefix.backward_angles, a.backward_angles[:30])
    assert prefix.frames == a.frames[:30]


def test_samples_respect_the_gap_and_the_window(schottky, schottky_fit,
                                                schottky_mu12):
    run = sample_bms(schottky, schottky_fit.delta, schottky_mu12, 80, seed=11,
                     tau_window=(-1.0, 2.0))
    gaps = [circular_gap(a, b)
            for a, b in zip(run.backward_angles, run.forward_angles)]
    assert min(gaps) >= 0.05
    assert np.all((run.taus >= -1.0) & (run.taus < 2.0))
    assert np.all(run.weights > 0.0)
    assert np.all(np.isin(run.backward_angles, schottky_mu12.angles))
    assert np.all(np.isin(run.forward_angles, schottky_mu12.angles))


def test_sample_statistics(schottky, cusped, schottky_fit, cusped_fit,
                           schottky_mu12, cusped_mu12):
    run = sample_bms(schottky, schottky_fit.delta, schottky_mu12, 400, seed=7)
    assert run.excluded_mass == pytest.approx(0.0601609046, abs=1e-9)
    assert float(np.mean(run.weights)) == pytest.approx(5.8608598747, abs=1e-8)

    run = sample_bms(cusped, cusped_fit.delta, cusped_mu12, 400, seed=7)
    assert run.excluded_mass == pytest.approx(0.0815078422, abs=1e-9)
    assert float(np.mean(run.weights)) == pytest.approx(10.0300327735, abs=1e-8)


def test_sampled_frames_are_reduced(cusped, cusped_fit, cusped_mu12):
    run = sample_bms(cusped, cusped_fit.delta, cusped_mu12, 40, seed=5)
    for frame in run.frames:
        base = frame.rep.base_point().to_halfplane()
        assert cusped.in_domain(base, tol=1e-6)


def test_sample_bms_validates_inputs(schottky, schottky_fit, schottky_mu12):
    with pytest.raises(ValueError):
        sample_bms(schottky, schottky_fit.delta, schottky_mu12, 0, seed=1)
    with pytest.raises(ValueError):
        sample_bms(schottky, schottky_fit.delta, schottky_mu12, 5, seed=1,
                   tau_window=(2.0, 2.0))
