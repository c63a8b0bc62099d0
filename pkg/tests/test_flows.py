"""Frames, the two flows, and horoballs.

Orientation pin, checked once and for all here: pushing the identity
frame one unit along the horocycle flow moves its forward endpoint to
halfplane coordinate +1, and for small positive times the endpoint's
circle angle decreases from 2 pi (clockwise seen on the disc).
"""

import math

import pytest
from hypothesis import given
import hypothesis.strategies as st

from conftest import boundary_points, circular_gap, moebius_maps
from horoflow.flows import (
    HopfFrame,
    Horoball,
    QuotientFrame,
    apply_to_frame,
    bracket,
    frame_gap,
    geodesic_flow,
    horocycle_flow,
    horocycle_parameter,
    identity_frame,
    matrix_to_frame,
    reduce_frame,
)
from horoflow.moebius import (
    BASEPOINT,
    TAU,
    BoundaryPoint,
    MoebiusMap,
    PlanePoint,
    busemann,
    distance,
)

taus = st.floats(-3.0, 3.0, allow_nan=False)
times = st.floats(-2.5, 2.5, allow_nan=False)


def frames():
    def build(args):
        a1, off, tau = args
        a2 = (a1 + 0.3 + off) % TAU
        return HopfFrame(BoundaryPoint(a1), BoundaryPoint(a2), tau)

    return st.tuples(
        st.floats(0.0, TAU - 1e-6), st.floats(0.0, TAU - 0.6), taus).map(build)


def frames_close(u, v, tol=1e-7):
    return frame_gap(u, v) < tol


def test_identity_frame_is_the_identity_matrix():
    f = identity_frame()
    assert f.xi_minus.halfplane() == pytest.approx(0.0)
    assert f.xi_plus.is_infinity()
    assert f.tau == 0.0
    assert f.matrix().close_to(MoebiusMap.identity(), 1e-12)
    assert abs(f.base_point().to_halfplane() - 1j) < 1e-12


def test_coincident_endpoints_rejected():
    with pytest.raises(ValueError):
        HopfFrame(BoundaryPoint(1.0), BoundaryPoint(1.0), 0.0)


@given(frames())
def test_frame_matrix_roundtrip(f):
    g = matrix_to_frame(f.matrix())
    assert circular_gap(g.xi_minus.angle, f.xi_minus.angle) < 1e-7
    assert circular_gap(g.xi_plus.angle, f.xi_plus.angle) < 1e-7
    assert g.tau == pytest.approx(f.tau, abs=1e-7)


@given(moebius_maps)
def test_matrix_frame_roundtrip(m):
    assert matrix_to_frame(m).matrix().close_to(m, 1e-6)


# --- geodesic flow --------------------------------------------------------


@given(frames(), times, times)
def test_geodesic_flow_is_additive(f, t, s):
    u = geodesic_flow(geodesic_flow(f, t), s)
    v = geodesic_flow(f, t + s)
    assert u.xi_minus == v.xi_minus and u.xi_plus == v.xi_plus
    assert u.tau == pytest.approx(v.tau, abs=1e-12)


def test_geodesic_flow_rides_the_vertical():
    for t in (-1.0, 0.5, 2.0):
        p = geodesic_flow(identity_frame(), t).base_point().to_halfplane()
        assert abs(p - 1j * math.exp(t)) < 1e-12


@given(frames(), times)
def test_geodesic_flow_moves_at_unit_speed(f, t):
    d = distance(f.base_point(), geodesic_flow(f, t).base_point())
    assert d == pytest.approx(abs(t), abs=1e-7)


# --- horocycle flow and the orientation pin -------------------------------


def test_unit_horocycle_step_lands_at_plus_one():
    f = horocycle_flow(identity_frame(), 1.0)
    assert f.xi_plus.halfplane() == pytest.approx(1.0, abs=1e-12)
    assert f.xi_minus.halfplane() == pytest.approx(0.0)
    assert f.tau == 0.0


def test_small_positive_step_turns_endpoint_clockwise():
    a1 = horocycle_flow(identity_frame(), 0.1).xi_plus.angle
    a2 = horocycle_flow(identity_frame(), 0.2).xi_plus.angle
    assert math.pi < a2 < a1 < TAU


@given(frames(), times, times)
def test_horocycle_flow_is_additive(f, s, r):
    u = horocycle_flow(horocycle_flow(f, s), r)
    v = horocycle_flow(f, s + r)
    assert frames_close(u, v, 1e-6)


@given(frames(), times)
def test_horocycle_flow_keeps_backward_endpoint_and_tau(f, s):
    u = horocycle_flow(f, s)
    assert u.xi_minus == f.xi_minus
    assert u.tau == f.tau


@given(frames(), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_flows_satisfy_the_renormalization_relation(f, t, s):
    lhs = geodesic_flow(horocycle_flow(f, s), t)
    rhs = horocycle_flow(geodesic_flow(f, t), s * math.exp(t))
    assert frames_close(lhs, rhs, 1e-6)


@given(frames(), times)
def test_horocycle_parameter_inverts_the_flow(f, s):
    eta = horocycle_flow(f, s).xi_plus
    assert horocycle_parameter(f, eta) == pytest.approx(s, abs=1e-6, rel=1e-6)


@given(frames())
def test_horocycle_parameter_at_backward_endpoint_is_infinite(f):
    assert horocycle_parameter(f, f.xi_minus) == math.inf


# --- isometry action ------------------------------------------------------


@given(moebius_maps, moebius_maps, frames())
def test_frame_action_is_a_left_action(m1, m2, f):
    lhs = apply_to_frame(m1 @ m2, f)
    rhs = apply_to_frame(m1, apply_to_frame(m2, f))
    assert frames_close(lhs, rhs, 1e-5)


@given(moebius_maps, frames())
def test_frame_action_moves_the_base_point(m, f):
    u = apply_to_frame(m, f)
    expect = m.apply(f.base_point().to_halfplane())
    assert abs(u.base_point().to_halfplane() - expect) < 1e-6 * (1 + abs(expect))


@given(moebius_maps, frames(), times)
def test_geodesic_flow_commutes_with_isometries(m, f, t):
    lhs = apply_to_frame(m, geodesic_flow(f, t))
    rhs = geodesic_flow(apply_to_frame(m, f), t)
    assert frames_close(lhs, rhs, 1e-5)


@given(moebius_maps, frames(), times)
def test_horocycle_flow_commutes_with_isometries(m, f, s):
    lhs = apply_to_frame(m, horocycle_flow(f, s))
    rhs = horocycle_flow(apply_to_frame(m, f), s)
    assert frames_close(lhs, rhs, 1e-5)


# --- gap and bracket ------------------------------------------------------


@given(frames())
def test_frame_gap_vanishes_on_itself(f):
    assert frame_gap(f, f) == 0.0


@given(frames(), times)
def test_frame_gap_detects_flow_displacement(f, t):
    if abs(t) < 1e-3:
        return
    assert frame_gap(f, geodesic_flow(f, t)) > 1e-4


def test_bracket_mixes_endpoints_and_lies_on_the_stable_leaf():
    u = HopfFrame(BoundaryPoint(2.0), BoundaryPoint(5.0), 0.3)
    v = HopfFrame(BoundaryPoint(2.1), BoundaryPoint(5.2), 0.1)
    w = bracket(u, v, 5.0)
    assert w.xi_minus == u.xi_minus
    assert w.xi_plus == v.xi_plus
    assert busemann(v.xi_plus, w.base_point(), v.base_point()) == pytest.approx(
        0.0, abs=1e-9)


@given(frames())
def test_bracket_is_idempotent_on_the_diagonal(f):
    w = bracket(f, f, 1e-6)
    assert frames_close(w, f, 1e-6)


def test_bracket_rejects_distant_frames():
    u = HopfFrame(BoundaryPoint(2.0), BoundaryPoint(5.0), 0.0)
    v = HopfFrame(BoundaryPoint(2.0), BoundaryPoint(5.0), 3.0)
    with pytest.raises(ValueError):
        bracket(u, v, 0.5)


def test_bracket_rejects_degenerate_corner():
    u = HopfFrame(BoundaryPoint(2.0), BoundaryPoint(5.0), 0.0)
    v = HopfFrame(BoundaryPoint(4.0), BoundaryPoint(2.0), 0.0)
    with pytest.raises(ValueError):
        bracket(u, v, 100.0)


# --- horoballs ------------------------------------------------------------


def test_horoball_at_infinity_is_a_height_cut():
    ball = Horoball(BoundaryPoint.infinity(), 0.2)
    assert ball.height_cut() == pytest.approx(math.exp(0.2))
    assert not ball.contains(BASEPOINT)
    assert ball.contains(PlanePoint.halfplane(3.0 + 2j))
    assert ball.depth(PlanePoint.halfplane(1j * math.e)) == pytest.approx(0.8)
    assert ball.entry_distance == pytest.approx(0.2)


def test_horoball_transform_oracle(cusped):
    # h maps infinity to 5/4; the pushed ball picks up the cocycle of h at o
    h = cusped.generators[1].matrix
    ball = Horoball(BoundaryPoint.infinity(), 0.2).transform(h)
    assert ball.base.halfplane() == pytest.approx(1.25)
    assert ball.level == pytest.approx(0.2 + math.log(41.0 / 9.0))
    assert ball.euclidean_diameter() == pytest.approx(
        (1.0 + 1.25 ** 2) * math.exp(-ball.level))


@given(moebius_maps, st.floats(0.05, 2.0))
def test_horoball_transform_preserves_membership(m, level):
    ball = Horoball(BoundaryPoint.infinity(), level)
    moved = ball.transform(m)
    for z in (2j, 0.5 + 4j, -1.0 + 9j):
        p = PlanePoint.halfplane(z)
        q = PlanePoint.halfplane(m.apply(z))
        assert ball.contains(p, 1e-9) == moved.contains(q, 1e-9) or (
            abs(ball.depth(p)) < 1e-7)


def test_diameter_and_height_cut_guard_rails():
    with pytest.raises(ValueError):
        Horoball(BoundaryPoint.infinity(), 0.0).euclidean_diameter()
    with pytest.raises(ValueError):
        Horoball(BoundaryPoint.from_halfplane(1.0), 0.0).height_cut()


# --- quotient frames ------------------------------------------------------


def test_reduce_frame_carries_base_into_the_domain(schottky):
    g1 = schottky.generators[0].matrix
    far = apply_to_frame(g1 @ g1, HopfFrame(BoundaryPoint(2.0), BoundaryPoint(5.0), 0.4))
    q = reduce_frame(far, schottky)
    assert isinstance(q, QuotientFrame)
    assert schottky.in_domain(q.rep.base_point().to_halfplane())
    back = apply_to_frame(schottky.evaluate(q.word), far)
    assert frame_gap(back, q.rep) < 1e-7
