"""Unit tangent frames in Hopf coordinates and the geodesic/horocycle flows.

A frame is the triple (xi_minus, xi_plus, tau): backward endpoint,
forward endpoint, and tau = busemann(xi_minus, base, o), the signed
distance of the base point past o as seen from xi_minus.  The triple
determines a unique matrix through the simply transitive action on
frames; the identity matrix is the upward frame at o = i.

Flows act on the right.  Geodesic flow adds t to tau and is exact in
these coordinates; the strong unstable horocycle flow moves xi_plus
only.  Storing frames as triples instead of matrices keeps t ~ 40
flows accurate, where matrix entries would grow like e^{t/2}.

Sign convention, pinned by a regression test: for s > 0 the horocycle
flow moves xi_plus clockwise on the disc circle.  Equivalently, in a
chart sending xi_minus to infinity the base point moves toward smaller
real parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from horoflow.moebius import (
    BASEPOINT,
    BoundaryPoint,
    MoebiusMap,
    PlanePoint,
    busemann,
    distance,
)
from horoflow.words import GroupWord


@dataclass(frozen=True)
class HopfFrame:
    xi_minus: BoundaryPoint
    xi_plus: BoundaryPoint
    tau: float

    def __post_init__(self):
        if self.xi_minus.angle == self.xi_plus.angle:
            raise ValueError("degenerate frame: equal endpoints")

    def matrix(self) -> MoebiusMap:
        """The unique map sending the upward frame at o to this frame."""
        pp, qp = self.xi_plus.projective()
        pm, qm = self.xi_minus.projective()
        if pp * qm - pm * qp < 0:
            pm, qm = -pm, -qm
        m0 = MoebiusMap(pp, pm, qp, qm)
        tau0 = busemann(self.xi_minus,
                        PlanePoint.halfplane(m0.apply(1j)), BASEPOINT)
        return m0 @ MoebiusMap.geodesic_matrix(self.tau - tau0)

    def base_point(self) -> PlanePoint:
        return PlanePoint.halfplane(self.matrix().apply(1j))

    def direction_angle(self) -> float:
        """Euclidean angle of the tangent vector at the base point."""
        m = self.matrix()
        w = 1j / (m.c * 1j + m.d) ** 2
        return math.atan2(w.imag, w.real)


def identity_frame() -> HopfFrame:
    return HopfFrame(BoundaryPoint.from_halfplane(0.0), BoundaryPoint.infinity(), 0.0)


def matrix_to_frame(m: MoebiusMap) -> HopfFrame:
    xi_minus = m.apply_boundary(BoundaryPoint.from_halfplane(0.0))
    xi_plus = m.apply_boundary(BoundaryPoint.infinity())
    base = PlanePoint.halfplane(m.apply(1j))
    return HopfFrame(xi_minus, xi_plus, busemann(xi_minus, base, BASEPOINT))


def geodesic_flow(f: HopfFrame, t: float) -> HopfFrame:
    return HopfFrame(f.xi_minus, f.xi_plus, f.tau + t)


def horocycle_flow(f: HopfFrame, s: float) -> HopfFrame:
    """Slide s along the strong unstable horocycle of f.

    xi_minus and tau are untouched: the strong unstable leaf of f is
    exactly the set of frames sharing them.
    """
    if s == 0.0:
        return f
    m = f.matrix()
    xi_plus = m.apply_boundary(BoundaryPoint.from_projective(1.0, s))
    return HopfFrame(f.xi_minus, xi_plus, f.tau)


def horocycle_parameter(f: HopfFrame, eta: BoundaryPoint) -> float:
    """The s with xi_plus(horocycle_flow(f, s)) = eta; inf when eta = xi_minus."""
    minv = f.matrix().inverse()
    p, q = eta.projective()
    pp, qq = minv.a * p + minv.b * q, minv.c * p + minv.d * q
    if abs(pp) <= 1e-12 * math.hypot(pp, qq):
        # eta is xi_minus up to roundoff; the parameter diverges there
        return math.inf
    return qq / pp


def apply_to_frame(m: MoebiusMap, f: HopfFrame) -> HopfFrame:
    """Left action of an isometry on a frame."""
    tau = f.tau + busemann(f.xi_minus, BASEPOINT,
                           PlanePoint.halfplane(m.inverse().apply(1j)))
    return HopfFrame(m.apply_boundary(f.xi_minus), m.apply_boundary(f.xi_plus), tau)


def frame_gap(u: HopfFrame, v: HopfFrame) -> float:
    """Base-point distance plus tangent-direction gap, on the universal cover."""
    d = distance(u.base_point(), v.base_point())
    a = abs(u.direction_angle() - v.direction_angle()) % (2.0 * math.pi)
    return d + min(a, 2.0 * math.pi - a)


def bracket(u: HopfFrame, v: HopfFrame, eps: float) -> HopfFrame:
    """Local product: the frame with backward endpoint of u, forward endpoint
    of v, lying on the strong stable leaf of v.

    The tau coordinate solves busemann(v_plus, base(w), base(v)) = 0 in
    closed form: along frames (u_minus, v_plus, tau) that Busemann value
    decreases with slope exactly 1 in tau.  Raises when the endpoints
    coincide or the inputs are farther apart than eps, the locality
    radius of the product structure.
    """
    if u.xi_minus.close_to(v.xi_plus, 1e-12):
        raise ValueError("bracket undefined: u.xi_minus = v.xi_plus")
    if frame_gap(u, v) > eps:
        raise ValueError("frames farther apart than eps, bracket not local")
    w0 = HopfFrame(u.xi_minus, v.xi_plus, 0.0)
    tau = busemann(v.xi_plus, w0.base_point(), v.base_point())
    return HopfFrame(u.xi_minus, v.xi_plus, tau)


@dataclass(frozen=True)
class Horoball:
    """Horoball based at a boundary point, cut at a Busemann level from o.

    Membership: busemann(base, o, x) >= level.  Level L > 0 means the
    ball starts distance L past o toward its base point.
    """

    base: BoundaryPoint
    level: float

    def depth(self, x: PlanePoint) -> float:
        """Signed penetration depth; >= 0 inside, 0 on the boundary."""
        return busemann(self.base, BASEPOINT, x) - self.level

    def contains(self, x: PlanePoint, tol: float = 0.0) -> bool:
        return self.depth(x) >= -tol

    @property
    def entry_distance(self) -> float:
        """Distance from o to the horoball (0 if o is inside)."""
        return max(self.level, 0.0)

    def transform(self, m: MoebiusMap) -> "Horoball":
        new_base = m.apply_boundary(self.base)
        shift = busemann(new_base, BASEPOINT,
                         PlanePoint.halfplane(m.apply(1j)))
        return Horoball(new_base, self.level + shift)

    def euclidean_diameter(self) -> float:
        """Diameter of the tangent disc picture in the half-plane; finite base only."""
        if self.base.is_infinity():
            raise ValueError("horoball at infinity is a half-plane, not a disc")
        x0 = self.base.halfplane()
        return (1.0 + x0 * x0) * math.exp(-self.level)

    def height_cut(self) -> float:
        """The height Im z = height_cut() bounding the horoball at infinity."""
        if not self.base.is_infinity():
            raise ValueError("height cut only defined for base at infinity")
        return math.exp(self.level)


@dataclass(frozen=True)
class QuotientFrame:
    """A frame on the quotient surface: representative plus reducing word."""

    rep: HopfFrame
    word: GroupWord


def reduce_frame(f: HopfFrame, group) -> QuotientFrame:
    """Carry a frame into the group's fundamental domain.

    The reducing word w satisfies rep = evaluate(w) applied to f, with
    the base point of rep in the closed domain.
    """
    _, word = group.reduce_point(f.base_point())
    if not word:
        return QuotientFrame(f, word)
    return QuotientFrame(apply_to_frame(group.evaluate(word), f), word)
