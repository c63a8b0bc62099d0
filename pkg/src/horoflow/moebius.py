"""Isometries of the hyperbolic plane and its circle at infinity.

Conventions, fixed once for the whole package:

* Curvature -1.  Half-plane metric (dx^2 + dy^2)/y^2, disc metric
  4|dz|^2/(1 - |z|^2)^2, so d(i, e*i) = 1 on the vertical geodesic.
* Orientation-preserving isometries are normalized 2x2 real matrices of
  determinant 1, up to sign; the sign is canonicalized so maps compare
  entrywise.
* The models are linked by the map sending a disc point z to
  i(1 + z)/(1 - z) in the half-plane: 0 -> i, -1 -> 0, +1 -> infinity.
* A boundary point is canonically a disc angle in [0, 2*pi).  Its
  half-plane coordinate is the view -cot(angle/2), with angle 0 being
  the point at infinity, represented exactly (projectively as (-1 : 0)),
  never as a large float.  Counterclockwise on the disc is increasing
  half-plane coordinate, wrapping through infinity.
* The preferred basepoint o is i in the half-plane (the disc origin).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TAU = 2.0 * math.pi

DET_TOL = 1e-12
PARABOLIC_TRACE_TOL = 1e-9
IDENTITY_TOL = 1e-12


def cayley(z: complex) -> complex:
    """Disc model to half-plane model, z |-> i(1+z)/(1-z)."""
    return 1j * (1 + z) / (1 - z)


def cayley_inv(z: complex) -> complex:
    """Half-plane model to disc model, z |-> (z-i)/(z+i)."""
    return (z - 1j) / (z + 1j)


@dataclass(frozen=True)
class MoebiusMap:
    """An element of PSL(2, R) as a sign-canonicalized unit-determinant matrix.

    Acts on the half-plane by z |-> (az + b)/(cz + d).  Construction
    rescales to determinant 1 and flips the global sign so that the
    first entry larger than roundoff (row-major) is positive; maps are
    then equal iff their entries are.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = float(self.a), float(self.b), float(self.c), float(self.d)
        det = a * d - b * c
        if det <= 0.0:
            raise ValueError(f"matrix must have positive determinant, got {det}")
        r = 1.0 / math.sqrt(det)
        a, b, c, d = a * r, b * r, c * r, d * r
        # sign gauge: first entry above roundoff scale becomes positive
        scale = max(abs(a), abs(b), abs(c), abs(d))
        for e in (a, b, c, d):
            if abs(e) > 1e-12 * scale:
                if e < 0:
                    a, b, c, d = -a, -b, -c, -d
                break
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def geodesic_matrix(cls, t: float) -> "MoebiusMap":
        """diag(e^{t/2}, e^{-t/2}): right multiplication flows time t along the geodesic."""
        e = math.exp(t / 2.0)
        return cls(e, 0.0, 0.0, 1.0 / e)

    @classmethod
    def horocycle_matrix(cls, s: float) -> "MoebiusMap":
        """Unipotent lower-triangular (1 0; s 1): right multiplication slides
        distance s along the strong unstable horocycle."""
        return cls(1.0, 0.0, s, 1.0)

    @classmethod
    def rotation(cls, theta: float) -> "MoebiusMap":
        """Elliptic map fixing i, rotating tangent directions by theta."""
        c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
        return cls(c, -s, s, c)

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def apply(self, z: complex) -> complex:
        """Homographic action on a finite half-plane point."""
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_plane(self, p: "PlanePoint") -> "PlanePoint":
        w = self.apply(p.to_halfplane())
        q = PlanePoint.halfplane(w)
        return q.in_model(p.model)

    def apply_boundary(self, xi: "BoundaryPoint") -> "BoundaryPoint":
        p, q = xi.projective()
        return BoundaryPoint.from_projective(self.a * p + self.b * q,
                                             self.c * p + self.d * q)

    def close_to(self, other: "MoebiusMap", tol: float = 1e-9) -> bool:
        return (abs(self.a - other.a) <= tol and abs(self.b - other.b) <= tol
                and abs(self.c - other.c) <= tol and abs(self.d - other.d) <= tol)


@dataclass(frozen=True)
class PlanePoint:
    """A point of the hyperbolic plane, tagged with the model it lives in.

    Coordinates are (x, y): in the half-plane y > 0, in the disc
    x^2 + y^2 < 1.  The tag only affects coordinate views; geometric
    operations convert internally.
    """

    model: str
    x: float
    y: float

    def __post_init__(self):
        if self.model == "halfplane":
            if not self.y > 0:
                raise ValueError(f"half-plane point needs y > 0, got y={self.y}")
        elif self.model == "disc":
            if not self.x * self.x + self.y * self.y < 1.0:
                raise ValueError("disc point needs |z| < 1")
        else:
            raise ValueError(f"unknown model {self.model!r}")

    @classmethod
    def halfplane(cls, z: complex) -> "PlanePoint":
        return cls("halfplane", float(z.real), float(z.imag))

    @classmethod
    def disc(cls, z: complex) -> "PlanePoint":
        return cls("disc", float(z.real), float(z.imag))

    def to_halfplane(self) -> complex:
        z = complex(self.x, self.y)
        return z if self.model == "halfplane" else cayley(z)

    def to_disc(self) -> complex:
        z = complex(self.x, self.y)
        return z if self.model == "disc" else cayley_inv(z)

    def in_model(self, model: str) -> "PlanePoint":
        if model == self.model:
            return self
        if model == "halfplane":
            return PlanePoint.halfplane(self.to_halfplane())
        return PlanePoint.disc(self.to_disc())


BASEPOINT = PlanePoint.halfplane(1j)


def distance(x: PlanePoint, y: PlanePoint) -> float:
    """Hyperbolic distance (curvature -1)."""
    z, w = x.to_halfplane(), y.to_halfplane()
    return 2.0 * math.asinh(abs(z - w) / (2.0 * math.sqrt(z.imag * w.imag)))


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the circle at infinity, canonically a disc angle in [0, 2*pi).

    Angle 0 is the half-plane point at infinity.  The half-plane view is
    -cot(angle/2); the projective view is a unit pair (p, q) with
    coordinate p/q and the gauge q >= 0, (p, q) = (-1, 0) at infinity.
    """

    angle: float

    def __post_init__(self):
        a = float(self.angle) % TAU
        if a == TAU:
            a = 0.0
        object.__setattr__(self, "angle", a)

    @classmethod
    def infinity(cls) -> "BoundaryPoint":
        return cls(0.0)

    @classmethod
    def from_halfplane(cls, x: float) -> "BoundaryPoint":
        if math.isinf(x):
            return cls(0.0)
        return cls(2.0 * math.atan2(1.0, -x))

    @classmethod
    def from_projective(cls, p: float, q: float) -> "BoundaryPoint":
        if p == 0.0 and q == 0.0:
            raise ValueError("projective pair (0, 0) is not a boundary point")
        return cls(2.0 * math.atan2(q, -p) % TAU)

    @classmethod
    def from_disc(cls, w: complex) -> "BoundaryPoint":
        return cls(math.atan2(w.imag, w.real) % TAU)

    def is_infinity(self) -> bool:
        return self.angle == 0.0

    def halfplane(self) -> float:
        """Extended-real coordinate; math.inf at angle 0 exactly."""
        if self.angle == 0.0:
            return math.inf
        t = math.tan(self.angle / 2.0)
        if t == 0.0:
            # tan underflow for denormal angles just ccw of infinity
            return -math.inf
        return -1.0 / t

    def projective(self) -> tuple[float, float]:
        return (-math.cos(self.angle / 2.0), math.sin(self.angle / 2.0))

    def disc(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))

    def ccw_to(self, other: "BoundaryPoint") -> float:
        """Counterclockwise arc length from self to other, in [0, 2*pi)."""
        return (other.angle - self.angle) % TAU

    def close_to(self, other: "BoundaryPoint", tol: float = 1e-9) -> bool:
        d = abs(self.angle - other.angle)
        return min(d, TAU - d) <= tol

    def antipode(self) -> "BoundaryPoint":
        return BoundaryPoint(self.angle + math.pi)


def classify(m: MoebiusMap) -> str:
    """One of "identity", "hyperbolic", "parabolic", "elliptic"."""
    if (abs(m.a - 1.0) <= IDENTITY_TOL and abs(m.d - 1.0) <= IDENTITY_TOL
            and abs(m.b) <= IDENTITY_TOL and abs(m.c) <= IDENTITY_TOL):
        return "identity"
    t = abs(m.trace)
    if t > 2.0 + PARABOLIC_TRACE_TOL:
        return "hyperbolic"
    if t >= 2.0 - PARABOLIC_TRACE_TOL:
        return "parabolic"
    return "elliptic"


def fixed_points(m: MoebiusMap) -> list[tuple[BoundaryPoint, str]]:
    """Boundary fixed points with stability tags.

    Hyperbolic maps give [(attracting, ...), (repelling, ...)], parabolic
    maps a single neutral point, elliptic maps an empty list.  The
    stability of a finite fixed point x is read off the derivative
    1/(cx + d)^2; at infinity the map acts affinely with derivative a^2.

    Raises ValueError on the identity.
    """
    kind = classify(m)
    if kind == "identity":
        raise ValueError("identity fixes every boundary point")
    if kind == "elliptic":
        return []

    points: list[tuple[BoundaryPoint, str]] = []
    if abs(m.c) <= 1e-14:
        # infinity is fixed; derivative there is a^2 (d = 1/a)
        if kind == "parabolic":
            return [(BoundaryPoint.infinity(), "neutral")]
        inf_tag = "attracting" if m.a * m.a > 1.0 else "repelling"
        x = m.b / (m.d - m.a)
        fin_tag = "repelling" if inf_tag == "attracting" else "attracting"
        points = [(BoundaryPoint.infinity(), inf_tag),
                  (BoundaryPoint.from_halfplane(x), fin_tag)]
    else:
        if kind == "parabolic":
            x = (m.a - m.d) / (2.0 * m.c)
            return [(BoundaryPoint.from_halfplane(x), "neutral")]
        disc = m.trace * m.trace - 4.0
        r = math.sqrt(disc)
        for x in ((m.a - m.d + r) / (2.0 * m.c), (m.a - m.d - r) / (2.0 * m.c)):
            deriv = (m.c * x + m.d) ** 2
            tag = "attracting" if deriv > 1.0 else "repelling"
            points.append((BoundaryPoint.from_halfplane(x), tag))
    points.sort(key=lambda pt: pt[1])  # attracting first
    return points


def attracting_fixed_point(m: MoebiusMap) -> BoundaryPoint:
    for xi, tag in fixed_points(m):
        if tag == "attracting":
            return xi
    raise ValueError("map has no attracting fixed point")


def repelling_fixed_point(m: MoebiusMap) -> BoundaryPoint:
    for xi, tag in fixed_points(m):
        if tag == "repelling":
            return xi
    raise ValueError("map has no repelling fixed point")


def translation_length(m: MoebiusMap) -> float:
    """Distance by which a hyperbolic map slides points of its axis."""
    if classify(m) != "hyperbolic":
        raise ValueError("translation length needs a hyperbolic map")
    return 2.0 * math.acosh(abs(m.trace) / 2.0)


def busemann(xi: BoundaryPoint, x: PlanePoint, y: PlanePoint) -> float:
    """Busemann cocycle beta_xi(x, y) = lim_{z -> xi} (d(x, z) - d(y, z)).

    Evaluated in closed form: for xi = infinity it is log(Im y / Im x);
    a finite xi is first carried to infinity by z |-> -1/(z - xi), whose
    imaginary part is Im(z)/|z - xi|^2.  No numerical limit is taken.
    """
    zx, zy = x.to_halfplane(), y.to_halfplane()
    x0 = math.inf if xi.is_infinity() else xi.halfplane()
    if math.isinf(x0):
        # includes denormal angles whose coordinate overflows
        return math.log(zy.imag / zx.imag)
    return (math.log(zy.imag) - 2.0 * math.log(abs(zy - x0))
            - math.log(zx.imag) + 2.0 * math.log(abs(zx - x0)))


def transport_to_infinity(xi: BoundaryPoint, basepoint: PlanePoint | None = None) -> MoebiusMap:
    """An isometry sending xi to infinity; with a basepoint, also sending it to i.

    Used to put shadow and horoball computations into the vertical chart.
    Implemented as the rotation about i closing the angle of xi: entries
    stay order one however close xi is to infinity, where the textbook
    shear 1/(x0 - z) loses the point to cancellation.
    """
    t = MoebiusMap.rotation(xi.angle)
    if basepoint is not None:
        w = t.apply(basepoint.to_halfplane())
        r = math.sqrt(w.imag)
        t = MoebiusMap(1.0 / r, -w.real / r, 0.0, r) @ t
    return t
