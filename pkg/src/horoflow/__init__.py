"""Geometry and dynamics on hyperbolic surfaces of infinite volume.

The package is organised bottom-up:

* :mod:`horoflow.moebius` -- the isometry group PSL(2, R), points of the
  hyperbolic plane and its circle at infinity, distance and Busemann
  cocycles.
* :mod:`horoflow.flows` -- unit tangent frames in Hopf coordinates,
  geodesic and stable-horocycle flows, horoballs.
* :mod:`horoflow.group` -- finitely generated free Fuchsian groups built
  from ping-pong data, orbit enumeration, point reduction into a
  fundamental domain.
* :mod:`horoflow.boundary` -- limit-set covers by boundary arcs, ordinary
  intervals, and classification of individual boundary points (radial,
  parabolic, endpoint of an ordinary interval, right-horocyclic).
* :mod:`horoflow.measure` -- orbit-counting exponent, atomic conformal
  densities, shadow statistics, and samplers for the associated invariant
  measures on the frame bundle.
* :mod:`horoflow.experiments` -- desk-scale numerical experiments: orbit
  traces of a single horocycle, density coverage, ergodic averages,
  cusp-excursion statistics.
* :mod:`horoflow.cli` -- deterministic command line front end.
"""

from horoflow.moebius import (
    BoundaryPoint,
    MoebiusMap,
    PlanePoint,
    busemann,
    cayley,
    classify,
    distance,
    fixed_points,
    translation_length,
)
from horoflow.flows import HopfFrame, Horoball, geodesic_flow, horocycle_flow
from horoflow.group import FuchsianGroup, cusp1, enumerate_orbit, schottky2
from horoflow.words import GroupWord

__version__ = "0.1.0"

__all__ = [
    "BoundaryPoint",
    "FuchsianGroup",
    "GroupWord",
    "HopfFrame",
    "Horoball",
    "MoebiusMap",
    "PlanePoint",
    "busemann",
    "cayley",
    "classify",
    "cusp1",
    "distance",
    "enumerate_orbit",
    "fixed_points",
    "geodesic_flow",
    "horocycle_flow",
    "schottky2",
    "translation_length",
    "__version__",
]
