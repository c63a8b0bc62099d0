import math

import pytest
from hypothesis import HealthCheck, settings
import hypothesis.strategies as st

from horoflow.moebius import TAU, BoundaryPoint, MoebiusMap, PlanePoint

settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def _build(entries):
    a, b, c, d = entries
    det = a * d - b * c
    if det < 0.05:
        return None
    return MoebiusMap(a, b, c, d)


finite = st.floats(-4.0, 4.0, allow_nan=False, allow_infinity=False)

# well-conditioned orientation-preserving maps
moebius_maps = st.tuples(finite, finite, finite, finite).map(_build).filter(
    lambda m: m is not None)

angles = st.floats(0.0, TAU - 1e-6, allow_nan=False)
boundary_points = angles.map(BoundaryPoint)
plane_points = st.tuples(
    st.floats(-5.0, 5.0, allow_nan=False),
    st.floats(0.05, 20.0, allow_nan=False),
).map(lambda xy: PlanePoint.halfplane(complex(xy[0], xy[1])))


@pytest.fixture(scope="session")
def schottky():
    from horoflow.group import schottky2
    return schottky2()


@pytest.fixture(scope="session")
def cusped():
    from horoflow.group import cusp1
    return cusp1()


def circular_gap(a: float, b: float) -> float:
    d = abs(a - b) % TAU
    return min(d, TAU - d)


SQRT7 = math.sqrt(7.0)
SQRT34 = math.sqrt(34.0)
