import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fiberflow.errors import GeometryError
from fiberflow.geometry import (
    FiberedSpace,
    PointSet,
    SegmentUnion,
    dist_to_fiber,
    fiber_min_distance,
    point_segment_closest,
    segment_segment_distance,
    validate_space,
)

SLICE_AT_7 = PointSet(np.array([[7.0, 8.0], [7.0, 6.5]]))
SLICE_AT_6 = PointSet(np.array([[6.0, 8.0], [6.0, 6.0]]))


def test_distance_to_vertical_slice():
    d, witness = dist_to_fiber([1.0, 4.0], SLICE_AT_7)
    assert d == pytest.approx(6.5, abs=1e-12)
    assert np.allclose(witness, [7.0, 6.5])


def test_distance_zero_on_own_point():
    fiber = PointSet(np.array([[2.0, -1.0], [0.5, 0.5]]))
    for p in fiber.points:
        assert dist_to_fiber(p, fiber).value == 0.0


def test_distance_to_second_slice():
    d, witness = dist_to_fiber([1.0, 4.0], SLICE_AT_6)
    assert d == pytest.approx(math.sqrt(29.0), abs=1e-12)
    assert np.allclose(witness, [6.0, 6.0])


def test_empty_fiber_raises():
    with pytest.raises(GeometryError):
        dist_to_fiber([0.0, 0.0], PointSet(np.empty((0, 2))))


def test_pointset_minimality_exhaustive():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-3, 3, size=(12, 3))
    fiber = PointSet(pts)
    for _ in range(50):
        p = rng.uniform(-5, 5, size=3)
        d = dist_to_fiber(p, fiber).value
        assert all(d <= np.linalg.norm(p - a) + 1e-12 for a in pts)


coord = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(p=st.tuples(coord, coord), q=st.tuples(coord, coord))
def test_dist_to_fiber_is_1_lipschitz(p, q):
    fiber = SegmentUnion(np.array([[[0.0, 8.0], [8.0, 8.0]], [[0.0, 3.0], [8.0, 7.0]]]))
    dp = dist_to_fiber(np.array(p), fiber).value
    dq = dist_to_fiber(np.array(q), fiber).value
    assert abs(dp - dq) <= math.dist(p, q) + 1e-9


def test_segment_distance_matches_dense_sampling_oracle():
    # unit-length segments and far query points keep the sampling bias below 1e-9
    segs = np.array([[[0.0, 0.0], [1.0, 0.0]], [[3.0, 1.0], [3.6, 1.8]]])
    fiber = SegmentUnion(segs)
    ss = np.linspace(0.0, 1.0, 10_000)
    for p in (np.array([-1.0, 2.5]), np.array([0.5, 2.2]), np.array([5.0, -1.0])):
        exact = dist_to_fiber(p, fiber).value
        sampled = min(
            float(np.linalg.norm(p - (a + s * (b - a)))) for a, b in segs for s in ss
        )
        assert exact <= sampled + 1e-15
        assert abs(exact - sampled) <= 1e-9


def test_point_segment_projection_cases():
    a, b = np.array([0.0, 0.0]), np.array([2.0, 0.0])
    d, c = point_segment_closest(np.array([1.0, 3.0]), a, b)
    assert d == pytest.approx(3.0) and np.allclose(c, [1.0, 0.0])
    d, c = point_segment_closest(np.array([-2.0, 0.0]), a, b)
    assert d == pytest.approx(2.0) and np.allclose(c, a)
    # degenerate segment falls back to the point distance
    d, _ = point_segment_closest(np.array([1.0, 1.0]), a, a)
    assert d == pytest.approx(math.sqrt(2.0))


def test_segment_segment_distance():
    p1, q1 = np.array([0.0, 0.0]), np.array([1.0, 0.0])
    p2, q2 = np.array([0.0, 1.0]), np.array([1.0, 1.0])
    assert segment_segment_distance(p1, q1, p2, q2) == pytest.approx(1.0)
    # crossing segments touch
    p2, q2 = np.array([0.5, -1.0]), np.array([0.5, 1.0])
    assert segment_segment_distance(p1, q1, p2, q2) == pytest.approx(0.0, abs=1e-12)


def test_fiber_min_distance_mixed_kinds():
    a = PointSet(np.array([[0.0, 0.0]]))
    b = SegmentUnion(np.array([[[2.0, -1.0], [2.0, 1.0]]]))
    assert fiber_min_distance(a, b) == pytest.approx(2.0)


def test_validate_paper_space(paper):
    report = validate_space(paper.space())
    assert report.ok


def test_identical_fibers_flagged_as_overlap():
    space = FiberedSpace(
        kappa=2,
        base_points=np.array([[0.0, 0.0], [1.0, 0.0]]),
        fibers=(PointSet(np.array([[5.0, 5.0]])), PointSet(np.array([[5.0, 5.0]]))),
    )
    report = validate_space(space)
    assert not report.ok
    assert report.overlaps and report.overlaps[0][:2] == (0, 1)


def test_empty_fiber_reported():
    space = FiberedSpace(
        kappa=2,
        base_points=np.array([[0.0, 0.0]]),
        fibers=(PointSet(np.empty((0, 2))),),
    )
    report = validate_space(space)
    assert report.empty_fibers == [0]
    assert not report.ok


def test_degenerate_segment_reported():
    space = FiberedSpace(
        kappa=2,
        base_points=np.array([[0.0, 0.0]]),
        fibers=(SegmentUnion(np.array([[[1.0, 1.0], [1.0, 1.0]]])),),
    )
    report = validate_space(space)
    assert report.degenerate_segments == [(0, 0)]
