"""Tests for fractal_geom.geometry module."""
import math
import pytest
import numpy as np

from fractal_geom.errors import DimensionMismatchError, ParameterError
from fractal_geom.geometry import (
    AxisBox, Ball, Norm, Segment, Side, ball_side, balls_side, box_distance, circumball,
    distance, l1_diamond_contains, l1_diamonds_overlap, point_to_segment_distance,
    segment_length, segments_intersect_sphere, sphere_segment_intersects, CROSSING, INSIDE, OUTSIDE,
)


class TestDistance:
    def test_euclidean(self):
        assert distance((0, 0), (3, 4)) == pytest.approx(5.0)

    def test_identity(self):
        assert distance((1.5, -2), (1.5, -2)) == 0.0

    def test_l1(self):
        assert distance((0, 0), (3, 4), Norm.L1) == pytest.approx(7.0)
        assert distance((0, 0), (3, 4), "L1") == pytest.approx(7.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            distance((0, 0), (1, 2, 3))

    def test_unknown_norm(self):
        with pytest.raises(ParameterError):
            distance((0, 0), (1, 1), "Linf")

    def test_metric_on_random_triples(self, rng):
        pts = rng.random((30, 3))
        for _ in range(200):
            i, j, k = rng.integers(0, 30, size=3)
            a, b, c = pts[i], pts[j], pts[k]
            assert distance(a, b) == pytest.approx(distance(b, a), abs=1e-12)
            assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12


class TestPrimitives:
    def test_non_finite_rejected(self):
        with pytest.raises(ParameterError):
            Segment((0, math.nan), (1, 1))

    def test_negative_radius_rejected(self):
        with pytest.raises(ParameterError):
            Ball((0, 0), -1.0)

    def test_segment_length_and_midpoint(self):
        s = Segment((0, 0), (2, 0))
        assert segment_length(s) == pytest.approx(2.0)
        assert s.midpoint == (1.0, 0.0)


class TestCircumball:
    def test_horizontal(self):
        b = circumball(Segment((0, 0), (2, 0)))
        assert b.center == (1.0, 0.0)
        assert b.radius == pytest.approx(1.0)

    def test_degenerate(self):
        b = circumball(Segment((1, 1), (1, 1)))
        assert b.center == (1.0, 1.0)
        assert b.radius == 0.0

    def test_diagonal(self):
        s = Segment((0, 0), (1, 1))
        b = circumball(s)
        assert b.center == (0.5, 0.5)
        assert b.radius == pytest.approx(math.sqrt(2) / 2)
        assert distance(b.center, s.a) == pytest.approx(b.radius, abs=1e-9)
        assert distance(b.center, s.b) == pytest.approx(b.radius, abs=1e-9)


class TestSphereSegment:
    unit = Ball((0, 0), 1.0)

    def test_passes_through(self):
        assert sphere_segment_intersects(self.unit, Segment((-2, 0), (2, 0)))

    def test_fully_outside(self):
        assert not sphere_segment_intersects(self.unit, Segment((2, 2), (3, 3)))

    def test_fully_inside(self):
        assert not sphere_segment_intersects(self.unit, Segment((0, 0), (0.5, 0)))

    def test_tangent(self):
        assert sphere_segment_intersects(self.unit, Segment((-1, 1), (1, 1)))

    def test_agrees_with_dense_sampling(self, rng):
        for _ in range(100):
            a, b = rng.uniform(-2, 2, size=2), rng.uniform(-2, 2, size=2)
            t = np.linspace(0, 1, 1000)[:, None]
            dist = np.linalg.norm(a + t * (b - a), axis=1)
            sampled = dist.min() <= 1.0 <= dist.max()
            if abs(dist.min() - 1.0) < 1e-3 or abs(dist.max() - 1.0) < 1e-3:
                continue
            assert sphere_segment_intersects(self.unit, Segment(a, b)) == sampled

    def test_batch_form(self):
        starts = np.array([[-2.0, 0.0], [2.0, 2.0], [0.0, 0.0]])
        ends = np.array([[2.0, 0.0], [3.0, 3.0], [0.5, 0.0]])
        hit = segments_intersect_sphere(np.zeros(2), 1.0, starts, ends)
        assert hit.tolist() == [True, False, False]

    def test_point_to_segment_distance(self):
        assert point_to_segment_distance((1, 1), Segment((0, 0), (2, 0))) == pytest.approx(1.0)
        assert point_to_segment_distance((3, 0), Segment((0, 0), (2, 0))) == pytest.approx(1.0)


class TestBallSide:
    def test_inside(self):
        assert ball_side(Ball((0, 0), 5), Ball((1, 0), 1)) is Side.INSIDE

    def test_outside(self):
        assert ball_side(Ball((0, 0), 1), Ball((5, 0), 1)) is Side.OUTSIDE

    def test_crossing(self):
        assert ball_side(Ball((0, 0), 1), Ball((1, 0), 0.5)) is Side.CROSSING

    def test_batch_is_exhaustive(self, rng):
        centers = rng.uniform(-3, 3, size=(50, 2))
        radii = rng.uniform(0, 1, size=50)
        codes = balls_side(np.zeros(2), 1.5, centers, radii)
        assert set(codes.tolist()) <= {INSIDE, OUTSIDE, CROSSING}
        assert len(codes) == 50


class TestDiamonds:
    s = Segment((0, 0), (2, 0))

    def test_midpoint_inside(self):
        assert l1_diamond_contains(self.s, (1, 0))

    def test_off_axis_outside(self):
        assert not l1_diamond_contains(self.s, (1, 0.6))

    def test_endpoint_outside(self):
        assert not l1_diamond_contains(self.s, (0, 0))

    def test_overlap(self):
        assert l1_diamonds_overlap(self.s, Segment((0.5, 0), (2.5, 0)))
        assert not l1_diamonds_overlap(self.s, Segment((2, 0), (4, 0)))
        assert not l1_diamonds_overlap(self.s, Segment((1, 0), (1, 2)))


class TestAxisBox:
    def test_contains_flags(self):
        box = AxisBox((0, 0), (1, 1), lower_closed=(True, True), upper_closed=(False, True))
        assert box.contains((0, 0))
        assert box.contains((0.5, 1))
        assert not box.contains((1, 0.5))

    def test_cube(self):
        box = AxisBox.cube((1, 2), 3)
        assert box.is_cube
        assert box.size == 3
        assert box.center == (2.5, 3.5)

    def test_inverted_rejected(self):
        with pytest.raises(ParameterError):
            AxisBox((1, 0), (0, 1))

    def test_box_distance(self):
        a = AxisBox.cube((0, 0), 1)
        assert box_distance(a, AxisBox.cube((1, 0), 1)) == 0.0
        assert box_distance(a, AxisBox.cube((4, 5), 1)) == pytest.approx(5.0)
