"""Tests for fractal_geom.rsmt module."""
import pytest

from fractal_geom.errors import ParameterError
from fractal_geom.geometry import Segment
from fractal_geom.models import PointSet
from fractal_geom.rsmt import (
    RST, exact_rsmt, hanan_grid, l1_mst_length, rsmt_diamond_check, rsmt_separator_stats,
)

CROSS = PointSet.from_array([[-1, 0], [1, 0], [0, -1], [0, 1]], label="cross")
CORNERS = PointSet.from_array([[0, 0], [1, 0], [0, 1]], label="corners")


class TestHananGrid:
    def test_size(self):
        assert len(hanan_grid(CROSS)) == 9
        assert (0.0, 0.0) in hanan_grid(CROSS).points

    def test_collinear(self):
        P = PointSet.from_array([[0, 0], [1, 0], [2, 0]])
        assert len(hanan_grid(P)) == 3

    def test_plane_only(self):
        with pytest.raises(ParameterError):
            hanan_grid(PointSet.from_array([[0, 0, 0], [1, 1, 1]]))


class TestExactRsmt:
    def test_corners(self):
        t = exact_rsmt(CORNERS)
        assert t.length == pytest.approx(2.0)
        assert t.steiner == []

    def test_cross(self):
        t = exact_rsmt(CROSS)
        assert t.length == pytest.approx(4.0)
        assert t.steiner == [(0.0, 0.0)]
        assert len(t.edges) == 4

    def test_two_points_equal_mst(self):
        P = PointSet.from_array([[0, 0], [2, 3]])
        t = exact_rsmt(P)
        assert t.length == pytest.approx(5.0)
        assert t.length == pytest.approx(l1_mst_length(P))

    def test_single_point(self):
        t = exact_rsmt(PointSet.from_array([[1, 1]]))
        assert t.length == 0.0 and t.edges == []

    def test_edges_axis_parallel(self, random_points):
        for e in exact_rsmt(random_points(5, seed=2)).edges:
            assert e.a[0] == e.b[0] or e.a[1] == e.b[1]

    def test_length_matches_edges(self, random_points):
        t = exact_rsmt(random_points(6, seed=3))
        total = sum(abs(e.a[0] - e.b[0]) + abs(e.a[1] - e.b[1]) for e in t.edges)
        assert total == pytest.approx(t.length)

    @pytest.mark.parametrize("seed", range(5))
    def test_never_longer_than_mst(self, random_points, seed):
        P = random_points(6, seed=seed)
        assert exact_rsmt(P).length <= l1_mst_length(P) + 1e-9

    @pytest.mark.parametrize("seed", range(3))
    def test_dreyfus_wagner_agrees(self, random_points, seed):
        P = random_points(5, seed=seed)
        a = exact_rsmt(P, method="enumerate")
        b = exact_rsmt(P, method="dreyfus-wagner")
        assert b.length == pytest.approx(a.length, abs=1e-9)

    def test_zero_budget_adds_no_steiner_points(self):
        t = exact_rsmt(CROSS, steiner_budget=0)
        assert t.steiner == []
        assert t.length <= l1_mst_length(CROSS) + 1e-9

    def test_limits(self, random_points):
        with pytest.raises(ParameterError):
            exact_rsmt(random_points(9, seed=0))
        with pytest.raises(ParameterError):
            exact_rsmt(CROSS, steiner_budget=3)
        with pytest.raises(ParameterError):
            exact_rsmt(CROSS, method="greedy")

    def test_to_dict(self):
        data = exact_rsmt(CROSS).to_dict()
        assert data["length"] == pytest.approx(4.0)
        assert data["steiner"] == [[0.0, 0.0]]


class TestDiamondCheck:
    def test_single_edge(self):
        t = RST([(0.0, 0.0), (2.0, 0.0)], [Segment((0, 0), (2, 0))], 2.0)
        assert rsmt_diamond_check(t)

    def test_cross(self):
        assert rsmt_diamond_check(exact_rsmt(CROSS))

    def test_overlapping_edges(self):
        t = RST([(0.0, 0.0), (2.0, 0.0)], [Segment((0, 0), (2, 0)), Segment((0.5, 0), (2.5, 0))], 4.0)
        assert not rsmt_diamond_check(t)

    @pytest.mark.parametrize("seed", range(4))
    def test_random_outputs(self, random_points, seed):
        assert rsmt_diamond_check(exact_rsmt(random_points(5, seed=seed)))


class TestSeparatorStats:
    def test_cross(self):
        sep = rsmt_separator_stats(CROSS)
        assert sep.inside_count + sep.outside_count == 4
        assert 0.0 < sep.balance <= 1.0

    def test_needs_two_points(self):
        with pytest.raises(ParameterError):
            rsmt_separator_stats(PointSet.from_array([[0, 0]]))
