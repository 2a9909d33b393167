"""Tests for fractal_geom.pathwidth module."""
import pytest

from fractal_geom.errors import InvalidDecompositionError
from fractal_geom.models import GeneratorSpec, PointSet
import numpy as np

from fractal_geom.pathwidth import (
    PathDecomposition, axis_orders, boundary_cover, build_path_decomposition, layout_bags,
    layout_width, verify_path_decomposition,
)
from fractal_geom.pointgen import generate
from fractal_geom.spanner import SpannerGraph, build_spanner, prune_shortcuts


def pruned_spanner(P, eps=1.0):
    return prune_shortcuts(build_spanner(P, eps), P, eps)


class TestVerifyPathDecomposition:
    def path3(self):
        P = generate(GeneratorSpec(kind="line", n=3))
        return SpannerGraph.from_edges(P, [(0, 1), (1, 2)])

    def test_valid(self):
        check = verify_path_decomposition(self.path3(), PathDecomposition([[0, 1], [1, 2]]))
        assert check.valid
        assert check.width == 1

    def test_missing_edge(self):
        check = verify_path_decomposition(self.path3(), PathDecomposition([[0, 1], [2]]))
        assert not check.valid
        assert check.violating_edge == (1, 2)

    def test_non_contiguous_vertex(self):
        pd = PathDecomposition([[0, 1], [2], [1, 2]])
        check = verify_path_decomposition(self.path3(), pd)
        assert not check.valid
        assert check.violating_vertex == 1

    def test_missing_vertex(self):
        G = SpannerGraph.from_edges(generate(GeneratorSpec(kind="line", n=3)), [(0, 1)])
        check = verify_path_decomposition(G, PathDecomposition([[0, 1]]))
        assert check.missing_vertex == 2

    def test_strict_raises(self):
        with pytest.raises(InvalidDecompositionError):
            verify_path_decomposition(self.path3(), PathDecomposition([[0], [1], [2]]), strict=True)


class TestBuildPathDecomposition:
    def test_single_edge(self):
        P = PointSet.from_array([[0, 0], [1, 0]])
        G = SpannerGraph.from_edges(P, [(0, 1)])
        pd = build_path_decomposition(G, P, 1.0)
        assert pd.bags == [[0, 1]]
        assert pd.width == 1

    def test_collinear_path(self):
        P = generate(GeneratorSpec(kind="line", n=30))
        G = SpannerGraph.from_edges(P, [(i, i + 1) for i in range(29)])
        pd = build_path_decomposition(G, P, 1.0)
        assert verify_path_decomposition(G, pd).valid
        assert len(pd.bags) > 1

    @pytest.mark.parametrize("k", [1, 2])
    def test_carpet_spanner_valid(self, k):
        P = generate(GeneratorSpec(kind="carpet", k=k))
        G = pruned_spanner(P)
        pd = build_path_decomposition(G, P, 1.0, validate=True)
        assert pd.width < len(P)

    def test_random_spanner_valid(self, random_points):
        P = random_points(60, seed=5)
        G = pruned_spanner(P, 0.5)
        assert verify_path_decomposition(G, build_path_decomposition(G, P, 0.5)).valid

    def test_edgeless_graph(self):
        P = generate(GeneratorSpec(kind="line", n=6))
        pd = build_path_decomposition(SpannerGraph(6, [], [], []), P, 1.0)
        assert pd.width == 0
        assert sorted(v for b in pd.bags for v in b) == list(range(6))

    def test_trace(self, carpet2):
        trace = []
        build_path_decomposition(pruned_spanner(carpet2), carpet2, 1.0, trace=trace)
        assert trace
        assert trace[0]["size"] == len(carpet2)
        assert {"radius", "balance", "short", "long", "separator", "fallback"} <= set(trace[0])

    def test_to_dict(self):
        data = PathDecomposition([[0, 1], [1, 2]]).to_dict()
        assert data == {"width": 1, "source": "separator", "bags": [[0, 1], [1, 2]]}

    def test_path_prefers_sweep(self):
        P = generate(GeneratorSpec(kind="line", n=30))
        G = SpannerGraph.from_edges(P, [(i, i + 1) for i in range(29)])
        pd = build_path_decomposition(G, P, 1.0)
        assert pd.source == "sweep"
        assert pd.width == 1

    def test_single_edge_keeps_separator_bags(self):
        P = PointSet.from_array([[0, 0], [1, 0]])
        pd = build_path_decomposition(SpannerGraph.from_edges(P, [(0, 1)]), P, 1.0)
        assert pd.source == "separator"

    def test_no_wider_than_axis_sweeps(self, carpet2):
        G = pruned_spanner(carpet2)
        pd = build_path_decomposition(G, carpet2, 1.0)
        edges = np.asarray(G.edges)
        for order in axis_orders(carpet2.coords):
            assert pd.width <= layout_width(order, edges, len(carpet2))

    def test_trace_separator_is_cut_cover(self, carpet2):
        trace = []
        G = pruned_spanner(carpet2)
        build_path_decomposition(G, carpet2, 1.0, trace=trace)
        # a cover of the cut edges never exceeds the cut itself
        assert trace[0]["separator"] <= trace[0]["short"] + trace[0]["long"]


class TestBoundaryCover:
    def test_star_center(self):
        edges = [(0, 1), (0, 2), (0, 3)]
        assert boundary_cover(edges, {0}) == {0}

    def test_ignores_same_side_edges(self):
        edges = [(0, 1), (1, 2), (2, 3)]
        assert boundary_cover(edges, {0, 1}) in ({1}, {2})

    def test_no_cut(self):
        assert boundary_cover([(0, 1)], {0, 1}) == set()

    def test_covers_every_cut_edge(self, random_points):
        P = random_points(40, seed=2)
        G = pruned_spanner(P, 0.5)
        first = set(range(20))
        S = boundary_cover(G.edges, first)
        for i, j in G.edges:
            if (i in first) != (j in first):
                assert i in S or j in S


class TestLayouts:
    def edges(self):
        return np.asarray([(0, 1), (1, 2), (0, 3)])

    def test_width(self):
        assert layout_width([0, 1, 2, 3], self.edges(), 4) == 2
        assert layout_width([3, 0, 1, 2], self.edges(), 4) == 1

    def test_bags_valid(self):
        P = generate(GeneratorSpec(kind="line", n=4))
        G = SpannerGraph.from_edges(P, [(0, 1), (1, 2), (0, 3)])
        bags = layout_bags([0, 1, 2, 3], self.edges(), 4)
        assert bags == [[0], [0, 1], [0, 1, 2], [0, 3]]
        assert verify_path_decomposition(G, PathDecomposition(bags)).valid

    def test_edgeless(self):
        assert layout_width([1, 0], np.zeros((0, 2), dtype=int), 2) == 0
        assert layout_bags([1, 0], np.zeros((0, 2), dtype=int), 2) == [[1], [0]]

    def test_axis_orders(self):
        coords = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        x_first, y_first = axis_orders(coords)
        assert x_first.tolist() == [2, 1, 0]
        assert y_first.tolist() == [2, 0, 1]
