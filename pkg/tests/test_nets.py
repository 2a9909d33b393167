"""Tests for fractal_geom.nets module."""
import math
import pytest
import numpy as np

from fractal_geom.errors import ParameterError
from fractal_geom.models import GeneratorSpec, PointSet
from fractal_geom.nets import (
    DimensionMethod, box_count, build_epsilon_net, default_fractal_scales,
    estimate_box_counting_dimension, estimate_doubling_dimension, estimate_fractal_dimension,
    estimates_to_csv_rows, verify_net,
)
from fractal_geom.pointgen import generate


def line_points(n):
    return PointSet.from_array([[float(i)] for i in range(n)])


class TestBuildEpsilonNet:
    def test_singleton(self):
        P = PointSet.from_array([[3.0, 4.0]])
        assert build_epsilon_net(P, 1.0).indices == [0]

    def test_line_greedy(self):
        net = build_epsilon_net(line_points(10), 3.0)
        assert net.indices == [0, 3, 6, 9]

    def test_large_eps_single_point(self):
        net = build_epsilon_net(generate(GeneratorSpec(kind="carpet", k=1)), 10.0)
        assert len(net.indices) == 1

    def test_empty(self):
        assert build_epsilon_net(PointSet(dim=2), 1.0).indices == []

    def test_nonpositive_eps(self):
        with pytest.raises(ParameterError):
            build_epsilon_net(line_points(3), 0.0)

    @pytest.mark.parametrize("eps", [0.5, 1.0, 2.5, 7.0])
    def test_random_orders_verify(self, carpet2, rng, eps):
        for _ in range(5):
            order = rng.permutation(len(carpet2))
            net = build_epsilon_net(carpet2, eps, order)
            check = verify_net(carpet2, net.indices, eps)
            assert check.is_packing and check.is_covering

    def test_monotone_in_eps(self, carpet2):
        sizes = [len(build_epsilon_net(carpet2, eps).indices) for eps in (1, 2, 4, 8)]
        assert sizes == sorted(sizes, reverse=True)

    def test_scale_invariance(self, carpet2):
        scaled = PointSet.from_array(carpet2.coords * 7.0)
        assert build_epsilon_net(carpet2, 2.0).indices == build_epsilon_net(scaled, 14.0).indices


class TestVerifyNet:
    def test_packing_witness(self):
        check = verify_net(line_points(2), [0, 1], 2.0)
        assert not check.is_packing
        assert check.packing_witness == (0, 1)

    def test_covering_witness(self):
        P = PointSet.from_array([[0.0], [5.0]])
        check = verify_net(P, [0], 2.0)
        assert not check.is_covering
        assert check.covering_witness == 1


class TestFractalDimension:
    def test_line(self):
        est = estimate_fractal_dimension(line_points(1000))
        assert est.method is DimensionMethod.FRACTAL_NET
        assert 0.9 <= est.delta_hat <= 1.1

    def test_grid(self):
        est = estimate_fractal_dimension(generate(GeneratorSpec(kind="grid", m=64, d=2)))
        assert 1.9 <= est.delta_hat <= 2.1
        assert est.reliable

    def test_default_scales(self):
        scales = default_fractal_scales(line_points(100))
        assert scales[0] == (1.0, 2.0)
        assert scales[-1] == (1.0, 16.0)
        assert all(r >= 2 * eps for eps, r in scales)

    def test_too_few_scales(self):
        with pytest.raises(ParameterError):
            estimate_fractal_dimension(line_points(10), [(1, 2), (1, 4)])

    def test_r_below_two_eps(self):
        with pytest.raises(ParameterError):
            estimate_fractal_dimension(line_points(10), [(1, 1.5), (1, 4), (1, 8)])


class TestBoxCounting:
    def test_carpet_triadic_scales(self):
        P = generate(GeneratorSpec(kind="carpet", k=3))
        est = estimate_box_counting_dimension(P, [1, 3, 9])
        assert est.delta_hat == pytest.approx(math.log(8, 3), abs=1e-9)
        assert est.fit_r2 == pytest.approx(1.0)

    def test_cantor(self):
        P = generate(GeneratorSpec(kind="cantor", k=5, d=1))
        est = estimate_box_counting_dimension(P, [1, 3, 9, 27])
        assert est.delta_hat == pytest.approx(math.log(2, 3), abs=1e-9)

    def test_single_point(self):
        est = estimate_box_counting_dimension(PointSet.from_array([[1.0, 2.0]]))
        assert est.delta_hat == 0.0

    def test_box_count(self):
        assert box_count(generate(GeneratorSpec(kind="carpet", k=2)), 3) == 8


class TestDoublingDimension:
    def test_two_points(self):
        est = estimate_doubling_dimension(PointSet.from_array([[0.0, 0.0], [1.0, 0.0]]))
        assert est.delta_hat <= 1.0

    def test_line(self):
        est = estimate_doubling_dimension(line_points(200))
        assert 1.0 <= est.delta_hat <= 3.0

    def test_needs_two_points(self):
        with pytest.raises(ParameterError):
            estimate_doubling_dimension(PointSet.from_array([[0.0]]))

    def test_seeded_sampling_is_deterministic(self, carpet2):
        a = estimate_doubling_dimension(carpet2, centers_budget=8, seed=3)
        b = estimate_doubling_dimension(carpet2, centers_budget=8, seed=3)
        assert a.samples == b.samples


class TestCsvRows:
    def test_rows(self, carpet2):
        rows = estimates_to_csv_rows([estimate_box_counting_dimension(carpet2, [1, 3, 9])])
        assert rows[0]["method"] == "box-counting"
        assert rows[0]["n"] == 64
        assert set(rows[0]) == {"method", "delta_hat", "fit_r2", "n"}
