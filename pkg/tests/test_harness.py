"""Tests for fractal_geom.harness module."""
import csv
import io
import json
import math
import pytest
from unittest.mock import patch
from pathlib import Path

from fractal_geom.errors import ParameterError
from fractal_geom.harness import (
    fit_scaling_exponent, mst_separator, parallel_computation, resolve_threads, run_experiment,
    write_rows,
)
from fractal_geom.models import ExperimentConfig, GeneratorSpec
from fractal_geom.pointgen import load_pointset


def config(command, generator=None, **kwargs):
    generator = generator or GeneratorSpec(kind="random", n=8, d=2)
    return ExperimentConfig(command=command, generator=generator, **kwargs)


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestFitScalingExponent:
    def test_square_root_growth(self):
        report = fit_scaling_exponent([(n, math.sqrt(n)) for n in (8, 64, 512)])
        assert report.fitted_exponent == pytest.approx(0.5)
        assert report.fit_r2 == pytest.approx(1.0)

    def test_constant_values(self):
        report = fit_scaling_exponent([(10, 3), (20, 3), (40, 3)])
        assert report.fitted_exponent == 0.0

    def test_too_few_pairs(self):
        with pytest.raises(ParameterError):
            fit_scaling_exponent([(10, 1), (20, 2)])

    def test_nonpositive_value(self):
        with pytest.raises(ParameterError):
            fit_scaling_exponent([(10, 1), (20, 0), (40, 2)])

    def test_single_size(self):
        with pytest.raises(ParameterError):
            fit_scaling_exponent([(10, 1), (10, 2), (10, 3)])


class TestThreads:
    def test_configured(self):
        assert resolve_threads(3) == 3

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("FRACTAL_GEOM_THREADS", "5")
        assert resolve_threads(1) == 5

    def test_invalid_env_ignored(self, monkeypatch):
        monkeypatch.setenv("FRACTAL_GEOM_THREADS", "many")
        assert resolve_threads(2) == 2

    def test_uses_settings_env_helper(self):
        with patch("fractal_geom.harness.env_threads", return_value=7) as helper:
            assert resolve_threads(1) == 7
        helper.assert_called_once_with()

    def test_parallel_matches_serial(self):
        inputs = [1.0, 4.0, 9.0, 16.0]
        assert parallel_computation(math.sqrt, inputs, 1) == parallel_computation(math.sqrt, inputs, 2)


class TestMstSeparator:
    def test_counts(self, random_points):
        sep = mst_separator(random_points(40, seed=3), 1e-9)
        assert sep.inside_count + sep.outside_count == 40
        assert sep.balance <= 7 / 8 + 1e-12

    def test_needs_two_points(self, random_points):
        with pytest.raises(ParameterError):
            mst_separator(random_points(1), 1e-9)


class TestRunExperiment:
    def test_generate_writes_files(self, temp_dir):
        out = temp_dir / "runs" / "carpet"
        cfg = config("generate", GeneratorSpec(kind="carpet", k=2), out=str(out), repetitions=2)
        report = run_experiment(cfg, threads=1)
        rows = read_csv(report.csv_path)
        assert [r["seed"] for r in rows] == ["0", "1"]
        assert rows[0]["n"] == "64"
        payload = json.loads(report.json_path.read_text())
        assert payload["command"] == "generate"
        assert "threads" not in payload["config"]
        assert len(report.pointset_paths) == 2
        assert len(load_pointset(report.pointset_paths[0])) == 64

    def test_rows_sorted_by_seed(self):
        report = run_experiment(config("separator", GeneratorSpec(kind="random", n=20, d=2), seed=5,
                                       repetitions=3), threads=1)
        assert [r["seed"] for r in report.rows] == [5, 6, 7]
        assert report.csv_path is None

    def test_output_independent_of_threads(self, temp_dir):
        texts = []
        for threads in (1, 2):
            out = temp_dir / f"sep{threads}"
            cfg = config("separator", GeneratorSpec(kind="random", n=25, d=2), repetitions=3,
                         out=str(out))
            run_experiment(cfg, threads=threads)
            texts.append(Path(f"{out}.csv").read_text())
        assert texts[0] == texts[1]

    def test_tsp_compare(self):
        report = run_experiment(config("tsp-compare", repetitions=2), threads=1)
        for row in report.rows:
            assert row["sep_length"] == pytest.approx(row["hk_length"], abs=1e-9)
            assert row["length_ratio"] == pytest.approx(1.0)

    def test_cover_reports_opt(self):
        cfg = config("cover", GeneratorSpec(kind="random", n=12, d=2, scale=4.0), eps=1.0, ell=3)
        row = run_experiment(cfg, threads=1).rows[0]
        assert row["opt"] >= 1
        assert row["ratio"] == pytest.approx(row["size"] / row["opt"])

    def test_independent_set_agrees(self):
        cfg = config("is", GeneratorSpec(kind="random", n=12, d=2, scale=6.0), k=3)
        assert run_experiment(cfg, threads=1).rows[0]["agree"] is True

    def test_independent_set_needs_plane(self):
        cfg = config("is", GeneratorSpec(kind="cantor", k=2, d=1), k=2)
        with pytest.raises(ParameterError):
            run_experiment(cfg, threads=1)

    def test_estimate_dim_rows(self):
        cfg = config("estimate-dim", GeneratorSpec(kind="carpet", k=3), eps_list=[1, 3, 9])
        rows = run_experiment(cfg, threads=1).rows
        assert [r["method"] for r in rows] == ["fractal-net", "box-counting", "doubling"]
        assert rows[1]["delta_hat"] == pytest.approx(math.log(8, 3), abs=1e-9)

    def test_separator_trace_artifact(self):
        cfg = config("separator", GeneratorSpec(kind="random", n=10, d=2), trace=True)
        artifact = run_experiment(cfg, threads=1).artifacts[0]
        assert artifact["trace"]

    def test_scaling(self, temp_dir):
        cfg = config("scaling", GeneratorSpec(kind="carpet", k=1), sizes=[1, 2, 3],
                     quantity="spanner-edges", out=str(temp_dir / "scale"))
        report = run_experiment(cfg, threads=1)
        assert [r["n"] for r in report.rows] == [8, 64, 512]
        assert math.isfinite(report.scaling.fitted_exponent)
        payload = json.loads(report.json_path.read_text())
        assert payload["scaling"]["fitted_exponent"] == pytest.approx(report.scaling.fitted_exponent)

    def test_scaling_needs_sizes(self):
        with pytest.raises(ParameterError):
            run_experiment(config("scaling", GeneratorSpec(kind="carpet", k=1)), threads=1)


class TestWriteRows:
    def test_none_becomes_empty(self):
        buf = io.StringIO()
        write_rows(buf, ["seed", "opt"], [{"seed": 0, "opt": None}])
        assert buf.getvalue() == "seed,opt\n0,\n"
