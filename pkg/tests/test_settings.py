import pytest
import json
from pathlib import Path
from unittest.mock import patch
import os

from fractal_geom.settings import (
    settings_paths, load_and_merge_settings, ensure_solver_config,
    get_solver_config, write_settings, _read_json
)

FIXTURES = Path(__file__).parent / "fixtures"

class TestSettingsPaths:
    def test_settings_paths_default(self):
        """Test settings_paths with the project directory from the environment."""
        paths = settings_paths()
        assert len(paths) == 3
        assert str(paths[0]).startswith(os.environ["FRACTAL_GEOM_PROJECT_DIR"])
        assert paths[0].parts[-2:] == (".fractal_geom", "settings.local.json")
        assert paths[1].parts[-2:] == (".fractal_geom", "settings.json")
        assert str(Path.home()) in str(paths[2])

    def test_settings_paths_custom_dir(self):
        """Test settings_paths with custom project directory."""
        paths = settings_paths("/custom/dir")
        assert paths[0] == Path("/custom/dir/.fractal_geom/settings.local.json")
        assert paths[1] == Path("/custom/dir/.fractal_geom/settings.json")

class TestEnsureSolverConfig:
    def test_ensure_solver_config_empty(self):
        """Test ensure_solver_config with empty settings."""
        result = ensure_solver_config({}, tol=1e-6, threads=4)
        assert result == {"fractalGeom": {"tol": 1e-6, "threads": 4}}

    def test_ensure_solver_config_keeps_unset(self, sample_settings):
        """Test fields that are not given are left alone."""
        result = ensure_solver_config(sample_settings, seed=1, out_dir="out")
        assert result["fractalGeom"]["threads"] == 2
        assert result["fractalGeom"]["seed"] == 1
        assert result["fractalGeom"]["outDir"] == "out"

class TestGetSolverConfig:
    def test_from_settings(self, sample_settings):
        """Test get_solver_config reads the fractalGeom block."""
        config = get_solver_config(sample_settings)
        assert config.threads == 2
        assert config.seed == 7
        assert config.logLevel == "INFO"

    def test_missing_block(self):
        """Test defaults when nothing is configured."""
        assert get_solver_config({}).threads == 1

    def test_env_threads_override(self, sample_settings, monkeypatch):
        """Test FRACTAL_GEOM_THREADS wins over the files."""
        monkeypatch.setenv("FRACTAL_GEOM_THREADS", "6")
        assert get_solver_config(sample_settings).threads == 6

    def test_invalid_settings_fall_back(self):
        """Test an invalid block falls back to defaults."""
        config = get_solver_config({"fractalGeom": {"threads": 0, "seed": 3}})
        assert config.threads == 1
        assert config.seed == 0

class TestLoadAndMergeSettings:
    def test_no_files(self, tmp_path):
        """Test empty settings and the project path when nothing exists."""
        settings, path = load_and_merge_settings(str(tmp_path))
        assert settings == {}
        assert path == tmp_path / ".fractal_geom" / "settings.json"

    @patch('fractal_geom.settings._read_json')
    def test_merge_order(self, mock_read):
        """Test local beats project beats global."""
        mock_read.side_effect = [
            {"fractalGeom": {"threads": 8}},               # global
            {"fractalGeom": {"threads": 4, "seed": 2}},    # project
            {"fractalGeom": {"seed": 3}},                  # local
        ]
        settings, path = load_and_merge_settings("/test/dir")
        assert settings == {"fractalGeom": {"threads": 4, "seed": 3}}
        assert path == Path("/test/dir/.fractal_geom/settings.local.json")

    def test_fixture_file(self, tmp_path):
        """Test a project settings file on disk."""
        target = tmp_path / ".fractal_geom" / "settings.json"
        target.parent.mkdir(parents=True)
        target.write_text((FIXTURES / "sample_settings.json").read_text())
        settings, path = load_and_merge_settings(str(tmp_path))
        assert path == target
        assert get_solver_config(settings).outDir == "runs"

class TestWriteSettings:
    def test_write_settings(self, tmp_path):
        """Test write_settings creates parent directories."""
        path = tmp_path / "nested" / "settings.json"
        write_settings({"fractalGeom": {"seed": 1}}, path)
        assert json.loads(path.read_text()) == {"fractalGeom": {"seed": 1}}
        assert _read_json(path) == {"fractalGeom": {"seed": 1}}

    def test_read_invalid_json(self, tmp_path):
        """Test unreadable JSON is treated as missing."""
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert _read_json(path) is None
