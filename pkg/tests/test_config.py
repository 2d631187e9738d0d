"""Tests for psmap.yaml loading, env overrides and fixture lookup."""

import logging
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import pytest

from pseudoellipse.config import PsmapConfig, load_config, resolve_fixture


@pytest.fixture(autouse=True)
def _isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HOME", str(tmp_path))
    monkeypatch.delenv("PSMAP_SEED", raising=False)
    monkeypatch.delenv("PSMAP_FIXTURES", raising=False)


class TestLoadConfig:
    def test_defaults(self):
        cfg = load_config()
        assert cfg.seed == 0
        assert cfg.jobs == 1
        assert cfg.format == "json"
        assert cfg.sampling.samples == 100
        assert cfg.sampling.tolerance == 1e-9
        assert cfg.enumeration.limit == 1000
        assert cfg.source is None

    def test_explicit_file(self, tmp_path, caplog):
        path = tmp_path / "custom.yaml"
        path.write_text(
            "seed: 42\n"
            "jobs: 0\n"
            "format: pretty\n"
            "sampling:\n"
            "  samples: 250\n"
            "  radius: 0.5\n"
            "  jitter: 3\n"
            "enumeration:\n"
            "  limit: 20\n"
        )
        with caplog.at_level(logging.WARNING, logger="pseudoellipse.config"):
            cfg = load_config(path)
        assert cfg.source == path
        assert cfg.seed == 42
        assert cfg.jobs == 1
        assert cfg.format == "pretty"
        assert cfg.sampling.samples == 250
        assert cfg.sampling.radius == 0.5
        assert cfg.sampling.tolerance == 1e-9
        assert cfg.enumeration.limit == 20
        assert "jitter" in caplog.text

    def test_found_in_working_directory(self, tmp_path):
        (tmp_path / "psmap.yaml").write_text("seed: 5\nfixtures_dir: data\n")
        cfg = load_config()
        assert cfg.seed == 5
        assert cfg.fixtures_dir == Path("data")
        assert cfg.source == Path("psmap.yaml")

    def test_home_file(self, tmp_path):
        (tmp_path / ".psmap.yaml").write_text("jobs: 3\n")
        assert load_config().jobs == 3

    def test_empty_file(self, tmp_path):
        (tmp_path / "psmap.yaml").write_text("")
        cfg = load_config()
        assert cfg.seed == 0
        assert cfg.source == Path("psmap.yaml")

    def test_env_overrides(self, tmp_path, monkeypatch):
        (tmp_path / "psmap.yaml").write_text("seed: 5\n")
        monkeypatch.setenv("PSMAP_SEED", "11")
        monkeypatch.setenv("PSMAP_FIXTURES", str(tmp_path / "fx"))
        cfg = load_config()
        assert cfg.seed == 11
        assert cfg.fixtures_dir == tmp_path / "fx"


class TestResolveFixture:
    def test_existing_path_wins(self, tmp_path):
        f = tmp_path / "map.json"
        f.write_text("{}")
        assert resolve_fixture(f, PsmapConfig()) == f

    def test_relative_to_fixture_dir(self, tmp_path):
        fx = tmp_path / "fx"
        (fx / "words").mkdir(parents=True)
        (fx / "words" / "w.json").write_text("[]")
        cfg = PsmapConfig(fixtures_dir=fx)
        assert resolve_fixture("words/w.json", cfg) == fx / "words" / "w.json"

    def test_by_name(self, tmp_path):
        fx = tmp_path / "fx"
        fx.mkdir()
        (fx / "p246_b.json").write_text("{}")
        cfg = PsmapConfig(fixtures_dir=fx)
        assert resolve_fixture("elsewhere/p246_b.json", cfg) == fx / "p246_b.json"

    def test_missing_is_returned_unchanged(self, tmp_path):
        cfg = PsmapConfig(fixtures_dir=tmp_path / "fx")
        assert resolve_fixture("nowhere.json", cfg) == Path("nowhere.json")
