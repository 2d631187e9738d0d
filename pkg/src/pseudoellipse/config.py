"""Configuration management for psmap."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

log = logging.getLogger(__name__)


@dataclass
class SamplingConfig:
    samples: int = 100
    tolerance: float = 1e-9
    mutation_tolerance: float = 1e-4
    radius: float = 1.0
    u_range: float = 1.0


@dataclass
class EnumerationConfig:
    limit: int = 1000


@dataclass
class PsmapConfig:
    seed: int = 0
    fixtures_dir: Path = field(default_factory=lambda: Path("fixtures"))
    jobs: int = 1
    format: str = "json"  # json, pretty
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    enumeration: EnumerationConfig = field(default_factory=EnumerationConfig)
    source: Path | None = None


def _section(cls, data: dict, current):
    known = {k: v for k, v in (data or {}).items() if k in cls.__dataclass_fields__}
    unknown = set(data or {}) - set(known)
    if unknown:
        log.warning("ignoring unknown %s keys: %s", cls.__name__, ", ".join(sorted(unknown)))
    return cls(**{**current.__dict__, **known})


def load_config(config_path: str | Path | None = None) -> PsmapConfig:
    """Load config from YAML file, env vars, or defaults."""
    cfg = PsmapConfig()

    paths_to_try = []
    if config_path:
        paths_to_try.append(Path(config_path))
    paths_to_try.extend([
        Path("psmap.yaml"),
        Path("psmap.yml"),
        Path.home() / ".psmap.yaml",
    ])

    for p in paths_to_try:
        if p.exists():
            with open(p) as f:
                data = yaml.safe_load(f) or {}
            log.debug("loaded config from %s", p)
            cfg.source = p

            if "seed" in data:
                cfg.seed = int(data["seed"])
            if "fixtures_dir" in data:
                cfg.fixtures_dir = Path(data["fixtures_dir"])
            if "jobs" in data:
                cfg.jobs = max(1, int(data["jobs"]))
            if "format" in data:
                cfg.format = str(data["format"])
            if data.get("sampling"):
                cfg.sampling = _section(SamplingConfig, data["sampling"], cfg.sampling)
            if data.get("enumeration"):
                cfg.enumeration = _section(EnumerationConfig, data["enumeration"], cfg.enumeration)
            break

    # Env overrides
    if os.environ.get("PSMAP_FIXTURES"):
        cfg.fixtures_dir = Path(os.environ["PSMAP_FIXTURES"])
    if os.environ.get("PSMAP_SEED"):
        cfg.seed = int(os.environ["PSMAP_SEED"])

    return cfg


def resolve_fixture(path: str | Path, cfg: PsmapConfig) -> Path:
    """Return path as given if it exists, else relative to the fixture directory."""
    p = Path(path)
    if p.exists():
        return p
    candidate = cfg.fixtures_dir / p
    if candidate.exists():
        return candidate
    candidate = cfg.fixtures_dir / p.name
    return candidate if candidate.exists() else p
