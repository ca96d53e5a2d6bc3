"""Flat key-value experiment configuration.

The format is one ``key = value`` pair per line, ``#`` comments, keys as
documented in the README (n, d, q, grid_m, metric_m, restarts, seed,
kmeans_max_iter, ipm_max_iter, ipm_tol, reference.kind plus the
kind-specific reference.* keys). Angles are degrees at this boundary;
everything internal works in u = sin(theta).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .synthesis import PmmConfig
from .tapers import dolph_chebyshev, load_reference, taylor_nbar


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


_INT_KEYS = {"n", "q", "grid_m", "metric_m", "restarts", "seed", "kmeans_max_iter", "ipm_max_iter"}
_FLOAT_KEYS = {"d", "ipm_tol", "reference.sll_db", "reference.theta0_deg"}
_STR_KEYS = {"reference.kind", "reference.path"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | {"reference.nbar"}

_REFERENCE_KINDS = ("chebyshev", "taylor", "file")


@dataclass
class ExperimentConfig:
    n: int
    q: int
    grid_m: int
    d: float = 0.5
    metric_m: int | None = None
    restarts: int = 50
    seed: int = 0
    kmeans_max_iter: int = 100
    ipm_max_iter: int = 200
    ipm_tol: float = 1e-6
    reference_kind: str = "chebyshev"
    reference_sll_db: float | None = None
    reference_theta0_deg: float = 0.0
    reference_nbar: int = 3
    reference_path: str | None = None

    def pmm_config(self) -> PmmConfig:
        return PmmConfig(
            q_count=self.q,
            grid_m=self.grid_m,
            metric_m=self.metric_m,
            restarts=self.restarts,
            base_seed=self.seed,
            kmeans_max_iter=self.kmeans_max_iter,
            ipm_max_iter=self.ipm_max_iter,
            ipm_tol=self.ipm_tol,
        )

    def reference_summary(self) -> dict:
        return {
            "kind": self.reference_kind,
            "sll_db": self.reference_sll_db,
            "theta0_deg": self.reference_theta0_deg,
            "nbar": self.reference_nbar if self.reference_kind == "taylor" else None,
            "path": self.reference_path,
        }

    def mainlobe_hint(self) -> float | None:
        if self.reference_kind in ("chebyshev", "taylor"):
            return float(np.sin(np.radians(self.reference_theta0_deg)))
        return None


def parse_config(path) -> ExperimentConfig:
    """Parse a flat key-value config file into an ExperimentConfig."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")

    raw: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in text.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value

    for required in ("n", "q", "grid_m", "reference.kind"):
        if required not in raw:
            raise ConfigError(f"{path}: missing required key {required!r}")

    def take_int(key: str, default=None):
        if key not in raw:
            return default
        try:
            return int(raw[key])
        except ValueError:
            raise ConfigError(f"{path}: key {key!r} must be an integer, got {raw[key]!r}")

    def take_float(key: str, default=None):
        if key not in raw:
            return default
        try:
            return float(raw[key])
        except ValueError:
            raise ConfigError(f"{path}: key {key!r} must be a number, got {raw[key]!r}")

    kind = raw["reference.kind"]
    if kind not in _REFERENCE_KINDS:
        raise ConfigError(
            f"{path}: reference.kind must be one of {_REFERENCE_KINDS}, got {kind!r}"
        )
    if kind in ("chebyshev", "taylor") and "reference.sll_db" not in raw:
        raise ConfigError(f"{path}: reference.kind={kind} requires reference.sll_db")
    if kind == "file" and "reference.path" not in raw:
        raise ConfigError(f"{path}: reference.kind=file requires reference.path")

    cfg = ExperimentConfig(
        n=take_int("n"),
        q=take_int("q"),
        grid_m=take_int("grid_m"),
        d=take_float("d", 0.5),
        metric_m=take_int("metric_m"),
        restarts=take_int("restarts", 50),
        seed=take_int("seed", 0),
        kmeans_max_iter=take_int("kmeans_max_iter", 100),
        ipm_max_iter=take_int("ipm_max_iter", 200),
        ipm_tol=take_float("ipm_tol", 1e-6),
        reference_kind=kind,
        reference_sll_db=take_float("reference.sll_db"),
        reference_theta0_deg=take_float("reference.theta0_deg", 0.0),
        reference_nbar=take_int("reference.nbar", 3),
        reference_path=raw.get("reference.path"),
    )

    if cfg.n < 1 or cfg.q < 1 or cfg.q > cfg.n:
        raise ConfigError(f"{path}: need 1 <= q <= n, got n={cfg.n}, q={cfg.q}")
    if cfg.grid_m < 2:
        raise ConfigError(f"{path}: grid_m must be >= 2, got {cfg.grid_m}")
    if cfg.restarts < 1:
        raise ConfigError(f"{path}: restarts must be >= 1, got {cfg.restarts}")
    if not cfg.d > 0:
        raise ConfigError(f"{path}: d must be > 0, got {cfg.d}")
    return cfg


def build_reference(cfg: ExperimentConfig, config_dir) -> np.ndarray:
    """Materialize the reference excitations declared by the config."""
    if cfg.reference_kind == "chebyshev":
        return dolph_chebyshev(cfg.n, cfg.reference_sll_db, cfg.reference_theta0_deg, cfg.d)
    if cfg.reference_kind == "taylor":
        return taylor_nbar(
            cfg.n, cfg.reference_sll_db, cfg.reference_nbar, cfg.reference_theta0_deg, cfg.d
        )
    ref_path = Path(cfg.reference_path)
    if not ref_path.is_absolute():
        ref_path = Path(config_dir) / ref_path
    try:
        exc = load_reference(ref_path)
    except FileNotFoundError as err:
        raise ConfigError(str(err)) from err
    except ValueError as err:
        raise ConfigError(str(err)) from err
    if exc.size != cfg.n:
        raise ConfigError(
            f"{ref_path}: file holds {exc.size} excitations but config declares n={cfg.n}"
        )
    return exc
