import logging
import math
import os
import tomllib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .constants import (
    COVER_CAP,
    DEFAULT_COVER_BAND,
    DEFAULT_LATTICE_DENSITY,
    EXPONENT_TOL,
    MIN_GRID_POINTS,
    POU_TOL,
    RATIO_CAP,
    SLOPE_TOL,
    STABILITY_TOL,
)
from .covers.bump import ProfileShape
from .exceptions import ConfigError
from .experiments.context import ExperimentSettings
from .linalg.expansive import certify_expansive
from .linalg.models import ExpansiveMatrix

logger = logging.getLogger(__name__)


def _optional_float(name: str) -> float | None:
    value = os.getenv(name)
    return float(value) if value else None


@dataclass
class Config:
    """Configuration for toolkit runs."""

    matrices: dict[str, list[list[float]]] = field(default_factory=dict)

    n_per_axis: int = field(default_factory=lambda: int(os.getenv("ATL_N_PER_AXIS", "256")))

    # profile knots in units of one gauge growth step
    support_inner: float = 0.0
    plateau_inner: float = 0.5
    plateau_outer: float = 1.5
    support_outer: float = 2.0

    theta: float | None = field(default_factory=lambda: _optional_float("ATL_THETA"))
    margin: float = 0.5

    depth: int = field(default_factory=lambda: int(os.getenv("ATL_DEPTH", "40")))
    cover_band: int = field(default_factory=lambda: int(os.getenv("ATL_COVER_BAND", str(DEFAULT_COVER_BAND))))

    slope_tol: float = SLOPE_TOL
    cover_cap: int = COVER_CAP
    ratio_cap: float = RATIO_CAP
    stability_tol: float = STABILITY_TOL
    exponent_tol: float = EXPONENT_TOL
    pou_tol: float = POU_TOL
    lattice_density: int = DEFAULT_LATTICE_DENSITY

    seed: int = field(default_factory=lambda: int(os.getenv("ATL_SEED", "0")))
    workers: int = field(default_factory=lambda: int(os.getenv("ATL_WORKERS", "1")))
    output_dir: str = field(default_factory=lambda: os.getenv("ATL_OUTPUT_DIR", "reports"))

    @classmethod
    def from_file(cls, path: str | Path) -> "Config":
        """Overlay a TOML file onto the environment defaults.

        Top-level keys name fields; a ``[matrices]`` table maps names to row lists.

        Raises:
            ConfigError: If the file is missing, unreadable or names unknown fields
        """
        source = Path(path)
        try:
            data = tomllib.loads(source.read_text())
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {source}") from e
        except (OSError, tomllib.TOMLDecodeError) as e:
            raise ConfigError(f"cannot read config {source}: {e}") from e

        config = cls()
        known = set(asdict(config))
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys in {source}: {', '.join(unknown)}")
        for key, value in data.items():
            setattr(config, key, value)
        logger.info(f"Loaded config from {source} ({len(config.matrices)} matrices)")
        return config

    def validate(self) -> list[str]:
        """Validate configuration and return list of errors."""
        errors = []

        if self.n_per_axis < MIN_GRID_POINTS or self.n_per_axis & (self.n_per_axis - 1):
            errors.append(f"n_per_axis must be a power of two >= {MIN_GRID_POINTS}, got {self.n_per_axis}")
        knots = (self.support_inner, self.plateau_inner, self.plateau_outer, self.support_outer)
        if not all(lo < hi for lo, hi in zip(knots, knots[1:], strict=False)):
            errors.append(f"profile parameters must be strictly increasing, got {knots}")
        if self.theta is not None and not 0.0 < self.theta < 1.0:
            errors.append(f"theta must lie in (0, 1), got {self.theta}")
        if not 0.0 < self.margin < 1.0:
            errors.append(f"margin must lie in (0, 1), got {self.margin}")
        for name in ("slope_tol", "ratio_cap", "stability_tol", "exponent_tol", "pou_tol"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                errors.append(f"{name} must be positive, got {value}")
        for name in ("depth", "cover_band", "cover_cap", "lattice_density", "workers"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be at least 1, got {getattr(self, name)}")
        for name, rows in self.matrices.items():
            if not rows or any(len(row) != len(rows) for row in rows):
                errors.append(f"matrix {name!r} is not square")

        return errors

    def matrix(self, name: str) -> ExpansiveMatrix:
        if name not in self.matrices:
            raise ConfigError(f"no matrix named {name!r} in the config")
        return certify_expansive(self.matrices[name])

    def settings(self) -> ExperimentSettings:
        return ExperimentSettings(
            n_per_axis=self.n_per_axis,
            shape=ProfileShape(self.support_inner, self.plateau_inner, self.plateau_outer, self.support_outer),
            theta=self.theta,
            band=self.cover_band,
            pou_tol=self.pou_tol,
            ratio_cap=self.ratio_cap,
            stability_tol=self.stability_tol,
            exponent_tol=self.exponent_tol,
            lattice_density=self.lattice_density,
            seed=self.seed,
            workers=self.workers,
        )

    def provenance(self) -> dict[str, Any]:
        """Every field except the output directory, which does not affect results."""
        record = asdict(self)
        record.pop("output_dir")
        return record
