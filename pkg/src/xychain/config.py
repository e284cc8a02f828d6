"""Configuration management for xychain."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from xychain.criticality import (
    COLLAPSE_TEMPERATURES,
    DEFAULT_BRACKET,
    DEFAULT_FIELD_TOL,
    DEFAULT_GRID_POINTS,
)
from xychain.errors import ParameterError
from xychain.quadrature import QuadratureSpec
from xychain.thermo import DEFAULT_FD_STEP

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILENAME = "xychain.yaml"


@dataclass
class QuadratureConfig:
    """Quadrature tolerances applied to every integral of a run."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 2000

    def to_spec(self) -> QuadratureSpec:
        return QuadratureSpec(
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            max_subdivisions=self.max_subdivisions,
        )


@dataclass
class AnalysisConfig:
    """Search and fit defaults of the criticality commands."""

    bracket: tuple[float, float] = DEFAULT_BRACKET
    grid_points: int = DEFAULT_GRID_POINTS
    field_tol: float = DEFAULT_FIELD_TOL
    fd_step: float = DEFAULT_FD_STEP
    # ln T endpoints and count of the log-uniform exponent temperatures
    log_t_min: float = -6.0
    log_t_max: float = -3.0
    n_temps: int = 7
    # T endpoints and count of the log-uniform drift-exponent temperatures
    drift_t_min: float = 0.02
    drift_t_max: float = 0.21
    n_drift_temps: int = 7
    # log10 endpoints and count of the kappa2 offsets
    log10_delta_min: float = -6.0
    log10_delta_max: float = -3.0
    n_deltas: int = 20
    collapse_temps: list[float] = field(default_factory=lambda: list(COLLAPSE_TEMPERATURES))
    collapse_x_min: float = -1.0
    collapse_x_max: float = 1.0
    collapse_points: int = 41

    def temperatures(self) -> list[float]:
        return _log_uniform(self.log_t_min, self.log_t_max, self.n_temps, base=math.e)

    def drift_temperatures(self) -> list[float]:
        if not 0.0 < self.drift_t_min < self.drift_t_max:
            raise ParameterError("drift temperatures need 0 < drift_t_min < drift_t_max")
        return _log_uniform(
            math.log(self.drift_t_min), math.log(self.drift_t_max), self.n_drift_temps, base=math.e
        )

    def offsets(self) -> list[float]:
        return _log_uniform(self.log10_delta_min, self.log10_delta_max, self.n_deltas, base=10.0)

    def collapse_grid(self) -> list[float]:
        n = self.collapse_points
        if n < 2:
            raise ParameterError("collapse_points must be >= 2")
        step = (self.collapse_x_max - self.collapse_x_min) / (n - 1)
        return [self.collapse_x_min + i * step for i in range(n)]


@dataclass
class XYChainConfig:
    """Configuration for an xychain run."""

    gamma: float = 1.0
    output_format: str = "csv"  # "csv" or "json"
    workers: int | None = None
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    @classmethod
    def load(cls, path: str | Path | None = None) -> XYChainConfig:
        """Load config from a YAML file. Falls back to defaults if the file is missing."""
        if path is None:
            path = Path.cwd() / DEFAULT_CONFIG_FILENAME

        path = Path(path)
        if not path.exists():
            return cls()

        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as exc:
            logger.warning("Could not load %s, using defaults: %s", path, exc)
            return cls()
        if not isinstance(data, dict):
            logger.warning("Ignoring %s: top level is not a mapping", path)
            return cls()

        quad = QuadratureConfig(**_known(QuadratureConfig, data.get("quadrature") or {}))
        analysis_data = _known(AnalysisConfig, data.get("analysis") or {})
        if "bracket" in analysis_data:
            analysis_data["bracket"] = tuple(float(x) for x in analysis_data["bracket"])
        analysis = AnalysisConfig(**analysis_data)

        return cls(
            gamma=float(data.get("gamma", cls.gamma)),
            output_format=data.get("output_format", cls.output_format),
            workers=data.get("workers", cls.workers),
            quadrature=quad,
            analysis=analysis,
        )

    def save(self, path: str | Path | None = None) -> Path:
        """Save config to a YAML file."""
        if path is None:
            path = Path.cwd() / DEFAULT_CONFIG_FILENAME

        path = Path(path)
        data = asdict(self)
        data["analysis"]["bracket"] = list(self.analysis.bracket)

        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)

        return path


def _known(cls, data: dict) -> dict:
    """Keep only keys that are fields of ``cls``; warn about the rest."""
    names = set(cls.__dataclass_fields__)
    unknown = sorted(set(data) - names)
    if unknown:
        logger.warning("Ignoring unknown %s keys: %s", cls.__name__, ", ".join(unknown))
    return {k: v for k, v in data.items() if k in names}


def _log_uniform(lo: float, hi: float, n: int, base: float) -> list[float]:
    if n < 2:
        raise ParameterError("log-uniform grids need at least two points")
    step = (hi - lo) / (n - 1)
    return [base ** (lo + i * step) for i in range(n)]
