"""Finite-temperature scaling analysis around the critical field lambda_c = 1.

At T > 0 the susceptibility stays finite but peaks at a pseudocritical field
lambda_m that drifts to lambda_c as T -> 0. The peak height grows like
kappa1 * ln T and the T = 0 susceptibility diverges like kappa2 * ln|lambda - 1|;
the ratio |kappa2 / kappa1| is the correlation-length exponent nu. Curves of
F = 1 - exp[chi(lambda) - chi_max] against (lambda - lambda_m) / T from
different temperatures fall onto one master curve.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import stats

from xychain.errors import (
    CriticalDivergence,
    DegenerateFit,
    InsufficientOverlap,
    NoInteriorMaximum,
    ParameterError,
)
from xychain.model import LAMBDA_C, ModelParams
from xychain.quadrature import QuadratureSpec
from xychain.sweep import parallel_map
from xychain.thermo import ThermalPoint, susceptibility, xx_susceptibility

logger = logging.getLogger(__name__)

DEFAULT_BRACKET = (0.2, 1.8)
DEFAULT_GRID_POINTS = 64
DEFAULT_FIELD_TOL = 1e-7

#: Temperatures of the exponent fits, log-uniform from e^-6 to e^-3.
DEFAULT_TEMPERATURES = tuple(float(t) for t in np.exp(np.linspace(-6.0, -3.0, 7)))
#: Temperatures of the drift-exponent fit, log-uniform from 0.02 to 0.21.
DRIFT_TEMPERATURES = tuple(float(t) for t in np.geomspace(0.02, 0.21, 7))
#: Field offsets |lambda - 1| of the kappa2 fit.
DEFAULT_OFFSETS = tuple(float(d) for d in np.logspace(-6.0, -3.0, 20))
#: Temperatures of the collapse plot.
COLLAPSE_TEMPERATURES = tuple(math.exp(e) for e in (-3.0, -4.0, -5.0, -5.5))
#: Temperature ceilings of the kappa1 validity scan.
DEFAULT_CEILINGS = (0.5, 0.25, 0.1)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0

Side = Literal["below", "above"]


# -- Types ---------------------------------------------------------------------


@dataclass(frozen=True)
class PseudocriticalResult:
    """Field of maximal susceptibility at one temperature."""

    T: float
    lambda_m: float
    chi_max: float

    @property
    def side(self) -> Side:
        """Side of lambda_c the maximum sits on."""
        return "below" if self.lambda_m < LAMBDA_C else "above"


@dataclass(frozen=True)
class LinearFit:
    """Ordinary least-squares line y = slope * x + intercept."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int
    x_range: tuple[float, float]
    slope_stderr: float = 0.0


@dataclass(frozen=True)
class CollapseCurve:
    T: float
    lambda_m: float
    x: tuple[float, ...]
    F: tuple[float, ...]


@dataclass(frozen=True)
class CollapseData:
    """Rescaled curves F(x), one per temperature."""

    gamma: float
    curves: tuple[CollapseCurve, ...]


@dataclass(frozen=True)
class CeilingFit:
    ceiling: float
    fit: LinearFit


@dataclass(frozen=True)
class UniversalityRow:
    gamma: float
    kappa1: LinearFit
    kappa2: LinearFit
    nu: float


@dataclass
class ExponentAnalysis:
    """Every fit of one anisotropy, with the searches behind them."""

    gamma: float
    pseudocritical: list[PseudocriticalResult]
    drift: LinearFit
    kappa1: LinearFit
    kappa2: LinearFit
    nu: float
    kappa2_side: Side = "below"
    drift_points: list[PseudocriticalResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


# -- Helpers -------------------------------------------------------------------


def linear_fit(x: Sequence[float], y: Sequence[float], *, x_range=None) -> LinearFit:
    """Unweighted least-squares line through (x, y).

    ``x_range`` records the abscissa span the fit represents (defaults to the
    span of ``x``).

    Raises:
        DegenerateFit: fewer than two points, constant x, or non-finite data.
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.size < 2:
        raise DegenerateFit(f"need at least two paired points, got {xs.size}")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise DegenerateFit("fit data contain non-finite values")
    if np.ptp(xs) == 0.0:
        raise DegenerateFit("all abscissae are equal")
    res = stats.linregress(xs, ys)
    span = x_range or (float(xs.min()), float(xs.max()))
    return LinearFit(
        slope=float(res.slope),
        intercept=float(res.intercept),
        r_squared=float(min(1.0, max(0.0, res.rvalue**2))),
        n_points=int(xs.size),
        x_range=(float(span[0]), float(span[1])),
        slope_stderr=float(res.stderr) if np.isfinite(res.stderr) else 0.0,
    )


def golden_section_maximize(
    f: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on [a, b] to an interval narrower than ``tol``.

    Returns the best evaluated abscissa and its value.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    best_x = 0.5 * (a + b)
    best_y = f(best_x)
    if h <= tol:
        return best_x, best_y

    n = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI_SQ * h
    d = a + _INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(n):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)

    for x, y in ((c, yc), (d, yd), (0.5 * (a + b), None)):
        if y is None:
            y = f(x)
        if y > best_y:
            best_x, best_y = x, y
    return best_x, best_y


def _check_temperatures(T_list: Sequence[float], minimum: int) -> list[float]:
    temps = [float(t) for t in T_list]
    if len(temps) < minimum:
        raise ParameterError(f"need at least {minimum} temperatures, got {len(temps)}")
    if any(not (math.isfinite(t) and t > 0.0) for t in temps):
        raise ParameterError("temperatures must be finite and > 0")
    return temps


# -- Pseudocritical points -----------------------------------------------------


def find_pseudocritical(
    gamma: float,
    T: float,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    tol: float = DEFAULT_FIELD_TOL,
    *,
    grid_points: int = DEFAULT_GRID_POINTS,
    spec: QuadratureSpec | None = None,
) -> PseudocriticalResult:
    """Locate the susceptibility maximum in ``bracket`` at temperature T.

    A coarse scan picks the best grid point; golden-section search then
    refines inside its two neighbours.

    Raises:
        NoInteriorMaximum: the coarse maximum is a bracket endpoint.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0.0 <= lo < hi):
        raise ParameterError(f"bracket must satisfy 0 <= min < max, got {bracket!r}")
    if not (math.isfinite(T) and T > 0.0):
        raise ParameterError(f"pseudocritical search needs T > 0, got {T!r}")
    if not tol > 0.0:
        raise ParameterError(f"tolerance must be > 0, got {tol!r}")
    if grid_points < 3:
        raise ParameterError(f"coarse grid needs at least 3 points, got {grid_points}")

    t = ThermalPoint(T)
    base = ModelParams(gamma, lo)

    def chi(lam: float) -> float:
        return susceptibility(base.with_lambda(lam), t, spec)

    grid = np.linspace(lo, hi, grid_points)
    values = [chi(float(lam)) for lam in grid]
    i = int(np.argmax(values))
    if i in (0, grid_points - 1):
        raise NoInteriorMaximum(
            f"susceptibility maximum at bracket endpoint lambda={grid[i]:g} (gamma={gamma}, T={T:g})"
        )

    lam_m, chi_max = golden_section_maximize(chi, float(grid[i - 1]), float(grid[i + 1]), tol)
    if values[i] > chi_max:
        lam_m, chi_max = float(grid[i]), values[i]
    logger.debug("gamma=%g T=%g: lambda_m=%.10f chi_max=%.10f", gamma, T, lam_m, chi_max)
    return PseudocriticalResult(T=T, lambda_m=lam_m, chi_max=chi_max)


def pseudocritical_scan(
    gamma: float,
    T_list: Sequence[float],
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    tol: float = DEFAULT_FIELD_TOL,
    *,
    grid_points: int = DEFAULT_GRID_POINTS,
    spec: QuadratureSpec | None = None,
    workers: int | None = None,
) -> list[PseudocriticalResult]:
    """Independent searches at each temperature, in input order."""
    temps = _check_temperatures(T_list, 1)
    return parallel_map(
        lambda T: find_pseudocritical(
            gamma, T, bracket, tol, grid_points=grid_points, spec=spec
        ),
        temps,
        workers,
    )


def pseudocritical_exponent(
    gamma: float,
    T_list: Sequence[float] = DEFAULT_TEMPERATURES,
    *,
    results: Sequence[PseudocriticalResult] | None = None,
    **search,
) -> LinearFit:
    """Slope of ln|lambda_c - lambda_m| against ln T (the drift exponent)."""
    if results is None:
        temps = _check_temperatures(T_list, 4)
        results = pseudocritical_scan(gamma, temps, **search)
    elif len(results) < 4:
        raise ParameterError(f"need at least 4 pseudocritical points, got {len(results)}")
    distances = [abs(LAMBDA_C - r.lambda_m) for r in results]
    if any(d <= 0.0 or not math.isfinite(math.log(d)) for d in distances):
        raise DegenerateFit("lambda_m coincides with lambda_c; drift distance underflows")
    temps = [r.T for r in results]
    return linear_fit(
        np.log(temps), np.log(distances), x_range=(min(temps), max(temps))
    )


# -- Logarithmic divergences ---------------------------------------------------


def fit_kappa1(
    gamma: float,
    T_list: Sequence[float] = DEFAULT_TEMPERATURES,
    *,
    results: Sequence[PseudocriticalResult] | None = None,
    **search,
) -> LinearFit:
    """chi_max(T) against ln T; the slope is kappa1 (negative, reported as-is)."""
    temps = _check_temperatures(T_list if results is None else [r.T for r in results], 4)
    if math.log(max(temps) / min(temps)) < 2.0:
        raise ParameterError("kappa1 temperatures must span at least two e-foldings")
    if results is None:
        results = pseudocritical_scan(gamma, temps, **search)
    return linear_fit(
        np.log(temps), [r.chi_max for r in results], x_range=(min(temps), max(temps))
    )


def zero_temperature_chi(
    gamma: float, delta: float, side: Side = "below", spec: QuadratureSpec | None = None
) -> float:
    """chi_z(lambda_c -+ delta, T = 0)."""
    if delta == 0.0:
        raise CriticalDivergence("offset 0 is the critical point itself")
    lam = LAMBDA_C - delta if side == "below" else LAMBDA_C + delta
    return susceptibility(ModelParams(gamma, lam), ThermalPoint(0.0), spec)


def fit_kappa2(
    gamma: float,
    delta_list: Sequence[float] = DEFAULT_OFFSETS,
    side: Side = "below",
    *,
    spec: QuadratureSpec | None = None,
    workers: int | None = None,
) -> LinearFit:
    """chi_z(T = 0) against ln|lambda - lambda_c|; the slope is kappa2.

    Raises:
        CriticalDivergence: an offset is exactly zero.
    """
    if side not in ("below", "above"):
        raise ParameterError(f"side must be 'below' or 'above', got {side!r}")
    deltas = [float(d) for d in delta_list]
    if len(deltas) < 2:
        raise ParameterError("kappa2 fit needs at least two offsets")
    if any(d == 0.0 for d in deltas):
        raise CriticalDivergence("offset 0 is the critical point itself")
    if any(not (0.0 < d <= 1e-2) for d in deltas):
        raise ParameterError("kappa2 offsets must lie in (0, 1e-2]")
    if min(deltas) < 1e-6:
        logger.warning("offsets below 1e-6 approach the quadrature resolution")
    chis = parallel_map(lambda d: zero_temperature_chi(gamma, d, side, spec), deltas, workers)
    return linear_fit(np.log(deltas), chis, x_range=(min(deltas), max(deltas)))


def critical_exponent_nu(k1: LinearFit, k2: LinearFit) -> float:
    """nu = |kappa2 / kappa1|."""
    if k1.slope == 0.0:
        raise DegenerateFit("kappa1 slope is zero")
    return abs(k2.slope / k1.slope)


def analyze_exponents(
    gamma: float,
    T_list: Sequence[float] = DEFAULT_TEMPERATURES,
    delta_list: Sequence[float] = DEFAULT_OFFSETS,
    side: Side = "below",
    *,
    drift_temperatures: Sequence[float] = DRIFT_TEMPERATURES,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    tol: float = DEFAULT_FIELD_TOL,
    grid_points: int = DEFAULT_GRID_POINTS,
    spec: QuadratureSpec | None = None,
    workers: int | None = None,
) -> ExponentAnalysis:
    """Drift exponent, kappa1, kappa2 and nu.

    kappa1 uses the searches at ``T_list``; the drift exponent is fitted on
    ``drift_temperatures``. The drift slope is not a constant (it keeps rising
    as T falls), so the slope over ``T_list`` is kept in the notes as well.
    """
    temps = _check_temperatures(T_list, 4)
    drift_temps = _check_temperatures(drift_temperatures, 4)
    search = dict(grid_points=grid_points, spec=spec, workers=workers)
    results = pseudocritical_scan(gamma, temps, bracket, tol, **search)
    drift_results = pseudocritical_scan(gamma, drift_temps, bracket, tol, **search)
    kappa1 = fit_kappa1(gamma, results=results)
    kappa2 = fit_kappa2(gamma, delta_list, side, spec=spec, workers=workers)
    analysis = ExponentAnalysis(
        gamma=gamma,
        pseudocritical=list(results),
        drift=pseudocritical_exponent(gamma, results=drift_results),
        kappa1=kappa1,
        kappa2=kappa2,
        nu=critical_exponent_nu(kappa1, kappa2),
        kappa2_side=side,
        drift_points=list(drift_results),
    )
    sides = {r.side for r in (*results, *drift_results)}
    analysis.notes.append(f"lambda_m approaches lambda_c from {'/'.join(sorted(sides))}")
    low = pseudocritical_exponent(gamma, results=results)
    analysis.notes.append(
        f"drift exponent over T in [{min(temps):.3g}, {max(temps):.3g}]: {low.slope:.4f}"
    )
    logger.info(
        "gamma=%g: kappa1=%.5f kappa2=%.5f nu=%.5f drift=%.4f",
        gamma,
        kappa1.slope,
        kappa2.slope,
        analysis.nu,
        analysis.drift.slope,
    )
    return analysis


def scaling_ceiling_scan(
    gamma: float,
    ceilings: Sequence[float] = DEFAULT_CEILINGS,
    t_min: float = math.exp(-6.0),
    n_temps: int = 8,
    **search,
) -> list[CeilingFit]:
    """kappa1 fits over log-uniform temperatures from ``t_min`` up to each ceiling."""
    fits = []
    for ceiling in ceilings:
        if not ceiling > t_min:
            raise ParameterError(f"ceiling {ceiling!r} must exceed t_min {t_min!r}")
        temps = np.exp(np.linspace(math.log(t_min), math.log(ceiling), n_temps))
        fit = fit_kappa1(gamma, [float(t) for t in temps], **search)
        logger.debug("ceiling %g: kappa1=%.5f r2=%.6f", ceiling, fit.slope, fit.r_squared)
        fits.append(CeilingFit(ceiling=float(ceiling), fit=fit))
    return fits


def universality_table(
    gammas: Sequence[float],
    T_list: Sequence[float] = DEFAULT_TEMPERATURES,
    delta_list: Sequence[float] = DEFAULT_OFFSETS,
    **search,
) -> list[UniversalityRow]:
    """kappa1, kappa2 and nu for each anisotropy in (0, 1]."""
    rows = []
    for gamma in gammas:
        if not 0.0 < gamma <= 1.0:
            raise ParameterError(f"universality scan needs gamma in (0, 1], got {gamma!r}")
        k1 = fit_kappa1(gamma, T_list, **search)
        k2 = fit_kappa2(gamma, delta_list, spec=search.get("spec"), workers=search.get("workers"))
        rows.append(UniversalityRow(gamma, k1, k2, critical_exponent_nu(k1, k2)))
    return rows


# -- Data collapse --------------------------------------------------------------


def collapse_curves(
    gamma: float,
    T_list: Sequence[float] = COLLAPSE_TEMPERATURES,
    x_grid: Sequence[float] = tuple(np.linspace(-1.0, 1.0, 41)),
    *,
    results: Sequence[PseudocriticalResult] | None = None,
    spec: QuadratureSpec | None = None,
    workers: int | None = None,
    **search,
) -> CollapseData:
    """F = 1 - exp[chi(lambda) - chi_max] at lambda = lambda_m + x T for each T."""
    xs = [float(x) for x in x_grid]
    if len(xs) < 2:
        raise ParameterError("collapse grid needs at least two points")
    if results is None:
        temps = _check_temperatures(T_list, 1)
        results = pseudocritical_scan(gamma, temps, spec=spec, workers=workers, **search)

    def curve(pc: PseudocriticalResult) -> CollapseCurve:
        t = ThermalPoint(pc.T)
        base = ModelParams(gamma, pc.lambda_m)
        values = []
        for x in xs:
            if x == 0.0:
                values.append(0.0)
                continue
            lam = pc.lambda_m + x * pc.T
            if lam < 0.0:
                raise ParameterError(f"collapse point lambda={lam:g} is negative")
            chi = susceptibility(base.with_lambda(lam), t, spec)
            values.append(max(0.0, -math.expm1(chi - pc.chi_max)))
        return CollapseCurve(pc.T, pc.lambda_m, tuple(xs), tuple(values))

    return CollapseData(gamma=gamma, curves=tuple(parallel_map(curve, results, workers)))


def collapse_quality(data: CollapseData, x_grid: Sequence[float] | None = None) -> float:
    """RMS over the shared grid of the across-curve sample standard deviation of F.

    Curves are linearly interpolated onto ``x_grid`` (default: the first
    curve's abscissae) restricted to the support all curves share.

    Raises:
        InsufficientOverlap: fewer than two curves, or under two shared grid points.
    """
    curves = data.curves
    if len(curves) < 2:
        raise InsufficientOverlap(f"need at least two curves, got {len(curves)}")
    lo = max(min(c.x) for c in curves)
    hi = min(max(c.x) for c in curves)
    grid = np.asarray(x_grid if x_grid is not None else curves[0].x, dtype=float)
    grid = grid[(grid >= lo) & (grid <= hi)]
    if grid.size < 2:
        raise InsufficientOverlap(f"curves share fewer than two grid points on [{lo:g}, {hi:g}]")
    stacked = np.vstack(
        [np.interp(grid, np.asarray(c.x), np.asarray(c.F)) for c in curves]
    )
    spread = np.std(stacked, axis=0, ddof=1)
    return float(np.sqrt(np.mean(spread**2)))


# -- XX class and crossover ------------------------------------------------------


def xx_asymptotic_susceptibility(lam: float) -> float:
    """The quoted XX asymptote sqrt(2) (1 - lambda)^(-1/2) for 0 < lambda < 1."""
    if not 0.0 < lam < 1.0:
        raise ParameterError(f"XX asymptote needs 0 < lambda < 1, got {lam!r}")
    return math.sqrt(2.0) / math.sqrt(1.0 - lam)


def xx_prefactor_ratio(lam: float) -> float:
    """Quoted asymptote over the exact XX susceptibility; tends to pi as lambda -> 1-."""
    return xx_asymptotic_susceptibility(lam) / xx_susceptibility(lam)


def xx_exponent_fit(
    lambdas: Sequence[float] = tuple(1.0 - np.logspace(-2.0, -4.0, 12)),
) -> LinearFit:
    """ln chi_z(gamma = 0, T = 0) against ln(1 - lambda); the slope is -1/2."""
    lams = [float(lam) for lam in lambdas]
    if any(not 0.0 < lam < 1.0 for lam in lams):
        raise ParameterError("XX fit needs 0 < lambda < 1")
    chis = [susceptibility(ModelParams(0.0, lam), ThermalPoint(0.0)) for lam in lams]
    return linear_fit(
        np.log([1.0 - lam for lam in lams]), np.log(chis), x_range=(min(lams), max(lams))
    )


def crossover_temperature(lam: float, nu: float, z: float, amplitude: float = 1.0) -> float:
    """T_c = amplitude * |lambda - lambda_c|^(nu z), edge of the quantum critical fan."""
    if lam == LAMBDA_C:
        raise ParameterError("crossover temperature is undefined at lambda_c")
    return amplitude * abs(lam - LAMBDA_C) ** (nu * z)
