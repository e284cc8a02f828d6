"""Free energy, magnetization and susceptibility per spin.

Thermodynamic-limit values are (1/pi) integrals over k in [0, pi]; finite-N
values are the matching sums over the N/2 discrete modes, each counted twice
for its (k, -k) partner. T = 0 is an explicit branch built from the analytic
beta -> infinity limits, never a large numerical beta.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from xychain.errors import CriticalDivergence, ParameterError
from xychain.model import (
    LAMBDA_C,
    ModelParams,
    gap_momentum,
    min_gap,
    mode_momenta,
    spectrum,
)
from xychain.quadrature import QuadratureSpec, integrate

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

#: Default field step of the finite-difference oracle.
DEFAULT_FD_STEP = 1e-4

# The second difference divides quadrature noise by h^2, so the oracle
# integrates tighter than the library default.
_FD_REL_TOL = 1e-13

# Seed splits at these multiples of the thermal/gap momentum scale.
_WINDOW_MULTIPLES = (1.0, 10.0, 100.0)


@dataclass(frozen=True)
class ThermalPoint:
    """A temperature T >= 0; T = 0 selects the analytic ground-state branches."""

    T: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.T) and self.T >= 0.0):
            raise ParameterError(f"temperature must be finite and >= 0, got {self.T!r}")

    @property
    def is_zero(self) -> bool:
        return self.T == 0.0

    @property
    def beta(self) -> float:
        if self.is_zero:
            raise ParameterError("beta is undefined at T = 0")
        return 1.0 / self.T


@dataclass(frozen=True)
class ThermoOutput:
    """Free energy, magnetization and susceptibility per spin at one (p, T)."""

    F: float
    M_z: float
    chi_z: float


def as_thermal(t: ThermalPoint | float) -> ThermalPoint:
    """Accept a bare temperature wherever a ThermalPoint is expected."""
    return t if isinstance(t, ThermalPoint) else ThermalPoint(float(t))


# -- Integrand pieces ----------------------------------------------------------


def _ln_cosh(x: NDArray[np.float64]) -> NDArray[np.float64]:
    # ln cosh x = ln(e^x + e^-x) - ln 2 without overflow
    return np.logaddexp(x, -x) - LN2


def _sech_sq(x: NDArray[np.float64]) -> NDArray[np.float64]:
    # x >= 0 here, so e^{-2x} never overflows
    e = np.exp(-2.0 * x)
    return 4.0 * e / (1.0 + e) ** 2


def _tanh_over(lam_k: NDArray[np.float64], beta: float | None) -> NDArray[np.float64]:
    """tanh(beta Lambda) / Lambda, with its Lambda -> 0 limit beta (or 1/Lambda at T = 0)."""
    safe = np.where(lam_k > 0.0, lam_k, 1.0)
    if beta is None:
        return np.where(lam_k > 0.0, 1.0 / safe, 0.0)
    return np.where(lam_k > 0.0, np.tanh(beta * lam_k) / safe, beta)


def _m_density(k, gamma: float, lam: float, beta: float | None):
    lam_k = spectrum(k, gamma, lam)
    return (lam - np.cos(k)) * _tanh_over(lam_k, beta)


def _chi_density(k, gamma: float, lam: float, beta: float | None):
    k = np.asarray(k, dtype=float)
    lam_k = spectrum(k, gamma, lam)
    positive = lam_k > 0.0
    safe = np.where(positive, lam_k, 1.0)
    out = np.zeros_like(k)
    if gamma > 0.0:
        sin_k = np.sin(k)
        out += np.where(
            positive, gamma**2 * sin_k**2 * _tanh_over(lam_k, beta) / safe**2, 0.0
        )
    if beta is not None:
        # (lambda - cos k)^2 / Lambda^2 -> 1 on the XX line's zero
        ratio = np.where(positive, (lam - np.cos(k)) ** 2 / safe**2, 1.0 if gamma == 0 else 0.0)
        out += beta * _sech_sq(beta * lam_k) * ratio
    return out


def _spec_for(gamma: float, lam: float, T: float, spec: QuadratureSpec | None) -> QuadratureSpec:
    """Quadrature spec with splits at the gap minimum and around its thermal window."""
    spec = spec or QuadratureSpec()
    p = ModelParams(gamma, abs(lam))
    k0 = gap_momentum(p)
    if lam < 0.0:
        k0 = math.pi - k0
    width = max(T, min_gap(p)) / max(gamma, 0.1)
    points = [k0]
    if width > 0.0:
        for m in _WINDOW_MULTIPLES:
            points.extend((k0 - m * width, k0 + m * width))
    return spec.with_splits(points, 0.0, math.pi)


def _mean_over_k(
    density,
    gamma: float,
    lam: float,
    T: float,
    spec: QuadratureSpec | None,
    split_lam: float | None = None,
) -> float:
    """(1/pi) * integral of ``density`` over [0, pi].

    Splits follow the gap at ``split_lam`` (default ``lam``).
    """
    split_at = lam if split_lam is None else split_lam
    result = integrate(density, 0.0, math.pi, _spec_for(gamma, split_at, T, spec))
    return result.value / math.pi


# -- Raw evaluators (lambda may be negative; no validation) --------------------


def _free_energy(
    gamma: float,
    lam: float,
    T: float,
    spec: QuadratureSpec | None,
    split_lam: float | None = None,
) -> float:
    if T == 0.0:
        return -_mean_over_k(lambda k: spectrum(k, gamma, lam), gamma, lam, T, spec, split_lam)
    beta = 1.0 / T
    mean = _mean_over_k(
        lambda k: _ln_cosh(beta * spectrum(k, gamma, lam)), gamma, lam, T, spec, split_lam
    )
    return -T * LN2 - T * mean


def _magnetization(gamma: float, lam: float, T: float, spec: QuadratureSpec | None) -> float:
    beta = None if T == 0.0 else 1.0 / T
    return _mean_over_k(lambda k: _m_density(k, gamma, lam, beta), gamma, lam, T, spec)


# -- XX closed forms ------------------------------------------------------------


def xx_magnetization(lam: float) -> float:
    """Zero-temperature XX magnetization: 1 - (2/pi) arccos(lambda) below 1, 1 above."""
    if lam < 0.0:
        raise ParameterError(f"lambda must be >= 0, got {lam!r}")
    if lam >= 1.0:
        return 1.0
    return 1.0 - 2.0 / math.pi * math.acos(lam)


def xx_susceptibility(lam: float) -> float:
    """Zero-temperature XX susceptibility (2/pi)(1 - lambda^2)^(-1/2) below 1, 0 above."""
    if lam < 0.0:
        raise ParameterError(f"lambda must be >= 0, got {lam!r}")
    if lam == LAMBDA_C:
        raise CriticalDivergence("XX susceptibility diverges at lambda = 1, T = 0")
    if lam > 1.0:
        return 0.0
    return 2.0 / (math.pi * math.sqrt(1.0 - lam * lam))


# -- Thermodynamic limit --------------------------------------------------------


def free_energy(
    p: ModelParams, t: ThermalPoint | float, spec: QuadratureSpec | None = None
) -> float:
    """Free energy per spin; at T = 0 the ground-state energy -(1/pi) int Lambda_k dk."""
    t = as_thermal(t)
    return _free_energy(p.gamma, p.lam, t.T, spec)


def ground_state_energy(p: ModelParams, spec: QuadratureSpec | None = None) -> float:
    return free_energy(p, ThermalPoint(0.0), spec)


def magnetization(
    p: ModelParams,
    t: ThermalPoint | float,
    spec: QuadratureSpec | None = None,
    method: Literal["auto", "integral"] = "auto",
) -> float:
    """Magnetization per spin along the field, -dF/dlambda.

    On the XX line at T = 0 the closed form is used unless ``method`` is
    ``"integral"``; the direct integral is then split at k = arccos(lambda)
    where the integrand jumps.
    """
    t = as_thermal(t)
    if method not in ("auto", "integral"):
        raise ParameterError(f"unknown magnetization method {method!r}")
    if t.is_zero and p.is_xx and method == "auto":
        return xx_magnetization(p.lam)
    return _magnetization(p.gamma, p.lam, t.T, spec)


def susceptibility(
    p: ModelParams, t: ThermalPoint | float, spec: QuadratureSpec | None = None
) -> float:
    """Susceptibility per spin, -d^2F/dlambda^2.

    At T = 0 and gamma > 0 the thermal term vanishes and only
    (1/pi) int gamma^2 sin^2 k / Lambda_k^3 dk remains. On the XX line the
    thermal term tends to a delta function at the Fermi point, so T = 0 uses
    the closed form instead.

    Raises:
        CriticalDivergence: at T = 0 and lambda = 1.
    """
    t = as_thermal(t)
    if t.is_zero:
        if p.is_xx:
            return xx_susceptibility(p.lam)
        if min_gap(p) == 0.0:
            raise CriticalDivergence(
                f"susceptibility diverges at the critical point (gamma={p.gamma}, lambda=1, T=0)"
            )
        beta = None
    else:
        beta = t.beta
    return _mean_over_k(lambda k: _chi_density(k, p.gamma, p.lam, beta), p.gamma, p.lam, t.T, spec)


def evaluate(
    p: ModelParams, t: ThermalPoint | float, spec: QuadratureSpec | None = None
) -> ThermoOutput:
    """F, M_z and chi_z at one point."""
    t = as_thermal(t)
    return ThermoOutput(
        F=free_energy(p, t, spec),
        M_z=magnetization(p, t, spec),
        chi_z=susceptibility(p, t, spec),
    )


# -- Finite N --------------------------------------------------------------------


def free_energy_finite_n(p: ModelParams, t: ThermalPoint | float, n_sites: int) -> float:
    """-(T/N) sum_k 2 ln[2 cosh(beta Lambda_k)] over the N/2 modes."""
    t = as_thermal(t)
    if t.is_zero:
        raise ParameterError("finite-N free energy needs T > 0")
    k = mode_momenta(n_sites)
    terms = _ln_cosh(t.beta * spectrum(k, p.gamma, p.lam)) + LN2
    return -t.T * 2.0 / n_sites * math.fsum(terms)


def magnetization_finite_n(p: ModelParams, t: ThermalPoint | float, n_sites: int) -> float:
    """Discrete-mode magnetization (2/N) sum_k tanh(beta Lambda_k)(lambda - cos k)/Lambda_k."""
    t = as_thermal(t)
    k = mode_momenta(n_sites)
    beta = None if t.is_zero else t.beta
    return 2.0 / n_sites * math.fsum(_m_density(k, p.gamma, p.lam, beta))


def susceptibility_finite_n(p: ModelParams, t: ThermalPoint | float, n_sites: int) -> float:
    """Discrete-mode susceptibility; at T = 0 a zero mode makes it diverge."""
    t = as_thermal(t)
    k = mode_momenta(n_sites)
    if t.is_zero:
        if np.any(spectrum(k, p.gamma, p.lam) == 0.0):
            raise CriticalDivergence("a discrete mode is gapless at T = 0")
        beta = None
    else:
        beta = t.beta
    return 2.0 / n_sites * math.fsum(_chi_density(k, p.gamma, p.lam, beta))


# -- Finite-difference oracle --------------------------------------------------------


def susceptibility_fd(
    p: ModelParams,
    t: ThermalPoint | float,
    h: float = DEFAULT_FD_STEP,
    spec: QuadratureSpec | None = None,
) -> float:
    """-[F(lambda + h) - 2F(lambda) + F(lambda - h)] / h^2 from the free-energy integral.

    All three integrals use the quadrature splits of the central field.
    """
    t = as_thermal(t)
    if not h > 0.0:
        raise ParameterError(f"field step must be > 0, got {h!r}")
    if t.is_zero and min_gap(p) <= h:
        raise ParameterError(
            f"T = 0 finite differences need a gap above the step (gap={min_gap(p):.3g}, h={h:g})"
        )
    spec = spec or QuadratureSpec()
    tight = QuadratureSpec(
        rel_tol=min(spec.rel_tol, _FD_REL_TOL),
        abs_tol=spec.abs_tol,
        max_subdivisions=spec.max_subdivisions,
    )
    f_plus = _free_energy(p.gamma, p.lam + h, t.T, tight, split_lam=p.lam)
    f_mid = _free_energy(p.gamma, p.lam, t.T, tight)
    f_minus = _free_energy(p.gamma, p.lam - h, t.T, tight, split_lam=p.lam)
    return -(f_plus - 2.0 * f_mid + f_minus) / (h * h)


def magnetization_fd(
    p: ModelParams,
    t: ThermalPoint | float,
    h: float = DEFAULT_FD_STEP,
    spec: QuadratureSpec | None = None,
) -> float:
    """-[F(lambda + h) - F(lambda - h)] / 2h, the M_z = -dF/dlambda oracle."""
    t = as_thermal(t)
    if not h > 0.0:
        raise ParameterError(f"field step must be > 0, got {h!r}")
    f_plus = _free_energy(p.gamma, p.lam + h, t.T, spec, split_lam=p.lam)
    f_minus = _free_energy(p.gamma, p.lam - h, t.T, spec, split_lam=p.lam)
    return -(f_plus - f_minus) / (2.0 * h)
