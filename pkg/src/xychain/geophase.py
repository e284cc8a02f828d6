"""Geometric phases of the ground and thermal states under a rotation about z.

Rotating every spin by phi about the field axis and taking phi from 0 to pi
returns the Hamiltonian to itself. The phase the state picks up on the way
is a linear function of the magnetization, beta = offset + pi * M_z, so its
field derivative is pi times the susceptibility. The offset is a global-phase
choice: ``GPConvention.PACHOS`` uses pi, ``GPConvention.ROTATION`` uses 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from xychain.model import ModelParams, angle, mode_momenta, spectrum
from xychain.quadrature import QuadratureSpec
from xychain.thermo import (
    ThermalPoint,
    as_thermal,
    magnetization,
    susceptibility,
    susceptibility_finite_n,
)


class GPConvention(str, Enum):
    """Global-phase offset added to pi * M_z."""

    PACHOS = "pachos"
    ROTATION = "rotation"

    @property
    def offset(self) -> float:
        return math.pi if self is GPConvention.PACHOS else 0.0


@dataclass(frozen=True)
class GeometricPhase:
    """Accumulated phase in radians, not reduced modulo 2 pi."""

    value: float
    convention: GPConvention = GPConvention.PACHOS

    def __float__(self) -> float:
        return self.value


def ground_state_gp(
    p: ModelParams,
    spec: QuadratureSpec | None = None,
    convention: GPConvention = GPConvention.PACHOS,
) -> GeometricPhase:
    """offset + pi * M_z(T = 0)."""
    m = magnetization(p, ThermalPoint(0.0), spec)
    return GeometricPhase(convention.offset + math.pi * m, convention)


def thermal_gp(
    p: ModelParams,
    t: ThermalPoint | float,
    spec: QuadratureSpec | None = None,
    convention: GPConvention = GPConvention.PACHOS,
) -> GeometricPhase:
    """offset + pi * M_z(T); the same linear relation as in the ground state."""
    m = magnetization(p, as_thermal(t), spec)
    return GeometricPhase(convention.offset + math.pi * m, convention)


def _pair_weights(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normalized Gibbs weights of |00>, |11> and each of |01>, |10> at x = beta Lambda_k.

    Pair energies are -2 Lambda_k, +2 Lambda_k and 0, 0.
    """
    e = np.exp(-2.0 * x)
    norm = (1.0 + e) ** 2
    return 1.0 / norm, e * e / norm, e / norm


def thermal_gp_mode_sum(
    p: ModelParams,
    t: ThermalPoint | float,
    n_sites: int,
    convention: GPConvention = GPConvention.PACHOS,
) -> GeometricPhase:
    """Gibbs-weighted sum of the per-eigenstate phases of the N/2 mode pairs.

    Over phi in [0, pi] the |00>_k state accumulates the cone phase
    2 pi sin^2(theta_k / 2) together with the -pi that the rotation gives the
    bare |0>_k|0>_-k pair; |11>_k accumulates the opposite; |01>_k and |10>_k
    carry no phase. Summed with weight 2/N this equals pi * M_z at N sites.
    T = 0 puts all weight on |00>_k.
    """
    t = as_thermal(t)
    k = mode_momenta(n_sites)
    cone = 2.0 * math.pi * np.sin(0.5 * angle(k, p.gamma, p.lam)) ** 2
    phase_00 = cone - math.pi
    phase_11 = math.pi - cone

    if t.is_zero:
        pair = phase_00
    else:
        w00, w11, _ = _pair_weights(t.beta * spectrum(k, p.gamma, p.lam))
        pair = w00 * phase_00 + w11 * phase_11

    value = convention.offset + 2.0 / n_sites * math.fsum(pair)
    return GeometricPhase(value, convention)


def gp_lambda_derivative(
    p: ModelParams, t: ThermalPoint | float, spec: QuadratureSpec | None = None
) -> float:
    """d beta / d lambda = pi * chi_z; raises CriticalDivergence at (lambda = 1, T = 0)."""
    return math.pi * susceptibility(p, as_thermal(t), spec)


def finite_size_gp_derivative(p: ModelParams, t: ThermalPoint | float, n_sites: int) -> float:
    """pi * chi_z at N sites, the derivative of :func:`thermal_gp_mode_sum` in lambda."""
    return math.pi * susceptibility_finite_n(p, as_thermal(t), n_sites)
