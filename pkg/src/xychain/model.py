"""Chain parameters and the single-mode spectrum of the anisotropic XY chain.

Units are J = 1 and k_B = 1 throughout, so energies and temperatures are
dimensionless. After the Jordan-Wigner and Bogoliubov steps the chain
decouples into modes k with half excitation energy

    Lambda_k = sqrt((lambda - cos k)^2 + gamma^2 sin^2 k)

and every thermodynamic quantity in the package is an integral or a sum of
functions of Lambda_k over k in [0, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike, NDArray

from xychain.errors import ParameterError

#: Critical transverse field of the anisotropic family.
LAMBDA_C = 1.0


@dataclass(frozen=True)
class ModelParams:
    """Anisotropy ``gamma`` and transverse field ``lam`` of one chain."""

    gamma: float
    lam: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and 0.0 <= self.gamma <= 1.0):
            raise ParameterError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        if not (math.isfinite(self.lam) and self.lam >= 0.0):
            raise ParameterError(f"lambda must be finite and >= 0, got {self.lam!r}")

    def with_lambda(self, lam: float) -> ModelParams:
        """Same anisotropy at another field."""
        return replace(self, lam=lam)

    @property
    def is_xx(self) -> bool:
        return self.gamma == 0.0


# -- Kernels ------------------------------------------------------------------
# Unvalidated, vectorized forms. They also accept lambda < 0, which the
# reflection (k, lambda) -> (pi - k, -lambda) needs.


def spectrum(k: ArrayLike, gamma: float, lam: float) -> NDArray[np.float64]:
    """Lambda_k for raw arguments."""
    k = np.asarray(k, dtype=float)
    return np.hypot(lam - np.cos(k), gamma * np.sin(k))


def angle(k: ArrayLike, gamma: float, lam: float) -> NDArray[np.float64]:
    """Bogoliubov angle for raw arguments, in [0, pi] when k is in [0, pi]."""
    k = np.asarray(k, dtype=float)
    return np.arctan2(gamma * np.sin(k), np.cos(k) - lam)


# -- Operations ---------------------------------------------------------------


def dispersion(k: ArrayLike, p: ModelParams) -> NDArray[np.float64] | float:
    """Half excitation energy Lambda_k >= 0 of mode ``k``."""
    out = spectrum(k, p.gamma, p.lam)
    return float(out) if out.ndim == 0 else out


def bogoliubov_angle(k: ArrayLike, p: ModelParams) -> NDArray[np.float64] | float:
    """Mixing angle theta_k of the (k, -k) pair.

    The quadrant-aware form atan2(gamma sin k, cos k - lambda) keeps theta_k
    continuous in k and gives cos theta_k = (cos k - lambda) / Lambda_k, the
    convention under which the Gibbs-weighted Berry phase of the mode pairs
    reduces to pi * M_z.
    """
    out = angle(k, p.gamma, p.lam)
    return float(out) if out.ndim == 0 else out


def _gap_candidates(p: ModelParams) -> list[tuple[float, float]]:
    """(cos k, Lambda_k^2) at the endpoints and at the interior stationary point."""
    g2 = p.gamma * p.gamma

    def lam_sq(c: float) -> float:
        return (p.lam - c) ** 2 + g2 * (1.0 - c * c)

    candidates = [(1.0, lam_sq(1.0)), (-1.0, lam_sq(-1.0))]
    if p.gamma < 1.0:
        c_star = p.lam / (1.0 - g2)
        if abs(c_star) <= 1.0:
            candidates.append((c_star, lam_sq(c_star)))
    return candidates


def min_gap(p: ModelParams) -> float:
    """Exact minimum of Lambda_k over k in [0, pi].

    Lambda_k^2 is a quadratic in c = cos k, so the minimum sits either at
    c = +-1 or at c* = lambda / (1 - gamma^2) when that lies inside [-1, 1].
    """
    _, value = min(_gap_candidates(p), key=lambda item: item[1])
    return math.sqrt(max(value, 0.0))


def gap_momentum(p: ModelParams) -> float:
    """The k in [0, pi] where Lambda_k reaches :func:`min_gap`."""
    c, _ = min(_gap_candidates(p), key=lambda item: item[1])
    return math.acos(min(1.0, max(-1.0, c)))


def mode_momenta(n_sites: int) -> NDArray[np.float64]:
    """The N/2 discrete modes k_i = 2 pi (i - 0.5) / N, i = 1..N/2."""
    if n_sites < 4 or n_sites % 2:
        raise ParameterError(f"number of sites must be even and >= 4, got {n_sites}")
    i = np.arange(1, n_sites // 2 + 1, dtype=float)
    return 2.0 * np.pi * (i - 0.5) / n_sites
