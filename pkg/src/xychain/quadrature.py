"""Adaptive Gauss-Kronrod quadrature on a finite interval.

Each panel is integrated with the nested 7-point Gauss / 15-point Kronrod
pair; the difference of the two is the panel's error estimate. The panel
with the largest estimate is bisected until the summed estimate falls below
``max(abs_tol, rel_tol * |value|)``. Near-gapless integrands (lambda -> 1,
T -> 0) have sharp features at known momenta; callers pass those as forced
splits so the first panels already straddle them.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np
from numpy.typing import NDArray

from xychain.errors import NonConvergence, NonFiniteIntegrand, ParameterError

logger = logging.getLogger(__name__)

Integrand = Callable[[NDArray[np.float64]], "NDArray[np.float64] | float"]

# Kronrod abscissae on [0, 1] (positive half, descending) with their weights.
# Odd positions 1, 3, 5 and the centre are shared with the 7-point Gauss rule.
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

# Full 15-node layout on [-1, 1]: negative half, centre, positive half.
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_K_WEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_G_WEIGHTS = np.zeros(15)
_G_WEIGHTS[[1, 3, 5]] = _WG[:3]
_G_WEIGHTS[7] = _WG[3]
_G_WEIGHTS[[13, 11, 9]] = _WG[:3]

# Panels narrower than this fraction of the interval are not bisected further.
_MIN_WIDTH_FRACTION = 64.0 * np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances, panel budget and forced split points of one integration."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 2000
    forced_splits: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.rel_tol > 0.0:
            raise ParameterError(f"rel_tol must be > 0, got {self.rel_tol!r}")
        if not self.abs_tol >= 0.0:
            raise ParameterError(f"abs_tol must be >= 0, got {self.abs_tol!r}")
        if self.max_subdivisions < 1:
            raise ParameterError(
                f"max_subdivisions must be >= 1, got {self.max_subdivisions!r}"
            )
        splits = tuple(float(s) for s in self.forced_splits)
        if any(b <= a for a, b in zip(splits, splits[1:])):
            raise ParameterError("forced_splits must be sorted and duplicate-free")
        object.__setattr__(self, "forced_splits", splits)

    def with_splits(self, points: Iterable[float], a: float, b: float) -> QuadratureSpec:
        """Merge ``points`` into the forced splits, keeping only those strictly inside (a, b).

        Points closer than a few ulps of the interval to an endpoint or to
        each other are dropped.
        """
        min_sep = _MIN_WIDTH_FRACTION * (b - a)
        merged: list[float] = []
        for x in sorted({float(x) for x in (*self.forced_splits, *points)}):
            if not math.isfinite(x) or x - a <= min_sep or b - x <= min_sep:
                continue
            if merged and x - merged[-1] <= min_sep:
                continue
            merged.append(x)
        return replace(self, forced_splits=tuple(merged))


@dataclass(frozen=True)
class QuadratureResult:
    """Integral estimate, its summed panel error, and the number of panels used."""

    value: float
    error_estimate: float
    subdivisions_used: int


def gauss_kronrod(f: Integrand, a: float, b: float) -> tuple[float, float]:
    """One G7-K15 panel: (Kronrod value, |Kronrod - Gauss|)."""
    half = 0.5 * (b - a)
    centre = 0.5 * (a + b)
    x = centre + half * _NODES
    fx = np.asarray(f(x), dtype=float)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise NonFiniteIntegrand(f"integrand is not finite at x = {bad!r}")
    kronrod = half * float(np.dot(_K_WEIGHTS, fx))
    gauss = half * float(np.dot(_G_WEIGHTS, fx))
    return kronrod, abs(kronrod - gauss)


def integrate(
    f: Integrand,
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
) -> QuadratureResult:
    """Integrate ``f`` over [a, b] to the tolerances in ``spec``.

    ``f`` is called with a numpy array of nodes and must return values of the
    same shape (a scalar return is broadcast).

    Raises:
        ParameterError: if a >= b or a forced split is not strictly inside (a, b).
        NonFiniteIntegrand: if ``f`` returns inf or nan at a node.
        NonConvergence: if the panel budget runs out above tolerance; the
            partial result is attached to the exception.
    """
    spec = spec or QuadratureSpec()
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ParameterError(f"integration bounds must satisfy a < b, got ({a!r}, {b!r})")
    if any(not a < s < b for s in spec.forced_splits):
        raise ParameterError(f"forced splits must lie strictly inside ({a!r}, {b!r})")

    edges = [a, *spec.forced_splits, b]
    min_width = _MIN_WIDTH_FRACTION * (b - a)

    # Heap entries: (-error, left, right, value, error). The left endpoint
    # breaks ties so the bisection order does not depend on insertion order.
    heap: list[tuple[float, float, float, float, float]] = []
    settled: list[tuple[float, float, float, float]] = []
    for left, right in zip(edges, edges[1:]):
        value, err = gauss_kronrod(f, left, right)
        heapq.heappush(heap, (-err, left, right, value, err))

    total_value = math.fsum(item[3] for item in heap)
    total_err = math.fsum(item[4] for item in heap)

    while heap:
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total_value)):
            # Re-add exactly before accepting; the running sums drift.
            total_value, total_err = _totals(heap, settled)
            if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total_value)):
                break
        if len(heap) + len(settled) >= spec.max_subdivisions:
            break

        _, left, right, value, err = heapq.heappop(heap)
        if right - left <= min_width:
            settled.append((left, right, value, err))
            continue

        mid = 0.5 * (left + right)
        v1, e1 = gauss_kronrod(f, left, mid)
        v2, e2 = gauss_kronrod(f, mid, right)
        heapq.heappush(heap, (-e1, left, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, right, v2, e2))
        total_value += v1 + v2 - value
        total_err += e1 + e2 - err

    total_value, total_err = _totals(heap, settled)
    result = QuadratureResult(
        value=total_value,
        error_estimate=total_err,
        subdivisions_used=len(heap) + len(settled),
    )
    tolerance = max(spec.abs_tol, spec.rel_tol * abs(total_value))
    if total_err > tolerance:
        logger.warning(
            "quadrature on [%g, %g] stopped at %d panels: error %.3e > tolerance %.3e",
            a,
            b,
            result.subdivisions_used,
            total_err,
            tolerance,
        )
        raise NonConvergence(
            f"error estimate {total_err:.3e} above tolerance {tolerance:.3e} "
            f"after {result.subdivisions_used} panels",
            result,
        )
    logger.debug(
        "quadrature on [%g, %g]: %d panels, error %.3e",
        a,
        b,
        result.subdivisions_used,
        total_err,
    )
    return result


def _totals(
    heap: list[tuple[float, float, float, float, float]],
    settled: list[tuple[float, float, float, float]],
) -> tuple[float, float]:
    """Exact sums over all panels in left-endpoint order."""
    panels = sorted([(item[1], item[3], item[4]) for item in heap] + [
        (item[0], item[2], item[3]) for item in settled
    ])
    return math.fsum(p[1] for p in panels), math.fsum(p[2] for p in panels)
