"""Tests for the adaptive Gauss-Kronrod integrator."""

import math

import numpy as np
import pytest

from xychain.errors import NonConvergence, NonFiniteIntegrand, ParameterError
from xychain.quadrature import QuadratureSpec, gauss_kronrod, integrate


class TestGaussKronrod:
    def test_exact_for_polynomials(self):
        # K15 is exact through degree 22, G7 through degree 13
        value, err = gauss_kronrod(lambda x: x**12, -1.0, 1.0)
        assert value == pytest.approx(2.0 / 13.0, rel=1e-14)
        assert err < 1e-14

    def test_scalar_return_is_broadcast(self):
        value, _ = gauss_kronrod(lambda x: 3.0, 0.0, 2.0)
        assert value == pytest.approx(6.0)

    def test_non_finite(self):
        with pytest.raises(NonFiniteIntegrand):
            gauss_kronrod(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


class TestIntegrate:
    def test_smooth(self):
        result = integrate(np.sin, 0.0, math.pi)
        assert result.value == pytest.approx(2.0, rel=1e-12)
        assert result.error_estimate <= 1e-10 * 2.0

    def test_kink_needs_subdivision(self):
        result = integrate(lambda x: np.abs(x - 0.3), 0.0, 1.0)
        assert result.value == pytest.approx(0.5 * (0.09 + 0.49), rel=1e-10)
        assert result.subdivisions_used > 1

    def test_forced_split_at_kink(self):
        spec = QuadratureSpec().with_splits([0.3], 0.0, 1.0)
        result = integrate(lambda x: np.abs(x - 0.3), 0.0, 1.0, spec)
        assert result.value == pytest.approx(0.29, rel=1e-14)
        assert result.subdivisions_used == 2

    def test_sharp_peak(self):
        eps = 1e-4
        result = integrate(lambda x: eps / (x * x + eps * eps), -1.0, 1.0)
        assert result.value == pytest.approx(2.0 * math.atan(1.0 / eps), rel=1e-10)

    def test_deterministic(self):
        f = lambda x: np.log1p(np.abs(np.cos(5.0 * x)))  # noqa: E731
        first = integrate(f, 0.0, 3.0)
        second = integrate(f, 0.0, 3.0)
        assert first == second

    def test_linear_in_integrand(self):
        f = lambda x: np.exp(-x) * np.cos(3.0 * x)  # noqa: E731
        g = lambda x: 1.0 / (1.0 + x * x)  # noqa: E731
        combined = integrate(lambda x: 2.5 * f(x) - 0.75 * g(x), 0.0, 2.0).value
        separate = 2.5 * integrate(f, 0.0, 2.0).value - 0.75 * integrate(g, 0.0, 2.0).value
        assert combined == pytest.approx(separate, rel=1e-10)

    def test_forced_splits_do_not_change_value(self):
        f = lambda x: np.log1p(x) * np.sin(x)  # noqa: E731
        plain = integrate(f, 0.0, math.pi).value
        for points in ([0.5], [0.1, 1.0, 2.9], list(np.linspace(0.2, 3.0, 9))):
            spec = QuadratureSpec().with_splits(points, 0.0, math.pi)
            assert integrate(f, 0.0, math.pi, spec).value == pytest.approx(plain, rel=1e-12)

    def test_near_critical_susceptibility_kernel(self):
        lam = 0.999

        def f(k):
            return np.sin(k) ** 2 / (1.0 + lam * lam - 2.0 * lam * np.cos(k)) ** 1.5

        # 10^7-point midpoint rule, summed in chunks
        n, chunk = 10**7, 10**6
        h = math.pi / n
        partial = []
        for start in range(0, n, chunk):
            k = (np.arange(start, start + chunk, dtype=float) + 0.5) * h
            partial.append(math.fsum(f(k)))
        brute = h * math.fsum(partial)

        assert integrate(f, 0.0, math.pi).value == pytest.approx(brute, rel=1e-8)

    def test_non_convergence_carries_partial_result(self):
        spec = QuadratureSpec(rel_tol=1e-14, abs_tol=0.0, max_subdivisions=3)
        with pytest.raises(NonConvergence) as info:
            integrate(lambda x: np.sqrt(np.abs(x - 0.123)), 0.0, 1.0, spec)
        partial = info.value.result
        assert partial.subdivisions_used <= 3
        assert partial.value == pytest.approx(
            (2.0 / 3.0) * (0.123**1.5 + 0.877**1.5), rel=5e-2
        )

    def test_bad_bounds(self):
        with pytest.raises(ParameterError):
            integrate(np.sin, 1.0, 1.0)

    def test_split_outside_interval(self):
        spec = QuadratureSpec(forced_splits=(2.0,))
        with pytest.raises(ParameterError):
            integrate(np.sin, 0.0, 1.0, spec)


class TestQuadratureSpec:
    def test_rejects_bad_tolerance(self):
        with pytest.raises(ParameterError):
            QuadratureSpec(rel_tol=0.0)

    def test_rejects_unsorted_splits(self):
        with pytest.raises(ParameterError):
            QuadratureSpec(forced_splits=(0.5, 0.2))

    def test_with_splits_filters(self):
        spec = QuadratureSpec().with_splits([0.5, -1.0, 0.0, 0.2, 0.5, 3.0], 0.0, 1.0)
        assert spec.forced_splits == (0.2, 0.5)
