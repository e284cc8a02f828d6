"""Exception hierarchy shared by the numerical modules and the CLI."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from xychain.quadrature import QuadratureResult


class XYChainError(Exception):
    """Base class for every error raised by xychain."""


class ParameterError(XYChainError, ValueError):
    """An input lies outside the domain an operation accepts."""


class CriticalDivergence(XYChainError):
    """The requested quantity is infinite (zero temperature at the critical field)."""


class NonConvergence(XYChainError):
    """Adaptive quadrature exhausted its panel budget above tolerance.

    The partial estimate is kept on ``result`` so callers can decide whether
    to accept it.
    """

    def __init__(self, message: str, result: QuadratureResult):
        super().__init__(message)
        self.result = result


class NonFiniteIntegrand(XYChainError):
    """The integrand returned inf or nan at an evaluation node."""


class NoInteriorMaximum(XYChainError):
    """The susceptibility maximum of a coarse scan sits on a bracket endpoint."""


class DegenerateFit(XYChainError):
    """A least-squares fit or a ratio of fitted slopes is undefined."""


class InsufficientOverlap(XYChainError):
    """Collapse curves share too little abscissa support to be compared."""
