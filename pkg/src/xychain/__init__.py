"""xychain — exact thermodynamics, geometric phases and criticality of the 1D XY chain."""

__version__ = "0.1.0"
