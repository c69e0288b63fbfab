"""Numerical laboratory for general Dirichlet series: incomplete Gamma,
frequency sequences, series evaluation, mean-value estimates, universality
scans and randomized Euler products."""

__version__ = "0.1.0"

from .errors import ComputeError, LabError, ParseError  # noqa: E402,F401
