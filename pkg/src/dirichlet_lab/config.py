"""Tunable parameters, grouped per module."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SeriesConfig:
    # aperture t <= delta * x for the approximate functional equation
    delta: float = 0.25
    # smoothed sums stop where exp(-e^lambda / X) drops below this
    weight_cutoff: float = 1e-18
    # Mellin residue corrections applied by eval_smoothed (0 = raw smoothed sum)
    residue_order: int = 0
    # add the trapezoid endpoint term -phi(x)/2 to the AFE
    afe_endpoint: bool = True
    # also integrate the Q1 remainder numerically in the AFE
    afe_remainder: bool = False
    em_max_bernoulli: int = 30
    # Gauss-Legendre order for panel quadrature
    panel_order: int = 16
    # nodes allowed for the numerical remainder integral
    remainder_max_nodes: int = 400_000


@dataclass(frozen=True)
class MomentConfig:
    nodes_per_oscillation: float = 8.0
    panel_order: int = 16
    chunk_panels: int = 32
    # smoothing parameter X = x_factor * T for smoothed-path moments
    x_factor: float = 10.0
    x_min: float = 1e4


@dataclass(frozen=True)
class ScanConfig:
    oversample: int = 4
    chunk: int = 256


@dataclass(frozen=True)
class VdcConfig:
    C: float = 1.0
    samples: int = 1000
