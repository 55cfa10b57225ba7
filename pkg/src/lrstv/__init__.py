"""Hyperspectral mixed-noise denoising with a sparse + low-rank gradient prior."""
from .metrics import MetricsReport, report
from .noise import NoiseSpec, apply_noise, case_catalog
from .prox import TuckerFactors, hooi, svt, t_svt, tnn
from .regularizers import RegWeights
from .solver import SolverConfig, solve

__version__ = "0.1.0"

__all__ = [
    "MetricsReport",
    "NoiseSpec",
    "RegWeights",
    "SolverConfig",
    "TuckerFactors",
    "apply_noise",
    "case_catalog",
    "hooi",
    "report",
    "solve",
    "svt",
    "t_svt",
    "tnn",
]
