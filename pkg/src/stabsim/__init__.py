"""Simulation-based stability estimation for ensemble feature selectors."""

__version__ = "0.1.0"

from .core import (
    ExecutionCounter,
    FeatureRanking,
    FeatureSubset,
    RngStream,
    SimulatorParams,
    make_stream,
    sample_without_replacement,
)
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "ExecutionCounter",
    "FeatureRanking",
    "FeatureSubset",
    "RngStream",
    "SimulatorParams",
    "make_stream",
    "sample_without_replacement",
]
