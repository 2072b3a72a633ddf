"""Particle swarm optimization guided by surprisingly-popular voting."""
from .core import Bounds, Objective, Particle, make_rng
from .optimizers import OPTIMIZERS, RunResult, SpadeConfig, TraceRecord, run
from .problems import make_problem
from .spa import SpaReport, run_spa

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "Objective",
    "Particle",
    "make_rng",
    "OPTIMIZERS",
    "RunResult",
    "SpadeConfig",
    "TraceRecord",
    "run",
    "make_problem",
    "SpaReport",
    "run_spa",
    "__version__",
]
