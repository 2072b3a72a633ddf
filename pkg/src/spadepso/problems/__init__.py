"""Objective families and the selector used by the experiment harness."""
from __future__ import annotations

from typing import Optional

from ..core import Objective
from .benchmarks import SUITE, make_benchmark
from .ode import hiv_genome, make_ode
from .ssrp import make_ssrp

__all__ = ["problem_ids", "make_problem", "default_budget", "fixed_dimension"]

ODE_ITERATIONS = 3750
_FIXED_DIM = {"ssrp": 20, "ode": 15, "ode-params": 12}


def problem_ids() -> list[str]:
    return ["sphere", *SUITE, *_FIXED_DIM]


def fixed_dimension(problem: str) -> Optional[int]:
    return _FIXED_DIM.get(problem.lower())


def make_problem(
    problem: str, dim: Optional[int] = None, seed: Optional[int] = None, data_dir: Optional[str] = None
) -> Objective:
    """Build an objective from a selector such as ``"F8"``, ``"ssrp"`` or ``"ode"``.

    Benchmark transforms are drawn from ``seed`` unless ``data_dir`` holds them.
    """
    key = problem.lower()
    if key == "ssrp":
        return make_ssrp(dim or 20)
    if key == "ode":
        return make_ode()
    if key == "ode-params":
        return make_ode(frozen_structure=hiv_genome().serials)
    if key == "sphere" or problem.upper() in SUITE:
        if dim is None:
            raise ValueError(f"benchmark {problem!r} needs a dimension")
        return make_benchmark(problem, dim, seed=seed, data_dir=data_dir)[0]
    raise ValueError(f"unknown problem {problem!r}; valid: {', '.join(problem_ids())}")


def default_budget(problem: str, dim: int, population: int = 40) -> int:
    """Evaluation budget: ``D * 10000``; for ODE inference, the initial
    evaluation plus 3750 iterations."""
    if problem.lower().startswith("ode"):
        return (ODE_ITERATIONS + 1) * population
    return dim * 10000
