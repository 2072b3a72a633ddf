"""Shared swarm types: bounds, particles, objectives and the seeded RNG contract.

Minimization is assumed everywhere. A particle with lower objective value is
"better"; the best particle of a swarm has rank 1.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Bounds",
    "Particle",
    "Objective",
    "Swarm",
    "make_rng",
    "clamp_velocity",
    "reflect_or_clip_position",
    "evaluate_and_update_pbest",
    "evaluate_swarm",
    "init_swarm",
]


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-D vectors of equal length")
        if not np.all(lower < upper):
            raise ValueError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def uniform(cls, low: float, high: float, dim: int) -> "Bounds":
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def vmax(self, fraction: float = 0.1) -> np.ndarray:
        """Per-dimension velocity limit as a fraction of the search range."""
        return fraction * self.span

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest: Optional[np.ndarray] = None
    pbest_fitness: float = np.inf
    fitness: float = np.inf
    refresh_gap_counter: int = 0


@dataclass(frozen=True)
class Objective:
    """A box-bounded minimization problem.

    ``func`` maps an ``(m, D)`` array of positions to ``m`` costs, so a whole
    swarm is evaluated in one call.
    """

    name: str
    bounds: Bounds
    func: Callable[[np.ndarray], np.ndarray]
    known_optimum: Optional[float] = None

    @property
    def dimension(self) -> int:
        return self.bounds.dimension

    def evaluate_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        values = np.asarray(self.func(X), dtype=float).reshape(X.shape[0])
        if np.isnan(values).any():
            bad = int(np.flatnonzero(np.isnan(values))[0])
            raise FloatingPointError(
                f"objective {self.name!r} returned NaN at {X[bad].tolist()}"
            )
        return values

    def evaluate(self, x) -> float:
        return float(self.evaluate_batch(np.asarray(x, dtype=float)[None, :])[0])

    def error(self, value: float) -> float:
        """Distance above the known optimum (the raw value if none is known)."""
        if self.known_optimum is None:
            return float(value)
        return float(value - self.known_optimum)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent PCG64 stream for ``(seed, stream)``; identical inputs replay."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))


def clamp_velocity(v, v_max) -> np.ndarray:
    v_max = np.asarray(v_max, dtype=float)
    if np.any(v_max <= 0):
        raise ValueError("v_max must be positive")
    return np.clip(np.asarray(v, dtype=float), -v_max, v_max)


def reflect_or_clip_position(x, bounds: Bounds) -> np.ndarray:
    """Clip to the box. Only the clip policy is implemented; see README."""
    return np.clip(np.asarray(x, dtype=float), bounds.lower, bounds.upper)


def evaluate_and_update_pbest(p: Particle, obj: Objective) -> Particle:
    fitness = obj.evaluate(p.position)
    position = np.array(p.position, dtype=float)
    if p.pbest is None or fitness < p.pbest_fitness:
        return dataclasses.replace(
            p, fitness=fitness, pbest=position, pbest_fitness=fitness, refresh_gap_counter=0
        )
    return dataclasses.replace(p, fitness=fitness, refresh_gap_counter=p.refresh_gap_counter + 1)


@dataclass
class Swarm:
    """Array-of-structs view of ``n`` particles, used by the optimizers."""

    X: np.ndarray
    V: np.ndarray
    P: np.ndarray = field(default=None)
    pbest_fitness: np.ndarray = field(default=None)
    fitness: np.ndarray = field(default=None)
    gap: np.ndarray = field(default=None)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def particle(self, i: int) -> Particle:
        return Particle(
            position=self.X[i].copy(),
            velocity=self.V[i].copy(),
            pbest=None if self.P is None else self.P[i].copy(),
            pbest_fitness=np.inf if self.pbest_fitness is None else float(self.pbest_fitness[i]),
            fitness=np.inf if self.fitness is None else float(self.fitness[i]),
            refresh_gap_counter=0 if self.gap is None else int(self.gap[i]),
        )

    def best_index(self) -> int:
        return int(np.argmin(self.pbest_fitness))


def init_swarm(n: int, bounds: Bounds, v_max, rng: np.random.Generator) -> Swarm:
    """Uniform positions in the box and uniform velocities in [-v_max, v_max]."""
    D = bounds.dimension
    X = bounds.lower + rng.random((n, D)) * bounds.span
    v_max = np.broadcast_to(np.asarray(v_max, dtype=float), (D,))
    V = (2.0 * rng.random((n, D)) - 1.0) * v_max
    return Swarm(X=X, V=V)


def evaluate_swarm(swarm: Swarm, obj: Objective) -> np.ndarray:
    """Evaluate every particle and update personal bests in place.

    Returns the boolean mask of particles whose pbest improved.
    """
    f = obj.evaluate_batch(swarm.X)
    swarm.fitness = f
    if swarm.P is None:
        swarm.P = swarm.X.copy()
        swarm.pbest_fitness = f.copy()
        swarm.gap = np.zeros(swarm.n, dtype=int)
        return np.ones(swarm.n, dtype=bool)
    improved = f < swarm.pbest_fitness
    swarm.P[improved] = swarm.X[improved]
    swarm.pbest_fitness[improved] = f[improved]
    swarm.gap[improved] = 0
    swarm.gap[~improved] += 1
    return improved
