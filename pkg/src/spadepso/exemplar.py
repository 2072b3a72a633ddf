"""Comprehensive-learning exemplars.

An exemplar is stored as a per-dimension *source* index: dimension ``d`` of
particle ``i`` follows ``pbest[source[d], d]``. Resolving against the current
pbest matrix each iteration means the exemplar tracks its sources' progress
until the next rebuild.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "REFRESH_GAP",
    "ExemplarState",
    "learning_probability",
    "learning_probabilities",
    "build_exemplar",
    "maybe_refresh",
    "resolve_exemplars",
]

REFRESH_GAP = 7


@dataclass
class ExemplarState:
    owner: int
    sources: np.ndarray
    exemplar: np.ndarray
    scope: np.ndarray


def learning_probability(i: int, ps: int) -> float:
    """Learning probability of the ``i``-th (1-based) member of a group of ``ps``."""
    if ps <= 1:
        return 0.05
    if not 1 <= i <= ps:
        raise ValueError("rank out of range")
    return 0.05 + 0.45 * np.expm1(10.0 * (i - 1) / (ps - 1)) / np.expm1(10.0)


def learning_probabilities(ps: int) -> np.ndarray:
    return np.array([learning_probability(i, ps) for i in range(1, ps + 1)])


def build_exemplar(owner: int, pbests, pbest_fitness, eta: float, scope, rng) -> ExemplarState:
    """Pick, per dimension, either the owner's pbest or a tournament winner's.

    Tournaments draw two distinct members of ``scope`` other than the owner;
    the lower pbest cost wins (first draw on ties). If no dimension ends up
    borrowed, one random dimension is forced to borrow.
    """
    pbests = np.asarray(pbests, dtype=float)
    pbest_fitness = np.asarray(pbest_fitness, dtype=float)
    scope = np.asarray(scope, dtype=int)
    others = scope[scope != owner]
    if others.size == 0:
        raise ValueError("scope must contain at least one particle besides the owner")
    D = pbests.shape[1]

    borrow = rng.random(D) < eta
    if not borrow.any():
        borrow[rng.integers(D)] = True

    s = others.size
    if s == 1:
        winners = np.full(D, others[0])
    else:
        a = rng.integers(0, s, size=D)
        b = rng.integers(0, s - 1, size=D)
        b = b + (b >= a)
        pa, pb = others[a], others[b]
        winners = np.where(pbest_fitness[pa] <= pbest_fitness[pb], pa, pb)

    sources = np.where(borrow, winners, owner)
    exemplar = pbests[sources, np.arange(D)]
    return ExemplarState(owner=owner, sources=sources, exemplar=exemplar, scope=scope)


def maybe_refresh(state: ExemplarState, refresh_counter: int, m: int = REFRESH_GAP) -> bool:
    if m < 1:
        raise ValueError("refresh gap must be at least 1")
    return refresh_counter >= m


def resolve_exemplars(sources, pbests) -> np.ndarray:
    """Materialise an ``(n, D)`` exemplar matrix from source indices."""
    sources = np.asarray(sources, dtype=int)
    return np.asarray(pbests)[sources, np.arange(sources.shape[1])[None, :]]
