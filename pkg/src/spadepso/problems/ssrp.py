"""Spread-spectrum radar polyphase code design as a min-max problem.

For a phase vector ``x`` of length ``n`` the objective is the largest absolute
value among ``m = 2n - 1`` trigonometric partial sums (the max over each value
and its negation).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..core import Bounds, Objective

__all__ = ["SsrpInstance", "phi_values", "ssrp_objective", "make_ssrp"]


class SsrpInstance:
    def __init__(self, n: int = 20):
        if n < 1:
            raise ValueError("code length must be positive")
        self.n = n
        self.m = 2 * n - 1
        self._pairs = _pair_tables(n)

    @property
    def bounds(self) -> Bounds:
        return Bounds.uniform(0.0, 2.0 * np.pi, self.n)

    def phi(self, X) -> np.ndarray:
        """``(k, m)`` matrix of the first ``m`` partial sums (negations omitted)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        upper, lower, incidence, const = self._pairs
        S = np.concatenate([np.zeros((X.shape[0], 1)), np.cumsum(X, axis=1)], axis=1)
        angles = S[:, upper] - S[:, lower]
        return np.cos(angles) @ incidence + const

    def __call__(self, X) -> np.ndarray:
        return np.max(np.abs(self.phi(X)), axis=1)


@lru_cache(maxsize=None)
def _pair_tables(n: int):
    """Index tables turning the double sums into one gather + one matmul.

    Each cosine term is ``cos(S[j] - S[a-1])`` with ``S`` the 1-based prefix
    sum, i.e. the phase sum over ``x_a .. x_j``.
    """
    m = 2 * n - 1
    upper, lower, owner = [], [], []
    const = np.zeros(m)
    for i in range(1, n + 1):
        p = 2 * i - 1  # 1-based index of phi_{2i-1}
        for j in range(i, n + 1):
            a = abs(2 * i - j - 1) + 1
            upper.append(j)
            lower.append(a - 1)
            owner.append(p - 1)
    for i in range(1, n):
        p = 2 * i
        const[p - 1] = 0.5
        for j in range(i + 1, n + 1):
            a = abs(2 * i - j) + 1
            upper.append(j)
            lower.append(a - 1)
            owner.append(p - 1)
    incidence = np.zeros((len(owner), m))
    incidence[np.arange(len(owner)), owner] = 1.0
    return np.array(upper), np.array(lower), incidence, const


def phi_values(x) -> np.ndarray:
    """All ``2m`` values for a single phase vector, negations included."""
    x = np.asarray(x, dtype=float)
    p = SsrpInstance(x.size).phi(x)[0]
    return np.concatenate([p, -p])


def ssrp_objective(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(SsrpInstance(x.size)(x)[0])


def make_ssrp(n: int = 20) -> Objective:
    inst = SsrpInstance(n)
    return Objective(name=f"ssrp-n{n}", bounds=inst.bounds, func=inst, known_optimum=None)
