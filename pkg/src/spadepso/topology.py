"""Knowledge-transfer graphs between particles.

All graphs are dense ``n x n`` 0/1 integer matrices where ``G[i, j] == 1`` means
particle ``i`` can see (assess and learn from) particle ``j``.
"""
from __future__ import annotations

from math import comb
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

VARIANTS = ("distance", "serial", "combined")

__all__ = [
    "VARIANTS",
    "distance_matrix",
    "degree_bound",
    "knn_graph",
    "serial_graph",
    "expert_probability",
    "fitness_ranks",
    "expert_graph",
    "union_graph",
    "record_learned_edge",
    "format_adjacency",
    "parse_adjacency",
]


def distance_matrix(positions) -> np.ndarray:
    X = np.atleast_2d(np.asarray(positions, dtype=float))
    return cdist(X, X)


def degree_bound(k: int, v_ulk: int, t: int, T: int) -> int:
    """Out-degree of the distance graph at iteration ``t`` of ``T``.

    Grows linearly from ``k`` to ``k + v_ulk``.
    """
    if T <= 0:
        raise ValueError("T must be a positive iteration count")
    # integer arithmetic keeps the floor exact
    return k + (v_ulk * t) // T


def knn_graph(dist, u_lk: int) -> np.ndarray:
    """Each row links to itself plus its ``u_lk - 1`` nearest neighbours.

    Equal distances resolve to the lower particle index.
    """
    dist = np.asarray(dist, dtype=float)
    n = dist.shape[0]
    if u_lk > n:
        raise ValueError(f"out-degree {u_lk} exceeds population size {n}")
    if u_lk < 1:
        raise ValueError("out-degree must be at least 1 (the self-loop)")
    d = dist.copy()
    np.fill_diagonal(d, -1.0)
    order = np.argsort(d, axis=1, kind="stable")[:, :u_lk]
    A = np.zeros((n, n), dtype=np.int8)
    np.put_along_axis(A, order, 1, axis=1)
    return A


def serial_graph(n: int, k: int) -> np.ndarray:
    """Index ring: particle ``i`` sees itself and ``i+1 .. i+k`` (mod n)."""
    A = np.eye(n, dtype=np.int8)
    idx = np.arange(n)
    for step in range(1, min(k, n - 1) + 1):
        A[idx, (idx + step) % n] = 1
    return A


def expert_probability(rank: int, n: int, n_exp: int) -> float:
    """Connection probability toward the expert holding ``rank`` (1 = best)."""
    if not 1 <= rank <= n:
        raise ValueError("rank out of range")
    if not 1 <= n_exp <= n:
        raise ValueError("n_exp out of range")
    return comb(n - rank, n_exp - 1) / comb(n, n_exp)


def fitness_ranks(fitness) -> np.ndarray:
    """1-based ranks with 1 for the lowest cost; ties go to the lower index."""
    fitness = np.asarray(fitness, dtype=float)
    order = np.argsort(fitness, kind="stable")
    ranks = np.empty(fitness.size, dtype=int)
    ranks[order] = np.arange(1, fitness.size + 1)
    return ranks


def expert_graph(ranks, n_exp: int, rng) -> np.ndarray:
    """Random edges from every particle toward the ``n_exp`` best-ranked ones.

    ``rng`` only needs a ``random(size)`` method returning uniforms in [0, 1).
    """
    ranks = np.asarray(ranks, dtype=int)
    n = ranks.size
    B = np.zeros((n, n), dtype=np.int8)
    if n_exp <= 0:
        return B
    n_exp = min(n_exp, n)
    experts = np.flatnonzero(ranks <= n_exp)
    experts = experts[np.argsort(ranks[experts], kind="stable")]
    probs = np.array([expert_probability(int(ranks[j]), n, n_exp) for j in experts])
    draws = np.asarray(rng.random((n, experts.size)), dtype=float)
    B[:, experts] = (draws < probs).astype(np.int8)
    return B


def union_graph(A, B, learned: Optional[np.ndarray] = None) -> np.ndarray:
    mats = [np.asarray(A), np.asarray(B)]
    if learned is not None:
        mats.append(np.asarray(learned))
    shape = mats[0].shape
    for M in mats[1:]:
        if M.shape != shape:
            raise ValueError(f"adjacency shape mismatch: {shape} vs {M.shape}")
    out = mats[0].astype(bool)
    for M in mats[1:]:
        out = out | M.astype(bool)
    return out.astype(np.int8)


def record_learned_edge(voter: int, sbest: int, improved: bool, learned) -> np.ndarray:
    learned = np.array(learned, copy=True)
    if improved:
        learned[voter, sbest] = 1
    return learned


def format_adjacency(G) -> str:
    """Dense 0/1 text grid, one row per line."""
    return "\n".join(" ".join(str(int(v)) for v in row) for row in np.asarray(G))


def parse_adjacency(text: str) -> np.ndarray:
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    return np.array(rows, dtype=np.int8)
