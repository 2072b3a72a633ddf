"""Surprisingly-popular selection of a guide particle.

Every particle votes for the best neighbour it can see. The candidate with the
largest ratio of actual vote share to the share the crowd *expected* it to get
becomes ``sbest``.

The helpers accept ``exact=True`` to carry :class:`fractions.Fraction` values
(object arrays) instead of floats, which makes ties and oracle comparisons
exact on small instances.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "SpaReport",
    "vote",
    "actual_turnout",
    "knowledge_prevalence",
    "popularity_matrix",
    "expected_turnout",
    "surprising_popularity",
    "run_spa",
    "format_record",
    "parse_record",
    "WORKED_GRAPH",
    "WORKED_FITNESS",
    "worked_example_text",
]

THETA_RTOL = 1e-9


@dataclass
class SpaReport:
    votes: np.ndarray
    candidates: np.ndarray
    r_at: np.ndarray
    r_kp: np.ndarray
    alpha: np.ndarray
    r_et: np.ndarray
    theta: np.ndarray  # aligned with ``candidates``
    sbest: int

    def theta_of(self, k: int):
        return self.theta[int(np.flatnonzero(self.candidates == k)[0])]


def vote(graph, fitness) -> np.ndarray:
    """Index of the lowest-cost visible neighbour for every row (lowest index on ties)."""
    G = np.asarray(graph).astype(bool)
    fitness = np.asarray(fitness, dtype=float)
    empty = ~G.any(axis=1)
    if empty.any():
        raise ValueError(f"particles {np.flatnonzero(empty).tolist()} see no neighbour")
    masked = np.where(G, fitness[None, :], np.inf)
    # argmin returns the first occurrence, i.e. the lowest index among equals;
    # an all-inf row (neighbours with inf cost) still lands on a visible one
    votes = np.argmin(masked, axis=1)
    inf_rows = np.isinf(masked[np.arange(G.shape[0]), votes])
    if inf_rows.any():
        votes[inf_rows] = np.argmax(G[inf_rows], axis=1)
    return votes


def actual_turnout(votes, n: int, exact: bool = False) -> np.ndarray:
    counts = np.bincount(np.asarray(votes, dtype=int), minlength=n)
    if exact:
        return np.array([Fraction(int(c), n) for c in counts], dtype=object)
    return counts / n


def knowledge_prevalence(graph, exact: bool = False) -> np.ndarray:
    """Column density: the share of the population that sees each particle."""
    G = np.asarray(graph)
    n = G.shape[0]
    counts = G.astype(np.int64).sum(axis=0)
    if exact:
        return np.array([Fraction(int(c), n) for c in counts], dtype=object)
    return counts / n


def popularity_matrix(graph, votes, r_kp) -> np.ndarray:
    """Each voter's predicted popularity of every answer.

    The chosen answer gets the product of the prevalence of everything the voter
    sees; the remainder is spread evenly across the other ``n - 1`` answers.
    """
    G = np.asarray(graph).astype(bool)
    n = G.shape[0]
    if n < 2:
        raise ValueError("popularity needs at least two particles")
    votes = np.asarray(votes, dtype=int)
    r_kp = np.asarray(r_kp)
    if r_kp.dtype == object:
        own = []
        for i in range(n):
            p = Fraction(1)
            for j in np.flatnonzero(G[i]):
                p *= r_kp[j]
            own.append(p)
        alpha = np.empty((n, n), dtype=object)
        for i in range(n):
            rest = (1 - own[i]) / (n - 1)
            alpha[i, :] = rest
            alpha[i, votes[i]] = own[i]
        return alpha
    # every column a voter sees has at least that voter in it, so r_kp > 0 there
    logs = np.log(np.where(r_kp > 0, r_kp, 1.0))
    own = np.exp(G.astype(float) @ logs)
    alpha = np.repeat(((1.0 - own) / (n - 1))[:, None], n, axis=1)
    alpha[np.arange(n), votes] = own
    return alpha


def expected_turnout(alpha) -> np.ndarray:
    alpha = np.asarray(alpha)
    return alpha.sum(axis=0) / alpha.shape[0]


def surprising_popularity(r_at, r_et, candidates, fitness=None):
    """Return ``(theta, sbest)``; theta is aligned with ``candidates``.

    Ties on theta (exact, or within a relative 1e-9 for floats) go to the
    lower-cost candidate, then to the lower index.
    """
    candidates = np.asarray(candidates, dtype=int)
    r_at = np.asarray(r_at)
    r_et = np.asarray(r_et)
    exact = r_at.dtype == object
    if any(r_et[k] == 0 for k in candidates):
        raise ZeroDivisionError("expected turnout of a candidate is zero")
    if exact:
        theta = np.array([r_at[k] / r_et[k] for k in candidates], dtype=object)
        top = max(theta)
        tied = [k for k, t in zip(candidates, theta) if t == top]
    else:
        theta = r_at[candidates] / r_et[candidates]
        top = theta.max()
        tied = candidates[theta >= top - THETA_RTOL * abs(top)].tolist()
    if fitness is None or len(tied) == 1:
        return theta, int(min(tied))
    fitness = np.asarray(fitness, dtype=float)
    sbest = min(tied, key=lambda k: (fitness[k], k))
    return theta, int(sbest)


def run_spa(graph, fitness, exact: bool = False) -> SpaReport:
    G = np.asarray(graph)
    n = G.shape[0]
    votes = vote(G, fitness)
    candidates = np.unique(votes)
    r_at = actual_turnout(votes, n, exact=exact)
    r_kp = knowledge_prevalence(G, exact=exact)
    alpha = popularity_matrix(G, votes, r_kp)
    r_et = expected_turnout(alpha)
    theta, sbest = surprising_popularity(r_at, r_et, candidates, fitness)
    return SpaReport(votes, candidates, r_at, r_kp, alpha, r_et, theta, sbest)


def _fmt(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def format_record(report: SpaReport, iteration: int) -> str:
    """One-line trace record (alpha is omitted; it is recomputable from the graph)."""
    return (
        f"iter={iteration} sbest={report.sbest} "
        f"votes={','.join(str(int(v)) for v in report.votes)} "
        f"candidates={','.join(str(int(c)) for c in report.candidates)} "
        f"r_at={_fmt(report.r_at[report.candidates])} "
        f"r_et={_fmt(report.r_et[report.candidates])} "
        f"theta={_fmt(report.theta)}"
    )


def parse_record(line: str) -> dict:
    out = {}
    for token in line.split():
        key, _, value = token.partition("=")
        if key in ("iter", "sbest"):
            out[key] = int(value)
        elif key in ("votes", "candidates"):
            out[key] = [int(v) for v in value.split(",")]
        else:
            out[key] = [float(v) for v in value.split(",")]
    return out


# Five-particle instance whose intermediates are small rationals; used by the
# ``spa-demo`` command. Row i lists who particle i can see (self included).
WORKED_GRAPH = np.array(
    [
        [1, 0, 0, 0, 1],
        [1, 1, 1, 0, 0],
        [1, 0, 0, 1, 0],
        [0, 1, 1, 1, 1],
        [0, 1, 0, 0, 1],
    ],
    dtype=np.int8,
)
WORKED_FITNESS = np.array([2.0, 3.0, 1.0, 4.0, 5.0])


def worked_example_text() -> str:
    """Step-by-step printout of the selection on the worked instance (1-based)."""
    rep = run_spa(WORKED_GRAPH, WORKED_FITNESS, exact=True)
    C = rep.candidates
    one = lambda xs: "(" + ", ".join(str(int(v) + 1) for v in xs) + ")"
    num = lambda xs: "(" + ", ".join(f"{float(v):.4f}" for v in xs) + ")"
    lines = ["adjacency (row i = particles visible to i):"]
    lines += ["  " + " ".join(str(int(v)) for v in row) for row in WORKED_GRAPH]
    lines.append(f"fitness            {tuple(float(v) for v in WORKED_FITNESS)}")
    lines.append(f"votes J*           {one(rep.votes)}")
    lines.append(f"candidates C       {one(C)}")
    lines.append(f"actual turnout     {num(rep.r_at[C])}")
    lines.append(f"prevalence r_kp    {num(rep.r_kp)}")
    lines.append("popularity alpha (rows = voters, columns = candidates):")
    for row in rep.alpha:
        lines.append("  " + " ".join(f"{float(v):.4f}" for v in row[C]))
    lines.append(f"expected turnout   {num(rep.r_et[C])}")
    lines.append(f"theta              {num(rep.theta)}")
    lines.append(f"sbest              particle {rep.sbest + 1}")
    return "\n".join(lines) + "\n"
