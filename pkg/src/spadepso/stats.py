"""Swarm diversity and the nonparametric comparisons used to rank optimizers."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import norm, rankdata

__all__ = [
    "SIGNIFICANCE",
    "EXACT_LIMIT",
    "ComparisonVerdict",
    "diversity",
    "error_stats",
    "wilcoxon_signed_rank",
    "wilcoxon_exact_p",
    "wilcoxon_normal_p",
    "friedman_ranks",
    "verdict_table_text",
    "verdict_table_csv",
]

SIGNIFICANCE = 0.1
EXACT_LIMIT = 12


def diversity(positions) -> float:
    """Mean Euclidean distance of the group's members from its centroid."""
    X = np.atleast_2d(np.asarray(positions, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("diversity of an empty group")
    dev = X - X.mean(axis=0)
    return float(np.mean(np.sqrt(np.sum(dev * dev, axis=1))))


def error_stats(errors) -> tuple[float, float, float]:
    """(best, mean, sample std); the std of a single run is 0."""
    e = np.asarray(errors, dtype=float)
    if e.size == 0:
        raise ValueError("no runs")
    std = float(np.std(e, ddof=1)) if e.size > 1 else 0.0
    return float(e.min()), float(e.mean()), std


@dataclass(frozen=True)
class ComparisonVerdict:
    wins: int
    losses: int
    ties: int
    p_value: float
    statistic: float = 0.0
    method: str = "exact"

    @property
    def significant(self) -> bool:
        return self.p_value < SIGNIFICANCE

    def cells(self) -> tuple[str, str, str]:
        """``+``, ``-`` and ``≈`` cells with the p-value in brackets on one of them.

        The p-value sits on the dominant side when significant, otherwise on ``≈``.
        """
        p = f" ({self.p_value:.2f})"
        plus, minus, tie = str(self.wins), str(self.losses), str(self.ties)
        if self.significant and self.wins > self.losses:
            plus += p
        elif self.significant and self.losses > self.wins:
            minus += p
        else:
            tie += p
        return plus, minus, tie


def _signed_ranks(a, b):
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d[d != 0]
    ranks = rankdata(np.abs(d))
    return d, ranks


def wilcoxon_exact_p(ranks: np.ndarray, w_plus: float) -> float:
    """Two-sided p from the exact null distribution of the positive rank sum.

    All ``2**n`` sign assignments are counted by dynamic programming.
    """
    # doubled ranks are integers even with average ranks for ties
    r2 = np.rint(2 * ranks).astype(int)
    total = int(r2.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in r2:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    sums = np.arange(total + 1)
    centre = total / 2.0
    obs = abs(2 * w_plus - centre)
    extreme = np.abs(sums - centre) >= obs - 1e-9
    return float(min(1.0, counts[extreme].sum() / counts.sum()))


def wilcoxon_normal_p(ranks: np.ndarray, w_plus: float) -> float:
    """Two-sided normal approximation with the tie-corrected variance."""
    n = ranks.size
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts**3 - tie_counts) / 48.0
    if var <= 0:
        return 1.0
    z = (w_plus - mean) / np.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(abs(z))))


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float], method: str = "auto") -> ComparisonVerdict:
    """Paired comparison of per-function mean errors of two algorithms.

    ``wins`` counts functions where ``a`` has the lower error. Zero differences
    are dropped before ranking. ``method`` is ``"exact"``, ``"normal"`` or
    ``"auto"`` (exact up to 12 nonzero pairs).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    wins = int(np.sum(a < b))
    losses = int(np.sum(a > b))
    ties = int(np.sum(a == b))
    d, ranks = _signed_ranks(a, b)
    if d.size == 0:
        return ComparisonVerdict(wins, losses, ties, 1.0, 0.0, "none")
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    if method == "auto":
        method = "exact" if d.size <= EXACT_LIMIT else "normal"
    if method == "exact":
        p = wilcoxon_exact_p(ranks, w_plus)
    elif method == "normal":
        p = wilcoxon_normal_p(ranks, w_plus)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ComparisonVerdict(wins, losses, ties, p, min(w_plus, w_minus), method)


def friedman_ranks(results) -> tuple[np.ndarray, np.ndarray]:
    """Average rank of each configuration (rows) across functions (columns).

    Lower error ranks first; ties share the average rank. Returns the averages
    and the final 1-based ordering (ties broken by row order).
    """
    R = np.asarray(results, dtype=float)
    if R.ndim != 2 or R.shape[0] < 2:
        raise ValueError("need a configurations x functions matrix with >= 2 rows")
    per_function = np.apply_along_axis(rankdata, 0, R)
    avg = per_function.mean(axis=1)
    final = rankdata(avg, method="ordinal").astype(int)
    return avg, final


def verdict_table_text(rows: Sequence[tuple[str, ComparisonVerdict]], title: str = "") -> str:
    """Aligned plain-text table: three lines (+, -, ≈) per opponent."""
    label_w = max([len(label) for label, _ in rows] + [8])
    lines = []
    if title:
        lines.append(title)
    for label, verdict in rows:
        plus, minus, tie = verdict.cells()
        for sign, cell, name in (("+", plus, label), ("-", minus, ""), ("≈", tie, "")):
            lines.append(f"{name:<{label_w}}  {sign}  {cell}")
    return "\n".join(lines) + "\n"


def verdict_table_csv(rows: Sequence[tuple[str, ComparisonVerdict]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["opponent", "wins", "losses", "ties", "p_value", "statistic", "method"])
    for label, v in rows:
        w.writerow([label, v.wins, v.losses, v.ties, repr(v.p_value), repr(v.statistic), v.method])
    return buf.getvalue()
