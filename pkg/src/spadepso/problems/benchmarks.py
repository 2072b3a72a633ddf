"""Shifted/rotated single-objective benchmark functions (CEC2014 F1-F16 family).

Base functions take an ``(m, D)`` array already transformed into their native
coordinates and return ``m`` values. Each base is written in its textbook form;
the per-function ``offset`` moves the textbook optimum (e.g. Rosenbrock's
``1``) onto the transformed origin, so ``f(o) == bias`` for every function.

Transforms follow the suite's convention ``z = M @ (rate * (x - o)) + offset``.
Official shift/rotation data can be loaded with :func:`load_transform`;
otherwise both are drawn from a seed.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..core import Bounds, Objective, make_rng

__all__ = [
    "BASE_FUNCTIONS",
    "SUITE",
    "TransformedFunction",
    "random_rotation",
    "random_shift",
    "make_transformed",
    "make_benchmark",
    "eval_benchmark",
    "load_transform",
    "save_transform",
]

SEARCH_RANGE = (-100.0, 100.0)


def sphere(z):
    return np.sum(z * z, axis=1)


def elliptic(z):
    D = z.shape[1]
    if D == 1:
        return z[:, 0] ** 2
    w = 10.0 ** (6.0 * np.arange(D) / (D - 1))
    return (z * z) @ w


def bent_cigar(z):
    return z[:, 0] ** 2 + 1e6 * np.sum(z[:, 1:] ** 2, axis=1)


def discus(z):
    return 1e6 * z[:, 0] ** 2 + np.sum(z[:, 1:] ** 2, axis=1)


def rosenbrock(z):
    a, b = z[:, :-1], z[:, 1:]
    return np.sum(100.0 * (a * a - b) ** 2 + (a - 1.0) ** 2, axis=1)


def ackley(z):
    D = z.shape[1]
    s1 = np.sum(z * z, axis=1) / D
    s2 = np.sum(np.cos(2.0 * np.pi * z), axis=1) / D
    return np.e - 20.0 * np.exp(-0.2 * np.sqrt(s1)) - np.exp(s2) + 20.0


_W_K = np.arange(21)
_W_AK = 0.5 ** _W_K
_W_BK = 3.0 ** _W_K


def weierstrass(z):
    D = z.shape[1]
    terms = _W_AK * np.cos(2.0 * np.pi * _W_BK * (z[..., None] + 0.5))
    offset = D * np.sum(_W_AK * np.cos(np.pi * _W_BK))
    return terms.sum(axis=(1, 2)) - offset


def griewank(z):
    D = z.shape[1]
    root = np.sqrt(np.arange(1, D + 1))
    return np.sum(z * z, axis=1) / 4000.0 - np.prod(np.cos(z / root), axis=1) + 1.0


def rastrigin(z):
    return np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=1)


def schwefel(z):
    """Modified Schwefel with the out-of-range folding of the suite; optimum near 420.97."""
    D = z.shape[1]
    out = np.zeros_like(z)
    hi = z > 500.0
    lo = z < -500.0
    mid = ~(hi | lo)
    out[mid] = z[mid] * np.sin(np.sqrt(np.abs(z[mid])))
    zh = z[hi]
    mh = 500.0 - np.fmod(zh, 500.0)
    out[hi] = mh * np.sin(np.sqrt(mh)) - ((zh - 500.0) / 100.0) ** 2 / D
    zl = z[lo]
    ml = -500.0 + np.fmod(np.abs(zl), 500.0)
    out[lo] = ml * np.sin(np.sqrt(500.0 - np.fmod(np.abs(zl), 500.0))) - ((zl + 500.0) / 100.0) ** 2 / D
    return 418.9828872724338 * D - out.sum(axis=1)


_K_POW = 2.0 ** np.arange(1, 33)


def katsuura(z):
    D = z.shape[1]
    t = _K_POW * z[..., None]
    inner = np.sum(np.abs(t - np.floor(t + 0.5)) / _K_POW, axis=2)
    factors = (1.0 + np.arange(1, D + 1) * inner) ** (10.0 / D ** 1.2)
    scale = 10.0 / D ** 2
    return scale * np.prod(factors, axis=1) - scale


def happycat(z):
    D = z.shape[1]
    r2 = np.sum(z * z, axis=1)
    s = np.sum(z, axis=1)
    return np.abs(r2 - D) ** 0.25 + (0.5 * r2 + s) / D + 0.5


def hgbat(z):
    D = z.shape[1]
    r2 = np.sum(z * z, axis=1)
    s = np.sum(z, axis=1)
    return np.abs(r2 * r2 - s * s) ** 0.5 + (0.5 * r2 + s) / D + 0.5


def griewank_rosenbrock(z):
    a, b = z, np.roll(z, -1, axis=1)
    t = 100.0 * (a * a - b) ** 2 + (a - 1.0) ** 2
    return np.sum(t * t / 4000.0 - np.cos(t) + 1.0, axis=1)


def scaffer_f6(z):
    a, b = z, np.roll(z, -1, axis=1)
    r2 = a * a + b * b
    return np.sum(0.5 + (np.sin(np.sqrt(r2)) ** 2 - 0.5) / (1.0 + 0.001 * r2) ** 2, axis=1)


BASE_FUNCTIONS: dict[str, Callable] = {
    "sphere": sphere,
    "elliptic": elliptic,
    "bent_cigar": bent_cigar,
    "discus": discus,
    "rosenbrock": rosenbrock,
    "ackley": ackley,
    "weierstrass": weierstrass,
    "griewank": griewank,
    "rastrigin": rastrigin,
    "schwefel": schwefel,
    "katsuura": katsuura,
    "happycat": happycat,
    "hgbat": hgbat,
    "griewank_rosenbrock": griewank_rosenbrock,
    "scaffer_f6": scaffer_f6,
}

# (base, rate, offset applied after rotation)
_NATIVE = {
    "sphere": (1.0, 0.0),
    "elliptic": (1.0, 0.0),
    "bent_cigar": (1.0, 0.0),
    "discus": (1.0, 0.0),
    "rosenbrock": (2.048 / 100.0, 1.0),
    "ackley": (1.0, 0.0),
    "weierstrass": (0.5 / 100.0, 0.0),
    "griewank": (600.0 / 100.0, 0.0),
    "rastrigin": (5.12 / 100.0, 0.0),
    "schwefel": (1000.0 / 100.0, 420.9687462275036),
    "katsuura": (5.0 / 100.0, 0.0),
    "happycat": (5.0 / 100.0, -1.0),
    "hgbat": (5.0 / 100.0, -1.0),
    "griewank_rosenbrock": (5.0 / 100.0, 1.0),
    "scaffer_f6": (1.0, 0.0),
}

# id -> (base, rotated); bias is 100 * number
SUITE: dict[str, tuple[str, bool]] = {
    "F1": ("elliptic", True),
    "F2": ("bent_cigar", True),
    "F3": ("discus", True),
    "F4": ("rosenbrock", True),
    "F5": ("ackley", True),
    "F6": ("weierstrass", True),
    "F7": ("griewank", True),
    "F8": ("rastrigin", False),
    "F9": ("rastrigin", True),
    "F10": ("schwefel", False),
    "F11": ("schwefel", True),
    "F12": ("katsuura", True),
    "F13": ("happycat", True),
    "F14": ("hgbat", True),
    "F15": ("griewank_rosenbrock", True),
    "F16": ("scaffer_f6", True),
}


@dataclass(frozen=True)
class TransformedFunction:
    base: str
    shift: np.ndarray
    rotation: Optional[np.ndarray] = None
    bias: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.base not in BASE_FUNCTIONS:
            raise KeyError(f"unknown base function {self.base!r}")
        if self.rotation is not None:
            M = np.asarray(self.rotation, dtype=float)
            if M.shape != (self.dimension, self.dimension):
                raise ValueError("rotation must be D x D")

    @property
    def dimension(self) -> int:
        return np.asarray(self.shift).size

    def native(self, X) -> np.ndarray:
        rate, offset = _NATIVE[self.base]
        Y = (np.atleast_2d(X) - self.shift) * rate
        if self.rotation is not None:
            Y = Y @ np.asarray(self.rotation).T
        return Y + offset

    def __call__(self, X) -> np.ndarray:
        return BASE_FUNCTIONS[self.base](self.native(X)) + self.bias


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian, signs fixed)."""
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    return Q * np.sign(np.diag(R))


def random_shift(dim: int, rng: np.random.Generator, radius: float = 80.0) -> np.ndarray:
    return rng.uniform(-radius, radius, size=dim)


def make_transformed(
    base: str,
    dim: int,
    rng: Optional[np.random.Generator] = None,
    rotate: bool = True,
    bias: float = 0.0,
    name: str = "",
) -> TransformedFunction:
    if rng is None:
        shift = np.zeros(dim)
        rotation = None
    else:
        shift = random_shift(dim, rng)
        rotation = random_rotation(dim, rng) if rotate else None
    return TransformedFunction(base, shift, rotation, bias, name or base)


def save_transform(path, shift, rotation) -> None:
    shift = np.asarray(shift, dtype=float)
    rotation = np.eye(shift.size) if rotation is None else np.asarray(rotation, dtype=float)
    with open(path, "w") as fh:
        fh.write(" ".join(repr(float(v)) for v in shift) + "\n")
        for row in rotation:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_transform(path, dim: int):
    """Read ``(shift, rotation)`` from a ``<fn_id>_D<dim>.txt`` file."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape != (dim + 1, dim):
        raise ValueError(f"{path}: expected {dim + 1} rows of {dim} values, got {data.shape}")
    return data[0].copy(), data[1:].copy()


def make_benchmark(
    fn_id: str,
    dim: int,
    seed: Optional[int] = None,
    data_dir: Optional[str] = None,
) -> tuple[Objective, TransformedFunction]:
    """Build suite function ``fn_id`` (``"F1"``..``"F16"`` or ``"sphere"``).

    Transform data is read from ``data_dir/<fn_id>_D<dim>.txt`` when present;
    else drawn from ``seed``; with neither, the function is untransformed.
    """
    key = fn_id.upper() if fn_id.upper() in SUITE else fn_id.lower()
    if key == "sphere":
        base, rotated, bias = "sphere", False, 0.0
    elif key in SUITE:
        base, rotated = SUITE[key]
        bias = 100.0 * int(key[1:])
    else:
        raise KeyError(f"unknown benchmark {fn_id!r}; valid: sphere, {', '.join(SUITE)}")

    path = None if data_dir is None else os.path.join(data_dir, f"{key}_D{dim}.txt")
    if path is not None and os.path.exists(path):
        shift, rotation = load_transform(path, dim)
        tf = TransformedFunction(base, shift, rotation if rotated else None, bias, key)
    else:
        rng = None if seed is None else make_rng(seed, stream=1)
        tf = make_transformed(base, dim, rng, rotate=rotated, bias=bias, name=key)

    bounds = Bounds.uniform(*SEARCH_RANGE, dim)

    def func(X):
        return eval_benchmark(tf, X, bounds)

    return Objective(name=f"{key}-D{dim}", bounds=bounds, func=func, known_optimum=bias), tf


def eval_benchmark(fn: TransformedFunction, X, bounds: Optional[Bounds] = None) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lo, hi = SEARCH_RANGE if bounds is None else (bounds.lower, bounds.upper)
    if np.any(X < lo) or np.any(X > hi):
        raise ValueError(f"{fn.name}: input outside the search range")
    return fn(X)
