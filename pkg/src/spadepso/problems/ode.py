"""Structure-and-parameter inference for three-variable ODE models.

Each equation has the form::

    dx_i/dt = s1*k1*x_i + s2*k2*x_a + s3*k3*x_b*x_c + s4*k4

with signs ``s`` in {+1, -1}, ``x_a`` one of the two other variables and
``(x_b, x_c)`` an unordered pair of any variables. That gives 16 * 2 * 6 = 192
structures per equation, numbered 1..192 with the pair varying fastest, then
``x_a``, then the sign pattern read as a 4-bit counter (``-`` = 1, ``s4`` least
significant).

A search point has 15 coordinates: ``k1..k4`` for each of the three equations
(12 values, equation-major) followed by the three structure serials.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..core import Bounds, Objective

__all__ = [
    "VARIABLES",
    "N_STRUCTURES",
    "PAIRS",
    "Structure",
    "OdeGenome",
    "Trajectory",
    "decode_structure",
    "encode_structure",
    "genome_rhs",
    "integrate",
    "encode_search_point",
    "genome_to_point",
    "ode_objective",
    "hiv_genome",
    "hiv_target",
    "OdeProtocol",
    "make_ode",
    "write_trajectory_csv",
    "DIVERGENCE_PENALTY",
]

VARIABLES = ("T", "I", "V")
PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
N_STRUCTURES = 16 * 2 * len(PAIRS)
DIVERGENCE_PENALTY = 1e12
K_BOUNDS = (0.0, 1000.0)

HIV_INIT = (100.0, 150.0, 50000.0)


@dataclass(frozen=True)
class Structure:
    signs: tuple[int, int, int, int]
    xa: int
    xb: int
    xc: int

    def label(self) -> str:
        s = ",".join("+" if v > 0 else "-" for v in self.signs)
        return f"({s},{VARIABLES[self.xa]},{VARIABLES[self.xb]},{VARIABLES[self.xc]})"


def _others(i: int) -> tuple[int, int]:
    return tuple(v for v in range(3) if v != i)


def decode_structure(serial: int, i: int) -> Structure:
    """Structure of equation ``i`` (0 = T, 1 = I, 2 = V) for a 1-based serial."""
    serial = int(serial)
    if not 1 <= serial <= N_STRUCTURES:
        raise ValueError(f"structure serial {serial} outside 1..{N_STRUCTURES}")
    if i not in (0, 1, 2):
        raise ValueError("equation index must be 0, 1 or 2")
    idx = serial - 1
    xb, xc = PAIRS[idx % 6]
    xa = _others(i)[(idx // 6) % 2]
    bits = idx // 12
    signs = tuple(-1 if (bits >> shift) & 1 else 1 for shift in (3, 2, 1, 0))
    return Structure(signs, xa, xb, xc)


def encode_structure(structure: Structure, i: int) -> int:
    pair = tuple(sorted((structure.xb, structure.xc)))
    bits = 0
    for s in structure.signs:
        bits = (bits << 1) | (1 if s < 0 else 0)
    return bits * 12 + _others(i).index(structure.xa) * 6 + PAIRS.index(pair) + 1


@dataclass(frozen=True)
class OdeGenome:
    k: np.ndarray  # (3, 4) nonnegative magnitudes
    serials: tuple[int, int, int]

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float).reshape(3, 4)
        object.__setattr__(self, "k", k)
        for s in self.serials:
            if not 1 <= int(s) <= N_STRUCTURES:
                raise ValueError(f"structure serial {s} outside 1..{N_STRUCTURES}")

    def structures(self) -> list[Structure]:
        return [decode_structure(s, i) for i, s in enumerate(self.serials)]

    def describe(self) -> str:
        lines = []
        for i, st in enumerate(self.structures()):
            k = self.k[i]
            terms = [
                f"{'+' if st.signs[0] > 0 else '-'} {k[0]:g}*{VARIABLES[i]}",
                f"{'+' if st.signs[1] > 0 else '-'} {k[1]:g}*{VARIABLES[st.xa]}",
                f"{'+' if st.signs[2] > 0 else '-'} {k[2]:g}*{VARIABLES[st.xb]}*{VARIABLES[st.xc]}",
                f"{'+' if st.signs[3] > 0 else '-'} {k[3]:g}",
            ]
            lines.append(f"d{VARIABLES[i]}/dt = " + " ".join(terms))
        return "\n".join(lines)


class _BatchSystem:
    """Right-hand side for ``m`` genomes evaluated together on ``(m, 3)`` states."""

    def __init__(self, k, serials):
        k = np.asarray(k, dtype=float).reshape(-1, 3, 4)
        serials = np.asarray(serials, dtype=int).reshape(-1, 3)
        m = k.shape[0]
        signs = np.empty((m, 3, 4))
        xa = np.empty((m, 3), dtype=int)
        xb = np.empty((m, 3), dtype=int)
        xc = np.empty((m, 3), dtype=int)
        table = _structure_table()
        for i in range(3):
            rows = table[i][serials[:, i] - 1]
            signs[:, i, :] = rows[:, :4]
            xa[:, i], xb[:, i], xc[:, i] = rows[:, 4], rows[:, 5], rows[:, 6]
        self.coef = signs * k
        self.rows = np.arange(m)[:, None]
        self.xa, self.xb, self.xc = xa, xb, xc

    def __call__(self, X):
        c = self.coef
        r = self.rows
        return (
            c[:, :, 0] * X
            + c[:, :, 1] * X[r, self.xa]
            + c[:, :, 2] * X[r, self.xb] * X[r, self.xc]
            + c[:, :, 3]
        )


_TABLE = None


def _structure_table():
    global _TABLE
    if _TABLE is None:
        _TABLE = []
        for i in range(3):
            rows = []
            for s in range(1, N_STRUCTURES + 1):
                st = decode_structure(s, i)
                rows.append((*st.signs, st.xa, st.xb, st.xc))
            _TABLE.append(np.array(rows))
    return _TABLE


def genome_rhs(genome: OdeGenome) -> Callable[[np.ndarray], np.ndarray]:
    system = _BatchSystem(genome.k, genome.serials)

    def rhs(state):
        state = np.asarray(state, dtype=float)
        return system(state.reshape(1, 3))[0]

    return rhs


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_points, 3) or (n_points, m, 3)
    divergent: np.ndarray | bool = False
    completed_steps: np.ndarray | int = 0


def integrate(rhs, init, t0: float, dt: float, n_points: int) -> Trajectory:
    """Classical fixed-step RK4; returns ``n_points`` samples starting at ``init``.

    ``init`` may be a single state or a stack of states; ``rhs`` must accept
    the same shape. Non-finite states are flagged, never raised.
    """
    if dt <= 0:
        raise ValueError("step size must be positive")
    y = np.array(init, dtype=float)
    out = np.empty((n_points,) + y.shape)
    out[0] = y
    batch = y.ndim > 1
    finite = np.ones(y.shape[0] if batch else 1, dtype=bool)
    completed = np.full(finite.shape, n_points - 1)
    h = dt
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(1, n_points):
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * h * k1)
            k3 = rhs(y + 0.5 * h * k2)
            k4 = rhs(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            out[s] = y
            ok = np.isfinite(y).all(axis=-1) if batch else np.array([np.isfinite(y).all()])
            newly = finite & ~ok
            completed[newly] = s - 1
            finite &= ok
            if not finite.any():
                out[s + 1 :] = np.nan
                break
    times = t0 + dt * np.arange(n_points)
    if batch:
        return Trajectory(times, out, ~finite, completed)
    return Trajectory(times, out, bool(~finite[0]), int(completed[0]))


def encode_search_point(x) -> OdeGenome:
    x = np.asarray(x, dtype=float)
    if x.size != 15:
        raise ValueError("an ODE search point has 15 coordinates")
    return OdeGenome(x[:12].reshape(3, 4), tuple(int(s) for s in _to_serials(x[12:])))


def _to_serials(v) -> np.ndarray:
    return np.clip(np.floor(np.asarray(v, dtype=float) + 0.5), 1, N_STRUCTURES).astype(int)


def genome_to_point(genome: OdeGenome) -> np.ndarray:
    return np.concatenate([genome.k.ravel(), np.asarray(genome.serials, dtype=float)])


def hiv_genome() -> OdeGenome:
    """The reference HIV model expressed in the 192-structure encoding."""
    serials = (
        encode_structure(Structure((-1, 1, -1, 1), 1, 0, 2), 0),
        encode_structure(Structure((-1, 1, 1, 1), 0, 0, 2), 1),
        encode_structure(Structure((-1, 1, -1, 1), 1, 0, 2), 2),
    )
    k = [
        [0.15, 0.0, 2e-5, 80.0],
        [0.55, 0.0, 2e-5, 0.0],
        [0.55, 900.0 * 0.55, 2e-5, 0.0],
    ]
    return OdeGenome(np.array(k), serials)


@dataclass(frozen=True)
class OdeProtocol:
    t0: float = 0.0
    dt: float = 0.1
    n_points: int = 100
    init: tuple[float, float, float] = HIV_INIT


def hiv_target(protocol: OdeProtocol = OdeProtocol()) -> Trajectory:
    return integrate(genome_rhs(hiv_genome()), protocol.init, protocol.t0, protocol.dt, protocol.n_points)


def _batch_sse(k, serials, target: Trajectory, protocol: OdeProtocol) -> np.ndarray:
    system = _BatchSystem(k, serials)
    m = system.coef.shape[0]
    init = np.broadcast_to(np.asarray(protocol.init, dtype=float), (m, 3))
    traj = integrate(system, init, protocol.t0, protocol.dt, protocol.n_points)
    with np.errstate(over="ignore", invalid="ignore"):
        diff = traj.states - np.asarray(target.states)[:, None, :]
        sse = np.sum(diff * diff, axis=(0, 2))
    bad = traj.divergent | ~np.isfinite(sse)
    sse[bad] = DIVERGENCE_PENALTY - traj.completed_steps[bad]
    return sse


def ode_objective(genome: OdeGenome, target: Trajectory, protocol: OdeProtocol = OdeProtocol()) -> float:
    """Sum of squared differences to ``target`` over all variables and samples."""
    return float(_batch_sse(genome.k[None], np.asarray(genome.serials)[None], target, protocol)[0])


def make_ode(
    protocol: OdeProtocol = OdeProtocol(),
    frozen_structure: Optional[tuple[int, int, int]] = None,
    k_bounds: tuple[float, float] = K_BOUNDS,
) -> Objective:
    """Objective over 15-D search points, or 12-D when the structure is frozen."""
    target = hiv_target(protocol)
    if frozen_structure is None:
        lower = np.r_[np.full(12, k_bounds[0]), np.full(3, 1.0)]
        upper = np.r_[np.full(12, k_bounds[1]), np.full(3, float(N_STRUCTURES))]

        def func(X):
            return _batch_sse(X[:, :12], _to_serials(X[:, 12:]), target, protocol)

        name = "ode"
    else:
        frozen = np.asarray(frozen_structure, dtype=int)
        lower, upper = np.full(12, k_bounds[0]), np.full(12, k_bounds[1])

        def func(X):
            return _batch_sse(X, np.broadcast_to(frozen, (X.shape[0], 3)), target, protocol)

        name = "ode-params"
    return Objective(name=name, bounds=Bounds(lower, upper), func=func, known_optimum=0.0)


def write_trajectory_csv(path, traj: Trajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "T", "I", "V"])
        for t, row in zip(traj.times, np.asarray(traj.states)):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])
