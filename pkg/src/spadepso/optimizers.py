"""SpadePSO and the PSO / CLPSO baselines, all behind :func:`run`.

SpadePSO splits the swarm into an exploitation group (first 5/8 of indices)
and an exploration group (the rest). Both follow comprehensive-learning
exemplars; the exploitation group is additionally pulled toward ``sbest``, the
particle chosen each iteration by surprisingly-popular voting over the
knowledge-transfer graph.

Parameter schedules (inertia, acceleration) interpolate linearly in the
fraction of the evaluation budget already spent.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple, Optional

import numpy as np

from . import topology as topo
from .core import Objective, Swarm, clamp_velocity, evaluate_swarm, init_swarm, make_rng
from .exemplar import build_exemplar, learning_probabilities, resolve_exemplars
from .spa import SpaReport, format_record, run_spa
from .stats import diversity

__all__ = [
    "OPTIMIZERS",
    "SpadeConfig",
    "TraceRecord",
    "RunResult",
    "SpadeState",
    "linear_schedule",
    "velocity_update_exploration",
    "velocity_update_exploitation",
    "baseline_pso_update",
    "spade_init",
    "spade_step",
    "run",
]

OPTIMIZERS = ("spade", "pso", "clpso")


@dataclass
class SpadeConfig:
    population: int = 40
    exploit_share: float = 5 / 8
    w: tuple[float, float] = (0.99, 0.2)
    c1: tuple[float, float] = (2.5, 0.5)
    c2: tuple[float, float] = (0.5, 2.5)
    c: tuple[float, float] = (3.0, 1.5)
    k: int = 2
    v_ulk: int = 6
    n_exp: int = 5
    vmax_fraction: float = 0.1
    budget: Optional[int] = None  # None -> D * 10000
    topology: str = "distance"
    refresh_gap: int = 7
    # fitness the particles vote (and experts are ranked) on: "position" or "pbest"
    vote_on: str = "position"
    # what the exploitation group is pulled toward: the sbest particle's
    # "position" or "pbest", or the global best ("gbest", HCLPSO-style check)
    guide: str = "position"
    pso_w: tuple[float, float] = (0.9, 0.4)
    pso_c1: float = 2.0
    pso_c2: float = 2.0
    clpso_w: tuple[float, float] = (0.9, 0.4)
    clpso_c: float = 2.0

    def __post_init__(self):
        if self.topology not in topo.VARIANTS:
            raise ValueError(f"topology must be one of {topo.VARIANTS}")
        if self.vote_on not in ("position", "pbest"):
            raise ValueError("vote_on must be 'position' or 'pbest'")
        if self.guide not in ("position", "pbest", "gbest"):
            raise ValueError("guide must be 'position', 'pbest' or 'gbest'")
        if self.population < 2:
            raise ValueError("population must hold at least two particles")

    def split(self) -> tuple[int, int]:
        """(exploitation size, exploration size)."""
        n = self.population
        n_exploit = min(max(int(round(n * self.exploit_share)), 1), n - 1)
        return n_exploit, n - n_exploit

    def budget_for(self, objective: Objective) -> int:
        return self.budget if self.budget is not None else objective.dimension * 10000

    def with_overrides(self, **kw) -> "SpadeConfig":
        names = {f.name for f in fields(self)}
        unknown = set(kw) - names
        if unknown:
            raise KeyError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, **kw)


class TraceRecord(NamedTuple):
    iteration: int
    evaluations: int
    best_error: float
    div_explore: float
    div_exploit: float
    div_all: float
    sbest_index: int


@dataclass
class RunResult:
    optimizer: str
    objective: str
    seed: int
    best_position: np.ndarray
    best_fitness: float
    error: float
    evaluations: int
    trace: list[TraceRecord] = field(default_factory=list)
    spa_log: list[str] = field(default_factory=list)


def linear_schedule(pair: tuple[float, float], frac: float) -> float:
    start, end = pair
    return start + (end - start) * min(max(frac, 0.0), 1.0)


def velocity_update_exploration(v, x, exemplar, w, c, rng=None, v_max=None, r=None):
    """``w*v + c*r*(exemplar - x)`` with a fresh uniform ``r`` per dimension."""
    x = np.asarray(x, dtype=float)
    if r is None:
        r = rng.random(x.shape)
    out = w * np.asarray(v, dtype=float) + c * r * (np.asarray(exemplar) - x)
    return out if v_max is None else clamp_velocity(out, v_max)


def velocity_update_exploitation(v, x, exemplar, sbest, w, c1, c2, rng=None, v_max=None, r1=None, r2=None):
    """Exemplar attraction plus attraction toward the ``sbest`` position."""
    x = np.asarray(x, dtype=float)
    if r1 is None:
        r1 = rng.random(x.shape)
    if r2 is None:
        r2 = rng.random(x.shape)
    out = (
        w * np.asarray(v, dtype=float)
        + c1 * r1 * (np.asarray(exemplar) - x)
        + c2 * r2 * (np.asarray(sbest) - x)
    )
    return out if v_max is None else clamp_velocity(out, v_max)


def baseline_pso_update(v, x, pbest, gbest, w, c1, c2, rng=None, v_max=None, r1=None, r2=None):
    """Inertia-weight PSO with a global-best neighbourhood."""
    x = np.asarray(x, dtype=float)
    if r1 is None:
        r1 = rng.random(x.shape)
    if r2 is None:
        r2 = rng.random(x.shape)
    out = (
        w * np.asarray(v, dtype=float)
        + c1 * r1 * (np.asarray(pbest) - x)
        + c2 * r2 * (np.asarray(gbest) - x)
    )
    return out if v_max is None else clamp_velocity(out, v_max)


def _move(swarm: Swarm, objective: Objective) -> None:
    """Advance positions, clip to the box and zero clipped velocity components."""
    X = swarm.X + swarm.V
    lo, hi = objective.bounds.lower, objective.bounds.upper
    out = (X < lo) | (X > hi)
    swarm.X = np.clip(X, lo, hi)
    swarm.V[out] = 0.0


@dataclass
class SpadeState:
    swarm: Swarm
    sources: np.ndarray
    eta: np.ndarray
    scopes: list
    exploit: np.ndarray
    explore: np.ndarray
    learned: np.ndarray
    v_max: np.ndarray
    budget: int
    iterations: int
    evaluations: int = 0
    iteration: int = 0


def _rebuild(state: SpadeState, i: int, rng) -> None:
    sw = state.swarm
    ex = build_exemplar(i, sw.P, sw.pbest_fitness, state.eta[i], state.scopes[i], rng)
    state.sources[i] = ex.sources


def _group_diversities(state: SpadeState) -> tuple[float, float, float]:
    X = state.swarm.X
    return diversity(X[state.explore]), diversity(X[state.exploit]), diversity(X)


def _best_error(swarm: Swarm, objective: Objective) -> float:
    return objective.error(float(swarm.pbest_fitness.min()))


def spade_init(objective: Objective, config: SpadeConfig, rng) -> tuple[SpadeState, TraceRecord]:
    n = config.population
    budget = config.budget_for(objective)
    if budget < n:
        raise ValueError(f"budget {budget} is smaller than one population evaluation ({n})")
    v_max = objective.bounds.vmax(config.vmax_fraction)
    swarm = init_swarm(n, objective.bounds, v_max, rng)
    evaluate_swarm(swarm, objective)

    n_exploit, n_explore = config.split()
    exploit = np.arange(n_exploit)
    explore = np.arange(n_exploit, n)
    eta = np.r_[learning_probabilities(n_exploit), learning_probabilities(n_explore)]
    everyone = np.arange(n)
    scopes = [everyone] * n_exploit + [explore] * n_explore
    state = SpadeState(
        swarm=swarm,
        sources=np.zeros((n, objective.dimension), dtype=int),
        eta=eta,
        scopes=scopes,
        exploit=exploit,
        explore=explore,
        learned=np.zeros((n, n), dtype=np.int8),
        v_max=v_max,
        budget=budget,
        iterations=max(budget // n, 1),
        evaluations=n,
    )
    for i in range(n):
        _rebuild(state, i, rng)
    rec = TraceRecord(0, n, _best_error(swarm, objective), *_group_diversities(state), -1)
    return state, rec


def _knowledge_graph(state: SpadeState, config: SpadeConfig, rng, vote_fitness) -> np.ndarray:
    sw = state.swarm
    n = sw.n
    if config.topology == "serial":
        A = topo.serial_graph(n, config.k)
    else:
        u_lk = min(topo.degree_bound(config.k, config.v_ulk, state.iteration, state.iterations), n)
        A = topo.knn_graph(topo.distance_matrix(sw.X), u_lk)
    B = topo.expert_graph(topo.fitness_ranks(vote_fitness), config.n_exp, rng)
    learned = None if config.topology == "distance" else state.learned
    return topo.union_graph(A, B, learned)


def spade_step(
    state: SpadeState, objective: Objective, config: SpadeConfig, rng
) -> tuple[TraceRecord, SpaReport]:
    """One SpadePSO iteration; mutates ``state`` in place."""
    sw = state.swarm
    frac = state.evaluations / state.budget
    w = linear_schedule(config.w, frac)
    c = linear_schedule(config.c, frac)
    c1 = linear_schedule(config.c1, frac)
    c2 = linear_schedule(config.c2, frac)

    state.iteration += 1
    by_pbest = config.vote_on == "pbest"
    vote_fitness = sw.pbest_fitness if by_pbest else sw.fitness
    G = _knowledge_graph(state, config, rng, vote_fitness)
    report = run_spa(G, vote_fitness)
    k_star = report.sbest
    if config.guide == "gbest":
        guide = sw.P[sw.best_index()]
    elif config.guide == "pbest":
        guide = sw.P[k_star]
    else:
        guide = sw.X[k_star]

    Xcl = resolve_exemplars(state.sources, sw.P)
    ei, xi = state.exploit, state.explore
    V = np.empty_like(sw.V)
    V[ei] = velocity_update_exploitation(sw.V[ei], sw.X[ei], Xcl[ei], guide, w, c1, c2, rng, state.v_max)
    V[xi] = velocity_update_exploration(sw.V[xi], sw.X[xi], Xcl[xi], w, c, rng, state.v_max)
    sw.V = V
    _move(sw, objective)

    previous = sw.fitness.copy()
    evaluate_swarm(sw, objective)
    state.evaluations += sw.n
    for i in np.flatnonzero(sw.gap >= config.refresh_gap):
        _rebuild(state, int(i), rng)
        sw.gap[i] = 0

    if config.topology != "distance":
        voters = np.flatnonzero((report.votes == k_star) & (sw.fitness < previous))
        state.learned[voters, k_star] = 1

    rec = TraceRecord(
        state.iteration,
        state.evaluations,
        _best_error(sw, objective),
        *_group_diversities(state),
        k_star,
    )
    return rec, report


def _finish(name, objective, seed, swarm, evaluations, trace, spa_log=None) -> RunResult:
    b = swarm.best_index()
    best = float(swarm.pbest_fitness[b])
    return RunResult(
        optimizer=name,
        objective=objective.name,
        seed=seed,
        best_position=swarm.P[b].copy(),
        best_fitness=best,
        error=objective.error(best),
        evaluations=evaluations,
        trace=trace,
        spa_log=spa_log or [],
    )


def _run_spade(objective, config, seed, record_spa) -> RunResult:
    rng = make_rng(seed)
    state, rec = spade_init(objective, config, rng)
    trace = [rec]
    log = []
    while state.evaluations + config.population <= state.budget:
        rec, report = spade_step(state, objective, config, rng)
        trace.append(rec)
        if record_spa:
            log.append(format_record(report, state.iteration))
    return _finish("spade", objective, seed, state.swarm, state.evaluations, trace, log)


def _baseline_loop(name, objective, config, seed, update) -> RunResult:
    rng = make_rng(seed)
    n = config.population
    budget = config.budget_for(objective)
    if budget < n:
        raise ValueError(f"budget {budget} is smaller than one population evaluation ({n})")
    v_max = objective.bounds.vmax(config.vmax_fraction)
    sw = init_swarm(n, objective.bounds, v_max, rng)
    evaluate_swarm(sw, objective)
    evals = n
    nan = float("nan")
    trace = [TraceRecord(0, evals, _best_error(sw, objective), nan, nan, diversity(sw.X), -1)]
    it = 0
    ctx = update.setup(sw, rng) if hasattr(update, "setup") else None
    while evals + n <= budget:
        it += 1
        frac = evals / budget
        sw.V = update(sw, frac, rng, v_max, ctx)
        _move(sw, objective)
        evaluate_swarm(sw, objective)
        evals += n
        if ctx is not None:
            ctx.after_eval(sw, rng)
        trace.append(TraceRecord(it, evals, _best_error(sw, objective), nan, nan, diversity(sw.X), -1))
    return _finish(name, objective, seed, sw, evals, trace)


class _PsoUpdate:
    def __init__(self, config: SpadeConfig):
        self.config = config

    def __call__(self, sw, frac, rng, v_max, ctx):
        cfg = self.config
        w = linear_schedule(cfg.pso_w, frac)
        g = sw.P[sw.best_index()]
        return baseline_pso_update(sw.V, sw.X, sw.P, g, w, cfg.pso_c1, cfg.pso_c2, rng, v_max)


class _ClpsoUpdate:
    class _Ctx:
        def __init__(self, config, sw, rng):
            self.gap = config.refresh_gap
            n = sw.n
            self.eta = learning_probabilities(n)
            self.scope = np.arange(n)
            self.sources = np.zeros(sw.X.shape, dtype=int)
            for i in range(n):
                self.rebuild(sw, i, rng)

        def rebuild(self, sw, i, rng):
            ex = build_exemplar(i, sw.P, sw.pbest_fitness, self.eta[i], self.scope, rng)
            self.sources[i] = ex.sources

        def after_eval(self, sw, rng):
            for i in np.flatnonzero(sw.gap >= self.gap):
                self.rebuild(sw, int(i), rng)
                sw.gap[i] = 0

    def __init__(self, config: SpadeConfig):
        self.config = config

    def setup(self, sw, rng):
        return self._Ctx(self.config, sw, rng)

    def __call__(self, sw, frac, rng, v_max, ctx):
        cfg = self.config
        w = linear_schedule(cfg.clpso_w, frac)
        Xcl = resolve_exemplars(ctx.sources, sw.P)
        return velocity_update_exploration(sw.V, sw.X, Xcl, w, cfg.clpso_c, rng, v_max)


def run(
    optimizer: str,
    objective: Objective,
    config: Optional[SpadeConfig] = None,
    seed: int = 0,
    record_spa: bool = False,
) -> RunResult:
    """Run one seeded optimization until the evaluation budget is spent.

    Stops before an iteration that would overrun the budget, so the final count
    lies in ``(budget - population, budget]``.
    """
    config = config or SpadeConfig()
    if optimizer == "spade":
        return _run_spade(objective, config, seed, record_spa)
    if optimizer == "pso":
        return _baseline_loop("pso", objective, config, seed, _PsoUpdate(config))
    if optimizer == "clpso":
        return _baseline_loop("clpso", objective, config, seed, _ClpsoUpdate(config))
    raise ValueError(f"unknown optimizer {optimizer!r}; valid: {', '.join(OPTIMIZERS)}")
