import numpy as np
import pytest

from spadepso import SpadeConfig, run
from spadepso.core import Bounds, Objective, make_rng
from spadepso.optimizers import (
    baseline_pso_update,
    linear_schedule,
    spade_init,
    spade_step,
    velocity_update_exploitation,
    velocity_update_exploration,
)
from spadepso.spa import parse_record


def sphere(dim=5, lo=-100.0, hi=100.0):
    return Objective(f"sphere-D{dim}", Bounds.uniform(lo, hi, dim), lambda X: np.sum(X * X, axis=1), 0.0)


def test_exploitation_update_by_hand():
    v = velocity_update_exploitation([0.0], [0.0], [2.0], [4.0], 0.5, 1.0, 1.0, r1=np.ones(1), r2=np.ones(1))
    assert v.tolist() == [6.0]


def test_exploitation_fixed_point():
    x = np.array([1.0, -2.0])
    v = velocity_update_exploitation(np.zeros(2), x, x, x, 0.7, 2.0, 2.0, rng=make_rng(0))
    assert v.tolist() == [0.0, 0.0]


def test_exploitation_without_guide_term_is_exploration():
    r = np.array([0.3, 0.8])
    args = (np.array([1.0, 2.0]), np.array([0.5, -1.0]), np.array([3.0, 3.0]))
    a = velocity_update_exploitation(*args, np.array([9.0, 9.0]), 0.6, 1.5, 0.0, r1=r, r2=r)
    b = velocity_update_exploration(*args, 0.6, 1.5, r=r)
    np.testing.assert_array_equal(a, b)


def test_velocity_is_clamped():
    v = velocity_update_exploration([0.0], [0.0], [100.0], 1.0, 3.0, r=np.ones(1), v_max=np.array([20.0]))
    assert v.tolist() == [20.0]


def test_pso_update_by_hand():
    half = np.full(1, 0.5)
    v = baseline_pso_update([0.0], [0.0], [1.0], [3.0], 0.0, 2.0, 2.0, r1=half, r2=half)
    assert v.tolist() == [4.0]
    x = np.array([2.0, 2.0])
    assert baseline_pso_update(np.zeros(2), x, x, x, 0.9, 2, 2, rng=make_rng(1)).tolist() == [0.0, 0.0]


def test_linear_schedule():
    assert linear_schedule((0.9, 0.4), 0.5) == pytest.approx(0.65)
    assert linear_schedule((0.99, 0.2), 0.0) == 0.99
    assert linear_schedule((0.99, 0.2), 1.0) == pytest.approx(0.2)


def test_default_split_and_budget():
    cfg = SpadeConfig()
    assert cfg.split() == (25, 15)
    assert cfg.budget_for(sphere(10)) == 100000


def test_bad_config_values():
    with pytest.raises(ValueError):
        SpadeConfig(topology="ring")
    with pytest.raises(ValueError):
        SpadeConfig(vote_on="mean")
    with pytest.raises(KeyError):
        SpadeConfig().with_overrides(nope=1)


def test_one_step_never_worsens_best():
    obj = sphere()
    cfg = SpadeConfig(population=8, budget=800)
    rng = make_rng(3)
    state, rec0 = spade_init(obj, cfg, rng)
    rec1, _ = spade_step(state, obj, cfg, rng)
    assert rec1.best_error <= rec0.best_error
    assert rec1.evaluations == 16


def test_complete_graph_without_experts_is_gbest_guided():
    obj = sphere()
    base = dict(population=8, k=8, v_ulk=0, n_exp=0, budget=2000, vote_on="pbest")
    a = run("spade", obj, SpadeConfig(**base, guide="pbest"), seed=5)
    b = run("spade", obj, SpadeConfig(**base, guide="gbest"), seed=5)
    np.testing.assert_array_equal(a.best_position, b.best_position)
    assert a.trace == b.trace


def test_complete_graph_selects_best_voter():
    obj = sphere()
    cfg = SpadeConfig(population=8, k=8, v_ulk=0, n_exp=0, budget=800)
    rng = make_rng(2)
    state, _ = spade_init(obj, cfg, rng)
    fitness = state.swarm.fitness.copy()
    _, report = spade_step(state, obj, cfg, rng)
    assert report.sbest == int(np.argmin(fitness))


def test_budget_of_one_population():
    res = run("spade", sphere(), SpadeConfig(population=10, budget=10), seed=0)
    assert len(res.trace) == 1 and res.evaluations == 10


def test_budget_smaller_than_population():
    with pytest.raises(ValueError):
        run("pso", sphere(), SpadeConfig(population=10, budget=5))


@pytest.mark.parametrize("optimizer", ["spade", "pso", "clpso"])
def test_run_invariants(optimizer):
    obj = sphere()
    cfg = SpadeConfig(budget=4010)
    res = run(optimizer, obj, cfg, seed=1)
    assert cfg.budget - cfg.population < res.evaluations <= cfg.budget
    errors = [r.best_error for r in res.trace]
    assert all(a >= b for a, b in zip(errors, errors[1:]))
    assert res.error == errors[-1]
    assert obj.bounds.contains(res.best_position)
    assert res.best_fitness == pytest.approx(obj.evaluate(res.best_position))


@pytest.mark.parametrize("optimizer", ["spade", "pso", "clpso"])
def test_same_seed_same_result(optimizer):
    obj = sphere()
    cfg = SpadeConfig(budget=2000)
    a, b = run(optimizer, obj, cfg, seed=7), run(optimizer, obj, cfg, seed=7)
    # baselines carry NaN sub-group diversities, which assert_array_equal treats as equal
    np.testing.assert_array_equal(np.array(a.trace, dtype=float), np.array(b.trace, dtype=float))
    np.testing.assert_array_equal(a.best_position, b.best_position)
    c = run(optimizer, obj, cfg, seed=8)
    assert not np.array_equal(a.best_position, c.best_position)


@pytest.mark.parametrize("topology", ["distance", "serial", "combined"])
def test_topologies_keep_particles_in_bounds(topology):
    obj = sphere(4, -1.0, 1.0)
    cfg = SpadeConfig(budget=2000, topology=topology)
    rng = make_rng(4)
    state, _ = spade_init(obj, cfg, rng)
    for _ in range(30):
        spade_step(state, obj, cfg, rng)
        assert obj.bounds.contains(state.swarm.X)
        assert np.all(np.abs(state.swarm.V) <= state.v_max + 1e-12)
    if topology == "distance":
        assert not state.learned.any()


def test_sbest_is_a_candidate():
    res = run("spade", sphere(), SpadeConfig(budget=2000), seed=2, record_spa=True)
    assert len(res.spa_log) == len(res.trace) - 1
    for line, rec in zip(res.spa_log, res.trace[1:]):
        parsed = parse_record(line)
        assert parsed["sbest"] in parsed["candidates"]
        assert parsed["sbest"] == rec.sbest_index
        assert 0 <= rec.sbest_index < 40


def test_pso_solves_sphere():
    res = run("pso", sphere(10), SpadeConfig(), seed=0)
    assert res.error < 1e-3


def test_spade_solves_sphere():
    res = run("spade", sphere(10), SpadeConfig(budget=30000), seed=0)
    assert res.error < 1e-3


def test_unknown_optimizer():
    with pytest.raises(ValueError, match="valid"):
        run("de", sphere())
