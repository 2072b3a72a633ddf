import numpy as np
import pytest

from spadepso.core import make_rng
from spadepso.problems import default_budget, make_problem, problem_ids
from spadepso.problems.benchmarks import (
    BASE_FUNCTIONS,
    SUITE,
    ackley,
    griewank,
    make_benchmark,
    random_rotation,
    rastrigin,
    rosenbrock,
    save_transform,
    scaffer_f6,
)


def rastrigin_loop(z):
    return sum(v * v - 10 * np.cos(2 * np.pi * v) + 10 for v in z)


def test_rastrigin_matches_loop():
    z = np.random.default_rng(0).uniform(-5, 5, (4, 7))
    np.testing.assert_allclose(rastrigin(z), [rastrigin_loop(row) for row in z])


def test_rastrigin_integer_lattice():
    # cos term vanishes at integers, leaving sum of squares
    assert rastrigin(np.array([[1.0, -2.0, 0.0]]))[0] == pytest.approx(5.0)


def test_rosenbrock_by_hand():
    assert rosenbrock(np.ones((1, 5)))[0] == 0.0
    # 100*(0 - 0)^2 + (0 - 1)^2 for each of the D-1 terms
    assert rosenbrock(np.zeros((1, 4)))[0] == pytest.approx(3.0)


def test_simple_optima():
    z = np.zeros((1, 6))
    assert ackley(z)[0] == pytest.approx(0.0, abs=1e-12)
    assert griewank(z)[0] == pytest.approx(0.0, abs=1e-12)
    assert scaffer_f6(z)[0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("fn_id", list(SUITE))
def test_optimum_equals_bias(fn_id):
    obj, tf = make_benchmark(fn_id, 10, seed=3)
    value = obj.evaluate(tf.shift)
    tol = 1e-3 if SUITE[fn_id][0] == "schwefel" else 1e-8
    assert value == pytest.approx(100.0 * int(fn_id[1:]), abs=tol)
    assert obj.known_optimum == 100.0 * int(fn_id[1:])


@pytest.mark.parametrize("fn_id", list(SUITE))
def test_shift_point_beats_random_points(fn_id):
    obj, tf = make_benchmark(fn_id, 10, seed=1)
    X = make_rng(7).uniform(-100, 100, (50, 10))
    assert np.all(obj.evaluate_batch(X) >= obj.evaluate(tf.shift) - 1e-9)


def test_unrotated_functions():
    assert make_benchmark("F8", 10, seed=0)[1].rotation is None
    assert make_benchmark("F10", 10, seed=0)[1].rotation is None
    assert make_benchmark("F9", 10, seed=0)[1].rotation is not None


def test_rotation_is_orthogonal():
    M = random_rotation(12, make_rng(0))
    np.testing.assert_allclose(M @ M.T, np.eye(12), atol=1e-12)


def test_transform_seed_is_reproducible():
    a = make_benchmark("F5", 10, seed=4)[1]
    b = make_benchmark("F5", 10, seed=4)[1]
    np.testing.assert_array_equal(a.shift, b.shift)
    np.testing.assert_array_equal(a.rotation, b.rotation)
    assert np.all(np.abs(a.shift) <= 80)


def test_transform_file_round_trip(tmp_path):
    _, tf = make_benchmark("F9", 10, seed=5)
    save_transform(tmp_path / "F9_D10.txt", tf.shift, tf.rotation)
    obj, loaded = make_benchmark("F9", 10, seed=99, data_dir=str(tmp_path))
    np.testing.assert_array_equal(loaded.shift, tf.shift)
    np.testing.assert_array_equal(loaded.rotation, tf.rotation)
    lines = (tmp_path / "F9_D10.txt").read_text().splitlines()
    assert len(lines) == 11 and all(len(line.split()) == 10 for line in lines)


def test_out_of_range_input_is_rejected():
    obj, _ = make_benchmark("F1", 10, seed=0)
    with pytest.raises(ValueError):
        obj.evaluate(np.full(10, 101.0))


def test_all_base_functions_vectorise():
    X = np.random.default_rng(1).uniform(-1, 1, (5, 4))
    for name, f in BASE_FUNCTIONS.items():
        batch = f(X)
        rows = np.array([f(X[i : i + 1])[0] for i in range(5)])
        np.testing.assert_allclose(batch, rows, err_msg=name)


def test_problem_selector():
    assert make_problem("f8", 10, seed=0).name == "F8-D10"
    assert make_problem("ssrp").dimension == 20
    assert make_problem("ode").dimension == 15
    assert make_problem("ode-params").dimension == 12
    with pytest.raises(ValueError, match="valid"):
        make_problem("F17", 10)
    with pytest.raises(ValueError):
        make_problem("F1")
    assert "ssrp" in problem_ids()


def test_default_budget():
    assert default_budget("F1", 30) == 300000
    assert default_budget("ode", 15, population=40) == 3751 * 40
