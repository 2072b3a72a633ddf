import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spadepso.problems.ssrp import SsrpInstance, make_ssrp, phi_values, ssrp_objective


def phi_by_definition(x):
    """Triple-loop evaluation of the 2m partial sums, 1-based indices as written."""
    n = len(x)
    m = 2 * n - 1
    phi = [0.0] * (2 * m + 1)
    for i in range(1, n + 1):
        phi[2 * i - 1] = sum(np.cos(sum(x[k - 1] for k in range(abs(2 * i - j - 1) + 1, j + 1)))
                             for j in range(i, n + 1))
    for i in range(1, n):
        phi[2 * i] = 0.5 + sum(np.cos(sum(x[k - 1] for k in range(abs(2 * i - j) + 1, j + 1)))
                               for j in range(i + 1, n + 1))
    for i in range(1, m + 1):
        phi[m + i] = -phi[i]
    return np.array(phi[1:])


def test_zero_phases_give_twenty():
    # phi_1 at x = 0 is a sum of n unit cosines
    assert ssrp_objective(np.zeros(20)) == 20.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(0, 10_000))
def test_matches_definition(n, seed):
    x = np.random.default_rng(seed).uniform(0, 2 * np.pi, n)
    np.testing.assert_allclose(phi_values(x), phi_by_definition(x), atol=1e-12)
    assert ssrp_objective(x) == pytest.approx(np.max(phi_by_definition(x)), abs=1e-12)


def test_batch_matches_single():
    X = np.random.default_rng(2).uniform(0, 2 * np.pi, (6, 20))
    inst = SsrpInstance(20)
    np.testing.assert_allclose(inst(X), [ssrp_objective(x) for x in X])


def test_objective_wrapper():
    obj = make_ssrp()
    assert obj.dimension == 20 and obj.known_optimum is None
    np.testing.assert_allclose(obj.bounds.upper, 2 * np.pi)
    assert obj.error(1.5) == 1.5


def test_bad_length():
    with pytest.raises(ValueError):
        SsrpInstance(0)
