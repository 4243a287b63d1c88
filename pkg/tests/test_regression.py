import numpy as np
import pytest
from numpy.testing import assert_allclose

from polybo.errors import DimensionMismatchError, RankDeficientError, UnderdeterminedError
from polybo.interpolation import NodeSequence, dds_fit, leja_chebyshev_nodes, unisolvent_grid
from polybo.multiindex import build_multi_index_set
from polybo.regression import (
    RegressionProblem,
    build_regression_matrix,
    degree_for_sample_count,
    fit_samples,
    least_squares_fit,
    should_increase_degree,
)

RECOVERY_GRID = [(m, n, p) for m in (1, 2, 3) for n in range(1, 5) for p in (1, 2, np.inf)]


def test_regression_matrix_at_grid_is_identity():
    index_set = build_multi_index_set(2, 3, 2)
    nodes = leja_chebyshev_nodes(3)
    grid = unisolvent_grid(index_set, nodes)
    assert_allclose(build_regression_matrix(index_set, nodes, grid.points), np.eye(len(index_set)), atol=1e-10)


def test_regression_matrix_single_sample_and_empty():
    index_set = build_multi_index_set(1, 1, np.inf)
    row = build_regression_matrix(index_set, leja_chebyshev_nodes(1), np.array([[0.3]]))
    assert row.shape == (1, 2)
    assert row.sum() == pytest.approx(1.0)
    assert build_regression_matrix(index_set, leja_chebyshev_nodes(1), np.empty((0, 1))).shape == (0, 2)


@pytest.mark.parametrize("m,n,p", RECOVERY_GRID)
def test_exact_recovery_from_noiseless_samples(m, n, p, rng, random_polynomial):
    index_set = build_multi_index_set(m, n, p)
    g = random_polynomial(index_set)
    samples = rng.uniform(-1.0, 1.0, size=(2 * len(index_set), m))

    surrogate = least_squares_fit(RegressionProblem.from_samples(index_set, samples, g(samples)))
    probe = rng.uniform(-1.0, 1.0, size=(100, m))
    truth = g(probe)
    assert np.max(np.abs(surrogate.evaluate_cube(probe) - truth)) <= 1e-8 * max(1.0, np.max(np.abs(truth)))


def test_grid_samples_reduce_to_interpolation(rng):
    index_set = build_multi_index_set(2, 3, 2)
    nodes = leja_chebyshev_nodes(3)
    grid = unisolvent_grid(index_set, nodes)
    values = rng.normal(size=len(index_set))

    fitted = least_squares_fit(RegressionProblem.from_samples(index_set, grid.points, values))
    assert_allclose(fitted.newton_coefficients, dds_fit(index_set, nodes, values).newton_coefficients, atol=1e-10)


def test_noisy_residual_is_bounded(rng, random_polynomial):
    index_set = build_multi_index_set(2, 2, 2)
    g = random_polynomial(index_set)
    samples = rng.uniform(-1.0, 1.0, size=(60, 2))
    epsilon = 1e-3
    observations = g(samples) + rng.uniform(-epsilon, epsilon, size=60)

    problem = RegressionProblem.from_samples(index_set, samples, observations)
    surrogate = least_squares_fit(problem)
    residual = surrogate.evaluate_cube(samples) - observations
    assert np.linalg.norm(residual) <= epsilon * np.sqrt(60)


def test_row_permutation_does_not_change_fit(rng, random_polynomial):
    index_set = build_multi_index_set(2, 3, 2)
    g = random_polynomial(index_set)
    samples = rng.uniform(-1.0, 1.0, size=(30, 2))
    observations = g(samples) + 0.01 * rng.normal(size=30)
    order = rng.permutation(30)

    a = least_squares_fit(RegressionProblem.from_samples(index_set, samples, observations))
    b = least_squares_fit(RegressionProblem.from_samples(index_set, samples[order], observations[order]))
    assert_allclose(a.newton_coefficients, b.newton_coefficients, atol=1e-10)


def test_underdetermined_raises(rng):
    index_set = build_multi_index_set(2, 3, 2)
    samples = rng.uniform(-1.0, 1.0, size=(len(index_set) - 1, 2))
    with pytest.raises(UnderdeterminedError):
        least_squares_fit(RegressionProblem.from_samples(index_set, samples, np.zeros(len(samples))))


def test_repeated_samples_are_rank_deficient():
    index_set = build_multi_index_set(1, 2, np.inf)
    samples = np.array([[0.5], [0.5], [-0.5], [-0.5]])
    with pytest.raises(RankDeficientError) as info:
        least_squares_fit(RegressionProblem.from_samples(index_set, samples, np.ones(4)))
    assert info.value.rank == 2
    assert info.value.columns == 3


def test_problem_validates_shapes():
    index_set = build_multi_index_set(1, 1, 1)
    with pytest.raises(DimensionMismatchError):
        RegressionProblem(index_set, NodeSequence([1.0, -1.0]), np.ones((3, 2)), np.ones(2))
    with pytest.raises(DimensionMismatchError):
        RegressionProblem(index_set, NodeSequence([1.0, -1.0]), np.ones((3, 3)), np.ones(3))


def test_should_increase_degree_examples():
    assert should_increase_degree(2, 2, 2, 30)
    assert not should_increase_degree(2, 2, np.inf, 9)
    assert not should_increase_degree(2, 2, 2, 0)
    # |A_{2,3,2}| = 11
    assert not should_increase_degree(2, 2, 2, 11)
    assert should_increase_degree(2, 2, 2, 12)


@pytest.mark.parametrize("m,n,p", [(1, 3, 2), (2, 2, 2), (2, 4, 1), (3, 2, np.inf)])
def test_should_increase_degree_is_monotone_in_sample_count(m, n, p):
    decisions = [should_increase_degree(n, m, p, count) for count in range(0, 200)]
    first = decisions.index(True)
    assert not any(decisions[:first])
    assert all(decisions[first:])


def test_degree_for_sample_count():
    assert degree_for_sample_count(2, 2, 50) == 4
    assert degree_for_sample_count(2, 2, 1) == 0
    assert degree_for_sample_count(2, 2, 12, oversampling=1.0) == 3


def test_fit_samples_recovers_sphere(rng):
    samples = rng.uniform(-1.0, 1.0, size=(20, 2))
    surrogate = fit_samples(samples, np.sum(samples**2, axis=1), degree=2, m=2)
    assert surrogate.evaluate_cube(np.array([0.2, -0.4])) == pytest.approx(0.2, abs=1e-10)
