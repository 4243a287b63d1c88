import numpy as np
import pytest
from numpy.testing import assert_allclose

from polybo.acquisition import (
    AcquisitionFamily,
    AcquisitionSpec,
    acquisition_value,
    propose_next,
    score_candidates,
)
from polybo.gp import KernelSpec, fit_gp
from polybo.regression import fit_samples

EI = AcquisitionSpec()
PI = AcquisitionSpec(AcquisitionFamily.PROBABILITY_OF_IMPROVEMENT)
UCB = AcquisitionSpec("ucb", ucb_beta=2.0)


def small_model(rng, n=8, m=2, offset=0.0, polynomial=False):
    x = rng.uniform(-1.0, 1.0, size=(n, m))
    y = np.sum(x**2, axis=1) + np.sin(3.0 * x[:, 0]) + offset
    mean_model = fit_samples(x, y, 1, m) if polynomial else None
    return fit_gp(x, y, mean_model, KernelSpec(length_scale=0.5))


def test_expected_improvement_examples():
    assert acquisition_value(EI, 0.0, 1.0, 0.0) == pytest.approx(0.3989422804)
    assert acquisition_value(EI, 0.0, 0.0, 1.0) == pytest.approx(1.0)
    assert acquisition_value(EI, 2.0, 0.0, 1.0) == 0.0


def test_probability_of_improvement_examples():
    assert acquisition_value(PI, 0.0, 1.0, 1.0) == pytest.approx(0.8413447461)
    assert acquisition_value(PI, 0.0, 0.0, 1.0) == 1.0
    assert acquisition_value(PI, 1.0, 0.0, 1.0) == 0.0


def test_ucb_rewards_low_mean_and_high_spread():
    assert acquisition_value(UCB, 1.0, 4.0, 0.0) == pytest.approx(3.0)
    assert acquisition_value(UCB, 0.0, 1.0, 0.0) > acquisition_value(UCB, 1.0, 1.0, 0.0)


def test_expected_improvement_grows_with_uncertainty():
    spreads = np.linspace(0.2, 3.0, 50)
    scores = acquisition_value(EI, np.full(50, 0.5), spreads**2, 0.0)
    assert np.all(np.diff(scores) > 0)


def test_expected_improvement_is_never_negative(rng):
    means = rng.normal(scale=50.0, size=1000)
    variances = rng.uniform(0.0, 1e-3, size=1000)
    assert np.all(acquisition_value(EI, means, variances, 0.0) >= 0.0)


@pytest.mark.parametrize("polynomial", [False, True], ids=["zero_mean", "polynomial_mean"])
def test_expected_improvement_of_fitted_models_is_never_negative(polynomial, rng):
    model = small_model(rng, n=15, polynomial=polynomial)
    points = np.vstack([rng.uniform(-1.0, 1.0, size=(10_000 - 15, 2)), model.training_inputs])
    scores = score_candidates(model, EI, points)
    assert scores.shape == (10_000,)
    assert np.all(np.isfinite(scores))
    assert np.all(scores >= 0.0)


def test_spec_parsing_and_validation():
    assert AcquisitionSpec("ei").family is AcquisitionFamily.EXPECTED_IMPROVEMENT
    assert AcquisitionSpec("PI").family is AcquisitionFamily.PROBABILITY_OF_IMPROVEMENT
    assert AcquisitionSpec().candidates_for(3) == 3000
    with pytest.raises(ValueError):
        AcquisitionSpec("thompson")
    with pytest.raises(ValueError):
        AcquisitionSpec(candidate_count=0)


def test_score_candidates_shape(rng):
    model = small_model(rng)
    assert score_candidates(model, EI, rng.uniform(-1, 1, size=(17, 2))).shape == (17,)


@pytest.mark.parametrize("spec", [EI, PI, UCB], ids=["ei", "pi", "ucb"])
def test_proposal_is_deterministic_and_feasible(spec, rng):
    model = small_model(rng)
    a = propose_next(model, spec, [7, 3])
    b = propose_next(model, spec, [7, 3])
    assert_allclose(a, b)
    assert a.shape == (2,)
    assert np.all(np.abs(a) <= 1.0)


def test_single_candidate_is_returned(rng):
    model = small_model(rng)
    spec = AcquisitionSpec(candidate_count=1, refine=False)
    expected = np.random.default_rng(11).uniform(-1.0, 1.0, size=(1, 2))[0]
    assert_allclose(propose_next(model, spec, 11), expected)


def test_polish_never_lowers_the_score(rng):
    model = small_model(rng)
    rough = propose_next(model, AcquisitionSpec(refine=False), 5)
    polished = propose_next(model, AcquisitionSpec(refine=True), 5)
    assert score_candidates(model, EI, polished)[0] >= score_candidates(model, EI, rough)[0]


def test_proposal_ignores_constant_shift_of_observations():
    spec = AcquisitionSpec(candidate_count=200, refine=False)
    rng_a, rng_b = np.random.default_rng(3), np.random.default_rng(3)
    a = propose_next(small_model(rng_a, polynomial=True), spec, 9)
    b = propose_next(small_model(rng_b, offset=100.0, polynomial=True), spec, 9)
    assert_allclose(a, b)


def test_single_training_point_is_not_proposed_again():
    x0 = np.array([0.2, -0.3])
    model = fit_gp(x0[None, :], [1.0], None, KernelSpec())
    proposal = propose_next(model, EI, 1)
    assert np.linalg.norm(proposal - x0) > 1e-6
