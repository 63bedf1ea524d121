import math
from dataclasses import replace

import numpy as np
import pytest

from netwealth import (
    FitConfig,
    KappaGen,
    MixtureParams,
    SinghMaddala,
    WeibullNeg,
    WeightedSample,
    estimate_proportions,
    fit_mixture,
    fit_positive_branch,
    fit_weibull_negative,
    weighted_loglik,
)
from netwealth.errors import ConvergenceError, DomainError, ImpossibleLikelihoodError, InsufficientDataError
from reference_fits import find, params_of

K84 = params_of(find(1984, "kgen"))


@pytest.fixture(scope="module")
def k84_sample():
    return K84.sample(20_000, seed=2024)


@pytest.fixture(scope="module")
def k84_fit(k84_sample):
    return fit_mixture(k84_sample, "kgen")


# -- proportions and likelihood -----------------------------------------------
def test_proportions_hand_count():
    assert estimate_proportions(WeightedSample([-1.0, 0.0, 2.0, 3.0])) == (0.25, 0.25)
    assert estimate_proportions(WeightedSample([1.0, 2.0])) == (0.0, 0.0)


def test_proportions_are_weighted():
    s = WeightedSample([-1.0, 0.0, 2.0, 3.0], [3.0, 1.0, 2.0, 2.0])
    assert estimate_proportions(s) == (0.375, 0.125)


def test_loglik_single_observation():
    br = SinghMaddala(1.5, 2.0, 1.2)
    m = MixtureParams(0.0, 0.0, None, br)
    assert weighted_loglik(m, WeightedSample([3.3])) == pytest.approx(float(br.logpdf(3.3)), rel=1e-15)


def test_loglik_linear_in_raw_weights(k84_sample):
    s2 = WeightedSample(k84_sample.values, 2 * k84_sample.weights)
    one = weighted_loglik(K84, k84_sample, normalize=False)
    assert weighted_loglik(K84, s2, normalize=False) == pytest.approx(2 * one, rel=1e-13)
    assert weighted_loglik(K84, s2) == pytest.approx(one, rel=1e-13)


def test_loglik_decomposition_by_hand():
    m = MixtureParams(0.2, 0.3, WeibullNeg(1.0, 2.0), SinghMaddala(1.0, 1.0, 2.0))
    s = WeightedSample([-1.0, 0.0, 1.0], [1.0, 2.0, 3.0])
    # weights rescaled to sum to 3: (0.5, 1.0, 1.5)
    neg = math.log(0.2) + math.log(0.5) - 0.5
    zero = math.log(0.3)
    pos = math.log(0.5) + math.log(2.0) - 3 * math.log(2.0)
    assert weighted_loglik(m, s) == pytest.approx(0.5 * neg + 1.0 * zero + 1.5 * pos, rel=1e-14)


def test_impossible_likelihood():
    m = MixtureParams(0.2, 0.0, WeibullNeg(1.0, 2.0), SinghMaddala(1.0, 1.0, 2.0))
    with pytest.raises(ImpossibleLikelihoodError):
        weighted_loglik(m, WeightedSample([-1.0, 0.0, 1.0]))
    m = MixtureParams(0.0, 0.2, None, SinghMaddala(1.0, 1.0, 2.0))
    with pytest.raises(ImpossibleLikelihoodError):
        weighted_loglik(m, WeightedSample([-1.0, 1.0]))


def test_truth_beats_perturbations_mostly():
    s = K84.sample(10_000, seed=99)
    base = weighted_loglik(K84, s)
    wins = trials = 0
    for f in (0.9, 1.1):
        wb = K84.weibull
        pb = K84.positive
        variants = [
            replace(K84, theta1=K84.theta1 * f),
            replace(K84, theta2=K84.theta2 * f),
            replace(K84, weibull=WeibullNeg(wb.s * f, wb.lam)),
            replace(K84, weibull=WeibullNeg(wb.s, wb.lam * f)),
            replace(K84, positive=KappaGen(pb.alpha * f, pb.beta, pb.kappa)),
            replace(K84, positive=KappaGen(pb.alpha, pb.beta * f, pb.kappa)),
            replace(K84, positive=KappaGen(pb.alpha, pb.beta, pb.kappa * f)),
        ]
        for v in variants:
            trials += 1
            wins += base >= weighted_loglik(v, s)
    assert wins > trials / 2


# -- Weibull block --------------------------------------------------------------------
def test_weibull_recovery_exponential_magnitudes():
    rng = np.random.default_rng(5)
    s = WeightedSample(-rng.exponential(2.0, 10_000))
    fit = fit_weibull_negative(s)
    se = fit.std_errors
    assert abs(fit.params.s - 1.0) < 3 * se[0]
    assert abs(fit.params.lam - 2.0) < 3 * se[1]
    assert fit.gradient_norm <= FitConfig().gradient_tolerance


def test_weibull_profile_stationarity_at_unit_shape():
    # with s = 1 the lambda-score vanishes at the weighted mean magnitude
    rng = np.random.default_rng(6)
    x = rng.gamma(2.0, 3.0, 500)
    p = rng.uniform(0.5, 2.0, 500)
    p /= p.sum()
    score = p @ WeibullNeg(1.0, float(p @ x)).score(x)
    assert abs(score[1]) < 1e-12


def test_weibull_zero_spread():
    with pytest.raises(ConvergenceError):
        fit_weibull_negative(WeightedSample(np.full(12, -3.0)))


def test_weibull_needs_ten_negatives():
    with pytest.raises(InsufficientDataError):
        fit_weibull_negative(WeightedSample(-np.arange(1.0, 10.0)))


def test_weibull_standard_error_coverage():
    truth = WeibullNeg(0.6, 5000.0)
    hits = np.zeros(2)
    reps = 200
    for r in range(reps):
        rng = np.random.default_rng(1000 + r)
        x = truth.lam * rng.weibull(truth.s, 1000)
        fit = fit_weibull_negative(WeightedSample(-x))
        est = np.array([fit.params.s, fit.params.lam])
        hits += np.abs(est - [truth.s, truth.lam]) <= 1.96 * fit.std_errors
    cover = hits / reps
    assert np.all((cover >= 0.90) & (cover <= 0.99)), cover


# -- positive block ------------------------------------------------------------------------
def test_positive_needs_thirty():
    with pytest.raises(InsufficientDataError):
        fit_positive_branch(WeightedSample(np.arange(1.0, 30.0)), "sm")


def test_positive_single_value():
    with pytest.raises(ConvergenceError):
        fit_positive_branch(WeightedSample(np.full(40, 7.0)), "dagum")


def test_unknown_family():
    with pytest.raises(DomainError):
        fit_positive_branch(WeightedSample(np.arange(1.0, 50.0)), "lognormal")


def test_misspecified_family_fits_worse():
    truth = MixtureParams(0.0, 0.0, None, SinghMaddala(1.0, 1.0, 2.0))
    gaps = []
    for seed in range(3):
        s = truth.sample(5000, seed=seed)
        gaps.append(fit_positive_branch(s, "sm").loglik - fit_positive_branch(s, "dagum").loglik)
    assert np.mean(gaps) > 0


def test_convergence_error_carries_last_iterate():
    s = MixtureParams(0.0, 0.0, None, SinghMaddala(1.0, 1.0, 2.0)).sample(2000, seed=3)
    with pytest.raises(ConvergenceError) as info:
        fit_positive_branch(s, "sm", FitConfig(max_iterations=1))
    assert isinstance(info.value.last_iterate, SinghMaddala)


# -- full mixture ------------------------------------------------------------------------------
def test_factorization_identity(k84_fit):
    c = k84_fit.component_loglik
    assert k84_fit.loglik == pytest.approx(c["negative"] + c["positive"] + c["proportions"], rel=1e-12)


def test_fit_result_shape(k84_fit):
    assert k84_fit.n_params == 7
    assert k84_fit.param_names == ("theta1", "theta2", "s", "lambda", "alpha", "beta", "kappa")
    cov = k84_fit.covariance
    assert np.allclose(cov, cov.T)
    assert np.all(np.linalg.eigvalsh(cov) >= -1e-12 * np.abs(cov).max())
    assert np.allclose(list(k84_fit.std_errors.values()), np.sqrt(np.diag(cov)))
    assert k84_fit.converged and not k84_fit.saddle_point


def test_proportion_covariance_is_multinomial(k84_fit, k84_sample):
    t1, t2 = estimate_proportions(k84_sample)
    n = k84_sample.effective_size
    cov = k84_fit.covariance
    assert cov[0, 0] == pytest.approx(t1 * (1 - t1) / n)
    assert cov[1, 1] == pytest.approx(t2 * (1 - t2) / n)
    assert cov[0, 1] == pytest.approx(-t1 * t2 / n)


def test_recovery_within_three_se():
    s = K84.sample(100_000, seed=77)
    fit = fit_mixture(s, "kgen")
    truth = K84.as_dict()
    se = fit.std_errors
    for name, est in fit.estimates().items():
        assert abs(est - truth[name]) < 3 * se[name], name


def test_weight_scaling_invariance(k84_sample, k84_fit):
    scaled = WeightedSample(k84_sample.values, 37.5 * k84_sample.weights)
    fit = fit_mixture(scaled, "kgen")
    for k, v in k84_fit.estimates().items():
        assert fit.estimates()[k] == pytest.approx(v, rel=1e-8)
        assert fit.std_errors[k] == pytest.approx(k84_fit.std_errors[k], rel=1e-6)


def test_init_strategy_invariance(k84_sample, k84_fit):
    for cfg in (FitConfig(init_strategy="fixed-default"), FitConfig(init_strategy="user-supplied", initial=K84)):
        fit = fit_mixture(k84_sample, "kgen", cfg)
        for k, v in k84_fit.estimates().items():
            assert fit.estimates()[k] == pytest.approx(v, rel=1e-4), (cfg.init_strategy, k)


def test_no_zeros_means_no_atom():
    m = replace(K84, theta2=0.0)
    s = m.sample(5000, seed=4)
    fit = fit_mixture(s, "kgen")
    assert fit.params.theta2 == 0.0
    w = s.normalized_weights()
    v = s.values
    expected = w[v < 0].sum() * math.log(fit.params.theta1) + w[v > 0].sum() * math.log(fit.params.theta3)
    assert fit.component_loglik["proportions"] == pytest.approx(expected, rel=1e-12)


def test_no_negatives_drops_weibull_block():
    m = MixtureParams(0.0, 0.1, None, SinghMaddala(1.5, 10.0, 2.0))
    fit = fit_mixture(m.sample(3000, seed=8), "sm")
    assert fit.n_params == 5
    assert not fit.has_negative_block
    assert fit.params.weibull is None


@pytest.mark.parametrize(
    "kwargs",
    [dict(max_iterations=0), dict(gradient_tolerance=0.0), dict(step_tolerance=-1.0), dict(init_strategy="x"), dict(init_strategy="user-supplied")],
)
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        FitConfig(**kwargs)
