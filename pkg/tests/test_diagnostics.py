import math

import numpy as np
import pytest

from netwealth import (
    SeriesTable,
    WeightedSample,
    empirical_gini,
    empirical_lorenz,
    index_numbers,
    mean_excess_series,
    summary_stats,
    top_share,
    zipf_series,
)
from netwealth.errors import DomainError, IndexBaseError, InsufficientDataError, MeanSignError, ZeroVarianceError
from reference_fits import find, params_of

K84 = params_of(find(1984, "kgen"))


@pytest.fixture(scope="module")
def k84_draws():
    return K84.sample(100_000, seed=1984)


def test_summary_hand_example():
    s = summary_stats(WeightedSample([-1.0, 0.0, 1.0, 2.0]))
    assert s.mean == 0.5
    assert (s.share_negative, s.share_zero, s.share_positive) == (0.25, 0.25, 0.5)
    assert s.median == 0.0
    assert s.skewness == pytest.approx(0.0, abs=1e-15)
    assert s.kurtosis == pytest.approx((2 * 1.5**4 + 2 * 0.5**4) / 4 / 1.25**2)
    assert s.n_obs == 4


def test_summary_shares_sum_to_one(k84_draws):
    s = summary_stats(k84_draws)
    assert s.share_negative + s.share_zero + s.share_positive == 1.0


def test_summary_constant_sample():
    with pytest.raises(ZeroVarianceError):
        summary_stats(WeightedSample([3.0, 3.0, 3.0]))


def test_weighted_median_lower_interpolation():
    s = summary_stats(WeightedSample([1.0, 2.0, 3.0, 4.0]))
    assert s.median == 2.0


# -- Lorenz / Gini -----------------------------------------------------------------------
def test_lorenz_hand_examples():
    assert empirical_lorenz(WeightedSample([1.0] * 4), [0.5]).y[0] == 0.5
    assert empirical_lorenz(WeightedSample([-1.0, 3.0]), [0.5]).y[0] == -0.5


def test_lorenz_reaches_one_and_increases_past_rho(k84_draws):
    lor = empirical_lorenz(k84_draws, np.linspace(0, 1, 2001))
    assert lor.y[-1] == pytest.approx(1.0, abs=1e-12)
    rho = np.mean(k84_draws.values <= 0)
    assert np.all(np.diff(lor.y[lor.x >= rho]) >= 0)
    assert lor.y.min() < 0


def test_lorenz_close_to_model(k84_draws):
    u = np.linspace(0, 1, 1001)
    gap = np.max(np.abs(empirical_lorenz(k84_draws, u).y - K84.lorenz(u)))
    assert gap < 0.01


def test_lorenz_partial_sums_close_to_model(k84_draws):
    # tail index below 2: the sample mean is the noisy part, so compare
    # cumulative sums scaled by the model mean, away from the top decile
    u = np.linspace(0, 0.9, 901)
    scaled = empirical_lorenz(k84_draws, u).y * k84_draws.weighted_mean() / K84.mean
    assert np.max(np.abs(scaled - K84.lorenz(u))) < 0.005


def test_gini_hand_examples():
    assert empirical_gini(WeightedSample([0.0, 2.0])) == pytest.approx(0.5)
    assert empirical_gini(WeightedSample([4.0] * 5)) == pytest.approx(0.0, abs=1e-15)


def test_gini_monte_carlo(k84_draws):
    assert empirical_gini(k84_draws) == pytest.approx(0.741, abs=0.01)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_gini_matches_lorenz_area(seed):
    rng = np.random.default_rng(seed)
    s = WeightedSample(rng.lognormal(0, 1.2, 400), rng.uniform(0.2, 4.0, 400))
    u = np.linspace(0, 1, 200_001)
    area = np.trapezoid(empirical_lorenz(s, u).y, u)
    assert abs(empirical_gini(s) - (1 - 2 * area)) <= 2 / s.effective_size


def test_normalized_gini_by_hand():
    s = WeightedSample([-1.0, 0.0, 2.0, 3.0])
    mu = 1.0
    plain = empirical_gini(s)
    assert empirical_gini(s, normalized=True) == pytest.approx(plain / (1 - 0.5 * (-0.25 / mu)))


def test_mean_sign_errors():
    s = WeightedSample([-3.0, 1.0])
    for f in (empirical_gini, empirical_lorenz, top_share):
        with pytest.raises(MeanSignError):
            f(s)


def test_top_share_examples(k84_draws):
    assert top_share(WeightedSample([0.0, 0.0, 0.0, 10.0]), 0.25) == pytest.approx(1.0)
    assert top_share(WeightedSample([5.0] * 10), 0.3) == pytest.approx(0.3)
    assert top_share(k84_draws) == pytest.approx(1 - K84.lorenz(0.8), abs=0.01)
    with pytest.raises(DomainError):
        top_share(k84_draws, 1.0)


# -- mean excess / Zipf --------------------------------------------------------------------
def test_mean_excess_hand_example():
    me = mean_excess_series(WeightedSample([1.0, 3.0]))
    assert me.points == [(1.0, 2.0)]


def test_mean_excess_exponential_flat():
    x = np.random.default_rng(0).exponential(1.0, 100_000)
    me = mean_excess_series(WeightedSample(x))
    lo, hi = np.quantile(me.x, [0.1, 0.9])
    mid = (me.x >= lo) & (me.x <= hi)
    assert np.all(np.abs(me.y[mid] - 1.0) <= 0.1)


def test_mean_excess_pareto_slope():
    gamma = 4.0
    x = np.random.default_rng(1).pareto(gamma, 200_000) + 1.0
    me = mean_excess_series(WeightedSample(x), trim=0.05)
    slope = np.polyfit(me.x, me.y, 1)[0]
    assert slope == pytest.approx(1 / (gamma - 1), rel=0.1)


def test_mean_excess_bounded_support_decreasing():
    x = np.random.default_rng(2).uniform(0, 1, 50_000)
    me = mean_excess_series(WeightedSample(x))
    high = me.x > 0.5
    assert np.polyfit(me.x[high], me.y[high], 1)[0] < 0


def test_mean_excess_trim():
    x = np.arange(1.0, 101.0)
    assert mean_excess_series(WeightedSample(x), trim=0.0).x[-1] == 99.0
    assert mean_excess_series(WeightedSample(x), trim=0.1).x[-1] == 89.0


def test_zipf_hand_example():
    z = zipf_series(WeightedSample([1.0, math.e]))
    assert z.x.tolist() == pytest.approx([0.0, 1.0])
    assert z.y.tolist() == pytest.approx([0.0, math.log(0.5)])


def test_zipf_pareto_slope():
    x = np.random.default_rng(3).pareto(2.0, 100_000) + 1.0
    z = zipf_series(WeightedSample(x))
    upper = (z.x >= math.log(10)) & (z.x <= math.log(100))
    slope = np.polyfit(z.x[upper], z.y[upper], 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.1)


@pytest.mark.parametrize("f", [mean_excess_series, zipf_series])
def test_needs_two_positives(f):
    with pytest.raises(InsufficientDataError):
        f(WeightedSample([-1.0, 0.0, 5.0]))


def test_weight_rescaling_invariance():
    rng = np.random.default_rng(4)
    s = WeightedSample(rng.normal(2, 3, 300), rng.uniform(0.5, 2, 300))
    t = WeightedSample(s.values, 123.0 * s.weights)
    assert summary_stats(s) == summary_stats(t) or summary_stats(s).as_dict() == pytest.approx(summary_stats(t).as_dict())
    assert empirical_gini(s, True) == pytest.approx(empirical_gini(t, True), rel=1e-12)
    assert np.allclose(empirical_lorenz(s).y, empirical_lorenz(t).y, rtol=1e-12)
    assert top_share(s) == pytest.approx(top_share(t), rel=1e-12)
    assert np.allclose(mean_excess_series(s).y, mean_excess_series(t).y, rtol=1e-12)
    assert np.allclose(zipf_series(s).y, zipf_series(t).y, rtol=1e-12)


# -- index numbers / series tables ---------------------------------------------------------
def test_index_numbers():
    t = SeriesTable("mean", [1984, 1989, 2007], [50.0, 60.0, 100.0])
    idx = index_numbers(t, 1984)
    assert idx.y.tolist() == [100.0, 120.0, 200.0]
    assert idx.x.tolist() == t.x.tolist()


@pytest.mark.parametrize("base,ys", [(1990, [1.0, 2.0]), (1984, [0.0, 2.0])])
def test_index_base_errors(base, ys):
    with pytest.raises(IndexBaseError):
        index_numbers(SeriesTable("s", [1984, 1989], ys), base)


def test_series_table_round_trip(tmp_path):
    t = SeriesTable("zipf curve", [0.1, 0.2, 1 / 3], [1.0, -2.5, math.pi])
    path = tmp_path / "t.txt"
    t.write(path)
    back = SeriesTable.from_text(path.read_text())
    assert back.label == "zipf curve"
    assert back.points == t.points


def test_series_table_needs_increasing_x():
    with pytest.raises(DomainError):
        SeriesTable("bad", [1.0, 1.0], [2.0, 3.0])
