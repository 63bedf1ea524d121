"""Model selection and goodness of fit.

AIC/BIC, the Vuong test for non-nested models, the RMSE between model and
weighted empirical CDFs, a weighted Anderson-Darling statistic, and
bootstrap p-values for it.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .branches import make_rng
from .errors import (
    BoundaryError,
    ConvergenceError,
    DegenerateComparisonError,
    DomainError,
    InsufficientDataError,
    UnreliablePValueError,
)
from .estimation import FitConfig, fit_mixture, pointwise_loglik
from .sample import WeightedSample

__all__ = [
    "GofReport",
    "VuongResult",
    "BootstrapResult",
    "information_criteria",
    "vuong_test",
    "empirical_cdf_at_obs",
    "rmse_cdf",
    "anderson_darling",
    "bootstrap_pvalue",
    "gof_report",
    "MAX_FAILURE_SHARE",
]

MAX_FAILURE_SHARE = 0.2


@dataclass(frozen=True)
class GofReport:
    aic: float
    bic: float
    rmse: float
    ad_statistic: float
    ad_pvalue: float
    bootstrap_replications: int
    bootstrap_failures: int = 0

    @property
    def pvalue_granularity(self):
        return 1.0 / self.bootstrap_replications if self.bootstrap_replications else float("nan")


@dataclass(frozen=True)
class VuongResult:
    statistic: float
    pvalue: float
    favored: str  # "model-A", "model-B" or "indistinguishable"
    level: float = 0.05


@dataclass(frozen=True)
class BootstrapResult:
    pvalue: float
    observed: float
    replicates: np.ndarray
    failures: int
    method: str

    @property
    def replications(self):
        return self.replicates.size + self.failures

    @property
    def granularity(self):
        return 1.0 / self.replicates.size


def information_criteria(loglik, n_params, n_obs):
    """``(AIC, BIC)`` from a maximized log-likelihood."""
    if n_obs < 1:
        raise DomainError("n_obs must be >= 1")
    return -2.0 * loglik + 2.0 * n_params, -2.0 * loglik + math.log(n_obs) * n_params


def vuong_test(sample, model_a, model_b, level=0.05):
    """Vuong statistic for ``model_a`` versus ``model_b``.

    Positive values favour ``model_a``. Weights are rescaled to sum to N.
    """
    m = pointwise_loglik(model_a, sample.values) - pointwise_loglik(model_b, sample.values)
    w = sample.normalized_weights()
    total = float(np.dot(w, m))
    mbar = total / sample.n
    ss = float(np.dot(w, (m - mbar) ** 2))
    if ss == 0.0:
        if np.all(m == 0):
            return VuongResult(0.0, 1.0, "indistinguishable", level)
        raise DegenerateComparisonError("log-likelihood ratios have zero variance")
    z = total / math.sqrt(ss)
    p = float(2.0 * stats.norm.sf(abs(z)))
    favored = "indistinguishable" if p >= level else ("model-A" if z > 0 else "model-B")
    return VuongResult(z, p, favored, level)


def empirical_cdf_at_obs(sample):
    """Weighted empirical CDF ``F_N(w_i)`` at every (sorted) observation; ties share the top value."""
    cum = np.cumsum(sample.probabilities)
    v = sample.values
    last = np.searchsorted(v, v, side="right") - 1
    out = cum[last]
    out[-1] = 1.0
    return np.minimum(out, 1.0)


def rmse_cdf(sample, model):
    """Root mean squared gap between ``model.cdf`` and the weighted empirical CDF."""
    diff = np.asarray(model.cdf(sample.values), dtype=float) - empirical_cdf_at_obs(sample)
    return float(math.sqrt(np.mean(diff * diff)))


def _ad_antiderivative(c, t, s):
    # antiderivative of (c - t)^2 / (t (1 - t)) in t, with s = 1 - t carried
    # separately for accuracy; 0 * log 0 terms are dropped
    with np.errstate(divide="ignore", invalid="ignore"):
        lt = np.where(c != 0, c * c * np.log(t), 0.0)
        ls = np.where(c != 1, (1.0 - c) ** 2 * np.log(s), 0.0)
    return -t + lt - ls


def _ad_pieces(sample, model):
    """Pieces of the AD integral in t = F*(w).

    Returns ``(c, t_lo, s_lo, t_hi, s_hi, atom)`` where on each piece the
    empirical CDF is the constant ``c``; ``atom`` is ``(c0, theta2, rho)``
    for a point mass at zero or ``None``.
    """
    v = sample.values
    uniq, first = np.unique(v, return_index=True)
    cum = np.concatenate([[0.0], np.cumsum(sample.probabilities)])
    last = np.append(first[1:], v.size)
    c_at = cum[last]
    c_at[-1] = 1.0
    t_obs = np.asarray(model.cdf(uniq), dtype=float)
    s_obs = np.asarray(model.sf(uniq), dtype=float)
    bad = (t_obs <= 0) | (s_obs <= 0)
    if np.any(bad):
        raise BoundaryError(f"model CDF is 0 or 1 at observation w = {uniq[np.argmax(bad)]!r}")

    theta2 = float(getattr(model, "theta2", 0.0))
    atom = None
    breaks, c_vals = list(uniq), list(c_at)
    if theta2 > 0:
        if 0.0 in set(uniq.tolist()):
            c0 = c_vals[breaks.index(0.0)]
        else:
            k = int(np.searchsorted(uniq, 0.0))
            c0 = 0.0 if k == 0 else c_vals[k - 1]
            breaks.insert(k, 0.0)
            c_vals.insert(k, c0)
        atom = (c0, theta2, model.rho)
    breaks = np.asarray(breaks)
    c_vals = np.asarray(c_vals)
    t_b = np.asarray(model.cdf(breaks), dtype=float)
    s_b = np.asarray(model.sf(breaks), dtype=float)
    # left limits of F* at each break; only the atom at zero differs
    t_left, s_left = t_b.copy(), s_b.copy()
    if atom is not None:
        z = breaks == 0.0
        t_left[z] = model.theta1
        s_left[z] = 1.0 - model.theta1
    c = np.concatenate([[0.0], c_vals])
    t_lo = np.concatenate([[0.0], t_b])
    s_lo = np.concatenate([[1.0], s_b])
    t_hi = np.concatenate([t_left, [1.0]])
    s_hi = np.concatenate([s_left, [0.0]])
    return c, t_lo, s_lo, t_hi, s_hi, atom


def anderson_darling(sample, model):
    """Weighted Anderson-Darling statistic ``A^2`` against ``model``.

    ``A^2 = N * integral (F_N - F*)^2 / (F* (1 - F*)) dF*``, evaluated exactly
    piece by piece over the stretches where the weighted step function
    ``F_N`` is constant. A point mass of the model at zero contributes
    ``theta2`` times the integrand at the right limit ``F*(0) = rho``. With
    unit weights this is the classical statistic.
    """
    c, t_lo, s_lo, t_hi, s_hi, atom = _ad_pieces(sample, model)
    keep = t_hi > t_lo
    c, t_lo, s_lo, t_hi, s_hi = c[keep], t_lo[keep], s_lo[keep], t_hi[keep], s_hi[keep]
    total = float(np.sum(_ad_antiderivative(c, t_hi, s_hi) - _ad_antiderivative(c, t_lo, s_lo)))
    if atom is not None:
        c0, theta2, rho = atom
        total += theta2 * (c0 - rho) ** 2 / (rho * (1.0 - rho))
    return sample.n * total


def _resample(sample, rng):
    idx = rng.integers(0, sample.n, size=sample.n)
    return WeightedSample(sample.values[idx], sample.weights[idx])


def _parametric_draw(sample, model, rng):
    vals = np.asarray(model.sample(sample.n, rng).values)
    w = sample.weights[rng.integers(0, sample.n, size=sample.n)]
    return WeightedSample(vals, w)


def _replicate(args):
    sample, family, model, cfg, seed_seq, method = args
    rng = make_rng(seed_seq)
    rep = _resample(sample, rng) if method == "nonparametric" else _parametric_draw(sample, model, rng)
    try:
        fit = fit_mixture(rep, family, cfg)
        return anderson_darling(rep, fit.params)
    except (ConvergenceError, InsufficientDataError, BoundaryError, DomainError, ArithmeticError):
        return None


def bootstrap_pvalue(
    sample,
    family,
    B=100,
    seed=0,
    statistic="AD",
    cfg=FitConfig(),
    method="nonparametric",
    fit=None,
    workers=1,
    warm_start=True,
):
    """Bootstrap p-value of the Anderson-Darling statistic for ``family``.

    ``method="nonparametric"`` resamples (value, weight) pairs from the data;
    ``method="parametric"`` draws values from the fitted mixture (weights
    resampled alongside). Every replicate is refitted and compared with its
    own fit. Replicate ``b`` uses the ``b``-th child of ``SeedSequence(seed)``,
    so results do not depend on ``workers``.
    """
    if statistic != "AD":
        raise DomainError("only the Anderson-Darling statistic is supported")
    if B < 1:
        raise DomainError("B must be >= 1")
    if method not in ("nonparametric", "parametric"):
        raise DomainError("method must be 'nonparametric' or 'parametric'")
    if fit is None:
        fit = fit_mixture(sample, family, cfg)
    observed = anderson_darling(sample, fit.params)
    rep_cfg = replace(cfg, init_strategy="user-supplied", initial=fit.params) if warm_start else cfg
    children = np.random.SeedSequence(seed).spawn(B)
    jobs = [(sample, family, fit.params, rep_cfg, ss, method) for ss in children]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_replicate, jobs, chunksize=max(1, B // (4 * workers))))
    else:
        results = [_replicate(j) for j in jobs]
    reps = np.array([r for r in results if r is not None], dtype=float)
    failures = B - reps.size
    if failures > MAX_FAILURE_SHARE * B:
        raise UnreliablePValueError(f"{failures} of {B} bootstrap refits failed")
    p = float(np.mean(reps > observed))
    return BootstrapResult(p, observed, reps, failures, method)


def gof_report(sample, fit, B=100, seed=0, cfg=FitConfig(), method="nonparametric", workers=1):
    aic, bic = information_criteria(fit.loglik, fit.n_params, sample.n)
    boot = bootstrap_pvalue(sample, fit.family, B, seed, cfg=cfg, method=method, fit=fit, workers=workers)
    return GofReport(aic, bic, rmse_cdf(sample, fit.params), boot.observed, boot.pvalue, B, boot.failures)
