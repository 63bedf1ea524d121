"""Weighted maximum-likelihood fitting of the net-wealth mixture.

The likelihood factorizes over the three disjoint supports, so the joint
MLE is assembled from independent pieces:

* mixture proportions are the weighted sample shares,
* the Weibull block is fitted to the magnitudes of the negative values,
* the positive branch is fitted to the positive values.

Both continuous blocks are maximized by a damped Newton iteration in
unconstrained coordinates (logs, and logit for kappa). The Hessian comes
from central differences of the analytic score; covariances are the
negative inverse Hessian mapped back to natural parameters by the delta
method.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .branches import FAMILIES, Dagum, KappaGen, SinghMaddala, WeibullNeg
from .errors import ConvergenceError, DomainError, ImpossibleLikelihoodError, InsufficientDataError
from .mixture import MixtureParams
from .sample import WeightedSample

__all__ = [
    "WeightedSample",
    "FitConfig",
    "BranchFit",
    "FitResult",
    "SaddlePointWarning",
    "estimate_proportions",
    "pointwise_loglik",
    "weighted_loglik",
    "fit_weibull_negative",
    "fit_positive_branch",
    "fit_mixture",
    "MIN_NEGATIVES",
    "MIN_POSITIVES",
]

log = logging.getLogger(__name__)

MIN_NEGATIVES = 10
MIN_POSITIVES = 30
INIT_STRATEGIES = ("moment-matching", "fixed-default", "user-supplied")
EULER_GAMMA = 0.5772156649015329


class SaddlePointWarning(RuntimeWarning):
    """Hessian at the reported optimum is not negative definite."""


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 100
    gradient_tolerance: float = 1e-8
    step_tolerance: float = 1e-12
    init_strategy: str = "moment-matching"
    # starting point for init_strategy="user-supplied"; also used by the
    # bootstrap to warm-start replicate fits
    initial: MixtureParams | None = None
    normalize_weights: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if not (self.gradient_tolerance > 0 and self.step_tolerance > 0):
            raise DomainError("tolerances must be positive")
        if self.init_strategy not in INIT_STRATEGIES:
            raise DomainError(f"init_strategy must be one of {INIT_STRATEGIES}")
        if self.init_strategy == "user-supplied" and self.initial is None:
            raise DomainError("init_strategy='user-supplied' needs initial parameters")


@dataclass(frozen=True)
class BranchFit:
    params: object
    covariance: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    gradient_norm: float
    saddle_point: bool = False

    @property
    def std_errors(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))


@dataclass(frozen=True)
class FitResult:
    params: MixtureParams
    param_names: tuple
    covariance: np.ndarray
    loglik: float
    n_params: int
    converged: bool
    iterations: int
    n_obs: int
    effective_size: float
    component_loglik: dict = field(default_factory=dict)
    saddle_point: bool = False
    has_negative_block: bool = True
    weights_normalized: bool = True

    @property
    def family(self):
        return self.params.family

    @property
    def std_errors(self):
        se = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        return dict(zip(self.param_names, se))

    def estimates(self):
        d = self.params.as_dict()
        return {k: d[k] for k in self.param_names}


# -- likelihood -------------------------------------------------------------


def _weights(sample, normalize):
    return sample.normalized_weights() if normalize else np.asarray(sample.weights)


def estimate_proportions(sample):
    """Weighted shares of negative and exactly-zero observations."""
    p = sample.probabilities
    v = sample.values
    return float(p[v < 0].sum()), float(p[v == 0].sum())


def pointwise_loglik(m, values):
    """``log f(w_i)`` including the log mixture proportion of each point."""
    v = np.asarray(values, dtype=float)
    out = np.empty_like(v)
    neg, zero, pos = v < 0, v == 0, v > 0
    for mask, mass, what in ((neg, m.theta1, "negative"), (zero, m.theta2, "zero"), (pos, m.theta3, "positive")):
        if np.any(mask) and not mass > 0:
            raise ImpossibleLikelihoodError(f"{what} observations present but the model gives them zero mass")
    if np.any(neg):
        out[neg] = math.log(m.theta1) + np.asarray(m.weibull.logpdf(v[neg]))
    if np.any(zero):
        out[zero] = math.log(m.theta2)
    if np.any(pos):
        out[pos] = math.log(m.theta3) + np.asarray(m.positive.logpdf(v[pos]))
    return out


def weighted_loglik(m, sample, normalize=True):
    """Weighted log-likelihood; weights rescaled to sum to N unless ``normalize=False``."""
    w = _weights(sample, normalize)
    return float(np.dot(w, pointwise_loglik(m, sample.values)))


# -- optimizer --------------------------------------------------------------


def _fd_hessian(grad, x, h=1e-5):
    k = x.size
    H = np.empty((k, k))
    for j in range(k):
        e = np.zeros(k)
        e[j] = h
        H[:, j] = (grad(x + e) - grad(x - e)) / (2.0 * h)
    return 0.5 * (H + H.T)


def _newton_maximize(fun, grad, x0, cfg):
    """Maximize ``fun`` by Newton steps with eigenvalue shifting and backtracking.

    Falls back to BFGS after repeated failed steps. Returns
    ``(x, iterations, converged)``.
    """
    x = np.asarray(x0, dtype=float)
    f = fun(x)
    if not np.isfinite(f):
        raise ConvergenceError("objective not finite at the starting point", x)
    failures = 0
    for it in range(1, cfg.max_iterations + 1):
        g = grad(x)
        if np.max(np.abs(g)) <= cfg.gradient_tolerance:
            return x, it - 1, True
        H = _fd_hessian(grad, x)
        if not np.all(np.isfinite(H)):
            failures += 1
            H = -np.eye(x.size)
        evals, evecs = np.linalg.eigh(H)
        floor = max(1e-8, 1e-6 * np.max(np.abs(evals)))
        shifted = np.minimum(evals, -floor)
        d = -evecs @ ((evecs.T @ g) / shifted)
        norm = np.max(np.abs(d))
        if norm > 2.0:
            d *= 2.0 / norm
        slope = float(g @ d)
        t = 1.0
        for _ in range(40):
            xn = x + t * d
            fn = fun(xn)
            if np.isfinite(fn) and fn >= f + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            fn = -np.inf
        if not np.isfinite(fn):
            failures += 1
            if failures >= 3:
                return _bfgs_fallback(fun, grad, x, cfg, it)
            continue
        if np.max(np.abs(xn - x)) <= cfg.step_tolerance * (1.0 + np.max(np.abs(x))):
            x = xn
            g = grad(x)
            return x, it, bool(np.max(np.abs(g)) <= cfg.gradient_tolerance * 10)
        x, f = xn, fn
    g = grad(x)
    return x, cfg.max_iterations, bool(np.max(np.abs(g)) <= cfg.gradient_tolerance)


def _bfgs_fallback(fun, grad, x, cfg, used):
    log.debug("Newton stalled after %d iterations; switching to BFGS", used)
    res = optimize.minimize(
        lambda y: -fun(y),
        x,
        jac=lambda y: -grad(y),
        method="BFGS",
        options={"gtol": cfg.gradient_tolerance, "maxiter": 50 * cfg.max_iterations},
    )
    g = grad(res.x)
    return res.x, used + int(res.nit), bool(np.all(np.isfinite(g)) and np.max(np.abs(g)) <= cfg.gradient_tolerance)


def _fit_block(cls, data, weights, x0, cfg, logpdf_of, label):
    """Maximize the weighted log-likelihood of one continuous block."""
    p = weights / weights.sum()

    def build(x):
        return cls.from_unconstrained(x)

    def fun(x):
        try:
            with np.errstate(all="ignore"):
                v = float(np.dot(p, logpdf_of(build(x), data)))
        except (DomainError, ValueError, OverflowError):
            return -np.inf
        return v if np.isfinite(v) else -np.inf

    def grad(x):
        try:
            with np.errstate(all="ignore"):
                return p @ build(x).score(data)
        except (DomainError, ValueError, OverflowError):
            return np.full(len(x), np.nan)

    x, iterations, converged = _newton_maximize(fun, grad, x0, cfg)
    gnorm = float(np.max(np.abs(grad(x))))
    if not converged:
        raise ConvergenceError(
            f"{label} fit did not converge within {cfg.max_iterations} iterations (gradient {gnorm:.3g})",
            build(x),
        )
    params = build(x)
    H = _fd_hessian(grad, x) * weights.sum()
    evals = np.linalg.eigvalsh(H)
    saddle = not np.all(evals < 0)
    if saddle:
        warnings.warn(f"{label}: Hessian not negative definite at the optimum", SaddlePointWarning, stacklevel=3)
        cov_u = np.linalg.pinv(-H)
    else:
        cov_u = np.linalg.inv(-H)
    J = params.jacobian_diag()
    cov = cov_u * np.outer(J, J)
    ll = float(np.dot(weights, logpdf_of(params, data)))
    return BranchFit(params, cov, ll, iterations, True, gnorm, saddle)


def _check_spread(values, label):
    if np.ptp(values) == 0:
        raise ConvergenceError(f"{label}: all observations are identical; the MLE does not exist")


# -- negative block ---------------------------------------------------------


def _weibull_start(x, p, cfg):
    if cfg.init_strategy == "user-supplied" and cfg.initial.weibull is not None:
        return cfg.initial.weibull
    if cfg.init_strategy == "fixed-default":
        return WeibullNeg(1.0, float(np.dot(p, x)))
    lx = np.log(x)
    m = float(np.dot(p, lx))
    sd = math.sqrt(max(float(np.dot(p, (lx - m) ** 2)), 1e-12))
    s0 = min(max(math.pi / (math.sqrt(6.0) * sd), 0.05), 50.0)
    return WeibullNeg(s0, math.exp(m + EULER_GAMMA / s0))


def fit_weibull_negative(sample, cfg=FitConfig()):
    """Fit the Weibull law to the magnitudes of the negative observations.

    Returns a :class:`BranchFit` over ``(s, lambda)``.
    """
    neg = sample.values < 0
    if neg.sum() < MIN_NEGATIVES:
        raise InsufficientDataError(f"need at least {MIN_NEGATIVES} negative observations, got {int(neg.sum())}")
    x = -sample.values[neg]
    w = _weights(sample, cfg.normalize_weights)[neg]
    _check_spread(x, "Weibull")
    start = _weibull_start(x, w / w.sum(), cfg)
    return _fit_block(
        WeibullNeg, x, w, start.to_unconstrained(), cfg, lambda b, d: b._logpdf_mag(d), "Weibull"
    )


# -- positive block ---------------------------------------------------------

_DEFAULT_SHAPES = {"sm": (1.0, 1.5), "dagum": (2.0, 0.5), "kgen": (1.0, 0.25)}


def _tail_slopes(sub):
    """Rough log-log slopes of the empirical CDF (lower tail) and survivor (upper tail)."""
    q05, q20, q90, q99 = (float(v) for v in sub.quantile([0.05, 0.20, 0.90, 0.99]))
    low = math.log(4.0) / math.log(q20 / q05) if q20 > q05 else 1.0
    high = math.log(10.0) / math.log(q99 / q90) if q99 > q90 else 2.0
    return min(max(low, 0.2), 10.0), min(max(high, 0.5), 20.0)


def _positive_start(family, sub, cfg):
    cls = FAMILIES[family]
    if cfg.init_strategy == "user-supplied":
        if isinstance(cfg.initial.positive, cls):
            return cfg.initial.positive
        raise DomainError(f"initial parameters are not of family {family!r}")
    if cfg.init_strategy == "fixed-default":
        s1, s2 = _DEFAULT_SHAPES[family]
    else:
        low, high = _tail_slopes(sub)
        if family == "sm":
            s1, s2 = low, min(max(high / low, 0.3), 20.0)
        elif family == "dagum":
            s1, s2 = high, min(max(low / high, 0.05), 20.0)
        else:
            s1, s2 = low, 0.25
    unit = cls(s1, 1.0, s2)
    return unit.with_scale(sub.median() / float(unit.quantile(0.5)))


def fit_positive_branch(sample, family, cfg=FitConfig()):
    """Fit one of ``"sm"``, ``"dagum"``, ``"kgen"`` to the positive observations."""
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    pos = sample.values > 0
    if pos.sum() < MIN_POSITIVES:
        raise InsufficientDataError(f"need at least {MIN_POSITIVES} positive observations, got {int(pos.sum())}")
    x = sample.values[pos]
    w = _weights(sample, cfg.normalize_weights)[pos]
    _check_spread(x, FAMILIES[family].__name__)
    sub = WeightedSample(x, w)
    start = _positive_start(family, sub, cfg)
    if isinstance(start, KappaGen) and not 0.0 < start.kappa < 1.0:
        start = replace(start, kappa=min(max(start.kappa, 1e-3), 0.99))
    return _fit_block(
        type(start), x, w, start.to_unconstrained(), cfg, lambda b, d: b.logpdf(d), FAMILIES[family].__name__
    )


# -- full mixture -----------------------------------------------------------


def _proportion_covariance(theta1, theta2, n_eff):
    t = np.array([theta1, theta2])
    return (np.diag(t) - np.outer(t, t)) / n_eff


def fit_mixture(sample, family, cfg=FitConfig()):
    """Fit the three-component mixture with positive branch ``family``.

    The reported log-likelihood includes the multinomial proportion terms
    ``sum_i pi_i log theta_c(i)``. Without negative observations theta1 is
    fixed at 0, the Weibull block is dropped and ``n_params`` is 5.
    """
    theta1, theta2 = estimate_proportions(sample)
    n_eff = sample.effective_size
    names = ["theta1", "theta2"]
    blocks = [_proportion_covariance(theta1, theta2, n_eff)]
    iterations = 0
    saddle = False
    weibull = None
    ll_neg = 0.0
    if theta1 > 0:
        wfit = fit_weibull_negative(sample, cfg)
        weibull = wfit.params
        names += list(WeibullNeg.param_names)
        blocks.append(wfit.covariance)
        iterations += wfit.iterations
        saddle |= wfit.saddle_point
        ll_neg = wfit.loglik
    pfit = fit_positive_branch(sample, family, cfg)
    names += list(pfit.params.param_names)
    blocks.append(pfit.covariance)
    iterations += pfit.iterations
    saddle |= pfit.saddle_point

    params = MixtureParams(theta1, theta2, weibull, pfit.params)
    k = sum(b.shape[0] for b in blocks)
    cov = np.zeros((k, k))
    i = 0
    for b in blocks:
        j = i + b.shape[0]
        cov[i:j, i:j] = b
        i = j

    w = _weights(sample, cfg.normalize_weights)
    v = sample.values
    ll_props = 0.0
    for mask, mass in ((v < 0, theta1), (v == 0, theta2), (v > 0, params.theta3)):
        if np.any(mask):
            ll_props += float(w[mask].sum()) * math.log(mass)
    loglik = weighted_loglik(params, sample, cfg.normalize_weights)
    return FitResult(
        params=params,
        param_names=tuple(names),
        covariance=cov,
        loglik=loglik,
        n_params=len(names),
        converged=True,
        iterations=iterations,
        n_obs=sample.n,
        effective_size=n_eff,
        component_loglik={"negative": ll_neg, "positive": pfit.loglik, "proportions": ll_props},
        saddle_point=saddle,
        has_negative_block=weibull is not None,
        weights_normalized=cfg.normalize_weights,
    )
