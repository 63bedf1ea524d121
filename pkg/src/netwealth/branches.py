"""Component distributions of the net-wealth mixture.

Three alternative laws for the positive part (Singh-Maddala, Dagum type I,
kappa-generalized) and a reflected Weibull for the negative part. Each class
is an immutable parameter record that also knows how to evaluate its density,
CDF, quantile function and raw moments, draw samples, and report the score
(gradient of the log-density) in the unconstrained coordinates used by
:mod:`netwealth.estimation`.

All evaluation methods accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy import special

from .errors import DomainError, MomentDivergenceError, NoPowerTailError
from .specfun import _asinh_ratio, _sinh_ratio, check_kappa, ln_kappa

__all__ = [
    "WeibullNeg",
    "SinghMaddala",
    "Dagum",
    "KappaGen",
    "PositiveBranch",
    "FAMILIES",
    "make_rng",
    "uniform_open",
]


def make_rng(seed):
    """PCG64 generator; ``seed`` may also be a ``SeedSequence`` or Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def uniform_open(rng, n):
    """``n`` uniforms on the open interval (0, 1)."""
    u = rng.random(n)
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    return u


def _out(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def _positive(w):
    w = np.asarray(w, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("positive-branch functions need w > 0")
    return w


def _open_unit(u):
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("quantile needs 0 < u < 1")
    return u


def _check_order(r):
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise DomainError(f"moment order must be a positive integer, got {r!r}")
    return int(r)


def _require_positive(**kw):
    for name, v in kw.items():
        if not (np.isfinite(v) and v > 0):
            raise DomainError(f"{name} must be a finite positive number, got {v}")


def _log1p_exp(x):
    # log(1 + e^x) without overflow
    return np.logaddexp(0.0, x)


class _Branch:
    family: ClassVar[str]
    param_names: ClassVar[tuple]

    def values(self):
        return tuple(getattr(self, f) for f in self._fields)

    def as_dict(self):
        return dict(zip(self.param_names, self.values()))

    @classmethod
    def from_values(cls, values):
        return cls(*map(float, values))

    def sample(self, n, seed=None):
        """Inverse-transform sample of size ``n``; deterministic per seed."""
        if n < 1:
            raise DomainError("sample size must be >= 1")
        rng = make_rng(seed)
        return np.asarray(self.quantile(uniform_open(rng, n)), dtype=float)

    def logpdf(self, w):
        raise NotImplementedError

    def pdf(self, w):
        return _out(np.exp(self.logpdf(w)))

    # unconstrained coordinates for the optimizer: log of every positive
    # parameter (logit for kappa)
    def to_unconstrained(self):
        return np.log(np.asarray(self.values(), dtype=float))

    @classmethod
    def from_unconstrained(cls, x):
        return cls(*np.exp(np.asarray(x, dtype=float)))

    def jacobian_diag(self):
        """d(natural parameter) / d(unconstrained coordinate)."""
        return np.asarray(self.values(), dtype=float)


@dataclass(frozen=True)
class WeibullNeg(_Branch):
    """Weibull law for the magnitude of negative net wealth.

    Density on ``w < 0``: ``(s/lam) (|w|/lam)^(s-1) exp(-(|w|/lam)^s)``.
    ``cdf_branch`` is the component CDF ``exp(-(|w|/lam)^s)``, which rises
    from 0 at ``-inf`` to 1 at ``0-``.
    """

    s: float
    lam: float

    family: ClassVar[str] = "weibull"
    param_names: ClassVar[tuple] = ("s", "lambda")
    _fields: ClassVar[tuple] = ("s", "lam")

    def __post_init__(self):
        _require_positive(s=self.s, lam=self.lam)

    @staticmethod
    def _negative(w):
        w = np.asarray(w, dtype=float)
        if np.any(~(w < 0)):
            raise DomainError("Weibull negative branch needs w < 0")
        return w

    def logpdf(self, w):
        x = -self._negative(w)
        return _out(self._logpdf_mag(x))

    def _logpdf_mag(self, x):
        t = np.log(x) - math.log(self.lam)
        with np.errstate(over="ignore"):  # far tail: -inf is the right answer
            return math.log(self.s) - math.log(self.lam) + (self.s - 1.0) * t - np.exp(self.s * t)

    def cdf_branch(self, w):
        x = -self._negative(w)
        return _out(np.exp(-((x / self.lam) ** self.s)))

    cdf = cdf_branch

    def quantile(self, u):
        u = _open_unit(u)
        return _out(-self.lam * (-np.log(u)) ** (1.0 / self.s))

    def moment(self, r):
        r = _check_order(r)
        return (-1.0) ** r * self.lam**r * math.gamma(1.0 + r / self.s)

    def score(self, x):
        """Score of the magnitude log-density in (log s, log lam); ``x = |w|``."""
        x = np.asarray(x, dtype=float)
        s = self.s
        t = np.log(x) - math.log(self.lam)
        z = np.exp(s * t)
        return np.column_stack([1.0 + s * t * (1.0 - z), s * (z - 1.0)])


class _PositiveBranch(_Branch):
    def cdf(self, w):
        raise NotImplementedError

    def sf(self, w):
        raise NotImplementedError

    def tail_index(self):
        raise NotImplementedError

    def _check_moment(self, r):
        raise NotImplementedError

    def scale(self):
        return self.values()[1]

    def with_scale(self, scale):
        v = list(self.values())
        v[1] = scale
        return type(self)(*v)


@dataclass(frozen=True)
class SinghMaddala(_PositiveBranch):
    a: float
    b: float
    q: float

    family: ClassVar[str] = "sm"
    param_names: ClassVar[tuple] = ("a", "b", "q")
    _fields: ClassVar[tuple] = ("a", "b", "q")

    def __post_init__(self):
        _require_positive(a=self.a, b=self.b, q=self.q)

    def _at(self, w):
        return self.a * (np.log(_positive(w)) - math.log(self.b))

    def logpdf(self, w):
        w = _positive(w)
        at = self._at(w)
        return _out(math.log(self.a * self.q) - np.log(w) + at - (1.0 + self.q) * _log1p_exp(at))

    def cdf(self, w):
        return _out(-np.expm1(-self.q * _log1p_exp(self._at(w))))

    def sf(self, w):
        return _out(np.exp(-self.q * _log1p_exp(self._at(w))))

    def quantile(self, u):
        u = _open_unit(u)
        return _out(self.b * np.expm1(-np.log1p(-u) / self.q) ** (1.0 / self.a))

    def isf(self, v):
        v = _open_unit(v)
        return _out(self.b * np.expm1(-np.log(v) / self.q) ** (1.0 / self.a))

    def tail_index(self):
        return self.a * self.q

    def _check_moment(self, r):
        if not r < self.a * self.q:
            raise MomentDivergenceError(
                f"Singh-Maddala moment of order {r} diverges: needs r < a*q "
                f"(Pareto tail index a*q = {self.a * self.q:.6g})"
            )

    def moment(self, r):
        r = _check_order(r)
        self._check_moment(r)
        ra = r / self.a
        lg = special.gammaln(1.0 + ra) + special.gammaln(self.q - ra) - special.gammaln(self.q)
        return self.b**r * math.exp(lg)

    def score(self, w):
        a, q = self.a, self.q
        at = self._at(w)
        sig = special.expit(at)
        return np.column_stack(
            [1.0 + at * (1.0 - (1.0 + q) * sig), a * ((1.0 + q) * sig - 1.0), 1.0 - q * _log1p_exp(at)]
        )


@dataclass(frozen=True)
class Dagum(_PositiveBranch):
    a: float
    b: float
    p: float

    family: ClassVar[str] = "dagum"
    param_names: ClassVar[tuple] = ("a", "b", "p")
    _fields: ClassVar[tuple] = ("a", "b", "p")

    def __post_init__(self):
        _require_positive(a=self.a, b=self.b, p=self.p)

    def _at(self, w):
        return self.a * (np.log(_positive(w)) - math.log(self.b))

    def logpdf(self, w):
        w = _positive(w)
        at = self._at(w)
        return _out(
            math.log(self.a * self.p) - np.log(w) + self.p * at - (self.p + 1.0) * _log1p_exp(at)
        )

    def cdf(self, w):
        return _out(np.exp(-self.p * _log1p_exp(-self._at(w))))

    def sf(self, w):
        return _out(-np.expm1(-self.p * _log1p_exp(-self._at(w))))

    def quantile(self, u):
        u = _open_unit(u)
        return _out(self.b * np.expm1(-np.log(u) / self.p) ** (-1.0 / self.a))

    def isf(self, v):
        v = _open_unit(v)
        return _out(self.b * np.expm1(-np.log1p(-v) / self.p) ** (-1.0 / self.a))

    def tail_index(self):
        return self.a * self.p

    def _check_moment(self, r):
        if not r < self.a:
            raise MomentDivergenceError(
                f"Dagum moment of order {r} diverges: needs r < a = {self.a:.6g} "
                f"(Pareto tail index a*p = {self.a * self.p:.6g})"
            )

    def moment(self, r):
        r = _check_order(r)
        self._check_moment(r)
        ra = r / self.a
        lg = special.gammaln(self.p + ra) + special.gammaln(1.0 - ra) - special.gammaln(self.p)
        return self.b**r * math.exp(lg)

    def score(self, w):
        a, p = self.a, self.p
        at = self._at(w)
        sig = special.expit(at)
        return np.column_stack(
            [1.0 + at * (p - (p + 1.0) * sig), a * ((p + 1.0) * sig - p), 1.0 + p * at - p * _log1p_exp(at)]
        )


@dataclass(frozen=True)
class KappaGen(_PositiveBranch):
    """Kappa-generalized law ``F(w) = 1 - exp_kappa(-(w/beta)^alpha)``.

    Weibull-like near the origin, Pareto-like with index ``alpha/kappa`` in
    the upper tail; ``kappa == 0`` is exactly the Weibull distribution.
    """

    alpha: float
    beta: float
    kappa: float

    family: ClassVar[str] = "kgen"
    param_names: ClassVar[tuple] = ("alpha", "beta", "kappa")
    _fields: ClassVar[tuple] = ("alpha", "beta", "kappa")

    def __post_init__(self):
        _require_positive(alpha=self.alpha, beta=self.beta)
        check_kappa(self.kappa)

    def _t(self, w):
        return np.log(_positive(w)) - math.log(self.beta)

    def _log_sf_and_root(self, w):
        """``log S(w)`` and ``log sqrt(1 + kappa^2 z^2)`` with ``z = (w/beta)^alpha``.

        Works from ``log z`` so that far-tail arguments do not overflow.
        """
        lz = self.alpha * self._t(w)
        k = self.kappa
        if k == 0.0:
            return -np.exp(lz), np.zeros_like(lz)
        ly = lz + math.log(k)
        huge = ly > 300.0
        safe_lz = np.where(huge, 0.0, lz)
        z = np.exp(safe_lz)
        y = np.exp(safe_lz + math.log(k))
        # asinh(y) ~ log(2y) and hypot(1, y) ~ y once y^-2 is below rounding
        with np.errstate(over="ignore"):  # the unused branch may overflow
            log_sf = np.where(huge, -(math.log(2.0) + ly) / k, -z * _asinh_ratio(y))
        log_root = np.where(huge, ly, 0.5 * np.log1p(y * y))
        return log_sf, log_root

    def logpdf(self, w):
        t = self._t(w)
        log_sf, log_root = self._log_sf_and_root(w)
        return _out(math.log(self.alpha / self.beta) + (self.alpha - 1.0) * t + log_sf - log_root)

    def cdf(self, w):
        return _out(-np.expm1(self._log_sf_and_root(w)[0]))

    def sf(self, w):
        return _out(np.exp(self._log_sf_and_root(w)[0]))

    def quantile(self, u):
        u = _open_unit(u)
        L = -np.log1p(-u)
        return _out(self.beta * (L * _sinh_ratio(self.kappa * L)) ** (1.0 / self.alpha))

    def isf(self, v):
        v = _open_unit(v)
        return _out(self.beta * np.asarray(ln_kappa(1.0 / v, self.kappa)) ** (1.0 / self.alpha))

    def tail_index(self):
        if self.kappa == 0.0:
            raise NoPowerTailError("kappa = 0: Weibull tail, no Pareto index")
        return self.alpha / self.kappa

    def _check_moment(self, r):
        if self.kappa > 0 and not r < self.alpha / self.kappa:
            raise MomentDivergenceError(
                f"kappa-generalized moment of order {r} diverges: needs r < alpha/kappa "
                f"(Pareto tail index alpha/kappa = {self.alpha / self.kappa:.6g})"
            )

    def moment(self, r):
        r = _check_order(r)
        self._check_moment(r)
        al, k = self.alpha, self.kappa
        ra = r / al
        if k == 0.0:
            return self.beta**r * math.gamma(1.0 + ra)
        x = 1.0 / (2.0 * k)
        d = r / (2.0 * al)
        if k < 1e-7:
            # (2k)^(-r/alpha) Gamma(x - d) / Gamma(x + d) = exp(d / x + O(x^-2))
            scale_ratio = d / x
        else:
            # Gamma(x - d) / Gamma(x + d) = 1 / poch(x - d, 2d)
            scale_ratio = -ra * math.log(2.0 * k) - math.log(special.poch(x - d, 2.0 * d))
        lg = special.gammaln(1.0 + ra) - math.log1p(ra * k) + scale_ratio
        return self.beta**r * math.exp(lg)

    def to_unconstrained(self):
        if not 0.0 < self.kappa < 1.0:
            raise DomainError("unconstrained coordinates need 0 < kappa < 1")
        return np.array([math.log(self.alpha), math.log(self.beta), special.logit(self.kappa)])

    @classmethod
    def from_unconstrained(cls, x):
        return cls(math.exp(x[0]), math.exp(x[1]), float(special.expit(x[2])))

    def jacobian_diag(self):
        k = self.kappa
        return np.array([self.alpha, self.beta, k * (1.0 - k)])

    def score(self, w):
        al, k = self.alpha, self.kappa
        t = self._t(w)
        z = np.exp(al * t)
        y = k * z
        root = np.hypot(1.0, y)
        dz = -1.0 / root - k * y / (1.0 + y * y)
        # d/dkappa of [-asinh(k z)/k - log sqrt(1 + k^2 z^2)]
        small = np.abs(y) < 1e-3
        ys = np.where(small, 1.0, y)
        big_part = (np.arcsinh(ys) - ys / np.hypot(1.0, ys)) / (k * k)
        series = k * z**3 * (1.0 / 3.0 - 0.3 * y * y)
        dk = np.where(small, series, big_part) - k * z * z / (1.0 + y * y)
        return np.column_stack([1.0 + al * t * (1.0 + z * dz), -al * (1.0 + z * dz), dk * k * (1.0 - k)])


PositiveBranch = SinghMaddala | Dagum | KappaGen

FAMILIES = {"sm": SinghMaddala, "dagum": Dagum, "kgen": KappaGen}
