"""Three-component net-wealth mixture.

A share ``theta1`` of units has negative wealth (reflected Weibull), a share
``theta2`` sits exactly at zero, and the remaining ``theta3 = 1 - rho`` with
``rho = theta1 + theta2`` follows one of the positive branches. The atom at
zero is an explicit point mass; the CDF is right-continuous there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .branches import FAMILIES, Dagum, KappaGen, SinghMaddala, WeibullNeg, make_rng, uniform_open
from .errors import AtomError, DomainError, MeanSignError, MomentDivergenceError
from .sample import WeightedSample
from .specfun import beta_fn, incomplete_beta, incomplete_beta_complement, upper_incomplete_gamma

__all__ = ["MixtureParams", "GiniAboveOneWarning"]


class GiniAboveOneWarning(UserWarning):
    """Negative-wealth normalized Gini exceeds one."""


def _out(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


@dataclass(frozen=True)
class MixtureParams:
    theta1: float
    theta2: float
    weibull: WeibullNeg | None
    positive: SinghMaddala | Dagum | KappaGen

    def __post_init__(self):
        t1, t2 = float(self.theta1), float(self.theta2)
        if not (0.0 <= t1 <= 1.0 and 0.0 <= t2 <= 1.0):
            raise DomainError("mixture proportions must lie in [0, 1]")
        if t1 + t2 > 1.0 + 1e-12:
            raise DomainError(f"theta1 + theta2 = {t1 + t2} exceeds 1")
        if t1 > 0 and self.weibull is None:
            raise DomainError("theta1 > 0 needs Weibull parameters for the negative part")
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)

    # -- proportions ----------------------------------------------------------
    @property
    def rho(self):
        return self.theta1 + self.theta2

    @property
    def theta3(self):
        return max(0.0, 1.0 - self.rho)

    @property
    def atom_mass(self):
        return self.theta2

    @property
    def family(self):
        return self.positive.family

    # -- distribution functions -----------------------------------------------
    def pdf(self, w):
        """Density of the continuous part; raises :class:`AtomError` at 0."""
        w = np.asarray(w, dtype=float)
        if np.any(w == 0):
            raise AtomError("w = 0 carries the point mass theta2; use atom_mass")
        out = np.zeros_like(w)
        neg, pos = w < 0, w > 0
        if self.theta1 > 0 and np.any(neg):
            out[neg] = self.theta1 * np.asarray(self.weibull.pdf(w[neg]))
        if self.theta3 > 0 and np.any(pos):
            out[pos] = self.theta3 * np.asarray(self.positive.pdf(w[pos]))
        return _out(out)

    def cdf(self, w):
        w = np.asarray(w, dtype=float)
        out = np.empty_like(w)
        neg, pos = w < 0, w > 0
        out[w == 0] = self.rho
        if np.any(neg):
            out[neg] = self.theta1 * np.asarray(self.weibull.cdf_branch(w[neg])) if self.theta1 > 0 else 0.0
        if np.any(pos):
            out[pos] = self.rho + self.theta3 * np.asarray(self.positive.cdf(w[pos]))
        return _out(out)

    def sf(self, w):
        """``1 - cdf(w)``, accurate in the upper tail."""
        w = np.asarray(w, dtype=float)
        out = np.empty_like(w)
        neg, pos = w < 0, w > 0
        out[w == 0] = self.theta3
        if np.any(neg):
            out[neg] = 1.0 - (self.theta1 * np.asarray(self.weibull.cdf_branch(w[neg])) if self.theta1 > 0 else 0.0)
        if np.any(pos):
            out[pos] = self.theta3 * np.asarray(self.positive.sf(w[pos]))
        return _out(out)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(~((u > 0) & (u < 1))):
            raise DomainError("quantile needs 0 < u < 1")
        out = np.zeros_like(u)
        neg = u < self.theta1
        pos = u > self.rho
        if np.any(neg):
            out[neg] = -self.weibull.lam * np.log(self.theta1 / u[neg]) ** (1.0 / self.weibull.s)
        if np.any(pos):
            v = np.clip((1.0 - u[pos]) / self.theta3, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
            out[pos] = self.positive.isf(v)
        return _out(out)

    def sample(self, n, seed=None):
        """Unit-weight sample by inverse transform of the full mixture."""
        if n < 1:
            raise DomainError("sample size must be >= 1")
        rng = make_rng(seed)
        return WeightedSample(self.quantile(uniform_open(rng, n)))

    # -- moments --------------------------------------------------------------
    def moment(self, r):
        """Raw moment ``E(W^r)``; the atom contributes nothing."""
        neg = self.theta1 * self.weibull.moment(r) if self.theta1 > 0 else 0.0
        pos = self.theta3 * self.positive.moment(r) if self.theta3 > 0 else 0.0
        return neg + pos

    @property
    def mean(self):
        return self.moment(1)

    def _negative_mass(self):
        """``lambda * theta1 * Gamma(1 + 1/s)``: magnitude of total negative wealth."""
        if self.theta1 == 0:
            return 0.0
        return self.weibull.lam * self.theta1 * math.gamma(1.0 + 1.0 / self.weibull.s)

    def _positive_mean(self):
        if self.theta3 == 0:
            raise MeanSignError("no positive component: mean is not positive")
        return self.positive.moment(1)

    def _checked_mean(self):
        mu = self.mean
        if not mu > 0:
            raise MeanSignError(f"mean net wealth {mu:.6g} is not positive")
        return mu

    def tail_index(self):
        """Pareto upper-tail index of the positive branch."""
        return self.positive.tail_index()

    # -- Lorenz curve ---------------------------------------------------------
    def _positive_partial(self, u):
        """``integral_rho^u Q(t) dt`` for ``u`` in (rho, 1]."""
        th3 = self.theta3
        pos = self.positive
        if isinstance(pos, SinghMaddala):
            a, b, q = pos.a, pos.b, pos.q
            z = ((1.0 - u) / th3) ** (1.0 / q)
            return th3 * b * q * incomplete_beta_complement(np.clip(z, 0, 1), q - 1.0 / a, 1.0 + 1.0 / a)
        if isinstance(pos, Dagum):
            a, b, p = pos.a, pos.b, pos.p
            z = ((u - self.rho) / th3) ** (1.0 / p)
            return th3 * b * p * incomplete_beta(np.clip(z, 0, 1), p + 1.0 / a, 1.0 - 1.0 / a)
        al, be, k = pos.alpha, pos.beta, pos.kappa
        v = np.clip((1.0 - u) / th3, 0.0, 1.0)
        if k == 0.0:
            g = 1.0 + 1.0 / al
            with np.errstate(divide="ignore"):
                x = -np.log(v)
            return th3 * be * (math.gamma(g) - upper_incomplete_gamma(g, x))
        A, D = 1.0 / (2.0 * k) - 1.0 / (2.0 * al), 1.0 + 1.0 / al
        return th3 * be / (2.0 * k) ** D * incomplete_beta_complement(v ** (2.0 * k), A, D)

    def lorenz(self, u):
        """Lorenz ordinate(s) ``L(u)``; negative below ``rho`` when theta1 > 0."""
        u = np.asarray(u, dtype=float)
        if np.any(~((u >= 0) & (u <= 1))):
            raise DomainError("Lorenz curve needs 0 <= u <= 1")
        mu = self._checked_mean()
        self._positive_mean()
        c0 = self._negative_mass()
        out = np.full_like(u, -c0 / mu)
        low = (u < self.theta1) & (u > 0)
        out[u == 0] = 0.0
        if np.any(low):
            s, lam = self.weibull.s, self.weibull.lam
            out[low] = -(lam * self.theta1 / mu) * upper_incomplete_gamma(1.0 + 1.0 / s, np.log(self.theta1 / u[low]))
        high = u > self.rho
        if np.any(high):
            out[high] = (np.asarray(self._positive_partial(u[high])) - c0) / mu
        return _out(out)

    def lorenz_at_theta1(self):
        """Exact value on the flat middle stretch ``[theta1, rho]``."""
        return -self._negative_mass() / self._checked_mean()

    # -- Gini ratio -----------------------------------------------------------
    def _check_gini_exists(self):
        pos = self.positive
        if isinstance(pos, SinghMaddala):
            bad = not (2.0 * pos.q > 1.0 / pos.a)
            cond = "2q > 1/a"
        elif isinstance(pos, Dagum):
            bad = not (pos.a > 1.0)
            cond = "1 - 1/a > 0"
        else:
            bad = pos.kappa > 0 and not (1.0 / pos.kappa > 1.0 / (2.0 * pos.alpha))
            cond = "1/kappa > 1/(2 alpha)"
        if bad:
            raise MomentDivergenceError(f"Gini ratio undefined: needs {cond}")

    def _positive_gini_term(self):
        """``theta3^2 E[W (1 - F3(W))]`` in the branch's closed form."""
        th3sq = self.theta3**2
        pos = self.positive
        if isinstance(pos, SinghMaddala):
            a, b, q = pos.a, pos.b, pos.q
            return th3sq * b * q * beta_fn(2.0 * q - 1.0 / a, 1.0 + 1.0 / a)
        if isinstance(pos, Dagum):
            a, b, p = pos.a, pos.b, pos.p
            return th3sq * b * p * (beta_fn(p + 1.0 / a, 1.0 - 1.0 / a) - beta_fn(2.0 * p + 1.0 / a, 1.0 - 1.0 / a))
        al, be, k = pos.alpha, pos.beta, pos.kappa
        if k == 0.0:
            return th3sq * be * math.gamma(1.0 + 1.0 / al) * 2.0 ** (-1.0 - 1.0 / al)
        D = 1.0 + 1.0 / al
        return th3sq * be / (2.0 * k) ** D * beta_fn(1.0 / k - 1.0 / (2.0 * al), D)

    def gini_closed(self):
        """Gini ratio with the negative-wealth normalization, in closed form.

        May exceed one when negative wealth is heavy; a
        :class:`GiniAboveOneWarning` is issued in that case.
        """
        mu = self._checked_mean()
        self._check_gini_exists()
        c0 = self._negative_mass()
        neg_term = c0 * (1.0 - self.theta1 * 2.0 ** (-1.0 - 1.0 / self.weibull.s)) if c0 else 0.0
        g = (mu - 2.0 * (self._positive_gini_term() - neg_term)) / (mu + self.rho * c0)
        return self._flag(g)

    def gini_numeric(self, epsabs=1e-10):
        """Same ratio by adaptive quadrature of the Lorenz curve on its three pieces."""
        mu = self._checked_mean()
        self._check_gini_exists()
        t1, rho = self.theta1, self.rho
        l_mid = self.lorenz_at_theta1()
        area = l_mid * (rho - t1)
        opts = dict(epsabs=epsabs, epsrel=1e-10, limit=500)
        if t1 > 0:
            area += integrate.quad(lambda u: float(self.lorenz(u)), 0.0, t1, **opts)[0]
        area += integrate.quad(lambda u: float(self.lorenz(u)), rho, 1.0, **opts)[0]
        g = (1.0 - 2.0 * area) / (1.0 - rho * l_mid)
        return self._flag(g)

    @staticmethod
    def _flag(g):
        if g > 1.0:
            warnings.warn(f"Gini ratio {g:.6g} exceeds 1", GiniAboveOneWarning, stacklevel=3)
        return float(g)

    # -- transforms / serialization -------------------------------------------
    def rescaled(self, c):
        """Multiply every scale parameter (lambda and b or beta) by ``c``."""
        wb = None if self.weibull is None else WeibullNeg(self.weibull.s, self.weibull.lam * c)
        return MixtureParams(self.theta1, self.theta2, wb, self.positive.with_scale(self.positive.scale() * c))

    def as_dict(self):
        d = {"model": self.family, "theta1": self.theta1, "theta2": self.theta2}
        if self.weibull is not None:
            d.update(self.weibull.as_dict())
        d.update(self.positive.as_dict())
        return d

    def to_text(self):
        lines = [f"model={self.family}"]
        for k, v in self.as_dict().items():
            if k != "model":
                lines.append(f"{k}={v!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dict(cls, d):
        try:
            model = str(d["model"]).strip().lower()
            branch_cls = FAMILIES[model]
        except KeyError as exc:
            raise DomainError(f"unknown or missing model key: {exc}") from None
        missing = [k for k in ("theta1", "theta2", *branch_cls.param_names) if k not in d]
        if missing:
            raise DomainError(f"missing keys: {', '.join(missing)}")
        theta1 = float(d["theta1"])
        weibull = None
        if "s" in d and "lambda" in d:
            weibull = WeibullNeg(float(d["s"]), float(d["lambda"]))
        elif theta1 > 0:
            raise DomainError("theta1 > 0 needs keys s and lambda")
        positive = branch_cls(*(float(d[k]) for k in branch_cls.param_names))
        return cls(theta1, float(d["theta2"]), weibull, positive)

    @classmethod
    def from_text(cls, text):
        d = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"not a key=value line: {raw!r}")
            k, v = (x.strip() for x in line.split("=", 1))
            d[k] = v
        return cls.from_dict(d)

