"""Kappa-deformed exponential/logarithm and the gamma/beta family.

The kappa functions are written in terms of ``asinh``/``sinh``:

    exp_kappa(x) = exp(asinh(kappa * x) / kappa)
    ln_kappa(y)  = sinh(kappa * ln y) / kappa

which is algebraically identical to ``(sqrt(1 + k^2 x^2) + k x)^(1/k)`` and
its inverse but stays accurate for large ``|kappa * x|`` and for negative
arguments, where the direct form suffers cancellation.

Everything accepts scalars or numpy arrays.
"""

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "check_kappa",
    "exp_kappa",
    "log_exp_kappa",
    "ln_kappa",
    "gamma_fn",
    "log_gamma",
    "upper_incomplete_gamma",
    "beta_fn",
    "incomplete_beta",
    "incomplete_beta_complement",
]


def check_kappa(kappa):
    kappa = float(kappa)
    if not (0.0 <= kappa < 1.0):
        raise DomainError(f"kappa must lie in [0, 1), got {kappa}")
    return kappa


def _scalar_or_array(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def _asinh_ratio(y):
    # asinh(y) / y, accurate for tiny (even subnormal) y
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-4
    ys = np.where(small, 1.0, y)
    return np.where(small, 1.0 - y * y / 6.0, np.arcsinh(ys) / ys)


def _sinh_ratio(y):
    # sinh(y) / y, same idea
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-4
    ys = np.where(small, 1.0, y)
    return np.where(small, 1.0 + y * y / 6.0, np.sinh(ys) / ys)


def log_exp_kappa(x, kappa):
    """Natural log of ``exp_kappa(x)``; finite for every finite ``x``."""
    kappa = check_kappa(kappa)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("exp_kappa needs finite arguments")
    if kappa == 0.0:
        return _scalar_or_array(x.copy())
    return _scalar_or_array(x * _asinh_ratio(kappa * x))


def exp_kappa(x, kappa):
    """Kaniadakis deformed exponential.

    Reduces to ``exp(x)`` exactly at ``kappa == 0``. For ``kappa > 0`` it
    decays like the power law ``|2 kappa x|^(-1/kappa)`` as ``x -> -inf``.
    """
    return _scalar_or_array(np.exp(log_exp_kappa(x, kappa)))


def ln_kappa(y, kappa):
    """Functional inverse of :func:`exp_kappa` on ``y > 0``."""
    kappa = check_kappa(kappa)
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("ln_kappa needs y > 0")
    ly = np.log(y)
    if kappa == 0.0:
        return _scalar_or_array(ly)
    return _scalar_or_array(ly * _sinh_ratio(kappa * ly))


def gamma_fn(z):
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError("gamma_fn is defined here for z > 0 only")
    return _scalar_or_array(special.gamma(z))


def log_gamma(z):
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError("log_gamma is defined here for z > 0 only")
    return _scalar_or_array(special.gammaln(z))


def upper_incomplete_gamma(a, x):
    """Unregularized upper incomplete gamma ``Gamma(a, x)``.

    ``x`` may be ``+inf`` (result 0).
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~(a > 0)):
        raise DomainError("upper_incomplete_gamma needs a > 0")
    if np.any(~(x >= 0)):
        raise DomainError("upper_incomplete_gamma needs x >= 0")
    return _scalar_or_array(special.gammaincc(a, x) * special.gamma(a))


def beta_fn(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise DomainError("beta_fn needs a > 0 and b > 0")
    return _scalar_or_array(special.beta(a, b))


def _check_beta_args(z, a, b):
    z = np.asarray(z, dtype=float)
    a = float(a)
    b = float(b)
    if not (a > 0 and b > 0):
        raise DomainError(f"incomplete beta needs a > 0 and b > 0, got a={a}, b={b}")
    if np.any(~((z >= 0) & (z <= 1))):
        raise DomainError("incomplete beta needs 0 <= z <= 1")
    return z, a, b


def incomplete_beta(z, a, b):
    """Unregularized lower incomplete beta ``B(z; a, b)``."""
    z, a, b = _check_beta_args(z, a, b)
    return _scalar_or_array(special.betainc(a, b, z) * special.beta(a, b))


def incomplete_beta_complement(z, a, b):
    """``B(a, b) - B(z; a, b)`` without subtractive cancellation near z = 1."""
    z, a, b = _check_beta_args(z, a, b)
    return _scalar_or_array(special.betaincc(a, b, z) * special.beta(a, b))
