"""Weighted microdata container."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Observations sorted ascending together with positive sampling weights.

    The constructor sorts (stably) and validates; ``values`` and ``weights``
    are read-only arrays afterwards.
    """

    values: np.ndarray
    weights: np.ndarray = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        w = np.ones_like(v) if self.weights is None else np.asarray(self.weights, dtype=float).ravel()
        if v.size == 0:
            raise DomainError("a sample needs at least one observation")
        if v.shape != w.shape:
            raise DomainError("values and weights must have equal length")
        if not np.all(np.isfinite(v)):
            raise DomainError("values must be finite")
        if np.any(~(w > 0)) or not np.all(np.isfinite(w)):
            raise DomainError("weights must be finite and positive")
        order = np.argsort(v, kind="stable")
        v, w = v[order], w[order]
        v.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.values.size

    @property
    def n(self):
        return self.values.size

    @property
    def total_weight(self):
        return float(self.weights.sum())

    @property
    def probabilities(self):
        """Weights rescaled to sum to one."""
        return self.weights / self.weights.sum()

    def normalized_weights(self):
        """Weights rescaled so they sum to the number of observations."""
        return self.weights * (self.n / self.weights.sum())

    @property
    def effective_size(self):
        w = self.weights
        return float(w.sum() ** 2 / np.sum(w * w))

    def weighted_mean(self):
        return float(np.dot(self.probabilities, self.values))

    def quantile(self, q):
        """Weighted quantile: smallest value whose cumulative weight share reaches ``q``."""
        cum = np.cumsum(self.probabilities)
        idx = np.searchsorted(cum, np.asarray(q, dtype=float) - 1e-12, side="left")
        out = self.values[np.minimum(idx, self.n - 1)]
        return out.item() if out.ndim == 0 else out

    def median(self):
        return self.quantile(0.5)

    def subset(self, mask):
        return WeightedSample(self.values[mask], self.weights[mask], self.label)

    def negatives(self):
        return self.subset(self.values < 0)

    def positives(self):
        return self.subset(self.values > 0)

    def scaled(self, c):
        return WeightedSample(self.values * c, self.weights, self.label)
