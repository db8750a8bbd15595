"""Vector functionals and experiment metrics: lp norms, best s-term
approximation, normalized reconstruction errors, histograms."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class ErrorReport:
    """One normalized reconstruction error entry."""

    method: str
    alpha: int
    value: float
    m: int
    n: int

    @property
    def compression_factor(self):
        return self.n / self.m


def lp_norm(x, p):
    """(sum |x_i|^p)^(1/p); a quasi-norm for 0 < p < 1."""
    if p <= 0:
        raise ConfigError("p must be positive")
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        return 0.0
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def l0_norm(x):
    """Number of exactly nonzero entries."""
    return int(np.count_nonzero(np.asarray(x)))


def best_s_term_error(x, s):
    """l1 distance to the best s-sparse approximant: sum of the n - s
    smallest magnitudes."""
    x = np.abs(np.asarray(x, dtype=float).ravel())
    n = x.size
    if not 0 <= s <= n:
        raise ConfigError("need 0 <= s <= n")
    if s == n:
        return 0.0
    return float(np.sum(np.sort(x)[: n - s]))


def normalized_error(rec, truth, alpha):
    """Normalized l_alpha error (sum_k |a_k - b_k|^alpha / N)^(1/alpha)."""
    if alpha not in (1, 2):
        raise ConfigError("alpha must be 1 or 2")
    if rec.grid != truth.grid:
        raise ConfigError("images live on different grids")
    diff = np.abs(rec.values - truth.values)
    n = rec.grid.n
    return float((np.sum(diff**alpha) / n) ** (1.0 / alpha))


def compressibility_check(x, q, s):
    """True iff sigma_s(x) <= q (1-q)^(1/q - 1) s^(1 - 1/q) ||x||_q.

    The bound holds for every vector with s >= 1; it is used as a
    cross-module property check.
    """
    if not 0.0 < q < 1.0:
        raise ConfigError("q must lie in (0, 1)")
    if s < 1:
        raise ConfigError("the compressibility bound needs s >= 1")
    bound = q * (1.0 - q) ** (1.0 / q - 1.0) / s ** (1.0 / q - 1.0) * lp_norm(x, q)
    return best_s_term_error(x, s) <= bound * (1.0 + 1e-12)


def histogram(values, n_bins, value_range=None):
    """Bin counts over uniform bins.

    Without an explicit range the values are first normalized so that
    min -> 0 and max -> 1 and binned over [0, 1].  Returns (counts, edges).
    """
    if n_bins < 1:
        raise ConfigError("need at least one bin")
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ConfigError("cannot histogram empty data")
    if value_range is None:
        lo, hi = float(values.min()), float(values.max())
        values = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
        value_range = (0.0, 1.0)
    counts, edges = np.histogram(values, bins=n_bins, range=value_range)
    return counts, edges


def normalized_zero(values):
    """Where 0 lands after min->0, max->1 normalization of `values`."""
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    return -lo / (hi - lo) if hi > lo else 0.0
