"""FISTA minimization of the l1-Tikhonov functional, one time slice at a time.

Each slice solves  min_x 1/2 ||y - A x||_2^2 + lambda ||x||_1  with the
accelerated proximal-gradient iteration: gradient step, soft-thresholding,
Nesterov momentum t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2, zero start.  The
matrix must be rescaled to unit operator norm first, so the maximal stable
step size is one.

Slices are independent problems and are solved as one batched iteration over
the whole (n, n_t) stack; every column follows exactly the arithmetic of a
standalone run, so results do not depend on slice order or thread count.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError
from .grids import TimeGrid


@dataclass(frozen=True)
class SolverConfig:
    """FISTA parameters."""

    lam: float = 1e-5
    n_iter: int = 7500
    step: float = 1.0
    tolerance: float = 0.0  # early stop on relative objective change; 0 = off

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError("lambda must be nonnegative")
        if self.n_iter < 1:
            raise ConfigError("need at least one iteration")
        if not 0.0 < self.step <= 1.0:
            raise ConfigError("step must lie in (0, 1]")
        if self.tolerance < 0:
            raise ConfigError("tolerance must be nonnegative")


@dataclass
class RecoveredData:
    """Per-slice recovery x_hat[., t_k] plus final objective values."""

    times: TimeGrid
    values: np.ndarray       # (n, n_t)
    objectives: np.ndarray   # (n_t,)
    grid: object = None      # DetectorGrid when the slices are point data


def soft_threshold(v, tau):
    """Proximal map of tau * ||.||_1: sign(v) * max(|v| - tau, 0)."""
    if tau < 0:
        raise ConfigError("threshold must be nonnegative")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def _objective(matrix, x, y, lamb):
    resid = matrix.apply(x) - y
    return 0.5 * np.sum(resid**2, axis=0) + lamb * np.sum(np.abs(x), axis=0)


def _check_unit_norm(matrix):
    norm = matrix.operator_norm()
    if norm > 1.0 + 1e-3:
        raise ConfigError(
            f"operator norm {norm:.6f} exceeds 1; rescale_to_unit_norm first"
        )


def fista_batch(matrix, y, config):
    """FISTA on a stack of right-hand sides (m, k); returns (x, objectives)."""
    _check_unit_norm(matrix)
    y = np.asarray(y, dtype=float)
    squeeze = y.ndim == 1
    y2 = y[:, None] if squeeze else y
    if y2.shape[0] != matrix.m:
        raise ConfigError("right-hand side rows must equal m")
    if not np.all(np.isfinite(y2)):
        raise NumericError("non-finite data passed to the solver")

    step = config.step
    tau = step * config.lam
    x = np.zeros((matrix.n, y2.shape[1]))
    z = x.copy()
    t_k = 1.0
    obj_prev = None
    for _ in range(config.n_iter):
        grad = matrix.apply_adjoint(matrix.apply(z) - y2)
        x_new = soft_threshold(z - step * grad, tau)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        z = x_new + ((t_k - 1.0) / t_next) * (x_new - x)
        x = x_new
        t_k = t_next
        if config.tolerance > 0:
            obj = _objective(matrix, x, y2, config.lam)
            if obj_prev is not None:
                denom = np.maximum(np.abs(obj_prev), 1e-300)
                if np.all(np.abs(obj - obj_prev) <= config.tolerance * denom):
                    obj_prev = obj
                    break
            obj_prev = obj
    if not np.all(np.isfinite(x)):
        raise NumericError("solver iterate diverged to non-finite values")
    obj = _objective(matrix, x, y2, config.lam)
    return (x[:, 0], float(obj[0])) if squeeze else (x, obj)


def fista_l1(matrix, y, config):
    """Solve one slice; `y` is a length-m vector."""
    x, _ = fista_batch(matrix, y, config)
    return x


def recover_slices(matrix, cs, config):
    """Independent FISTA solve of every time slice of a CS data set.

    The data are multiplied by matrix.scale / cs.scale so that the problem
    solved is the unit-norm-rescaled functional regardless of the scale the
    measurements were recorded at.
    """
    if not cs.matches(matrix):
        raise ConfigError("matrix metadata does not match the CS data")
    y = cs.values * (matrix.scale / cs.scale)
    x, obj = fista_batch(matrix, y, config)
    return RecoveredData(times=cs.times, values=x, objectives=obj)
