"""Temporal filters applied per channel along the time axis.

Three operators share the same second-order difference scheme:

* the backprojection filter  q = (1/t) d/dt ((1/t) p),
* the sparsifying transform  Tp = t^3 d/dt ((1/t) d/dt ((1/t) p)),
* the tail integral          int_rho^t_max t^-3 q(t) dt.

The transform concentrates an N-wave into a few samples around its two
wavefront edges while acting in time only, so it commutes with any spatial
measurement matrix.  Divisions by t at t = 0 yield 0; data from sources with
positive standoff vanish there, so the choice is multiplied by zero data.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grids import TimeGrid

UBP_FILTER = "ubp_filter"
SPARSIFYING_T = "sparsifying_T"
TAIL_INTEGRAL = "tail_integral"


@dataclass
class FilteredData:
    """Filtered traces in the same (channels, n_t) layout as their source."""

    times: TimeGrid
    values: np.ndarray
    filter_tag: str
    grid: object = None  # DetectorGrid for point data, None for CS channels

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != self.times.n_t:
            raise ConfigError("filtered values must be (channels, n_t)")


def _time_derivative(values, dt):
    """Central differences along axis 1, second-order one-sided at endpoints."""
    out = np.empty_like(values)
    out[:, 1:-1] = (values[:, 2:] - values[:, :-2]) / (2.0 * dt)
    out[:, 0] = (-3.0 * values[:, 0] + 4.0 * values[:, 1] - values[:, 2]) / (2.0 * dt)
    out[:, -1] = (3.0 * values[:, -1] - 4.0 * values[:, -2] + values[:, -3]) / (2.0 * dt)
    return out


def _divide_by_t(values, times):
    """Per-sample division by t; the t = 0 column is set to 0."""
    out = np.zeros_like(values)
    out[:, 1:] = values[:, 1:] / times[1:]
    return out


def _as_traces(data):
    """(values, TimeGrid, grid-or-None) from PressureData, CsData, or arrays."""
    times = data.times
    grid = getattr(data, "grid", None)
    return np.asarray(data.values, dtype=float), times, grid


def transform_values(values, times):
    """Sparsifying transform on a raw (channels, n_t) array."""
    if times.n_t < 5:
        raise ConfigError("sparsifying transform needs at least 5 time samples")
    t = times.times
    u = _divide_by_t(values, t)
    u = _time_derivative(u, times.dt)
    u = _divide_by_t(u, t)
    u = _time_derivative(u, times.dt)
    return t**3 * u


def ubp_filter_values(values, times):
    """Backprojection filter (1/t) d/dt ((1/t) p) on a raw array."""
    if times.n_t < 5:
        raise ConfigError("filter needs at least 5 time samples")
    t = times.times
    u = _divide_by_t(values, t)
    u = _time_derivative(u, times.dt)
    return _divide_by_t(u, t)


def apply_T(data):
    """Sparsifying transform of point data or CS measurements."""
    values, times, grid = _as_traces(data)
    return FilteredData(times, transform_values(values, times), SPARSIFYING_T, grid)


def ubp_filter(data):
    """Backprojection filter of point data."""
    values, times, grid = _as_traces(data)
    return FilteredData(times, ubp_filter_values(values, times), UBP_FILTER, grid)


def tail_integral_grid(values, times):
    """Tail integrals Q[., k] = int_{t_k}^{t_max} t^-3 values dt on the whole grid.

    Trapezoidal rule; the integrand is taken as 0 at t = 0.
    """
    t = times.times
    g = np.zeros_like(values)
    g[:, 1:] = values[:, 1:] / t[1:] ** 3
    cells = 0.5 * (g[:, 1:] + g[:, :-1]) * np.diff(t)
    cum = np.concatenate([np.zeros((values.shape[0], 1)), np.cumsum(cells, axis=1)], axis=1)
    return cum[:, -1:] - cum


def tail_integral(filtered, rho):
    """int_rho^t_max t^-3 q dt per channel, interpolating q linearly at rho.

    rho beyond t_max returns 0 (the signal is assumed decayed).
    """
    if rho < 0:
        raise ConfigError("rho must be nonnegative")
    times = filtered.times
    values = np.asarray(filtered.values, dtype=float)
    if rho >= times.t_max:
        return np.zeros(values.shape[0])
    t = times.times
    grid_q = tail_integral_grid(values, times)
    j = int(np.searchsorted(t, rho, side="right") - 1)
    j = min(max(j, 0), times.n_t - 2)
    # partial cell [rho, t_{j+1}] with q interpolated at rho
    frac = (rho - t[j]) / (t[j + 1] - t[j])
    q_rho = values[:, j] * (1.0 - frac) + values[:, j + 1] * frac
    g_rho = q_rho / rho**3 if rho > 0 else np.zeros(values.shape[0])
    g_next = np.zeros(values.shape[0])
    if t[j + 1] > 0:
        g_next = values[:, j + 1] / t[j + 1] ** 3
    partial = 0.5 * (g_rho + g_next) * (t[j + 1] - rho)
    return grid_q[:, j + 1] + partial
