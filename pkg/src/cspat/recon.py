"""Backprojection reconstruction on planar detection geometry.

Point data go through the filter q = (1/t) d/dt ((1/t) p) and are summed over
detectors at retarded times,

    p0[k] = -(z[k] / pi) * sum_i q[i, |r[k] - r_S[i]|] * w_i ,

with uniform quadrature weights w_i = dx * dy and linear interpolation in
time.  Recovered sparsified data instead accumulate the tail integrals
Q[i, rho] = int_rho^t_max t^-3 q dt with the opposite sign.  The two routes
agree because t^-3 (Tp) is the exact time derivative of the backprojection
filtrate.  The overall sign convention is fixed by requiring that a positive
absorber reconstructs with positive amplitude.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grids import ReconGrid
from .sparsify import tail_integral_grid, ubp_filter

_CHUNK = 256  # detectors per vectorized backprojection block


@dataclass
class ReconImage:
    """Scalar source estimate on a reconstruction grid."""

    grid: ReconGrid
    values: np.ndarray  # flat, grid.n entries

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.values.shape != (self.grid.n,):
            raise ConfigError("image values must match the grid point count")

    def as_array(self):
        """Values reshaped to (n_z, n_y, n_x)."""
        return self.values.reshape(self.grid.shape)

    def argmax_position(self):
        k = int(np.argmax(self.values))
        return self.grid.positions[k]


def _backproject(trace_values, times, det_positions, recon_grid, weight, sign):
    """sign * (z/pi) * sum_i traces[i](|r - r_S[i]|) * weight, chunked over i."""
    pts = recon_grid.positions
    dt = times.dt
    n_t = times.n_t
    acc = np.zeros(len(pts))
    for start in range(0, len(det_positions), _CHUNK):
        det = det_positions[start:start + _CHUNK]
        tr = trace_values[start:start + _CHUNK]
        diff = pts[None, :, :] - det[:, None, :]
        rho = np.sqrt(np.sum(diff * diff, axis=2))
        pos = rho / dt
        idx = np.floor(pos).astype(np.int64)
        in_range = pos <= n_t - 1
        np.clip(idx, 0, n_t - 2, out=idx)
        frac = pos - idx
        lo = np.take_along_axis(tr, idx, axis=1)
        hi = np.take_along_axis(tr, idx + 1, axis=1)
        vals = (lo * (1.0 - frac) + hi * frac) * in_range
        acc += vals.sum(axis=0)
    z = pts[:, 2]
    return sign * (z / np.pi) * acc * weight


def ubp_reconstruct(pressure, recon_grid, weight_scale=1.0):
    """Universal backprojection of dense point data onto a grid."""
    if pressure.grid.n == 0 or recon_grid.n == 0:
        raise ConfigError("empty grid")
    q = ubp_filter(pressure)
    weight = pressure.grid.dx * pressure.grid.dy * weight_scale
    values = _backproject(
        q.values, pressure.times, pressure.grid.positions, recon_grid, weight, sign=-1.0
    )
    return ReconImage(recon_grid, values)


def undersampled_ubp(pressure, recon_grid, weight_scale=1.0):
    """Backprojection of data on a regularly subsampled detector grid.

    The coarse grid's own spacing already accounts for the thinning, so
    weight_scale stays 1 when `pressure.grid` is the subsampled grid itself.
    """
    return ubp_reconstruct(pressure, recon_grid, weight_scale=weight_scale)


def modified_ubp(recovered, detector_grid, recon_grid):
    """Backprojection of recovered sparsified data (two-stage second step).

    `recovered` holds per-slice estimates of the transformed traces Tp on the
    full detector grid; tail integrals are precomputed on the time grid and
    interpolated at the retarded times.
    """
    if recovered.values.shape[0] != detector_grid.n:
        raise ConfigError("recovered channel count does not match the detector grid")
    big_q = tail_integral_grid(recovered.values, recovered.times)
    weight = detector_grid.dx * detector_grid.dy
    values = _backproject(
        big_q, recovered.times, detector_grid.positions, recon_grid, weight, sign=+1.0
    )
    return ReconImage(recon_grid, values)
