"""Geometry and sampling descriptors: detector plane, time axis, reconstruction grid.

All lengths are in sound-speed-normalized units (c = 1, times are ct).
Detectors live on the plane z = 0; sources and reconstruction points in the
half space z >= 0.  Every grid enumerates its points row-major with x varying
fastest, which fixes the meaning of measurement-matrix columns and of the
binary file layouts.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


def _axis(lo, hi, count):
    """Uniform samples on [lo, hi], endpoints included; a single-count axis
    collapses to the axis minimum."""
    if count == 1:
        return np.array([float(lo)])
    return np.linspace(float(lo), float(hi), count)


@dataclass(frozen=True)
class DetectorGrid:
    """Regular detector grid on the measurement plane z = 0."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n_x: int
    n_y: int
    positions: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_x < 1 or self.n_y < 1:
            raise ConfigError("detector counts must be >= 1")
        if (self.n_x > 1 and not self.x_min < self.x_max) or (
            self.n_y > 1 and not self.y_min < self.y_max
        ):
            raise ConfigError("degenerate detector extent")
        x = _axis(self.x_min, self.x_max, self.n_x)
        y = _axis(self.y_min, self.y_max, self.n_y)
        xx, yy = np.meshgrid(x, y, indexing="xy")  # y-major, x fastest
        pos = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(self.n_x * self.n_y)])
        object.__setattr__(self, "positions", pos)

    @property
    def n(self):
        return self.n_x * self.n_y

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n_x - 1) if self.n_x > 1 else 0.0

    @property
    def dy(self):
        return (self.y_max - self.y_min) / (self.n_y - 1) if self.n_y > 1 else 0.0

    def index(self, i_x, i_y):
        """Flat index of detector (i_x, i_y); x varies fastest."""
        return i_y * self.n_x + i_x

    def multi_index(self, i):
        return i % self.n_x, i // self.n_x

    def subsample(self, stride):
        """Regular stride-subsampled grid (every stride-th detector per axis).

        Returns the coarse grid and the flat row indices it keeps.
        """
        if stride < 1:
            raise ConfigError("stride must be >= 1")
        x = _axis(self.x_min, self.x_max, self.n_x)[::stride]
        y = _axis(self.y_min, self.y_max, self.n_y)[::stride]
        sub = DetectorGrid(x[0], x[-1], y[0], y[-1], len(x), len(y))
        rows = (np.arange(len(y))[:, None] * stride * self.n_x
                + np.arange(len(x))[None, :] * stride).ravel()
        return sub, rows


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time samples t_k on [0, t_max] in ct units."""

    t_max: float
    n_t: int
    times: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.t_max <= 0:
            raise ConfigError("t_max must be positive")
        if self.n_t < 3:
            raise ConfigError("need at least 3 time samples")
        object.__setattr__(self, "times", np.linspace(0.0, float(self.t_max), self.n_t))

    @property
    def dt(self):
        return self.t_max / (self.n_t - 1)


@dataclass(frozen=True)
class ReconGrid:
    """Reconstruction grid in the upper half space z >= 0.

    A vertical slice is a grid with n_y = 1.  Points are enumerated row-major
    with x fastest, then y, then z.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_min: float
    z_max: float
    n_x: int
    n_y: int
    n_z: int
    positions: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for cnt in (self.n_x, self.n_y, self.n_z):
            if cnt < 1:
                raise ConfigError("reconstruction counts must be >= 1")
        if self.z_min < 0 or self.z_max < 0:
            raise ConfigError("reconstruction grid must lie in the half space z >= 0")
        for lo, hi, cnt in (
            (self.x_min, self.x_max, self.n_x),
            (self.y_min, self.y_max, self.n_y),
            (self.z_min, self.z_max, self.n_z),
        ):
            if cnt > 1 and not lo < hi:
                raise ConfigError("degenerate reconstruction extent")
        x = _axis(self.x_min, self.x_max, self.n_x)
        y = _axis(self.y_min, self.y_max, self.n_y)
        z = _axis(self.z_min, self.z_max, self.n_z)
        zz, yy, xx = np.meshgrid(z, y, x, indexing="ij")  # z slowest, x fastest
        pos = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])
        object.__setattr__(self, "positions", pos)

    @property
    def n(self):
        return self.n_x * self.n_y * self.n_z

    @property
    def shape(self):
        return (self.n_z, self.n_y, self.n_x)

    def index(self, i_x, i_y, i_z):
        return (i_z * self.n_y + i_y) * self.n_x + i_x

    def multi_index(self, k):
        i_x = k % self.n_x
        i_y = (k // self.n_x) % self.n_y
        i_z = k // (self.n_x * self.n_y)
        return i_x, i_y, i_z


def build_detector_grid(x_extent, y_extent, n_x, n_y):
    """Detector grid from (min, max) extents and per-axis counts."""
    return DetectorGrid(x_extent[0], x_extent[1], y_extent[0], y_extent[1], n_x, n_y)


def build_time_grid(t_max, n_t):
    return TimeGrid(t_max, n_t)


def build_recon_grid(x_extent, y_extent, z_extent, n_x, n_y, n_z):
    return ReconGrid(
        x_extent[0], x_extent[1],
        y_extent[0], y_extent[1],
        z_extent[0], z_extent[1],
        n_x, n_y, n_z,
    )
