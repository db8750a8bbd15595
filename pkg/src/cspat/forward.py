"""Analytic forward model: N-wave pressure traces of uniform spherical absorbers.

A uniformly absorbing sphere of radius R and amplitude A observed from an
exterior point at distance rho produces the bipolar trace

    p(t) = A * (rho - t) / (2 * rho)   for |rho - t| <= R,  else 0,

the classic N-shaped profile (c = 1).  Semi-discrete data sample these traces
on the detector grid x time grid.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grids import DetectorGrid, ReconGrid, TimeGrid


@dataclass(frozen=True)
class Sphere:
    """Uniform spherical absorber strictly inside the upper half space."""

    center: tuple
    radius: float
    amplitude: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigError("sphere radius must be positive")
        if len(self.center) != 3:
            raise ConfigError("sphere center must be a 3-vector")
        if self.center[2] <= self.radius:
            raise ConfigError("sphere must lie strictly above the detector plane (center_z > radius)")


@dataclass(frozen=True)
class SpherePhantom:
    """Finite list of spherical absorbers; the initial pressure source."""

    spheres: tuple

    def __post_init__(self):
        object.__setattr__(self, "spheres", tuple(self.spheres))

    @classmethod
    def from_list(cls, entries):
        """Build from [(center, radius, amplitude), ...] or Sphere instances."""
        spheres = [
            e if isinstance(e, Sphere) else Sphere(tuple(e[0]), float(e[1]), float(e[2]))
            for e in entries
        ]
        return cls(tuple(spheres))

    def source_values(self, points):
        """Initial pressure at an (n, 3) array of points: sum of amplitudes of
        the spheres containing each point."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(len(points))
        for s in self.spheres:
            d2 = np.sum((points - np.asarray(s.center)) ** 2, axis=1)
            out += s.amplitude * (d2 <= s.radius**2)
        return out


@dataclass
class PressureData:
    """Semi-discrete pressure p[i, t_k] on detector grid x time grid."""

    grid: DetectorGrid
    times: TimeGrid
    values: np.ndarray  # (n, n_t)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n, self.times.n_t):
            raise ConfigError(
                f"pressure array shape {self.values.shape} does not match "
                f"grid ({self.grid.n}) x time ({self.times.n_t})"
            )


def sphere_pressure(sphere, observation_point, t):
    """Pressure of a single uniform sphere at an exterior point.

    Parameters
    ----------
    sphere : Sphere
    observation_point : length-3 sequence
    t : float or array of times (ct units)

    Returns
    -------
    Pressure value(s); zero outside the arrival window [rho - R, rho + R].
    """
    r = np.asarray(observation_point, dtype=float)
    rho = float(np.linalg.norm(r - np.asarray(sphere.center)))
    if rho <= sphere.radius:
        raise ValueError("observation point inside the sphere")
    t = np.asarray(t, dtype=float)
    return np.where(
        np.abs(rho - t) <= sphere.radius,
        sphere.amplitude * (rho - t) / (2.0 * rho),
        0.0,
    )


def phantom_pressure(phantom, detector_grid, time_grid):
    """Pressure traces of a phantom on every detector: superposition of the
    per-sphere N-waves."""
    t = time_grid.times
    values = np.zeros((detector_grid.n, time_grid.n_t))
    for s in phantom.spheres:
        rho = np.linalg.norm(detector_grid.positions - np.asarray(s.center), axis=1)
        if np.any(rho <= s.radius):
            raise ValueError("a detector lies inside a sphere")
        window = np.abs(rho[:, None] - t[None, :]) <= s.radius
        values += np.where(window, s.amplitude * (rho[:, None] - t[None, :]) / (2.0 * rho[:, None]), 0.0)
    return PressureData(detector_grid, time_grid, values)


def phantom_source_slice(phantom, recon_grid):
    """Ground-truth initial pressure sampled on a reconstruction grid."""
    from .recon import ReconImage

    return ReconImage(recon_grid, phantom.source_values(recon_grid.positions))


def first_arrival_time(phantom, detector_grid):
    """Earliest wavefront arrival over all detectors: min_i |r_S[i] - c| - R."""
    arrivals = [
        np.linalg.norm(detector_grid.positions - np.asarray(s.center), axis=1).min() - s.radius
        for s in phantom.spheres
    ]
    return min(arrivals) if arrivals else np.inf
