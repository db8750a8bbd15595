"""Experiment configuration and the staged simulation/reconstruction pipeline.

The default configuration reproduces the simulated-data protocol: a two-sphere
phantom sampled by 64 x 64 detectors on [-3, 3]^2, 243 time samples on [0, 6],
a 1024 x 4096 expander matrix with d = 15 rescaled to unit norm, lambda = 1e-5
and 7500 FISTA iterations at step 1, reconstructed on a 241 x 41 vertical
slice.  The "ci" profile shrinks this to desk scale (32 x 32 detectors, 121
time samples, m = 256, d = 8, 1500 iterations) for fast tests.
"""

import copy
import json
import math

import numpy as np

from .errors import ConfigError
from .forward import SpherePhantom, phantom_pressure, phantom_source_slice
from .grids import DetectorGrid, ReconGrid, TimeGrid
from .metrics import ErrorReport, normalized_error
from .recon import modified_ubp, ubp_reconstruct, undersampled_ubp
from .sensing import (
    BERNOULLI,
    CsData,
    EXPANDER,
    HADAMARD,
    IDENTITY_SUBSET,
    apply_measurement,
    build_bernoulli,
    build_expander,
    build_identity_subset,
    build_subsampled_hadamard,
    rescale_to_unit_norm,
)
from .solver import SolverConfig, recover_slices
from .sparsify import apply_T

MODE_STANDARD = "standard_ubp"
MODE_UNDERSAMPLED = "undersampled_standard"
MODE_CS_IDENTITY = "cs_two_stage_identity"
MODE_CS_T = "cs_two_stage_T"
MODES = (MODE_STANDARD, MODE_UNDERSAMPLED, MODE_CS_IDENTITY, MODE_CS_T)

DEFAULT_PHANTOM = [
    {"center": [-0.8, 0.0, 0.5], "radius": 0.12, "amplitude": 1.2},
    {"center": [0.75, 0.0, 0.4], "radius": 0.1, "amplitude": 1.2},
]

DEFAULT_CONFIG = {
    "phantom": DEFAULT_PHANTOM,
    "detector_grid": {"x_min": -3.0, "x_max": 3.0, "y_min": -3.0, "y_max": 3.0,
                      "n_x": 64, "n_y": 64},
    "time_grid": {"t_max": 6.0, "n_t": 243},
    "recon_grid": {"x_min": -3.0, "x_max": 3.0, "y_min": 0.0, "y_max": 0.0,
                   "z_min": 0.0, "z_max": 1.0, "n_x": 241, "n_y": 1, "n_z": 41},
    "matrix": {"kind": "expander", "m": 1024, "d": 15, "seed": 1301},
    "solver": {"lambda": 1e-5, "n_iter": 7500, "step": 1.0, "tolerance": 0.0},
    "noise_level": 0.0,
    "mode": MODE_CS_T,
    "output_dir": "out",
}

CI_PROFILE = {
    "detector_grid": {"n_x": 32, "n_y": 32},
    "matrix": {"m": 256, "d": 8},
    "time_grid": {"n_t": 121},
    "solver": {"n_iter": 5000},
}

_SPHERE_KEYS = {"center", "radius", "amplitude"}


def _check_keys(section, data, allowed):
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {section}")


def _merged(defaults, overrides, section):
    if not isinstance(overrides, dict):
        raise ConfigError(f"{section} must be an object")
    _check_keys(section, overrides, defaults)
    out = dict(defaults)
    out.update(overrides)
    return out


class ExperimentConfig:
    """Validated experiment description; unknown keys are rejected."""

    def __init__(self, raw=None):
        raw = {} if raw is None else raw
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        _check_keys("config", raw, DEFAULT_CONFIG)
        merged = copy.deepcopy(DEFAULT_CONFIG)
        for key in ("detector_grid", "time_grid", "recon_grid", "matrix", "solver"):
            if key in raw:
                merged[key] = _merged(merged[key], raw[key], key)
        for key in ("phantom", "noise_level", "mode", "output_dir"):
            if key in raw:
                merged[key] = copy.deepcopy(raw[key])

        if merged["mode"] not in MODES:
            raise ConfigError(f"unknown mode {merged['mode']!r}; pick one of {MODES}")
        if not isinstance(merged["phantom"], list):
            raise ConfigError("phantom must be a list of spheres")
        for entry in merged["phantom"]:
            if not isinstance(entry, dict):
                raise ConfigError("each phantom entry must be an object")
            _check_keys("phantom entry", entry, _SPHERE_KEYS)
            for key in _SPHERE_KEYS:
                if key not in entry:
                    raise ConfigError(f"phantom entry missing {key!r}")
        if merged["noise_level"] < 0:
            raise ConfigError("noise_level must be nonnegative")

        self.raw = merged
        d = merged["detector_grid"]
        self.detector_grid = DetectorGrid(d["x_min"], d["x_max"], d["y_min"],
                                          d["y_max"], int(d["n_x"]), int(d["n_y"]))
        t = merged["time_grid"]
        self.time_grid = TimeGrid(float(t["t_max"]), int(t["n_t"]))
        r = merged["recon_grid"]
        self.recon_grid = ReconGrid(r["x_min"], r["x_max"], r["y_min"], r["y_max"],
                                    r["z_min"], r["z_max"],
                                    int(r["n_x"]), int(r["n_y"]), int(r["n_z"]))
        self.phantom = SpherePhantom.from_list(
            [(e["center"], e["radius"], e["amplitude"]) for e in merged["phantom"]]
        )
        m = merged["matrix"]
        if m["kind"] not in (BERNOULLI, HADAMARD, EXPANDER, IDENTITY_SUBSET):
            raise ConfigError(f"unknown matrix kind {m['kind']!r}")
        self.matrix_kind = m["kind"]
        self.m = int(m["m"])
        self.d = int(m["d"])
        self.seed = int(m["seed"])
        s = merged["solver"]
        self.solver = SolverConfig(lam=float(s["lambda"]), n_iter=int(s["n_iter"]),
                                   step=float(s["step"]), tolerance=float(s["tolerance"]))
        self.noise_level = float(merged["noise_level"])
        self.mode = merged["mode"]
        self.output_dir = merged["output_dir"]

    @classmethod
    def from_file(cls, path, profile=None, seed=None):
        with open(path) as f:
            try:
                raw = json.load(f)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.with_overrides(raw, profile=profile, seed=seed)

    @classmethod
    def with_overrides(cls, raw=None, profile=None, seed=None):
        raw = copy.deepcopy(raw) if raw else {}
        if profile not in (None, "paper", "ci"):
            raise ConfigError(f"unknown profile {profile!r}")
        if profile == "ci":
            # profile values fill in under explicitly configured keys
            for section, updates in CI_PROFILE.items():
                raw.setdefault(section, {})
                if not isinstance(raw[section], dict):
                    raise ConfigError(f"{section} must be an object")
                for key, value in updates.items():
                    raw[section].setdefault(key, value)
        if seed is not None:
            raw.setdefault("matrix", {})
            raw["matrix"]["seed"] = int(seed)
        return cls(raw)

    def build_matrix(self):
        """Raw (unrescaled) measurement matrix from the config."""
        n = self.detector_grid.n
        if self.matrix_kind == BERNOULLI:
            return build_bernoulli(self.m, n, self.seed)
        if self.matrix_kind == HADAMARD:
            return build_subsampled_hadamard(self.m, n, self.seed)
        if self.matrix_kind == IDENTITY_SUBSET:
            return build_identity_subset(self.m, n, seed=self.seed)
        return build_expander(self.m, n, self.d, self.seed)


# -- pipeline stages --------------------------------------------------------


def run_simulate(config):
    """Analytic point-sample pressure data for the configured phantom."""
    return phantom_pressure(config.phantom, config.detector_grid, config.time_grid)


def run_measure(config, pressure, matrix=None):
    """Compressed measurements with the configured (raw, unit-scale) matrix."""
    matrix = config.build_matrix() if matrix is None else matrix
    cs = apply_measurement(matrix, pressure, noise_level=config.noise_level)
    return matrix, cs


def _undersample_stride(config):
    n = config.detector_grid.n
    stride = math.isqrt(max(n // config.m, 1))
    sub, rows = config.detector_grid.subsample(stride)
    if sub.n != config.m:
        raise ConfigError(
            f"cannot subsample {config.detector_grid.n_x} x {config.detector_grid.n_y} "
            f"detectors down to m = {config.m} with a square stride"
        )
    return sub, rows


def run_reconstruct(config, pressure=None, cs=None, matrix=None):
    """Reconstruction for the configured mode.

    Returns (image, reports, extras); extras carries the per-slice recovery
    for the CS modes.
    """
    from .forward import PressureData

    extras = {}
    if config.mode == MODE_STANDARD:
        if pressure is None:
            raise ConfigError("standard_ubp needs point-sample pressure data")
        image = ubp_reconstruct(pressure, config.recon_grid)
    elif config.mode == MODE_UNDERSAMPLED:
        if pressure is None:
            raise ConfigError("undersampled_standard needs point-sample pressure data")
        sub, rows = _undersample_stride(config)
        sub_pressure = PressureData(sub, pressure.times, pressure.values[rows])
        image = undersampled_ubp(sub_pressure, config.recon_grid)
    elif config.mode in (MODE_CS_IDENTITY, MODE_CS_T):
        if cs is None:
            raise ConfigError("CS modes need measured data")
        matrix = config.build_matrix() if matrix is None else matrix
        if not cs.matches(matrix):
            raise ConfigError("CS data was not produced by the configured matrix")
        scaled = rescale_to_unit_norm(matrix)
        if config.mode == MODE_CS_T:
            filtered = apply_T(cs)
            cs_for_solver = CsData(
                kind=cs.kind, m=cs.m, n=cs.n, d=cs.d, seed=cs.seed, scale=cs.scale,
                times=cs.times, values=filtered.values, noise_level=cs.noise_level,
            )
            recovered = recover_slices(scaled, cs_for_solver, config.solver)
            recovered.grid = config.detector_grid
            image = modified_ubp(recovered, config.detector_grid, config.recon_grid)
        else:
            recovered = recover_slices(scaled, cs, config.solver)
            recovered.grid = config.detector_grid
            estimate = PressureData(config.detector_grid, cs.times, recovered.values)
            image = ubp_reconstruct(estimate, config.recon_grid)
        extras["recovered"] = recovered
        extras["matrix_scaled"] = scaled
    else:  # pragma: no cover - guarded by ExperimentConfig
        raise ConfigError(f"unknown mode {config.mode!r}")

    truth = phantom_source_slice(config.phantom, config.recon_grid)
    extras["truth"] = truth
    reports = [
        ErrorReport(method=config.mode, alpha=a,
                    value=normalized_error(image, truth, a),
                    m=_effective_m(config), n=config.detector_grid.n)
        for a in (1, 2)
    ]
    return image, reports, extras


def _effective_m(config):
    if config.mode == MODE_STANDARD:
        return config.detector_grid.n
    return config.m


def run_pipeline(config):
    """simulate -> measure -> reconstruct in memory."""
    pressure = run_simulate(config)
    if config.mode in (MODE_CS_IDENTITY, MODE_CS_T):
        matrix, cs = run_measure(config, pressure)
        return run_reconstruct(config, cs=cs, matrix=matrix)
    return run_reconstruct(config, pressure=pressure)


def run_series(config, factors):
    """Two-stage CS reconstruction for several compression factors n/m.

    Returns (rows, images): rows are (factor, alpha, error) tuples for
    alpha = 1, 2, images a {factor: ReconImage} map.
    """
    if not factors:
        raise ConfigError("need at least one compression factor")
    n = config.detector_grid.n
    pressure = run_simulate(config)
    rows, images = [], {}
    for factor in factors:
        if factor < 1 or n % factor:
            raise ConfigError(f"compression factor {factor} does not divide n = {n}")
        raw = dict(copy.deepcopy(config.raw))
        raw["matrix"]["m"] = n // factor
        raw["mode"] = MODE_CS_T
        sub_config = ExperimentConfig(raw)
        matrix, cs = run_measure(sub_config, pressure)
        image, reports, _ = run_reconstruct(sub_config, cs=cs, matrix=matrix)
        images[factor] = image
        for r in reports:
            rows.append((n / (n // factor), r.alpha, r.value))
    return rows, images


# -- appendix verification ----------------------------------------------------


def verify_appendix(sizes=None, seed=None):
    """Run the empirical compressed-sensing verifiers at enumerable sizes.

    Returns a list of (name, value, ok) entries.
    """
    from itertools import combinations

    from .metrics import best_s_term_error, compressibility_check, lp_norm
    from .sensing import (
        column_supports,
        dense_hadamard,
        estimate_expander_theta,
        estimate_rip_constant,
        hadamard_apply,
    )

    sizes = sizes or {}
    seed = DEFAULT_CONFIG["matrix"]["seed"] if seed is None else seed
    n_hadamard = int(sizes.get("hadamard", 64))
    exp_m = int(sizes.get("expander_m", 12))
    exp_n = int(sizes.get("expander_n", 24))
    exp_d = int(sizes.get("expander_d", 3))

    results = []

    ident = build_identity_subset(8, 8)
    delta = estimate_rip_constant(ident, 3)
    results.append(("rip_identity_delta_3", delta, delta == 0.0))

    ones_row = build_expander(1, 2, 1, seed)
    delta2 = estimate_rip_constant(ones_row, 2)
    results.append(("rip_ones_1x2_delta_2", delta2, delta2 == 1.0))

    theta_dup = estimate_expander_theta(ones_row, 2)
    results.append(("theta_duplicate_columns", theta_dup, theta_dup == 0.5))

    expander = build_expander(exp_m, exp_n, exp_d, seed)
    theta2 = estimate_expander_theta(expander, 2)
    results.append((f"theta_2_random_{exp_m}x{exp_n}_d{exp_d}", theta2, theta2 < 0.5))

    col_sums = np.array([len(set(map(int, expander.columns[i]))) for i in range(exp_n)])
    results.append(("expander_column_sums_d", float(exp_d), bool(np.all(col_sums == exp_d))))

    supports = column_supports(expander)
    two_sided = True
    for k in (1, 2):
        for subset in combinations(range(exp_n), k):
            neigh = frozenset().union(*(supports[i] for i in subset))
            if not ((1 - theta2) * exp_d * k <= len(neigh) + 1e-12 and len(neigh) <= exp_d * k):
                two_sided = False
    results.append(("expander_two_sided_bound", theta2, two_sided))

    h = dense_hadamard(n_hadamard)
    ortho = float(np.max(np.abs(h.T @ h - np.eye(n_hadamard))))
    results.append(("hadamard_orthonormality", ortho, ortho <= 1e-12))

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n_hadamard)
    fast_err = float(np.max(np.abs(hadamard_apply(x) - h @ x)))
    results.append(("hadamard_fast_vs_dense", fast_err, fast_err <= 1e-12))

    comp_ok = True
    for _ in range(200):
        v = rng.standard_normal(12)
        for q in (0.25, 0.5, 0.75):
            for s in range(1, 13):
                comp_ok &= compressibility_check(v, q, s)
    results.append(("compressibility_bound", float(comp_ok), bool(comp_ok)))

    v = rng.standard_normal(12)
    sigma = [best_s_term_error(v, s) for s in range(13)]
    mono = all(sigma[i + 1] <= sigma[i] + 1e-15 for i in range(12))
    ends = abs(sigma[0] - lp_norm(v, 1)) <= 1e-12 and sigma[12] == 0.0
    results.append(("s_term_error_monotone", float(mono and ends), bool(mono and ends)))

    return results
