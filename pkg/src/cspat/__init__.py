"""Compressed-sensing photoacoustic tomography in planar geometry.

A numpy/scipy library covering the full simulated-data workflow: analytic
N-wave forward model for spherical absorbers, binary random measurement
matrices (Bernoulli, subsampled Hadamard, expander), the sparsifying temporal
transform, per-time-slice FISTA l1 recovery, and universal backprojection,
together with empirical restricted-isometry and expansion verifiers.
"""

from .errors import ConfigError, FileFormatError, NumericError
from .forward import (
    PressureData,
    Sphere,
    SpherePhantom,
    first_arrival_time,
    phantom_pressure,
    phantom_source_slice,
    sphere_pressure,
)
from .grids import (
    DetectorGrid,
    ReconGrid,
    TimeGrid,
    build_detector_grid,
    build_recon_grid,
    build_time_grid,
)
from .metrics import (
    ErrorReport,
    best_s_term_error,
    compressibility_check,
    histogram,
    l0_norm,
    lp_norm,
    normalized_error,
)
from .pipeline import (
    DEFAULT_CONFIG,
    ExperimentConfig,
    run_measure,
    run_pipeline,
    run_reconstruct,
    run_series,
    run_simulate,
    verify_appendix,
)
from .recon import ReconImage, modified_ubp, ubp_reconstruct, undersampled_ubp
from .sensing import (
    CsData,
    MeasurementMatrix,
    apply_measurement,
    build_bernoulli,
    build_expander,
    build_identity_subset,
    build_subsampled_hadamard,
    dense_hadamard,
    estimate_expander_theta,
    estimate_rip_constant,
    hadamard_apply,
    power_iteration_norm,
    rescale_to_unit_norm,
)
from .solver import RecoveredData, SolverConfig, fista_l1, recover_slices, soft_threshold
from .sparsify import FilteredData, apply_T, tail_integral, tail_integral_grid, ubp_filter

__version__ = "0.1.0"
