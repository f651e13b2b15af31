"""Brownian motion on the Siegel domain, at matrix and spectral level.

Matrix-level paths move a complex symmetric disk-model point by a
Stratonovich predictor-corrector step; spectral-level paths move the
radial coordinates directly as an interacting particle system whose drift
is half the gradient of a log-volume entropy.  Both are driven from one
seeded counter-based generator, and a statistics harness checks that the
two constructions agree in law.
"""
from .cli import __version__, check_identities, main
from .config import SimConfig, config_from_dict
from .ensemble import PathEnsemble, ensembles_equal, read_jsonl, run_ensemble, write_jsonl
from .entropy import bump, cutoff_eta, entropy, entropy_gradient, entropy_laplacian, log_cosh_norm
from .errors import (
    ChamberExit,
    ConfigInvalid,
    ConvergenceFailure,
    DegenerateSpectrum,
    DomainExit,
    EmptySample,
    NotAntiHermitian,
    NotHermitian,
    NotSymmetric,
    OriginHit,
    OutOfChamber,
    ShapeMismatch,
    SiegelError,
    SingularShift,
)
from .geometry import (
    DiskPoint,
    FrameBasis,
    SiegelPoint,
    SpectralCoord,
    cayley_to_disk,
    cayley_to_half,
    cross_ratio,
    disk_metric,
    disk_point,
    frame_at,
    frame_gram,
    lambda_to_sigma,
    normal_drift,
    sigma_to_lambda,
    spectral_coordinates,
    takagi_of_disk,
)
from .linalg import (
    TakagiFactors,
    hermitian_eigenvalues,
    is_positive_definite,
    matrix_from_json,
    matrix_to_json,
    takagi_decompose,
    unitary_algebra_basis,
    unitary_exp,
)
from .matrix_flow import (
    MatrixFlowState,
    extract_sigma,
    init_matrix_state,
    simulate_matrix_paths,
    step_matrix_flow,
    step_takagi_chart,
)
from .particle_flow import (
    dyson_drift,
    integrate_mean_curvature,
    siegel_drift,
    simulate_particle_paths,
    step_particles,
    step_sphere_point,
)
from .stats import KSResult, compare_ensembles, ks_two_sample, moment_report

__all__ = [
    "SimConfig",
    "config_from_dict",
    "PathEnsemble",
    "run_ensemble",
    "read_jsonl",
    "write_jsonl",
    "ensembles_equal",
    "entropy",
    "entropy_gradient",
    "entropy_laplacian",
    "log_cosh_norm",
    "bump",
    "cutoff_eta",
    "SiegelError",
    "NotSymmetric",
    "NotHermitian",
    "NotAntiHermitian",
    "ConvergenceFailure",
    "SingularShift",
    "DegenerateSpectrum",
    "OutOfChamber",
    "ChamberExit",
    "DomainExit",
    "OriginHit",
    "EmptySample",
    "ShapeMismatch",
    "ConfigInvalid",
    "SiegelPoint",
    "DiskPoint",
    "SpectralCoord",
    "FrameBasis",
    "cayley_to_disk",
    "cayley_to_half",
    "cross_ratio",
    "spectral_coordinates",
    "lambda_to_sigma",
    "sigma_to_lambda",
    "disk_point",
    "disk_metric",
    "frame_at",
    "frame_gram",
    "takagi_of_disk",
    "normal_drift",
    "TakagiFactors",
    "takagi_decompose",
    "hermitian_eigenvalues",
    "is_positive_definite",
    "unitary_exp",
    "unitary_algebra_basis",
    "matrix_to_json",
    "matrix_from_json",
    "MatrixFlowState",
    "init_matrix_state",
    "step_matrix_flow",
    "step_takagi_chart",
    "extract_sigma",
    "simulate_matrix_paths",
    "siegel_drift",
    "dyson_drift",
    "step_particles",
    "step_sphere_point",
    "integrate_mean_curvature",
    "simulate_particle_paths",
    "KSResult",
    "ks_two_sample",
    "moment_report",
    "compare_ensembles",
    "check_identities",
    "main",
    "__version__",
]
