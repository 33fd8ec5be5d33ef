"""Estimation of shared left singular subspaces across multiple noisy
low-rank matrices: stacked-SVD estimators, shared/unshared vector tracing,
rate and phase-transition calculators, and a Monte Carlo harness."""

from .exceptions import AmbiguityError, ContractError, NumericalError, ParseError
from .linalg import (
    ORTHO_TOL,
    SvdFactorization,
    compute_svd,
    random_orthonormal,
    require_frame,
    sin_theta,
)
from .model import (
    SignalPair,
    SignalSpec,
    SingularVectorId,
    SwitchProfile,
    add_noise,
    ajive_parts,
    build_signal,
    nonorthogonal_stacked_svd,
    spec_from_json,
    spec_to_json,
    stack,
    switch_profile,
)
from .estimators import (
    SubspaceEstimate,
    average_svd,
    individual_svd,
    select_svd,
    stack_svd,
)
from .tracing import (
    TraceOutput,
    elbow_rank,
    estimate_counts,
    pair_distances,
    shared_svd,
    trace_shared,
    trace_shared_multi,
)
from .theory import (
    MembershipReport,
    PhaseRegion,
    RateQuery,
    classify_phase,
    phase_grid,
    rate_upper,
    snr_thresholds,
    space_membership,
    write_phase_svg,
)
from .harness import (
    SimConfig,
    SimReport,
    TABLE1_ROWS,
    TABLE2_ROWS,
    TABLE3_SETTINGS,
    run_experiment,
    table1_spec,
    table2_spec,
    table3_rows,
    tracing_spec,
)
from .metrics import EmbeddingEvalReport, eval_embedding
from .io import load_labels, load_matrix, save_matrix, save_report

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError", "ContractError", "NumericalError", "ParseError",
    "ORTHO_TOL", "SvdFactorization", "compute_svd", "random_orthonormal",
    "require_frame", "sin_theta",
    "SignalPair", "SignalSpec", "SingularVectorId", "SwitchProfile",
    "add_noise", "ajive_parts", "build_signal", "nonorthogonal_stacked_svd",
    "spec_from_json", "spec_to_json", "stack", "switch_profile",
    "SubspaceEstimate", "average_svd", "individual_svd", "select_svd", "stack_svd",
    "TraceOutput", "elbow_rank", "estimate_counts", "pair_distances",
    "shared_svd", "trace_shared", "trace_shared_multi",
    "MembershipReport", "PhaseRegion", "RateQuery", "classify_phase",
    "phase_grid", "rate_upper", "snr_thresholds", "space_membership", "write_phase_svg",
    "SimConfig", "SimReport", "TABLE1_ROWS", "TABLE2_ROWS", "TABLE3_SETTINGS",
    "run_experiment", "table1_spec", "table2_spec", "table3_rows", "tracing_spec",
    "EmbeddingEvalReport", "eval_embedding",
    "load_labels", "load_matrix", "save_matrix", "save_report",
]
