"""Spectral, statistical, and Monte-Carlo analysis of quantum Markov chains."""

from . import errors, qubit_example
from .channels import (
    DEFAULT_TENSOR_CAP,
    Isometry,
    Superoperator,
    apply_steps,
    channel,
    dilation,
    isometry_from_kraus,
    sandwich_map,
)
from .ergodic import (
    ErgodicTol,
    SpectralProfile,
    access_span_check,
    analyze,
    ergodic_projection,
    output_state,
    periodic_projections,
    stationary_eigenbasis,
)
from .gauge import (
    TangentSplit,
    TangentVector,
    act,
    dmu,
    equivalence_witness,
    mode_decompose,
    restricted_resolvent_solve,
    singular_dimension,
    split,
    stabiliser,
    stabiliser_tangent_action,
    tangent_inner,
    witness_matches,
)
from .gaussian import (
    MixtureGram,
    ModePoint,
    coherent_overlap,
    eta_hat,
    gram_deficiency_bound,
    lambda_k,
    mixture_equivalent,
    mixture_gram,
    mixture_trace_distance,
    mode_point,
    predicted_component_limit,
    zeta_gram,
)
from .statmodel import (
    DeformedChannel,
    LocalObservable,
    QfiReport,
    asymptotic_variance,
    component_overlap,
    finite_window_variance,
    joint_overlap,
    output_component_vectors,
    qfi_curve,
    qfi_finite,
    qfi_rate,
    qfi_report,
    retract,
    stationary_mean,
    weak_qlan_error,
    weak_qlan_report,
)
from .trajectories import (
    BlockMeasurement,
    FluctuationStats,
    TrajectoryRecord,
    block_kraus,
    fluctuation_stats,
    run_estimator,
    sample,
    sample_batch,
    standard_measurement,
)

__version__ = "0.1.0"
