"""Gaussian phase-space simulator for continuous-variable cluster computation."""

from .phase_space import (
    IDEAL_SQUEEZING_R,
    VACUUM_VARIANCE,
    DegenerateMeasurementError,
    GaussianState,
    Quadrature,
    SymplecticGate,
    apply_gate,
    beamsplitter_5050,
    coherent_state,
    controlled_z,
    controlled_z_pp,
    displace,
    embed_symplectic,
    fourier,
    homodyne,
    min_uncertainty_eigenvalue,
    overlap_fidelity,
    p_shear,
    purity,
    rotation,
    shear,
    squeezed_vacuum,
    squeezer,
    symplectic_defect,
    symplectic_form,
    tensor,
    uncertainty_defect,
    vacuum_state,
)
from .cluster import ClusterSpec, attach_input, epr_resource, linear_cluster, modified_resource
from .algebra import (
    ExponentPolynomial,
    bch_squeezer_residual,
    clifford_commute,
    fourier_shear_step,
    squeezer_protocol_matrix,
    verify_cubic_feedforward,
)
from .engine import (
    ByproductFrame,
    GaussianChannel,
    MeasurementRecord,
    NonDeterministicChannelError,
    StepPlan,
    apply_correction,
    channel_tomography,
    dual_step,
    measurement_basis,
    outcome_independence_check,
    run_protocol,
    update_frame,
)
from .protocols import (
    ProtocolCheck,
    ProtocolReport,
    db_to_squeezing_r,
    identity_chain,
    offline_squeezer,
    offline_teleport,
    repeated_squeezer,
    run_named_protocol,
    squeezer_four_step,
    sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
