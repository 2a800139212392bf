"""No-signalling boxes, extremal counterfactual couplings, and macroscopic
signalling simulations, together with the variance-bound chain that pins the
maximal CHSH value compatible with causality in the classical limit."""

from .boxes import (
    A,
    A_PRIME,
    B,
    B_PRIME,
    AgreementProbs,
    BipartiteBox,
    Choice,
    CorrelationTable,
    Locality,
    NoSignallingReport,
    Party,
    Setting,
    agreement_probabilities,
    box_correlations,
    box_from_correlations,
    box_from_json,
    box_to_json,
    check_no_signalling,
    chsh,
    chsh_variants,
    classify_locality,
    correlation,
    deterministic_tables,
    local_hull_membership,
    make_local_deterministic,
    make_pr_box,
    make_tilted_box,
)
from .causality import (
    TSIRELSON_BOUND,
    CausalityCheck,
    FrontierReport,
    VarianceBudget,
    VectorAdditionModel,
    budget_from_couplings,
    budget_from_table,
    budget_identity_residual,
    causality_condition,
    critical_c_scalar,
    flip_bob_labels,
    frontier_scan,
    orient_for_bounds,
    tsirelson_check,
    variance_lower_bound_a,
    variance_lower_bound_ap,
    vector_addition_model,
)
from .coupling import (
    Combination,
    CouplingBounds,
    CouplingObjective,
    CouplingValidation,
    TripleCoupling,
    coupling_bounds,
    coupling_from_json,
    coupling_to_json,
    extremal_coupling,
    make_scalar_extremal_couplings,
    per_pair_variance,
    pr_limit_couplings,
    validate_coupling,
)
from .macro import (
    BatchArrays,
    BatchConfig,
    EmpiricalDistribution,
    MacroObservation,
    MeanSquareReport,
    NoiseModel,
    Strategy,
    a_distribution,
    batch_lattice,
    empirical,
    mean_square_check,
    parallelogram_check,
    parallelogram_residuals,
    sample_batch,
    sample_batches,
    write_batches_csv,
)
from .signalling import (
    Detector,
    ProtocolConfig,
    SignallingReport,
    SweepRow,
    Verdict,
    advantage_ceiling,
    batch_law,
    couplings_for_table,
    detector_covariance_sign,
    detector_postselect,
    exact_tv_distance,
    make_likelihood_detector,
    optimal_advantage,
    resource_sweep,
    run_protocol,
    wilson_interval,
    write_sweep_csv,
)

__version__ = "0.1.0"
