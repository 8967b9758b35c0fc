"""entspec: entanglement-spectrum rate bounds, certified truncated time
evolution, and low-rank operator approximation tools."""

from .dynamics import (
    AdiabaticResult,
    DensePropagator,
    RateSample,
    adiabatic_error_bound,
    adiabatic_evolve,
    c_alpha,
    check_unitary_se_growth,
    evolve_dense,
    measure_rate_profile,
)
from .errors import (
    AlphaOutOfRangeError,
    BadAlphaError,
    BadCutError,
    BadExpansionError,
    BadWeightError,
    BelowThresholdError,
    BoundVacuousError,
    DegenerateError,
    EntspecError,
    EtaTooSmallError,
    GapClosedError,
    IntermediateTooLargeError,
    MismatchError,
    NoDecompositionError,
    StepTooCoarseError,
    TimeTooLongError,
    TooLargeError,
    UnnormalizedError,
    UnsupportedLocalityError,
    ZeroStateError,
    ZOutOfRangeError,
)
from .agsp_arealaw import (
    AgspOperator,
    AreaLawConstants,
    area_law_constants,
    boundary_adiabatic_experiment,
    build_agsp,
    c_kappa_1,
    c_kappa_2,
    ground_tail_experiment,
    make_coupled_qudit_family,
    op_norm_power,
    random_gapped_instance,
)
from .lowrank import (
    MergeSeries,
    TruncationParams,
    WidthResult,
    build_merge_series,
    kolmogorov_bounds,
    long_range_decomposition_check,
    merge_error_bound,
    no_go_experiment,
    no_go_lower_bound,
    rank_constrained_identity_fit,
    simplex_moment,
    truncation_error_params,
)
from .models import (
    ChainHamiltonian,
    CutHamiltonian,
    LocalTerm,
    SaturationDynamics,
    ToyTwoQubit,
    UnboundedDynamics,
    basis_product_state,
    build_ising_projector_interaction,
    build_long_range_ising,
    build_nearest_neighbor_chain,
    build_saturation_dynamics,
    build_swap_interaction,
    build_toy_two_qubit,
    build_unbounded_dynamics,
    chain_from_json,
    chain_to_json,
    product_state,
    random_dense_instance,
    random_product_state,
    split_at_cut,
)
from .mps import (
    CompressionRecord,
    MatrixProductState,
    add,
    apply_local_term,
    compress,
    from_dense,
    local_expectation,
    mps_from_json,
    mps_inner,
    mps_norm,
    mps_to_json,
    product_mps,
    to_dense,
)
from .se_strength import (
    BipartiteOperator,
    SeEstimate,
    alpha_se_bound_from_decay,
    alpha_se_lower_search,
    best_upper,
    long_range_se_bound,
    operator_schmidt_upper,
    se_lower_search,
    se_subadditive_combine,
    se_upper_from_decomposition,
)
from .spectra import (
    Cut,
    PureState,
    SchmidtSpectrum,
    coeff_times_index_bound,
    overlap_sum_bound_check,
    renyi_entropy,
    schmidt_coeff_bound_check,
    schmidt_decompose,
    truncate_rank,
)
from .tdmrg import (
    TdmrgCertificate,
    TdmrgConfig,
    certificate_theory_bound,
    default_step_count,
    gibbs_tail_experiment,
    naive_error_bound,
    normalized_final_error_bound,
    state_mps_existence_check,
    tdmrg_run,
)

__version__ = "0.1.0"
