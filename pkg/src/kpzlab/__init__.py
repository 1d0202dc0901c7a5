"""kpzlab: quenched RWRE / LPP laboratory with GUE and Tracy-Widom references."""

from .environment import (
    E1, E2, W1, W2,
    EnvironmentSpec, EnvStats, WeightOracle,
    env_stats, format_env_spec, log_weight, parse_env_spec, split_seed,
    validate_spec, weight_at,
)
from .lattice import (
    PathFunctionals, SweepResult,
    brute_force, compute_G, compute_L, compute_S, coupling_bound, geodesic,
    log_path_count, path_count, path_functionals, row_maxima, sandwich_check,
    sweep, sweep_targets,
)
from .scaling import (
    ScalingParams,
    admissible_exponent_bound, floor_map, grid_point, landscape_rescale,
    normalize, rate_at_axis, stat_theorem1_i, stat_theorem1_ii,
    stat_theorem1_iii,
)
from .gue import (
    ReferenceEcdf, SymTridiagonal,
    householder_tridiagonalize, lambda_k_reference, largest_eigenvalue,
    largest_eigenvalue_dense, largest_eigenvalues_batch, normal_reference,
    sample_gue, sample_gue_batch, sample_gue_tridiagonal, sturm_count,
    tw_reference,
)
from .stats import (
    Ecdf, KsResult, MomentSummary,
    bootstrap_ci, ecdf, ks_one_sample, ks_two_sample, moments,
)
from .harness import (
    ExperimentConfig,
    run_analyze, run_couple, run_simulate, run_verify,
)

__version__ = "0.1.0"
