from .errors import (
    RestorationError,
    ValidationError,
    NumericalFailure,
    UnsatisfiableConditionError,
)
from .extended import ExtendedReal, POS_INF, NEG_INF
from .weights import (
    WeightFunction,
    make_builtin_weight,
    make_weight,
    tail_integral_upper,
    tail_integral_lower,
    psi_transform,
    psi_transform_array,
    psi_inverse,
    lipschitz_constant,
    jump_penalty,
    jump_penalty_hat,
)
from .signals import (
    Grid,
    DiscreteSignal,
    JumpRecord,
    Piece,
    PiecewiseBVFunction,
    total_variation,
    derivative_samples,
    second_derivative_samples,
    jump_detector,
    read_signal_csv,
    write_signal_csv,
)
from .rof import (
    MonotoneDatum,
    RofSolution,
    identity_ramp,
    staircase_datum,
    generalized_inverse,
    solve_c1_c2,
    c1c2_identity_residual,
    rof_monotone_minimizer,
    rof_discrete_minimizer,
    rof_energy,
    staircase_experiment,
)
from .relaxed_energy import (
    EnergyBreakdown,
    energy_F1_discrete,
    energy_Fp_discrete,
    energy_F1_relaxed,
    energy_Fp_relaxed,
    membership_diagnostics,
    cusp_example,
)
from .hot import (
    HotConfig,
    HotResult,
    smoothed_objective,
    objective_gradient,
    minimize_hot,
    noise_family,
    clean_ramp,
    staircase_signal,
    c1_proxy,
    anti_staircase_experiment,
    lambda_sweep,
)
from .cantor import (
    CantorFixture,
    RemovedInterval,
    build_cantor_intervals,
    remaining_measure,
    cantor_function,
    default_phi,
    w_delta,
    w_delta_integral,
    w_delta_integral_limit,
    variation_bound_check,
    series_bound,
    to_piecewise,
)

__all__ = [
    "RestorationError",
    "ValidationError",
    "NumericalFailure",
    "UnsatisfiableConditionError",
    "ExtendedReal",
    "POS_INF",
    "NEG_INF",
    "WeightFunction",
    "make_builtin_weight",
    "make_weight",
    "tail_integral_upper",
    "tail_integral_lower",
    "psi_transform",
    "psi_transform_array",
    "psi_inverse",
    "lipschitz_constant",
    "jump_penalty",
    "jump_penalty_hat",
    "Grid",
    "DiscreteSignal",
    "JumpRecord",
    "Piece",
    "PiecewiseBVFunction",
    "total_variation",
    "derivative_samples",
    "second_derivative_samples",
    "jump_detector",
    "read_signal_csv",
    "write_signal_csv",
    "MonotoneDatum",
    "RofSolution",
    "identity_ramp",
    "staircase_datum",
    "generalized_inverse",
    "solve_c1_c2",
    "c1c2_identity_residual",
    "rof_monotone_minimizer",
    "rof_discrete_minimizer",
    "rof_energy",
    "staircase_experiment",
    "EnergyBreakdown",
    "energy_F1_discrete",
    "energy_Fp_discrete",
    "energy_F1_relaxed",
    "energy_Fp_relaxed",
    "membership_diagnostics",
    "cusp_example",
    "HotConfig",
    "HotResult",
    "smoothed_objective",
    "objective_gradient",
    "minimize_hot",
    "noise_family",
    "clean_ramp",
    "staircase_signal",
    "c1_proxy",
    "anti_staircase_experiment",
    "lambda_sweep",
    "CantorFixture",
    "RemovedInterval",
    "build_cantor_intervals",
    "remaining_measure",
    "cantor_function",
    "default_phi",
    "w_delta",
    "w_delta_integral",
    "w_delta_integral_limit",
    "variation_bound_check",
    "series_bound",
    "to_piecewise",
]
