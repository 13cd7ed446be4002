from .finite_diff import NonFiniteLossError, finite_diff_gradient, max_abs, relative_error
from .flops import FlopEstimate, flop_estimate, w_formation_flops
from .identities import branch_disagreement, check_lemma_identity, pseudoinverse_branches
from .preconditioner import (
    DEFAULT_COLUMN_CAP,
    JacobianTooLargeError,
    actual_weight_step,
    first_order_slope,
    preconditioner_step,
    target_jacobian,
)
from .suites import (
    FfnnProblem,
    SuiteResult,
    gradient_triangle,
    naive_convolution,
    random_ffnn_problem,
    run_verification_suites,
)

__all__ = [
    "DEFAULT_COLUMN_CAP",
    "FfnnProblem",
    "FlopEstimate",
    "JacobianTooLargeError",
    "NonFiniteLossError",
    "SuiteResult",
    "actual_weight_step",
    "branch_disagreement",
    "check_lemma_identity",
    "finite_diff_gradient",
    "first_order_slope",
    "flop_estimate",
    "gradient_triangle",
    "max_abs",
    "naive_convolution",
    "preconditioner_step",
    "pseudoinverse_branches",
    "random_ffnn_problem",
    "relative_error",
    "run_verification_suites",
    "target_jacobian",
    "w_formation_flops",
]
