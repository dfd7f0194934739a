SINGULAR_TOL_DEFAULT = 1e-12
IDENTITY_TOL_DEFAULT = 1e-12
GEOMETRIC_TOL_DEFAULT = 1e-10

BRACKET_TOL_DEFAULT = 1e-10
ALGEBRA_TOL_DEFAULT = 1e-9
SYMMETRY_TOL_DEFAULT = 1e-8
DYNAMICAL_TOL_DEFAULT = 1e-9
TRANSPORT_TOL_DEFAULT = 1e-9
SKEWNESS_TOL_DEFAULT = 1e-10

SEED_DEFAULT = 42
LIFT_SAMPLE_COUNT_DEFAULT = 32
CLASSIFY_SAMPLE_COUNT_DEFAULT = 64
REJECTION_FACTOR = 10

STEP_DEFAULT = 1e-3
MAX_STEPS_DEFAULT = 10_000_000
CHECK_EVERY_DEFAULT = 100

# Lift kinds
KIND_HORIZONTAL = "horizontal"
KIND_VERTICAL_VEC = "vertical_vec"
KIND_VERTICAL_TENSOR = "vertical_tensor"
KIND_EULER = "euler"
KIND_COMPLETE = "complete"
KIND_IWAI = "iwai"
KIND_DYNAMICAL = "dynamical"
KIND_MATTER = "matter"
KIND_GENERAL = "general"

LIFT_KINDS = (
    KIND_HORIZONTAL,
    KIND_VERTICAL_VEC,
    KIND_VERTICAL_TENSOR,
    KIND_EULER,
    KIND_COMPLETE,
    KIND_IWAI,
    KIND_DYNAMICAL,
    KIND_MATTER,
    KIND_GENERAL,
)

# Task names
TASK_VERIFY_BRACKETS = "verify-brackets"
TASK_VERIFY_ATL_ALGEBRA = "verify-atl-algebra"
TASK_CLASSIFY = "classify"
TASK_CHECK_DYNAMICAL = "check-dynamical"
TASK_CHECK_MATTER = "check-matter"
TASK_INTEGRATE = "integrate"

TASKS = (
    TASK_VERIFY_BRACKETS,
    TASK_VERIFY_ATL_ALGEBRA,
    TASK_CLASSIFY,
    TASK_CHECK_DYNAMICAL,
    TASK_CHECK_MATTER,
    TASK_INTEGRATE,
)

# CLI exit codes
EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

PHASE_FILTER_FUTURE_CAUSAL = "future-causal"
