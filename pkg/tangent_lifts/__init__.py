"""
Tangent Lifts - affine transport lifts and classical lifts on the tangent bundle,
with bracket, symmetry and transport verification
"""

__version__ = "0.1.0"

from .bundle import (  # noqa: E402
    AtlField,
    PhasePoint,
    SprayField,
    lie_bracket_numeric,
    to_connection_basis,
    to_coordinate_basis,
    verify_basis_brackets,
)
from .catalog import catalog_names, example_field, get_manifold  # noqa: E402
from .config import RunConfig, load_config  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    ExpressionError,
    NumericalError,
    SkewnessError,
    TangentLiftsError,
)
from .expr_dsl import Jet2, eval_jet2, parse  # noqa: E402
from .fields import ScalarFieldSpec, Tensor2FieldSpec, VectorFieldSpec  # noqa: E402
from .geometry import MetricSpec, geometry_at  # noqa: E402
from .lifts import (  # noqa: E402
    AtlSpec,
    atl_bracket,
    complete_lift,
    dynamical_atl,
    euler_lift,
    horizontal_lift,
    iwai_lift,
    matter_lift,
    vertical_lift_tensor,
    vertical_lift_vector,
)
from .storage import DirectoryStorage, MemoryStorage, Storage  # noqa: E402
from .symmetry import (  # noqa: E402
    classify_vector_field,
    coincidence_check,
    dynamical_residual,
    matter_spray_bracket,
)
from .transport import IntegratorConfig, integrate_atl, integrate_geodesic  # noqa: E402

__all__ = [
    "AtlField",
    "AtlSpec",
    "ConfigError",
    "DirectoryStorage",
    "ExpressionError",
    "IntegratorConfig",
    "Jet2",
    "MemoryStorage",
    "MetricSpec",
    "NumericalError",
    "PhasePoint",
    "RunConfig",
    "ScalarFieldSpec",
    "SkewnessError",
    "SprayField",
    "Storage",
    "TangentLiftsError",
    "Tensor2FieldSpec",
    "VectorFieldSpec",
    "atl_bracket",
    "catalog_names",
    "classify_vector_field",
    "coincidence_check",
    "complete_lift",
    "dynamical_atl",
    "dynamical_residual",
    "euler_lift",
    "eval_jet2",
    "example_field",
    "geometry_at",
    "get_manifold",
    "horizontal_lift",
    "integrate_atl",
    "integrate_geodesic",
    "iwai_lift",
    "lie_bracket_numeric",
    "load_config",
    "matter_lift",
    "matter_spray_bracket",
    "parse",
    "to_connection_basis",
    "to_coordinate_basis",
    "verify_basis_brackets",
    "vertical_lift_tensor",
    "vertical_lift_vector",
]
