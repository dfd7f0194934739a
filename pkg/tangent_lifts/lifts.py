"""Affine transport lifts (ATLs) and the classical lifts built from them.

An ATL is fixed by three tensorial base fields (Y, A, k); its bundle field is

    Y^(A,k) = Y^a H_a + (A^a_b p^b + k^a) V_a.

The non-tensorial transport generator omega = A - Gamma Y is never stored.
"""

from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Sequence

import numpy as np
from kybra_simple_logging import get_logger

from .bundle import (
    AtlField,
    PhasePoint,
    bracket_at,
    coordinate_from_connection,
)
from .constants import (
    KIND_COMPLETE,
    KIND_DYNAMICAL,
    KIND_EULER,
    KIND_GENERAL,
    KIND_HORIZONTAL,
    KIND_IWAI,
    KIND_MATTER,
    KIND_VERTICAL_TENSOR,
    KIND_VERTICAL_VEC,
    LIFT_KINDS,
    LIFT_SAMPLE_COUNT_DEFAULT,
    SEED_DEFAULT,
    SKEWNESS_TOL_DEFAULT,
)
from .errors import ConfigError, SkewnessError
from .fields import (
    CovariantDerivativeField,
    ScalarField,
    ScaledIdentityField,
    Tensor2Combination,
    Tensor2Field,
    VectorCombination,
    VectorField,
    identity_tensor2,
    is_zero_vector,
    zero_tensor2,
    zero_vector,
)
from .geometry import (
    GeometryPoint,
    MetricSpec,
    bracket_jet,
    geometry_at,
    s_tensor_at,
)
from .sampling import sample_base_points

logger = get_logger(__name__)


@dataclass(frozen=True)
class AtlSpec:
    """The triple (Y, A, k) defining Y^(A,k), with a kind tag and a formula label."""

    Y: VectorField
    A: Tensor2Field
    k: VectorField
    kind: str = KIND_GENERAL
    label: str = ""

    def __post_init__(self):
        if self.kind not in LIFT_KINDS:
            raise ConfigError(f"Unknown lift kind '{self.kind}'")
        dims = {self.Y.dimension, self.A.dimension, self.k.dimension}
        if len(dims) != 1:
            raise ConfigError(f"Lift fields disagree on dimension: {sorted(dims)}")
        if self.kind == KIND_MATTER and not is_zero_vector(self.k):
            raise ConfigError("A matter lift has k = 0; got a nonzero shift field")

    @property
    def dimension(self) -> int:
        return self.Y.dimension

    def field(self, m: MetricSpec) -> AtlField:
        if m.dimension != self.dimension:
            raise ConfigError(
                f"Lift of dimension {self.dimension} used on {m.dimension}-dimensional {m.name}"
            )
        return AtlField(m, self.Y, self.A, self.k)

    def connection_components(self, geo: GeometryPoint, p: np.ndarray):
        return self.Y.value(geo), self.A.value(geo) @ p + self.k.value(geo)


# ----------------------------------------------------------- constructors


def horizontal_lift(Y: VectorField) -> AtlSpec:
    n = Y.dimension
    return AtlSpec(Y, zero_tensor2(n), zero_vector(n), KIND_HORIZONTAL, "Y^(0,0)")


def vertical_lift_vector(Z: VectorField) -> AtlSpec:
    n = Z.dimension
    return AtlSpec(zero_vector(n), zero_tensor2(n), Z, KIND_VERTICAL_VEC, "0^(0,Z)")


def vertical_lift_tensor(A: Tensor2Field) -> AtlSpec:
    n = A.dimension
    return AtlSpec(zero_vector(n), A, zero_vector(n), KIND_VERTICAL_TENSOR, "0^(A,0)")


def euler_lift(dimension: int) -> AtlSpec:
    """The Euler field p^a V_a."""
    return AtlSpec(
        zero_vector(dimension),
        identity_tensor2(dimension),
        zero_vector(dimension),
        KIND_EULER,
        "0^(delta,0)",
    )


def complete_lift(m: MetricSpec, Y: VectorField) -> AtlSpec:
    _check_dimension(m, Y.dimension)
    return AtlSpec(
        Y, CovariantDerivativeField(Y), zero_vector(Y.dimension), KIND_COMPLETE, "Y^(nabla Y,0)"
    )


def _shifted_complete(
    Y: VectorField, psi: ScalarField, factor: float, kind: str, label: str
) -> AtlSpec:
    n = Y.dimension
    A = Tensor2Combination(
        [(1.0, CovariantDerivativeField(Y)), (-factor, ScaledIdentityField(psi, n))], n
    )
    return AtlSpec(Y, A, zero_vector(n), kind, label)


def iwai_lift(m: MetricSpec, Y: VectorField, psi: ScalarField) -> AtlSpec:
    """Y^(nabla Y - 2 psi delta)."""
    _check_dimension(m, Y.dimension)
    return _shifted_complete(Y, psi, 2.0, KIND_IWAI, "Y^(nabla Y - 2 psi delta,0)")


def dynamical_atl(m: MetricSpec, Y: VectorField, psi: ScalarField) -> AtlSpec:
    """Y^(nabla Y - psi delta), the dynamical-symmetry form with psi taken at weight one."""
    _check_dimension(m, Y.dimension)
    return _shifted_complete(Y, psi, 1.0, KIND_DYNAMICAL, "Y^(nabla Y - psi delta,0)")


def skew_violation(geo: GeometryPoint, A: np.ndarray) -> float:
    """max |A_(ab)| with A_ab = g_ac A^c_b."""
    lowered = geo.lower(A)
    return float(np.max(np.abs(0.5 * (lowered + lowered.T))))


def matter_lift(
    m: MetricSpec,
    Y: VectorField,
    A: Tensor2Field,
    points: Optional[Sequence[Sequence[float]]] = None,
    tol: float = SKEWNESS_TOL_DEFAULT,
    seed: int = SEED_DEFAULT,
) -> AtlSpec:
    """Y^(A,0) with A skew with respect to g.

    Skewness is checked at the given base points, or at LIFT_SAMPLE_COUNT_DEFAULT
    quasi-random admitted points when none are given.

    Raises:
        SkewnessError: max |A_(ab)| over the points exceeds tol
    """
    _check_dimension(m, Y.dimension)
    if points is None:
        points = sample_base_points(m, LIFT_SAMPLE_COUNT_DEFAULT, seed)
    worst = 0.0
    for x in points:
        geo = geometry_at(m, x, curvature=False)
        worst = max(worst, skew_violation(geo, A.value(geo)))
    if worst > tol:
        raise SkewnessError(
            f"Transport generator is not skew on {m.name}: max |A_(ab)| = {worst:.3e}", worst
        )
    logger.debug(f"Matter lift accepted on {m.name}, max |A_(ab)| = {worst:.3e}")
    return AtlSpec(Y, A, zero_vector(Y.dimension), KIND_MATTER, "Y^(A,0)")


def _check_dimension(m: MetricSpec, n: int) -> None:
    if m.dimension != n:
        raise ConfigError(f"Field of dimension {n} used on {m.dimension}-dimensional {m.name}")


# ----------------------------------------------------------- algebra


def atl_combine(alpha: float, L1: AtlSpec, beta: float, L2: AtlSpec) -> AtlSpec:
    """alpha L1 + beta L2, componentwise in (Y, A, k)."""
    if L1.dimension != L2.dimension:
        raise ConfigError("Cannot combine lifts of different dimensions")
    n = L1.dimension
    return AtlSpec(
        VectorCombination([(alpha, L1.Y), (beta, L2.Y)], n),
        Tensor2Combination([(alpha, L1.A), (beta, L2.A)], n),
        VectorCombination([(alpha, L1.k), (beta, L2.k)], n),
        label=f"{alpha:g}*[{L1.label}] + {beta:g}*[{L2.label}]" if L1.label and L2.label else "",
    )


class AtlBracket(NamedTuple):
    """Closed-form bracket [Y^(A,k), Z^(B,l)] = [Y,Z]^(C,m) at one base point."""

    YZ: np.ndarray
    C: np.ndarray
    m: np.ndarray

    def coordinate_components(self, geo: GeometryPoint, p: np.ndarray) -> np.ndarray:
        X, P = coordinate_from_connection(geo, p, self.YZ, self.C @ p + self.m)
        return np.concatenate([X, P])


def atl_bracket_at(geo: GeometryPoint, L1: AtlSpec, L2: AtlSpec) -> AtlBracket:
    y, z = L1.Y.jet(geo), L2.Y.jet(geo)
    a, b = L1.A.jet(geo), L2.A.jet(geo)
    k, ell = L1.k.jet(geo), L2.k.jet(geo)

    YZ, _ = bracket_jet(y, z)
    nabla_Y_B = np.einsum("abc,c->ab", geo.nabla_tensor2(b.value, b.grad), y.value)
    nabla_Z_A = np.einsum("abc,c->ab", geo.nabla_tensor2(a.value, a.grad), z.value)
    C = (
        nabla_Y_B
        - nabla_Z_A
        - (a.value @ b.value - b.value @ a.value)
        - geo.curvature_operator(y.value, z.value)
    )
    nabla_Y_l = geo.nabla_vector(ell.value, ell.grad) @ y.value
    nabla_Z_k = geo.nabla_vector(k.value, k.grad) @ z.value
    m_vec = nabla_Y_l - nabla_Z_k - a.value @ ell.value + b.value @ k.value
    return AtlBracket(YZ, C, m_vec)


def atl_bracket(m: MetricSpec, L1: AtlSpec, L2: AtlSpec, x: Sequence[float]) -> AtlBracket:
    """([Y,Z], C, m) with

    C = nabla_Y B - nabla_Z A - [A, B] - R(Y, Z)
    m = nabla_Y l - nabla_Z k - A l + B k
    """
    return atl_bracket_at(geometry_at(m, x), L1, L2)


def atl_bracket_residual(
    m: MetricSpec, L1: AtlSpec, L2: AtlSpec, pt: PhasePoint, relative: bool = False
) -> float:
    """max |closed-form bracket - numeric bracket| at pt, coordinate basis.

    With relative, the residual is divided by max(1, max |numeric bracket|).
    """
    geo = geometry_at(m, pt.x)
    closed = atl_bracket_at(geo, L1, L2).coordinate_components(geo, pt.p)
    numeric = bracket_at(geo, pt.p, L1.field(m), L2.field(m))
    residual = float(np.max(np.abs(closed - numeric)))
    if relative:
        residual /= max(1.0, float(np.max(np.abs(numeric))))
    return residual


def classical_bracket_table(
    m: MetricSpec, Y: VectorField, Z: VectorField, pt: PhasePoint
) -> Dict[str, float]:
    """Residuals of the six brackets among horizontal (bar), vertical (hat) and
    complete (tilde) lifts, each numeric bracket against its closed form:

        [Ybar, Zbar]     = [Y,Z]bar - R(Y,Z)hat
        [Ybar, Zhat]     = (nabla_Y Z)hat
        [Ybar, Ztilde]   = [Y,Z]bar + S(Y,Z)hat
        [Yhat, Zhat]     = 0
        [Yhat, Ztilde]   = [Y,Z]hat
        [Ytilde, Ztilde] = [Y,Z]tilde
    """
    geo = geometry_at(m, pt.x)
    p = pt.p
    n = m.dimension
    y, z = Y.jet(geo), Z.jet(geo)
    yz, d_yz = bracket_jet(y, z)
    zero = np.zeros(n)

    bar_y, bar_z = horizontal_lift(Y).field(m), horizontal_lift(Z).field(m)
    hat_y, hat_z = vertical_lift_vector(Y).field(m), vertical_lift_vector(Z).field(m)
    tilde_y, tilde_z = complete_lift(m, Y).field(m), complete_lift(m, Z).field(m)

    expected = {
        "bar_bar": (yz, -geo.curvature_operator(y.value, z.value) @ p),
        "bar_hat": (zero, geo.nabla_vector(z.value, z.grad) @ y.value),
        "bar_tilde": (yz, s_tensor_at(geo, y, z) @ p),
        "hat_hat": (zero, zero),
        "hat_tilde": (zero, yz),
        "tilde_tilde": (yz, geo.nabla_vector(yz, d_yz) @ p),
    }
    pairs = {
        "bar_bar": (bar_y, bar_z),
        "bar_hat": (bar_y, hat_z),
        "bar_tilde": (bar_y, tilde_z),
        "hat_hat": (hat_y, hat_z),
        "hat_tilde": (hat_y, tilde_z),
        "tilde_tilde": (tilde_y, tilde_z),
    }
    residuals = {}
    for name, (F, G) in pairs.items():
        h, v = expected[name]
        X, P = coordinate_from_connection(geo, p, h, v)
        got = bracket_at(geo, p, F, G)
        residuals[name] = float(np.max(np.abs(got - np.concatenate([X, P]))))
    return residuals


def iwai_bracket_residual(
    m: MetricSpec,
    Y: VectorField,
    psi_Y: ScalarField,
    Z: VectorField,
    psi_Z: ScalarField,
    x: Sequence[float],
) -> float:
    """Residual of [Y+, Z+] = [Y,Z]+ with psi_[Y,Z] = Y(psi_Z) - Z(psi_Y),
    for the factor-two lifts Y+ = iwai_lift(Y, psi_Y)."""
    geo = geometry_at(m, x)
    got = atl_bracket_at(geo, iwai_lift(m, Y, psi_Y), iwai_lift(m, Z, psi_Z))
    y, z = Y.jet(geo), Z.jet(geo)
    yz, d_yz = bracket_jet(y, z)
    psi_yz = float(y.value @ psi_Z.jet(geo).grad - z.value @ psi_Y.jet(geo).grad)
    C = geo.nabla_vector(yz, d_yz) - 2.0 * psi_yz * np.eye(m.dimension)
    return float(
        max(
            np.max(np.abs(got.YZ - yz)),
            np.max(np.abs(got.C - C)),
            np.max(np.abs(got.m)),
        )
    )


def skew_closure_residual(
    m: MetricSpec, L1: AtlSpec, L2: AtlSpec, x: Sequence[float], relative: bool = False
) -> float:
    """max |C_(ab)| of the bracket generator; zero when A and B are skew.

    With relative, the residual is divided by max(1, max |C_ab|).
    """
    geo = geometry_at(m, x)
    C = atl_bracket_at(geo, L1, L2).C
    residual = skew_violation(geo, C)
    if relative:
        residual /= max(1.0, float(np.max(np.abs(geo.lower(C)))))
    return residual


def lift_from_kind(
    m: MetricSpec,
    kind: str,
    Y: Optional[VectorField] = None,
    A: Optional[Tensor2Field] = None,
    k: Optional[VectorField] = None,
    psi: Optional[ScalarField] = None,
    points: Optional[Sequence[Sequence[float]]] = None,
) -> AtlSpec:
    """Build a lift of the named kind from whichever fields it needs."""
    n = m.dimension

    def need(value, what: str):
        if value is None:
            raise ConfigError(f"Lift kind '{kind}' needs field '{what}'")
        return value

    if kind == KIND_HORIZONTAL:
        return horizontal_lift(need(Y, "Y"))
    if kind == KIND_VERTICAL_VEC:
        return vertical_lift_vector(need(k, "k"))
    if kind == KIND_VERTICAL_TENSOR:
        return vertical_lift_tensor(need(A, "A"))
    if kind == KIND_EULER:
        return euler_lift(n)
    if kind == KIND_COMPLETE:
        return complete_lift(m, need(Y, "Y"))
    if kind == KIND_IWAI:
        return iwai_lift(m, need(Y, "Y"), need(psi, "psi"))
    if kind == KIND_DYNAMICAL:
        return dynamical_atl(m, need(Y, "Y"), need(psi, "psi"))
    if kind == KIND_MATTER:
        return matter_lift(m, need(Y, "Y"), need(A, "A"), points)
    if kind == KIND_GENERAL:
        return AtlSpec(
            Y if Y is not None else zero_vector(n),
            A if A is not None else zero_tensor2(n),
            k if k is not None else zero_vector(n),
            label="Y^(A,k)",
        )
    raise ConfigError(f"Unknown lift kind '{kind}'")


def describe_lift(L: AtlSpec) -> Dict[str, str]:
    return {"kind": L.kind, "label": L.label, "Y": repr(L.Y), "A": repr(L.A), "k": repr(L.k)}
