"""Dynamical and matter symmetries, and sampling-based classification of
base vector fields.

A bundle field S is a dynamical symmetry when [S, G] = -psi G for the
geodesic spray G; with psi = 0 it is a Lie symmetry. Every check here is
pointwise: a flag means no violation was found at the sampled points.
"""

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from kybra_simple_logging import get_logger

from .bundle import BundleField, PhasePoint, SprayField, bracket_at, coordinate_from_connection
from .constants import DYNAMICAL_TOL_DEFAULT, SYMMETRY_TOL_DEFAULT
from .errors import ConfigError, DegenerateSprayError
from .fields import ScalarField, SkewCovariantDerivativeField, VectorField
from .geometry import MetricSpec, geometry_at
from .lifts import AtlSpec, matter_lift

logger = get_logger(__name__)

FLAG_NAMES = (
    "killing",
    "conformal_killing",
    "homothetic",
    "affine_collineation",
    "projective_collineation",
    "matter_symmetry",
    "dynamical_symmetry",
)


class DynamicalResidual(NamedTuple):
    psi_hat: float
    residual: float


def dynamical_residual(m: MetricSpec, sigma: BundleField, pt: PhasePoint) -> DynamicalResidual:
    """Least-squares psi with [sigma, G] ~ -psi G, and the max-norm misfit.

    Raises:
        DegenerateSprayError: p = 0, where the spray vanishes
    """
    if not np.any(pt.p):
        raise DegenerateSprayError(f"Spray vanishes at p = 0, x = {pt.x.tolist()}")
    geo = geometry_at(m, pt.x)
    spray = SprayField(m)
    B = bracket_at(geo, pt.p, sigma, spray)
    G = spray.coordinate_components(geo, pt.p)
    psi_hat = -float(B @ G) / float(G @ G)
    residual = float(np.max(np.abs(B + psi_hat * G)))
    return DynamicalResidual(psi_hat, residual)


def projective_target(dpsi: np.ndarray) -> np.ndarray:
    """delta^a_(b d_c) psi as [a, b, c], symmetrized with weight 1/2."""
    eye = np.eye(dpsi.shape[0])
    return 0.5 * (np.einsum("ab,c->abc", eye, dpsi) + np.einsum("ac,b->abc", eye, dpsi))


def atl_dynamical_conditions(
    m: MetricSpec, L: AtlSpec, x: Sequence[float], psi: ScalarField
) -> Dict[str, float]:
    """Residuals of the conditions an ATL dynamical symmetry must meet at x.

    Returns:
        k_norm: max |k^a|, which must vanish
        generator: max |A_ab - (nabla_b Y_a - psi g_ab)|
        projective: max |L_Y Gamma^a_bc - delta^a_(b d_c) psi|
    """
    geo = geometry_at(m, x)
    y = L.Y.jet(geo)
    psi_jet = psi.jet(geo)
    nabla_y = geo.nabla_vector(y.value, y.grad)
    generator = geo.lower(L.A.value(geo)) - (geo.lower(nabla_y) - psi_jet.value * geo.g)
    lie = geo.lie_derivative_connection(y)
    return {
        "k_norm": float(np.max(np.abs(L.k.value(geo)))),
        "generator": float(np.max(np.abs(generator))),
        "projective": float(np.max(np.abs(lie - projective_target(psi_jet.grad)))),
    }


def matter_spray_bracket(m: MetricSpec, L: AtlSpec, pt: PhasePoint) -> np.ndarray:
    """[Y^(A), G] in closed form, coordinate basis:

    (A^a_b - nabla_b Y^a) p^b H_a + (R^a_bcd Y^d - nabla_c A^a_b) p^b p^c V_a
    """
    geo = geometry_at(m, pt.x)
    k = L.k.value(geo)
    if np.any(k):
        raise ConfigError(f"Matter spray bracket needs k = 0, got {k.tolist()}")
    p = pt.p
    y = L.Y.jet(geo)
    a = L.A.jet(geo)
    h = (a.value - geo.nabla_vector(y.value, y.grad)) @ p
    v = np.einsum("abcd,d,b,c->a", geo.riemann, y.value, p, p) - np.einsum(
        "abc,b,c->a", geo.nabla_tensor2(a.value, a.grad), p, p
    )
    X, P = coordinate_from_connection(geo, p, h, v)
    return np.concatenate([X, P])


@dataclass
class SymmetryReport:
    """Per-point residuals, recovered psi values and the derived flags.

    Flags are None when the check was not run.
    """

    points: List[List[float]]
    tolerance: float
    residuals: Dict[str, List[float]] = field(default_factory=dict)
    psi: List[float] = field(default_factory=list)
    projective_gradient: List[List[float]] = field(default_factory=list)
    flags: Dict[str, Optional[bool]] = field(
        default_factory=lambda: {name: None for name in FLAG_NAMES}
    )

    def max_residual(self, name: str) -> float:
        return max(self.residuals.get(name, [0.0]), default=0.0)

    def to_dict(self) -> dict:
        return {
            "points": self.points,
            "tolerance": self.tolerance,
            "residuals": self.residuals,
            "max_residuals": {k: self.max_residual(k) for k in sorted(self.residuals)},
            "psi": self.psi,
            "projective_gradient": self.projective_gradient,
            "flags": self.flags,
        }


def classify_vector_field(
    m: MetricSpec,
    Y: VectorField,
    points: Sequence[Sequence[float]],
    tol: float = SYMMETRY_TOL_DEFAULT,
) -> SymmetryReport:
    """Killing, conformal, homothetic, affine and projective tests of Y.

    Homothetic needs conformal plus a spread max psi - min psi below tol over
    the points, which is stricter than a standard deviation below tol.

    Raises:
        ConfigError: Fewer than two sample points
    """
    if len(points) < 2:
        raise ConfigError(f"Classification needs at least 2 sample points, got {len(points)}")
    n = m.dimension
    report = SymmetryReport([list(map(float, x)) for x in points], tol)
    names = ("killing", "conformal", "affine", "projective")
    report.residuals = {name: [] for name in names}

    for x in points:
        geo = geometry_at(m, x)
        y = Y.jet(geo)
        lowered = geo.lower(geo.nabla_vector(y.value, y.grad))
        sym = 0.5 * (lowered + lowered.T)
        psi = float(np.trace(geo.nabla_vector(y.value, y.grad))) / n
        lie = geo.lie_derivative_connection(y)
        # least-squares solution of L^a_bc = delta^a_(b d_c) psi
        dpsi = (2.0 / (n + 1)) * np.einsum("aac->c", lie)

        report.residuals["killing"].append(float(np.max(np.abs(sym))))
        report.residuals["conformal"].append(float(np.max(np.abs(sym - psi * geo.g))))
        report.residuals["affine"].append(float(np.max(np.abs(lie))))
        report.residuals["projective"].append(
            float(np.max(np.abs(lie - projective_target(dpsi))))
        )
        report.psi.append(psi)
        report.projective_gradient.append(dpsi.tolist())

    def passes(name: str) -> bool:
        return all(r < tol for r in report.residuals[name])

    conformal = passes("conformal")
    report.flags.update(
        {
            "killing": passes("killing"),
            "conformal_killing": conformal,
            "homothetic": conformal and (max(report.psi) - min(report.psi)) < tol,
            "affine_collineation": passes("affine"),
            "projective_collineation": passes("projective"),
        }
    )
    logger.info(f"Classified {Y!r} on {m.name}: {report.flags}")
    return report


@dataclass
class CoincidenceReport:
    homothetic: bool
    psi: float
    dynamical_symmetry: bool
    psi_hat: List[float]
    residuals: List[float]
    tolerance: float
    worst_point: Optional[Dict[str, list]] = None

    @property
    def coincide(self) -> bool:
        return self.homothetic == self.dynamical_symmetry

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def to_dict(self) -> dict:
        return {
            "homothetic": self.homothetic,
            "psi": self.psi,
            "dynamical_symmetry": self.dynamical_symmetry,
            "coincide": self.coincide,
            "psi_hat": self.psi_hat,
            "residuals": self.residuals,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "worst_point": self.worst_point,
        }


def coincidence_check(
    m: MetricSpec,
    Y: VectorField,
    phase_points: Sequence[PhasePoint],
    symmetry_tol: float = SYMMETRY_TOL_DEFAULT,
    dynamical_tol: float = DYNAMICAL_TOL_DEFAULT,
) -> CoincidenceReport:
    """Is the matter lift Y^(A) with A = nabla_[b Y_a] a dynamical symmetry
    exactly when Y is homothetic?"""
    base = [pt.x for pt in phase_points]
    classification = classify_vector_field(m, Y, base, symmetry_tol)
    homothetic = bool(classification.flags["homothetic"])

    # A is skew by construction, so validating against the same points cannot fail
    lift = matter_lift(m, Y, SkewCovariantDerivativeField(Y), base)
    sigma = lift.field(m)

    psi_hat: List[float] = []
    residuals: List[float] = []
    for pt in phase_points:
        r = dynamical_residual(m, sigma, pt)
        psi_hat.append(r.psi_hat)
        residuals.append(r.residual)

    worst = int(np.argmax(residuals)) if residuals else 0
    report = CoincidenceReport(
        homothetic=homothetic,
        psi=float(np.mean(classification.psi)),
        dynamical_symmetry=max(residuals, default=0.0) < dynamical_tol,
        psi_hat=psi_hat,
        residuals=residuals,
        tolerance=dynamical_tol,
        worst_point=phase_points[worst].to_list() if phase_points else None,
    )
    if not report.coincide:
        logger.warning(
            f"Homothety ({homothetic}) and dynamical symmetry ({report.dynamical_symmetry}) "
            f"disagree for {Y!r} on {m.name}"
        )
    return report
