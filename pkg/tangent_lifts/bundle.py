"""Points and vector fields on the tangent bundle TM.

A phase point is (x, p) with p a tangent vector at x. Bundle fields are
stored in the connection basis

    H_a = d/dx^a - Gamma^b_ca p^c d/dp^b,    V_a = d/dp^a

as (h, v), and converted to coordinate components (X, P) with

    X^a = h^a,    P^a = v^a - Gamma^a_bc p^b h^c.

Every field also supplies the 2n x 2n Jacobian of its coordinate components
with respect to (x, p), assembled from the jets of its defining base fields,
so the Lie bracket below carries no truncation error.
"""

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from kybra_simple_logging import get_logger

from .fields import Tensor2Field, Tensor2FieldSpec, VectorField, VectorFieldSpec
from .geometry import GeometryPoint, MetricSpec, geometry_at

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class PhasePoint:
    x: np.ndarray
    p: np.ndarray

    @classmethod
    def of(cls, x: Sequence[float], p: Sequence[float]) -> "PhasePoint":
        x_arr = np.asarray(x, dtype=float)
        p_arr = np.asarray(p, dtype=float)
        if x_arr.shape != p_arr.shape or x_arr.ndim != 1:
            raise ValueError(
                f"Phase point needs x and p of equal length, got {x_arr.shape} and {p_arr.shape}"
            )
        return cls(x_arr, p_arr)

    @property
    def dimension(self) -> int:
        return self.x.shape[0]

    def to_list(self) -> Dict[str, list]:
        return {"x": self.x.tolist(), "p": self.p.tolist()}


def coordinate_from_connection(
    geo: GeometryPoint, p: np.ndarray, h: np.ndarray, v: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    return h.copy(), v - np.einsum("abc,b,c->a", geo.Gamma, p, h)


def connection_from_coordinate(
    geo: GeometryPoint, p: np.ndarray, X: np.ndarray, P: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    return X.copy(), P + np.einsum("abc,b,c->a", geo.Gamma, p, X)


def to_connection_basis(
    m: MetricSpec, X: Sequence[float], P: Sequence[float], pt: PhasePoint
) -> Tuple[np.ndarray, np.ndarray]:
    """Coordinate components (X, P) at pt to connection components (h, v)."""
    geo = geometry_at(m, pt.x, curvature=False)
    return connection_from_coordinate(geo, pt.p, np.asarray(X, float), np.asarray(P, float))


def to_coordinate_basis(
    m: MetricSpec, h: Sequence[float], v: Sequence[float], pt: PhasePoint
) -> Tuple[np.ndarray, np.ndarray]:
    """Connection components (h, v) at pt to coordinate components (X, P)."""
    geo = geometry_at(m, pt.x, curvature=False)
    return coordinate_from_connection(geo, pt.p, np.asarray(h, float), np.asarray(v, float))


class BundleField:
    """A vector field on TM over the chart of one metric."""

    def __init__(self, metric: MetricSpec):
        self.metric = metric
        self.dimension = metric.dimension

    def connection_components(
        self, geo: GeometryPoint, p: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def jacobian(self, geo: GeometryPoint, p: np.ndarray) -> np.ndarray:
        """J[I, J] = d F^I / d xi^J over xi = (x, p), coordinate components."""
        raise NotImplementedError

    def coordinate_components(self, geo: GeometryPoint, p: np.ndarray) -> np.ndarray:
        h, v = self.connection_components(geo, p)
        X, P = coordinate_from_connection(geo, p, h, v)
        return np.concatenate([X, P])

    def at(self, pt: PhasePoint) -> np.ndarray:
        """Coordinate components (X, P) at pt as one 2n vector."""
        return self.coordinate_components(geometry_at(self.metric, pt.x), pt.p)


class AtlField(BundleField):
    """Y^a H_a + (A^a_b p^b + k^a) V_a for base fields Y, A and k."""

    def __init__(self, metric: MetricSpec, Y: VectorField, A: Tensor2Field, k: VectorField):
        super().__init__(metric)
        self.Y = Y
        self.A = A
        self.k = k

    def connection_components(self, geo, p):
        return self.Y.value(geo), self.A.value(geo) @ p + self.k.value(geo)

    def jacobian(self, geo, p):
        n = self.dimension
        y = self.Y.jet(geo)
        a = self.A.jet(geo)
        k = self.k.jet(geo)
        J = np.zeros((2 * n, 2 * n))
        J[:n, :n] = y.grad
        J[n:, :n] = (
            np.einsum("abd,b->ad", a.grad, p)
            + k.grad
            - np.einsum("abcd,b,c->ad", geo.dGamma, p, y.value)
            - np.einsum("abc,b,cd->ad", geo.Gamma, p, y.grad)
        )
        J[n:, n:] = a.value - np.einsum("adc,c->ad", geo.Gamma, y.value)
        return J

    def __repr__(self) -> str:
        return f"AtlField(Y={self.Y!r}, A={self.A!r}, k={self.k!r})"


class SprayField(BundleField):
    """The geodesic spray p^a H_a."""

    def connection_components(self, geo, p):
        return p.copy(), np.zeros(self.dimension)

    def jacobian(self, geo, p):
        n = self.dimension
        J = np.zeros((2 * n, 2 * n))
        J[:n, n:] = np.eye(n)
        J[n:, :n] = -np.einsum("abcd,b,c->ad", geo.dGamma, p, p)
        J[n:, n:] = -2.0 * np.einsum("adc,c->ad", geo.Gamma, p)
        return J

    def __repr__(self) -> str:
        return f"SprayField({self.metric.name!r})"


def spray_at(m: MetricSpec, pt: PhasePoint) -> np.ndarray:
    """Coordinate components (p^a, -Gamma^a_bc p^b p^c) of the spray at pt."""
    geo = geometry_at(m, pt.x, curvature=False)
    return SprayField(m).coordinate_components(geo, pt.p)


def horizontal_basis_field(m: MetricSpec, a: int) -> AtlField:
    n = m.dimension
    e = np.zeros(n)
    e[a] = 1.0
    return AtlField(
        m,
        VectorFieldSpec.constant(e),
        Tensor2FieldSpec.constant(np.zeros((n, n))),
        VectorFieldSpec.constant(np.zeros(n)),
    )


def vertical_basis_field(m: MetricSpec, a: int) -> AtlField:
    n = m.dimension
    e = np.zeros(n)
    e[a] = 1.0
    return AtlField(
        m,
        VectorFieldSpec.constant(np.zeros(n)),
        Tensor2FieldSpec.constant(np.zeros((n, n))),
        VectorFieldSpec.constant(e),
    )


def bracket_at(geo: GeometryPoint, p: np.ndarray, F: BundleField, G: BundleField) -> np.ndarray:
    """[F, G]^I = F^J d_J G^I - G^J d_J F^I, geo evaluated with curvature."""
    f = F.coordinate_components(geo, p)
    g = G.coordinate_components(geo, p)
    return G.jacobian(geo, p) @ f - F.jacobian(geo, p) @ g


def lie_bracket_numeric(F: BundleField, G: BundleField, pt: PhasePoint) -> np.ndarray:
    """Lie bracket of two bundle fields at pt, coordinate basis."""
    if F.metric is not G.metric:
        logger.debug("Bracketing fields declared over distinct metric objects")
    geo = geometry_at(F.metric, pt.x)
    return bracket_at(geo, pt.p, F, G)


def verify_basis_brackets(m: MetricSpec, pt: PhasePoint) -> Dict[str, float]:
    """Max-abs residuals of the bracket relations of the connection basis.

    [V_a, V_b] = 0
    [H_a, V_b] = Gamma^c_ab V_c
    [H_a, H_b] = -R^d_cab p^c V_d
    """
    geo = geometry_at(m, pt.x)
    n = m.dimension
    H = [horizontal_basis_field(m, a) for a in range(n)]
    V = [vertical_basis_field(m, a) for a in range(n)]
    zeros = np.zeros(n)

    vv = hv = hh = 0.0
    for a in range(n):
        for b in range(n):
            vv = max(vv, float(np.max(np.abs(bracket_at(geo, pt.p, V[a], V[b])))))

            expected = np.concatenate([zeros, geo.Gamma[:, a, b]])
            got = bracket_at(geo, pt.p, H[a], V[b])
            hv = max(hv, float(np.max(np.abs(got - expected))))

            expected = np.concatenate(
                [zeros, -np.einsum("dc,c->d", geo.riemann[:, :, a, b], pt.p)]
            )
            got = bracket_at(geo, pt.p, H[a], H[b])
            hh = max(hh, float(np.max(np.abs(got - expected))))

    return {
        "vertical_vertical": vv,
        "horizontal_vertical": hv,
        "horizontal_horizontal": hh,
    }
