"""Metric, connection and curvature of a declared semi-Riemannian manifold.

Index conventions (all arrays are coordinate components):
    dg[a, b, c]        = d_c g_ab
    d2g[a, b, c, d]    = d_d d_c g_ab
    Gamma[a, b, c]     = Gamma^a_bc
    dGamma[a, b, c, d] = d_d Gamma^a_bc
    riemann[a, b, c, d] = R^a_bcd
                        = d_c Gamma^a_db - d_d Gamma^a_cb
                          + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb

With this sign the horizontal basis fields of the tangent bundle satisfy
[H_a, H_b] = -R^d_cab p^c V_d; tests check it against the numeric bracket.
"""

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from kybra_simple_logging import get_logger

from .constants import GEOMETRIC_TOL_DEFAULT, SINGULAR_TOL_DEFAULT
from .errors import (
    ConfigError,
    ExcludedRegionError,
    GeometryIdentityError,
    SingularMetricError,
)
from .expr_dsl import Expression, Inequality, parse, parse_inequality
from .fields import Tensor2Field, VectorField, VectorJet

logger = get_logger(__name__)


class MetricSpec:
    """A metric g_ab(x) on a single coordinate chart.

    Only the components with a <= b are stored, so the array is symmetric by
    construction.

    Attributes:
        name: Catalog name or "inline"
        dimension: n, between 2 and 4
        coordinates: Display names of x0..x(n-1)
        region: Inequalities every admitted point satisfies
        parameters: Free parameters referenced by the expressions
        box: Default sampling box, one (low, high) pair per coordinate
    """

    def __init__(
        self,
        name: str,
        dimension: int,
        components: Mapping[Tuple[int, int], Expression],
        region: Sequence[Inequality] = (),
        parameters: Optional[Mapping[str, float]] = None,
        coordinates: Optional[Sequence[str]] = None,
        box: Optional[Sequence[Tuple[float, float]]] = None,
        singular_tol: float = SINGULAR_TOL_DEFAULT,
        texts: Optional[Mapping[Tuple[int, int], str]] = None,
        region_texts: Optional[Sequence[str]] = None,
    ):
        if not 2 <= dimension <= 4:
            raise ConfigError(f"Dimension must be between 2 and 4, got {dimension}")
        self.name = name
        self.dimension = dimension
        self._components: Dict[Tuple[int, int], Expression] = {}
        for (a, b), e in components.items():
            key = (min(a, b), max(a, b))
            if key in self._components and self._components[key] != e:
                raise ConfigError(f"Metric component g_{a}{b} is not symmetric")
            self._components[key] = e
        missing = [
            (a, b)
            for a in range(dimension)
            for b in range(a, dimension)
            if (a, b) not in self._components
        ]
        if missing:
            raise ConfigError(f"Metric components missing: {missing}")
        self.region = list(region)
        self.parameters = dict(parameters or {})
        self.coordinates = list(coordinates or [f"x{i}" for i in range(dimension)])
        self.box = [tuple(map(float, b)) for b in box] if box else None
        self.singular_tol = singular_tol
        self.texts = dict(texts) if texts else {k: e.to_text() for k, e in self._components.items()}
        self.region_texts = list(region_texts) if region_texts else [r.to_text() for r in self.region]

    @classmethod
    def from_strings(
        cls,
        name: str,
        metric: Sequence[Sequence[str]],
        region: Sequence[str] = (),
        parameters: Optional[Mapping[str, float]] = None,
        coordinates: Optional[Sequence[str]] = None,
        box: Optional[Sequence[Tuple[float, float]]] = None,
        singular_tol: float = SINGULAR_TOL_DEFAULT,
    ) -> "MetricSpec":
        """Build a metric from a full n x n array of expression strings."""
        n = len(metric)
        if any(len(row) != n for row in metric):
            raise ConfigError("Metric components must form a square array")
        params = dict(parameters or {})
        components: Dict[Tuple[int, int], Expression] = {}
        texts: Dict[Tuple[int, int], str] = {}
        for a in range(n):
            for b in range(n):
                e = parse(metric[a][b], n, params)
                components[(a, b)] = e
                if a <= b:
                    texts[(a, b)] = metric[a][b]
        inequalities = [parse_inequality(r, n, params) for r in region]
        return cls(
            name,
            n,
            components,
            inequalities,
            params,
            coordinates,
            box,
            singular_tol,
            texts,
            list(region),
        )

    def component(self, a: int, b: int) -> Expression:
        return self._components[(min(a, b), max(a, b))]

    def metric_at(self, x: Sequence[float]) -> np.ndarray:
        """g_ab at x, values only."""
        n = self.dimension
        g = np.empty((n, n))
        for a in range(n):
            for b in range(a, n):
                g[a, b] = g[b, a] = self.component(a, b).value(x)
        return g

    def admitted(self, x: Sequence[float]) -> bool:
        return all(r.holds(x) for r in self.region)

    def check_admitted(self, x: Sequence[float]) -> None:
        for r, text in zip(self.region, self.region_texts):
            if not r.holds(x):
                raise ExcludedRegionError(
                    f"Point {list(map(float, x))} violates '{text}' on manifold {self.name}"
                )

    def describe(self) -> dict:
        n = self.dimension
        return {
            "name": self.name,
            "dimension": n,
            "coordinates": self.coordinates,
            "metric": [[self.texts[(min(a, b), max(a, b))] for b in range(n)] for a in range(n)],
            "region": self.region_texts,
            "parameters": self.parameters,
            "box": [list(b) for b in self.box] if self.box else None,
        }

    def __repr__(self) -> str:
        return f"MetricSpec({self.name!r}, dimension={self.dimension})"


@dataclass(frozen=True, eq=False)
class GeometryPoint:
    """Metric data evaluated at a point. Treat as immutable.

    d2g, dGamma and riemann are None when evaluated with curvature=False.
    """

    x: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    dginv: np.ndarray
    Gamma: np.ndarray
    d2g: Optional[np.ndarray] = None
    dGamma: Optional[np.ndarray] = None
    riemann: Optional[np.ndarray] = None

    @property
    def dimension(self) -> int:
        return self.x.shape[0]

    def _require_curvature(self) -> None:
        if self.dGamma is None:
            raise ValueError("GeometryPoint was evaluated without curvature data")

    def lower(self, A: np.ndarray) -> np.ndarray:
        """A_ab = g_ac A^c_b"""
        return np.einsum("ac,cb->ab", self.g, A)

    def nabla_vector(self, value: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """nabla_b Y^a = d_b Y^a + Gamma^a_bc Y^c, as [a, b]"""
        return grad + np.einsum("abc,c->ab", self.Gamma, value)

    def nabla_tensor2(self, value: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """nabla_c A^a_b = d_c A^a_b + Gamma^a_cd A^d_b - Gamma^d_cb A^a_d, as [a, b, c]"""
        return (
            grad
            + np.einsum("acd,db->abc", self.Gamma, value)
            - np.einsum("dcb,ad->abc", self.Gamma, value)
        )

    def nabla_vector_grad(self, y: VectorJet) -> np.ndarray:
        """d_c (nabla_b Y^a), as [a, b, c]"""
        self._require_curvature()
        return (
            y.hess
            + np.einsum("abdc,d->abc", self.dGamma, y.value)
            + np.einsum("abd,dc->abc", self.Gamma, y.grad)
        )

    def second_nabla_vector(self, y: VectorJet) -> np.ndarray:
        """nabla_c nabla_b Y^a, as [a, b, c]"""
        return self.nabla_tensor2(self.nabla_vector(y.value, y.grad), self.nabla_vector_grad(y))

    def curvature_operator(self, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """R(Y, Z)^a_b = R^a_bcd Y^c Z^d"""
        self._require_curvature()
        return np.einsum("abcd,c,d->ab", self.riemann, Y, Z)

    def lie_derivative_connection(
        self, y: VectorJet, tol: float = GEOMETRIC_TOL_DEFAULT
    ) -> np.ndarray:
        """L_Y Gamma^a_bc = nabla_c nabla_b Y^a - R^a_bcd Y^d, as [a, b, c].

        Raises:
            GeometryIdentityError: Result not symmetric in (b, c) to tol
        """
        self._require_curvature()
        L = self.second_nabla_vector(y) - np.einsum("abcd,d->abc", self.riemann, y.value)
        asymmetry = float(np.max(np.abs(L - np.einsum("acb->abc", L)), initial=0.0))
        scale = max(1.0, float(np.max(np.abs(L), initial=0.0)))
        if asymmetry > tol * scale:
            raise GeometryIdentityError(
                f"Lie derivative of the connection is not symmetric: {asymmetry:.3e}"
            )
        return 0.5 * (L + np.einsum("acb->abc", L))

    def riemann_lowered(self) -> np.ndarray:
        """R_abcd = g_ae R^e_bcd"""
        self._require_curvature()
        return np.einsum("ae,ebcd->abcd", self.g, self.riemann)

    def ricci(self) -> np.ndarray:
        """R_bd = R^a_bad"""
        self._require_curvature()
        return np.einsum("abad->bd", self.riemann)

    def ricci_scalar(self) -> float:
        return float(np.einsum("bd,bd->", self.ginv, self.ricci()))


def _christoffel_first_kind(dg: np.ndarray) -> np.ndarray:
    # Gamma_dbc = 1/2 (d_b g_dc + d_c g_db - d_d g_bc)
    return 0.5 * (np.einsum("dcb->dbc", dg) + dg - np.einsum("bcd->dbc", dg))


def geometry_at(m: MetricSpec, x: Sequence[float], curvature: bool = True) -> GeometryPoint:
    """Evaluate g, g^-1, Gamma and (optionally) dGamma and Riemann at x.

    Raises:
        ExcludedRegionError: x violates the region predicate of m
        SingularMetricError: |det g| <= m.singular_tol
    """
    x = np.asarray(x, dtype=float)
    n = m.dimension
    if x.shape != (n,):
        raise ValueError(f"Point must have {n} coordinates, got shape {x.shape}")
    m.check_admitted(x)

    g = np.empty((n, n))
    dg = np.empty((n, n, n))
    d2g = np.empty((n, n, n, n))
    for a in range(n):
        for b in range(a, n):
            j = m.component(a, b).jet(x)
            g[a, b] = g[b, a] = j.value
            dg[a, b] = dg[b, a] = j.grad
            d2g[a, b] = d2g[b, a] = j.hess

    det = float(np.linalg.det(g))
    if abs(det) <= m.singular_tol:
        raise SingularMetricError(
            f"Metric {m.name} is singular at {x.tolist()} (det = {det:.3e})"
        )
    ginv = np.linalg.inv(g)
    dginv = -np.einsum("af,fhe,hd->ade", ginv, dg, ginv)
    gamma1 = _christoffel_first_kind(dg)
    Gamma = np.einsum("ad,dbc->abc", ginv, gamma1)

    if not curvature:
        return GeometryPoint(x, g, ginv, dg, dginv, Gamma)

    dgamma1 = 0.5 * (
        np.einsum("dcbe->dbce", d2g) + d2g - np.einsum("bcde->dbce", d2g)
    )
    dGamma = np.einsum("ade,dbc->abce", dginv, gamma1) + np.einsum(
        "ad,dbce->abce", ginv, dgamma1
    )
    riemann = (
        np.einsum("adbc->abcd", dGamma)
        - np.einsum("acbd->abcd", dGamma)
        + np.einsum("ace,edb->abcd", Gamma, Gamma)
        - np.einsum("ade,ecb->abcd", Gamma, Gamma)
    )
    logger.debug(f"Evaluated geometry of {m.name} at {x.tolist()}")
    return GeometryPoint(x, g, ginv, dg, dginv, Gamma, d2g, dGamma, riemann)


def cov_deriv_vector(m: MetricSpec, Y: VectorField, x: Sequence[float]) -> np.ndarray:
    """nabla_b Y^a as [a, b]"""
    geo = geometry_at(m, x, curvature=False)
    y = Y.jet(geo)
    return geo.nabla_vector(y.value, y.grad)


def cov_deriv_tensor2(m: MetricSpec, A: Tensor2Field, x: Sequence[float]) -> np.ndarray:
    """nabla_c A^a_b as [a, b, c]"""
    geo = geometry_at(m, x)
    a = A.jet(geo)
    return geo.nabla_tensor2(a.value, a.grad)


def second_cov_deriv_vector(m: MetricSpec, Y: VectorField, x: Sequence[float]) -> np.ndarray:
    """nabla_c nabla_b Y^a as [a, b, c]"""
    geo = geometry_at(m, x)
    return geo.second_nabla_vector(Y.jet(geo))


def lie_deriv_connection(m: MetricSpec, Y: VectorField, x: Sequence[float]) -> np.ndarray:
    """L_Y Gamma^a_bc as [a, b, c]"""
    geo = geometry_at(m, x)
    return geo.lie_derivative_connection(Y.jet(geo))


def s_tensor(m: MetricSpec, Y: VectorField, Z: VectorField, x: Sequence[float]) -> np.ndarray:
    """S(Y, Z)^a_b = (L_Z Gamma^a_cb) Y^c"""
    geo = geometry_at(m, x)
    return s_tensor_at(geo, Y.jet(geo), Z.jet(geo))


def s_tensor_at(geo: GeometryPoint, y: VectorJet, z: VectorJet) -> np.ndarray:
    return np.einsum("acb,c->ab", geo.lie_derivative_connection(z), y.value)


def bracket_jet(y: VectorJet, z: VectorJet) -> Tuple[np.ndarray, np.ndarray]:
    """[Y, Z]^a = Y^b d_b Z^a - Z^b d_b Y^a and its gradient [a, b] = d_b [Y, Z]^a."""
    value = z.grad @ y.value - y.grad @ z.value
    grad = (
        np.einsum("cb,ac->ab", y.grad, z.grad)
        + np.einsum("c,acb->ab", y.value, z.hess)
        - np.einsum("cb,ac->ab", z.grad, y.grad)
        - np.einsum("c,acb->ab", z.value, y.hess)
    )
    return value, grad


def vector_bracket(
    m: MetricSpec, Y: VectorField, Z: VectorField, x: Sequence[float]
) -> Tuple[np.ndarray, np.ndarray]:
    geo = geometry_at(m, x, curvature=False)
    return bracket_jet(Y.jet(geo), Z.jet(geo))


def metric_compatibility_residual(geo: GeometryPoint) -> float:
    """max |nabla_c g_ab|"""
    nabla_g = (
        geo.dg
        - np.einsum("dca,db->abc", geo.Gamma, geo.g)
        - np.einsum("dcb,ad->abc", geo.Gamma, geo.g)
    )
    return float(np.max(np.abs(nabla_g)))


def bianchi_residual(geo: GeometryPoint) -> float:
    """max |R^a_[bcd]|"""
    geo._require_curvature()
    R = geo.riemann
    cyclic = R + np.einsum("acdb->abcd", R) + np.einsum("adbc->abcd", R)
    return float(np.max(np.abs(cyclic)))


def identity_residuals(geo: GeometryPoint) -> Dict[str, float]:
    """Pointwise residuals of the identities every GeometryPoint must satisfy."""
    R = geo.riemann_lowered()
    n = geo.dimension
    return {
        "inverse": float(np.max(np.abs(geo.g @ geo.ginv - np.eye(n)))),
        "christoffel_symmetry": float(
            np.max(np.abs(geo.Gamma - np.einsum("acb->abc", geo.Gamma)))
        ),
        "riemann_skew_last": float(
            np.max(np.abs(geo.riemann + np.einsum("abdc->abcd", geo.riemann)))
        ),
        "riemann_skew_first": float(np.max(np.abs(R + np.einsum("bacd->abcd", R)))),
        "riemann_pair_symmetry": float(np.max(np.abs(R - np.einsum("cdab->abcd", R)))),
        "metric_compatibility": metric_compatibility_residual(geo),
        "bianchi": bianchi_residual(geo),
    }

