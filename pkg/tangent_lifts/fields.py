"""Scalar, vector and rank-2 tensor fields on the base manifold.

Fields are evaluated at a GeometryPoint, which carries the coordinates and
the metric data that derived fields (such as the covariant derivative of a
vector field) need. Two evaluation levels are offered:

    field.value(geo)  # components only
    field.jet(geo)    # components plus coordinate derivatives

Index layout:
    VectorJet.grad[a, b]    = d_b Y^a
    VectorJet.hess[a, b, c] = d_c d_b Y^a
    TensorJet.grad[a, b, c] = d_c A^a_b
"""

from typing import TYPE_CHECKING, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from kybra_simple_logging import get_logger

from .errors import ConfigError
from .expr_dsl import Expression, Jet2, Num, parse

if TYPE_CHECKING:
    from .geometry import GeometryPoint

logger = get_logger(__name__)


class VectorJet(NamedTuple):
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray


class TensorJet(NamedTuple):
    value: np.ndarray
    grad: np.ndarray


# ------------------------------------------------------------------ scalars


class ScalarField:
    dimension: int

    def jet(self, geo: "GeometryPoint") -> Jet2:
        raise NotImplementedError

    def value(self, geo: "GeometryPoint") -> float:
        return self.jet(geo).value


class ScalarFieldSpec(ScalarField):
    """A scalar field psi(x) given by one expression."""

    def __init__(self, expression: Expression, dimension: int, text: Optional[str] = None):
        self.expression = expression
        self.dimension = dimension
        self.text = text if text is not None else expression.to_text()

    @classmethod
    def from_text(
        cls, text: str, dimension: int, parameters: Optional[Mapping[str, float]] = None
    ) -> "ScalarFieldSpec":
        return cls(parse(text, dimension, parameters), dimension, text)

    @classmethod
    def constant(cls, value: float, dimension: int) -> "ScalarFieldSpec":
        return cls(Num(float(value)), dimension)

    def jet(self, geo):
        return self.expression.jet(geo.x)

    def value(self, geo):
        return self.expression.value(geo.x)

    def __repr__(self) -> str:
        return f"ScalarFieldSpec({self.text!r})"


# ------------------------------------------------------------------ vectors


class VectorField:
    dimension: int

    def jet(self, geo: "GeometryPoint") -> VectorJet:
        raise NotImplementedError

    def value(self, geo: "GeometryPoint") -> np.ndarray:
        return self.jet(geo).value


class VectorFieldSpec(VectorField):
    """A vector field Y^a(x) given by n expressions."""

    def __init__(self, components: Sequence[Expression], texts: Optional[Sequence[str]] = None):
        self.components: Tuple[Expression, ...] = tuple(components)
        self.dimension = len(self.components)
        self.texts = tuple(texts) if texts is not None else tuple(c.to_text() for c in self.components)

    @classmethod
    def from_strings(
        cls,
        texts: Sequence[str],
        dimension: int,
        parameters: Optional[Mapping[str, float]] = None,
    ) -> "VectorFieldSpec":
        if len(texts) != dimension:
            raise ConfigError(
                f"Vector field needs {dimension} components, got {len(texts)}"
            )
        return cls([parse(t, dimension, parameters) for t in texts], texts)

    @classmethod
    def constant(cls, values: Sequence[float]) -> "VectorFieldSpec":
        return cls([Num(float(v)) for v in values])

    def jet(self, geo):
        n = self.dimension
        value = np.empty(n)
        grad = np.empty((n, n))
        hess = np.empty((n, n, n))
        for a, component in enumerate(self.components):
            j = component.jet(geo.x)
            value[a] = j.value
            grad[a] = j.grad
            hess[a] = j.hess
        return VectorJet(value, grad, hess)

    def value(self, geo):
        return np.array([c.value(geo.x) for c in self.components])

    def __repr__(self) -> str:
        return f"VectorFieldSpec({list(self.texts)!r})"


class VectorCombination(VectorField):
    """sum_i c_i Y_i with constant coefficients."""

    def __init__(self, terms: Sequence[Tuple[float, VectorField]], dimension: int):
        self.terms = tuple((float(c), f) for c, f in terms)
        self.dimension = dimension

    def jet(self, geo):
        n = self.dimension
        value, grad, hess = np.zeros(n), np.zeros((n, n)), np.zeros((n, n, n))
        for c, f in self.terms:
            j = f.jet(geo)
            value = value + c * j.value
            grad = grad + c * j.grad
            hess = hess + c * j.hess
        return VectorJet(value, grad, hess)

    def value(self, geo):
        value = np.zeros(self.dimension)
        for c, f in self.terms:
            value = value + c * f.value(geo)
        return value

    def __repr__(self) -> str:
        return f"VectorCombination({list(self.terms)!r})"


def zero_vector(dimension: int) -> VectorCombination:
    return VectorCombination([], dimension)


def is_zero_vector(Y: VectorField) -> bool:
    """True when Y is zero by construction: constant zero components or an
    empty combination. Fields that merely evaluate to zero are not detected."""
    if isinstance(Y, VectorCombination):
        return all(c == 0.0 or is_zero_vector(f) for c, f in Y.terms)
    if isinstance(Y, VectorFieldSpec):
        return all(
            not c.variables() and c.value(np.zeros(Y.dimension)) == 0.0 for c in Y.components
        )
    return False


# ------------------------------------------------------------------ tensors


class Tensor2Field:
    """A (1,1) tensor field A^a_b(x)."""

    dimension: int

    def jet(self, geo: "GeometryPoint") -> TensorJet:
        raise NotImplementedError

    def value(self, geo: "GeometryPoint") -> np.ndarray:
        return self.jet(geo).value


class Tensor2FieldSpec(Tensor2Field):
    """A (1,1) tensor field given by n x n expressions, row index a, column b."""

    def __init__(self, components: Sequence[Sequence[Expression]], texts=None):
        self.components = tuple(tuple(row) for row in components)
        self.dimension = len(self.components)
        if any(len(row) != self.dimension for row in self.components):
            raise ConfigError("Tensor field components must form a square array")
        self.texts = (
            tuple(tuple(r) for r in texts)
            if texts is not None
            else tuple(tuple(c.to_text() for c in row) for row in self.components)
        )

    @classmethod
    def from_strings(
        cls,
        texts: Sequence[Sequence[str]],
        dimension: int,
        parameters: Optional[Mapping[str, float]] = None,
    ) -> "Tensor2FieldSpec":
        if len(texts) != dimension or any(len(row) != dimension for row in texts):
            raise ConfigError(f"Tensor field needs {dimension}x{dimension} components")
        return cls([[parse(t, dimension, parameters) for t in row] for row in texts], texts)

    @classmethod
    def constant(cls, matrix: Sequence[Sequence[float]]) -> "Tensor2FieldSpec":
        return cls([[Num(float(v)) for v in row] for row in matrix])

    def jet(self, geo):
        n = self.dimension
        value = np.empty((n, n))
        grad = np.empty((n, n, n))
        for a, row in enumerate(self.components):
            for b, component in enumerate(row):
                j = component.jet(geo.x)
                value[a, b] = j.value
                grad[a, b] = j.grad
        return TensorJet(value, grad)

    def value(self, geo):
        return np.array([[c.value(geo.x) for c in row] for row in self.components])

    def __repr__(self) -> str:
        return f"Tensor2FieldSpec({[list(r) for r in self.texts]!r})"


class Tensor2Combination(Tensor2Field):
    """sum_i c_i A_i with constant coefficients."""

    def __init__(self, terms: Sequence[Tuple[float, Tensor2Field]], dimension: int):
        self.terms = tuple((float(c), f) for c, f in terms)
        self.dimension = dimension

    def jet(self, geo):
        n = self.dimension
        value, grad = np.zeros((n, n)), np.zeros((n, n, n))
        for c, f in self.terms:
            j = f.jet(geo)
            value = value + c * j.value
            grad = grad + c * j.grad
        return TensorJet(value, grad)

    def value(self, geo):
        value = np.zeros((self.dimension, self.dimension))
        for c, f in self.terms:
            value = value + c * f.value(geo)
        return value

    def __repr__(self) -> str:
        return f"Tensor2Combination({list(self.terms)!r})"


def zero_tensor2(dimension: int) -> Tensor2Combination:
    return Tensor2Combination([], dimension)


class ScaledIdentityField(Tensor2Field):
    """psi(x) delta^a_b."""

    def __init__(self, psi: ScalarField, dimension: int):
        self.psi = psi
        self.dimension = dimension

    def jet(self, geo):
        j = self.psi.jet(geo)
        eye = np.eye(self.dimension)
        return TensorJet(j.value * eye, np.einsum("ab,c->abc", eye, j.grad))

    def value(self, geo):
        return self.psi.value(geo) * np.eye(self.dimension)

    def __repr__(self) -> str:
        return f"ScaledIdentityField({self.psi!r})"


def identity_tensor2(dimension: int) -> ScaledIdentityField:
    return ScaledIdentityField(ScalarFieldSpec.constant(1.0, dimension), dimension)


class CovariantDerivativeField(Tensor2Field):
    """A^a_b = nabla_b Y^a, the transport generator of Lie transport along Y."""

    def __init__(self, Y: VectorField):
        self.Y = Y
        self.dimension = Y.dimension

    def jet(self, geo):
        y = self.Y.jet(geo)
        return TensorJet(geo.nabla_vector(y.value, y.grad), geo.nabla_vector_grad(y))

    def value(self, geo):
        y = self.Y.jet(geo)
        return geo.nabla_vector(y.value, y.grad)

    def __repr__(self) -> str:
        return f"CovariantDerivativeField({self.Y!r})"


class SkewCovariantDerivativeField(Tensor2Field):
    """A^a_b = g^ac A_cb with A_ab = nabla_[b Y_a], the bivector dY (weight 1/2)."""

    def __init__(self, Y: VectorField):
        self.Y = Y
        self.dimension = Y.dimension

    @staticmethod
    def _lowered(geo, nabla: np.ndarray) -> np.ndarray:
        # M[a, b] = nabla_b Y_a
        return np.einsum("ad,db->ab", geo.g, nabla)

    def jet(self, geo):
        y = self.Y.jet(geo)
        nabla = geo.nabla_vector(y.value, y.grad)
        d_nabla = geo.nabla_vector_grad(y)
        lowered = self._lowered(geo, nabla)
        d_lowered = np.einsum("cde,db->cbe", geo.dg, nabla) + np.einsum(
            "cd,dbe->cbe", geo.g, d_nabla
        )
        skew = 0.5 * (lowered - lowered.T)
        d_skew = 0.5 * (d_lowered - np.einsum("bce->cbe", d_lowered))
        value = np.einsum("ac,cb->ab", geo.ginv, skew)
        grad = np.einsum("ace,cb->abe", geo.dginv, skew) + np.einsum(
            "ac,cbe->abe", geo.ginv, d_skew
        )
        return TensorJet(value, grad)

    def value(self, geo):
        y = self.Y.jet(geo)
        lowered = self._lowered(geo, geo.nabla_vector(y.value, y.grad))
        return np.einsum("ac,cb->ab", geo.ginv, 0.5 * (lowered - lowered.T))

    def __repr__(self) -> str:
        return f"SkewCovariantDerivativeField({self.Y!r})"


class RaisedTensorField(Tensor2Field):
    """A^a_b = g^ac W_cb for a field W_ab given with both indices down."""

    def __init__(self, lowered: Tensor2Field):
        self.lowered = lowered
        self.dimension = lowered.dimension

    def jet(self, geo):
        w = self.lowered.jet(geo)
        value = geo.ginv @ w.value
        grad = np.einsum("ace,cb->abe", geo.dginv, w.value) + np.einsum(
            "ac,cbe->abe", geo.ginv, w.grad
        )
        return TensorJet(value, grad)

    def value(self, geo):
        return geo.ginv @ self.lowered.value(geo)

    def __repr__(self) -> str:
        return f"RaisedTensorField({self.lowered!r})"
