"""Built-in manifolds and example vector fields, addressable by name."""

import math
from typing import Callable, Dict, List, Mapping, Optional, Sequence

from kybra_simple_logging import get_logger

from .errors import ConfigError
from .fields import VectorFieldSpec
from .geometry import MetricSpec

logger = get_logger(__name__)

POLE_CUT = "1e-6"


class CatalogEntry:
    """A named manifold with default parameters and example fields.

    Attributes:
        name: Catalog name
        description: One-line description
        defaults: Default values of the free parameters
        fields: Example vector fields, name -> component expressions
    """

    def __init__(
        self,
        name: str,
        description: str,
        build: Callable[[Mapping[str, float]], MetricSpec],
        defaults: Optional[Mapping[str, float]] = None,
        fields: Optional[Mapping[str, Sequence[str]]] = None,
    ):
        self.name = name
        self.description = description
        self._build = build
        self.defaults = dict(defaults or {})
        self.fields = {k: list(v) for k, v in (fields or {}).items()}

    def metric(self, parameters: Optional[Mapping[str, float]] = None) -> MetricSpec:
        params = dict(self.defaults)
        for key, value in (parameters or {}).items():
            if key not in self.defaults:
                raise ConfigError(f"Manifold {self.name} has no parameter '{key}'")
            params[key] = float(value)
        return self._build(params)

    def describe(self) -> dict:
        spec = self.metric().describe()
        spec["description"] = self.description
        spec["fields"] = self.fields
        return spec


_CATALOG: Dict[str, CatalogEntry] = {}


def register(entry: CatalogEntry) -> None:
    if entry.name in _CATALOG:
        logger.warning(f"Catalog entry '{entry.name}' replaced")
    _CATALOG[entry.name] = entry


def catalog_names() -> List[str]:
    return list(_CATALOG)


def get_entry(name: str) -> CatalogEntry:
    try:
        return _CATALOG[name]
    except KeyError:
        raise ConfigError(
            f"Unknown manifold '{name}'. Known manifolds: {', '.join(_CATALOG)}"
        )


def get_manifold(name: str, parameters: Optional[Mapping[str, float]] = None) -> MetricSpec:
    return get_entry(name).metric(parameters)


def example_field(m: MetricSpec, field_name: str) -> VectorFieldSpec:
    """An example field of the catalog manifold m, parsed with m's parameters."""
    entry = get_entry(m.name)
    if field_name not in entry.fields:
        raise ConfigError(f"Manifold {m.name} has no example field '{field_name}'")
    return VectorFieldSpec.from_strings(entry.fields[field_name], m.dimension, m.parameters)


def describe_catalog() -> List[dict]:
    return [entry.describe() for entry in _CATALOG.values()]


def _diagonal(entries: Sequence[str]) -> List[List[str]]:
    n = len(entries)
    return [[entries[a] if a == b else "0" for b in range(n)] for a in range(n)]


# ----------------------------------------------------------------- entries


def _euclidean(n: int) -> CatalogEntry:
    coords = [f"x{i}" for i in range(n)]
    zeros = ["0"] * n

    def with_head(head: Sequence[str]) -> List[str]:
        return list(head) + zeros[len(head):]

    return CatalogEntry(
        f"euclidean{n}",
        f"Flat Euclidean space R^{n}, Cartesian coordinates",
        lambda p: MetricSpec.from_strings(
            f"euclidean{n}", _diagonal(["1"] * n), coordinates=coords, box=[(-2.0, 2.0)] * n
        ),
        fields={
            "translation": with_head(["1"]),
            "rotation": with_head(["-x1", "x0"]),
            "dilation": coords,
            "projective": ["x0^2"] + [f"x0*x{i}" for i in range(1, n)],
        },
    )


def _minkowski(n: int) -> CatalogEntry:
    coords = ["t"] + [f"x{i}" for i in range(1, n)]
    zeros = ["0"] * n
    fields = {
        "time_translation": ["1"] + zeros[1:],
        "boost": ["x1", "x0"] + zeros[2:],
        "dilation": [f"x{i}" for i in range(n)],
    }
    if n >= 3:
        fields["rotation"] = ["0", "-x2", "x1"] + zeros[3:]
    return CatalogEntry(
        f"minkowski{n}",
        f"Minkowski spacetime in {n} dimensions, signature (-+...)",
        lambda p: MetricSpec.from_strings(
            f"minkowski{n}",
            _diagonal(["-1"] + ["1"] * (n - 1)),
            coordinates=coords,
            box=[(-2.0, 2.0)] * n,
        ),
        fields=fields,
    )


register(_euclidean(2))
register(_euclidean(3))
register(_euclidean(4))

register(
    CatalogEntry(
        "euclidean-polar",
        "Euclidean plane in polar coordinates (r, theta)",
        lambda p: MetricSpec.from_strings(
            "euclidean-polar",
            _diagonal(["1", "x0^2"]),
            region=[f"x0 > {POLE_CUT}"],
            coordinates=["r", "theta"],
            box=[(0.5, 3.0), (0.0, 2.0 * math.pi)],
        ),
        fields={
            "rotation": ["0", "1"],
            "dilation": ["x0", "0"],
            "translation_x": ["cos(x1)", "-sin(x1)/x0"],
        },
    )
)

register(
    CatalogEntry(
        "sphere2",
        "Unit 2-sphere in spherical coordinates (theta, phi)",
        lambda p: MetricSpec.from_strings(
            "sphere2",
            _diagonal(["1", "sin(x0)^2"]),
            region=[f"sin(x0) > {POLE_CUT}"],
            coordinates=["theta", "phi"],
            box=[(0.2, math.pi - 0.2), (0.0, 2.0 * math.pi)],
        ),
        fields={
            "rotation_z": ["0", "1"],
            "rotation_x": ["-sin(x1)", "-cos(x1)*cos(x0)/sin(x0)"],
            "rotation_y": ["cos(x1)", "-sin(x1)*cos(x0)/sin(x0)"],
            "theta_scaling": ["x0", "0"],
        },
    )
)

register(_minkowski(2))
register(_minkowski(4))


def _schwarzschild(p: Mapping[str, float]) -> MetricSpec:
    M = p["M"]
    return MetricSpec.from_strings(
        "schwarzschild",
        _diagonal(["-(1 - 2*M/x1)", "1/(1 - 2*M/x1)", "x1^2", "x1^2*sin(x2)^2"]),
        region=["x1 > 2*M*(1 + 1e-6)", f"sin(x2) > {POLE_CUT}"],
        parameters={"M": M},
        coordinates=["t", "r", "theta", "phi"],
        box=[(-5.0, 5.0), (3.0 * M, 10.0 * M), (0.3, math.pi - 0.3), (0.0, 2.0 * math.pi)],
    )


register(
    CatalogEntry(
        "schwarzschild",
        "Schwarzschild exterior in Schwarzschild coordinates (t, r, theta, phi)",
        _schwarzschild,
        defaults={"M": 1.0},
        fields={
            "time_translation": ["1", "0", "0", "0"],
            "rotation_z": ["0", "0", "0", "1"],
            "rotation_x": ["0", "0", "-sin(x3)", "-cos(x3)*cos(x2)/sin(x2)"],
            "rotation_y": ["0", "0", "cos(x3)", "-sin(x3)*cos(x2)/sin(x2)"],
        },
    )
)
