"""Run configuration: a JSON document declaring a manifold, named fields,
sampling, tolerances, output and an ordered task list.

See docs/CONFIG.md for the schema.
"""

import hashlib
import json
from typing import Any, Dict, List, Mapping, Optional

from kybra_simple_logging import get_logger

from .catalog import example_field, get_entry, get_manifold
from .constants import (
    ALGEBRA_TOL_DEFAULT,
    BRACKET_TOL_DEFAULT,
    CHECK_EVERY_DEFAULT,
    CLASSIFY_SAMPLE_COUNT_DEFAULT,
    DYNAMICAL_TOL_DEFAULT,
    GEOMETRIC_TOL_DEFAULT,
    IDENTITY_TOL_DEFAULT,
    LIFT_KINDS,
    MAX_STEPS_DEFAULT,
    PHASE_FILTER_FUTURE_CAUSAL,
    SEED_DEFAULT,
    SINGULAR_TOL_DEFAULT,
    STEP_DEFAULT,
    SYMMETRY_TOL_DEFAULT,
    TASK_CHECK_DYNAMICAL,
    TASK_CHECK_MATTER,
    TASK_CLASSIFY,
    TASK_INTEGRATE,
    TASKS,
    TRANSPORT_TOL_DEFAULT,
)
from .errors import ConfigError
from .fields import ScalarFieldSpec, Tensor2FieldSpec, VectorFieldSpec
from .geometry import MetricSpec
from .properties import (
    Boolean,
    Choice,
    Float,
    Integer,
    ListOf,
    MappingOf,
    Property,
    String,
)
from .storage import check_artifact_name

logger = get_logger(__name__)

FIELD_VECTOR = "vector"
FIELD_TENSOR2 = "tensor2"
FIELD_SCALAR = "scalar"

FORMAT_JSON = "json"
FORMAT_TEXT = "text"


class Section:
    """A configuration section whose fields are Property descriptors."""

    def __init__(self, **kwargs):
        known = self.properties()
        for key, value in kwargs.items():
            if key not in known:
                raise ConfigError(
                    f"Unknown key '{key}' in {self.__class__.__name__}; "
                    f"expected one of {', '.join(sorted(known))}"
                )
            setattr(self, key, value)

    @classmethod
    def properties(cls) -> Dict[str, Property]:
        found: Dict[str, Property] = {}
        for klass in reversed(cls.__mro__):
            for k, v in klass.__dict__.items():
                if not k.startswith("_") and isinstance(v, Property):
                    found[k] = v
        return found

    @classmethod
    def from_dict(cls, data: Optional[Mapping[str, Any]]):
        if data is None:
            return cls()
        if not isinstance(data, Mapping):
            raise ConfigError(f"{cls.__name__} must be a JSON object")
        return cls(**data)

    def serialize(self) -> Dict[str, Any]:
        return {k: getattr(self, k) for k in self.properties()}

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.serialize()!r})"


class ManifoldConfig(Section):
    """A catalog manifold by name, or an inline metric."""

    name = String(min_length=1, default="inline")
    metric = ListOf(ListOf(str))
    region = ListOf(str, default=[])
    parameters = MappingOf(float, default={})
    coordinates = ListOf(str)
    box = ListOf(ListOf(float, length=2))
    singular_tol = Float(min_value=0.0, default=SINGULAR_TOL_DEFAULT)

    def build(self) -> MetricSpec:
        if self.metric is None:
            if self.region or self.coordinates or self.box:
                raise ConfigError("Catalog manifolds take only 'name' and 'parameters'")
            get_entry(self.name)
            return get_manifold(self.name, self.parameters)
        if not self.metric:
            raise ConfigError("Inline metric has no components")
        return MetricSpec.from_strings(
            self.name,
            self.metric,
            region=self.region,
            parameters=self.parameters,
            coordinates=self.coordinates,
            box=[tuple(b) for b in self.box] if self.box else None,
            singular_tol=self.singular_tol,
        )


class FieldDeclaration(Section):
    """A named vector, rank-2 tensor or scalar field.

    Vector fields may instead name an example field of the catalog manifold.
    """

    kind = Choice((FIELD_VECTOR, FIELD_TENSOR2, FIELD_SCALAR), default=FIELD_VECTOR)
    components = ListOf()
    expression = String(min_length=1)
    example = String(min_length=1)

    def build(self, name: str, m: MetricSpec):
        n = m.dimension
        if self.kind == FIELD_SCALAR:
            if self.expression is None:
                raise ConfigError(f"Scalar field '{name}' needs 'expression'")
            return ScalarFieldSpec.from_text(self.expression, n, m.parameters)
        if self.example is not None:
            if self.kind != FIELD_VECTOR:
                raise ConfigError(f"Field '{name}': only vector fields can name an example")
            return example_field(m, self.example)
        if self.components is None:
            raise ConfigError(f"Field '{name}' needs 'components'")
        if self.kind == FIELD_VECTOR:
            return VectorFieldSpec.from_strings(
                [_text(name, c) for c in self.components], n, m.parameters
            )
        rows = self.components
        if any(not isinstance(r, list) for r in rows):
            raise ConfigError(f"Tensor field '{name}' needs a list of rows")
        return Tensor2FieldSpec.from_strings(
            [[_text(name, c) for c in row] for row in rows], n, m.parameters
        )


def _text(name: str, component: Any) -> str:
    if isinstance(component, bool):
        raise ConfigError(f"Field '{name}' has a non-expression component {component!r}")
    if isinstance(component, (int, float)):
        return repr(float(component))
    if not isinstance(component, str):
        raise ConfigError(f"Field '{name}' has a non-expression component {component!r}")
    return component


class TaskConfig(Section):
    """One entry of the task list. Which keys matter depends on the task."""

    task = Choice(TASKS)
    label = String(min_length=1)
    vector = String(min_length=1)
    fields = ListOf(str, default=[])
    lift = Choice(LIFT_KINDS)
    Y = String(min_length=1)
    A = String(min_length=1)
    k = String(min_length=1)
    psi = String(min_length=1)
    expect = MappingOf(bool, default={})
    pairs = Integer(min_value=1, default=100)
    count = Integer(min_value=1)
    geodesic = Boolean(default=False)
    # numbers or constant expressions such as "pi/3"
    start_x = ListOf()
    start_p = ListOf()
    companion = ListOf()
    span = ListOf(length=2)
    step = Float(min_value=0.0, exclusive_min=True, default=STEP_DEFAULT)
    max_steps = Integer(min_value=1, default=MAX_STEPS_DEFAULT)
    check_every = Integer(min_value=1, default=CHECK_EVERY_DEFAULT)
    expect_angle = Float()
    max_norm_drift = Float(min_value=0.0)

    def field_names(self) -> List[str]:
        names = list(self.fields)
        for attr in ("vector", "Y", "A", "k", "psi"):
            value = getattr(self, attr)
            if value is not None:
                names.append(value)
        return names


class SamplingConfig(Section):
    seed = Integer(min_value=0, default=SEED_DEFAULT)
    count = Integer(min_value=1, default=100)
    classify_count = Integer(min_value=2, default=CLASSIFY_SAMPLE_COUNT_DEFAULT)
    box = ListOf(ListOf(float, length=2))
    momentum_box = ListOf(ListOf(float, length=2))
    phase_filter = Choice((PHASE_FILTER_FUTURE_CAUSAL,))


class ToleranceConfig(Section):
    bracket = Float(min_value=0.0, exclusive_min=True, default=BRACKET_TOL_DEFAULT)
    algebra = Float(min_value=0.0, exclusive_min=True, default=ALGEBRA_TOL_DEFAULT)
    identity = Float(min_value=0.0, exclusive_min=True, default=GEOMETRIC_TOL_DEFAULT)
    inverse = Float(min_value=0.0, exclusive_min=True, default=IDENTITY_TOL_DEFAULT)
    symmetry = Float(min_value=0.0, exclusive_min=True, default=SYMMETRY_TOL_DEFAULT)
    dynamical = Float(min_value=0.0, exclusive_min=True, default=DYNAMICAL_TOL_DEFAULT)
    transport = Float(min_value=0.0, exclusive_min=True, default=TRANSPORT_TOL_DEFAULT)

    def override_all(self, tol: float) -> None:
        for name in self.properties():
            setattr(self, name, tol)


class OutputConfig(Section):
    directory = String(min_length=1, default="reports")
    format = Choice((FORMAT_JSON, FORMAT_TEXT), default=FORMAT_JSON)


_TOP_LEVEL = ("manifold", "fields", "tasks", "sampling", "tolerances", "output")


class RunConfig:
    """The effective configuration of one run."""

    def __init__(
        self,
        manifold: ManifoldConfig,
        fields: Dict[str, FieldDeclaration],
        tasks: List[TaskConfig],
        sampling: SamplingConfig,
        tolerances: ToleranceConfig,
        output: OutputConfig,
    ):
        self.manifold = manifold
        self.fields = fields
        self.tasks = tasks
        self.sampling = sampling
        self.tolerances = tolerances
        self.output = output
        self.validate()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("Config must be a JSON object")
        unknown = sorted(set(data) - set(_TOP_LEVEL))
        if unknown:
            raise ConfigError(f"Unknown top-level config keys: {', '.join(unknown)}")
        if "manifold" not in data:
            raise ConfigError("Config needs a 'manifold' section")
        raw_fields = data.get("fields") or {}
        if not isinstance(raw_fields, Mapping):
            raise ConfigError("'fields' must map names to field declarations")
        raw_tasks = data.get("tasks") or []
        if not isinstance(raw_tasks, list):
            raise ConfigError("'tasks' must be a list")
        return cls(
            ManifoldConfig.from_dict(data["manifold"]),
            {name: FieldDeclaration.from_dict(decl) for name, decl in raw_fields.items()},
            [TaskConfig.from_dict(t) for t in raw_tasks],
            SamplingConfig.from_dict(data.get("sampling")),
            ToleranceConfig.from_dict(data.get("tolerances")),
            OutputConfig.from_dict(data.get("output")),
        )

    def validate(self) -> None:
        labels = set()
        for i, task in enumerate(self.tasks):
            if task.task is None:
                raise ConfigError(f"Task #{i} has no 'task' name")
            if task.label is None:
                task.label = f"{i:02d}-{task.task}"
            check_artifact_name(f"{task.label}.json")
            if task.label in labels:
                raise ConfigError(f"Duplicate task label '{task.label}'")
            labels.add(task.label)
            for name in task.field_names():
                if name not in self.fields:
                    raise ConfigError(f"Task '{task.label}' references undeclared field '{name}'")
            if task.task in (TASK_CLASSIFY, TASK_CHECK_MATTER) and task.vector is None:
                raise ConfigError(f"Task '{task.label}' needs 'vector'")
            if task.task == TASK_CHECK_DYNAMICAL and task.lift is None:
                raise ConfigError(f"Task '{task.label}' needs 'lift'")
            if task.task == TASK_INTEGRATE:
                if task.start_x is None or task.start_p is None or task.span is None:
                    raise ConfigError(
                        f"Task '{task.label}' needs 'start_x', 'start_p' and 'span'"
                    )
                if not task.geodesic and task.lift is None:
                    raise ConfigError(f"Task '{task.label}' needs 'lift' or 'geodesic'")

    def apply_overrides(
        self,
        seed: Optional[int] = None,
        tol: Optional[float] = None,
        out_dir: Optional[str] = None,
        fmt: Optional[str] = None,
    ) -> None:
        """Command-line flags win over the file."""
        if seed is not None:
            self.sampling.seed = seed
        if tol is not None:
            self.tolerances.override_all(tol)
        if out_dir is not None:
            self.output.directory = out_dir
        if fmt is not None:
            self.output.format = fmt

    def to_dict(self) -> Dict[str, Any]:
        return {
            "manifold": self.manifold.serialize(),
            "fields": {name: d.serialize() for name, d in sorted(self.fields.items())},
            "tasks": [t.serialize() for t in self.tasks],
            "sampling": self.sampling.serialize(),
            "tolerances": self.tolerances.serialize(),
            "output": self.output.serialize(),
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the effective config. Output
        settings are left out, so moving the report directory keeps the hash."""
        doc = self.to_dict()
        doc.pop("output")
        canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(path: str) -> RunConfig:
    """Read and validate a JSON config file.

    Raises:
        ConfigError: Unreadable file, invalid JSON or invalid content
    """
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {path} is not valid JSON: {e}")
    logger.debug(f"Loaded config {path}")
    return RunConfig.from_dict(data)
