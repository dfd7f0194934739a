"""
Task runners: each task of a run config becomes one TaskReport
"""

import io
import math
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from kybra_simple_logging import get_logger

from .bundle import PhasePoint, SprayField, bracket_at, verify_basis_brackets
from .config import RunConfig, TaskConfig
from .constants import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFICATION_FAILED,
    KIND_DYNAMICAL,
    KIND_MATTER,
    LIFT_SAMPLE_COUNT_DEFAULT,
    SKEWNESS_TOL_DEFAULT,
    TASK_CHECK_DYNAMICAL,
    TASK_CHECK_MATTER,
    TASK_CLASSIFY,
    TASK_INTEGRATE,
    TASK_VERIFY_ATL_ALGEBRA,
    TASK_VERIFY_BRACKETS,
)
from .errors import ConfigError, SkewnessError, TangentLiftsError
from .expr_dsl import parse
from .fields import (
    ScalarField,
    SkewCovariantDerivativeField,
    Tensor2Field,
    VectorField,
    zero_vector,
)
from .geometry import geometry_at, identity_residuals
from .lifts import (
    AtlSpec,
    atl_bracket_at,
    atl_bracket_residual,
    atl_combine,
    classical_bracket_table,
    describe_lift,
    iwai_bracket_residual,
    lift_from_kind,
    matter_lift,
    skew_closure_residual,
    skew_violation,
)
from .reports import ReportBook, TaskReport
from .sampling import (
    random_scalar_field,
    random_skew_field,
    random_tensor_field,
    random_vector_field,
    sample_base_points,
    sample_phase_points,
)
from .storage import Storage
from .symmetry import (
    FLAG_NAMES,
    atl_dynamical_conditions,
    classify_vector_field,
    coincidence_check,
    dynamical_residual,
    matter_spray_bracket,
)
from .transport import IntegratorConfig, integrate_atl, integrate_geodesic, summarize

logger = get_logger(__name__)

# lift table checks run on the first pairs only
TABLE_SAMPLE_LIMIT = 20

# residual series behind each classification flag
FLAG_RESIDUALS = {
    "killing": "killing",
    "conformal_killing": "conformal",
    "homothetic": "conformal",
    "affine_collineation": "affine",
    "projective_collineation": "projective",
}

# a usage error outranks a numerical failure, which outranks a failed check
_EXIT_RANK = {EXIT_USAGE: 3, EXIT_NUMERICAL: 2, EXIT_VERIFICATION_FAILED: 1, EXIT_OK: 0}


def combine_exit_codes(codes: Sequence[int]) -> int:
    return max(codes, key=lambda c: _EXIT_RANK.get(c, 0), default=EXIT_OK)


class Checks:
    """Running maxima of named residuals and the first point that broke a tolerance."""

    def __init__(self):
        self.maxima: Dict[str, float] = {}
        self.violation: Optional[Dict[str, Any]] = None

    def record(self, name: str, residual: float, tol: float, point: Any = None) -> None:
        self.maxima[name] = max(self.maxima.get(name, 0.0), residual)
        # NaN fails too
        if not residual <= tol and self.violation is None:
            self.violation = {
                "check": name,
                "residual": residual,
                "tolerance": tol,
                "point": point,
            }
            logger.warning(f"Check {name} failed: residual {residual:.3e} > {tol:.1e} at {point}")

    @property
    def passed(self) -> bool:
        return self.violation is None


class RunContext:
    """The manifold, named fields and report book shared by the tasks of a run."""

    def __init__(self, config: RunConfig, book: ReportBook):
        self.config = config
        self.book = book
        self.metric = config.manifold.build()
        self.fields = {
            name: decl.build(name, self.metric) for name, decl in sorted(config.fields.items())
        }
        self.tolerances = config.tolerances
        self.seed = config.sampling.seed

    def _field(self, name: str, cls: type, what: str):
        if name not in self.fields:
            raise ConfigError(f"Undeclared field '{name}'")
        value = self.fields[name]
        if not isinstance(value, cls):
            raise ConfigError(f"Field '{name}' is not a {what} field")
        return value

    def vector(self, name: str) -> VectorField:
        return self._field(name, VectorField, "vector")

    def tensor(self, name: str) -> Tensor2Field:
        return self._field(name, Tensor2Field, "tensor2")

    def scalar(self, name: str) -> ScalarField:
        return self._field(name, ScalarField, "scalar")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def base_points(self, count: Optional[int] = None) -> List[np.ndarray]:
        sampling = self.config.sampling
        return sample_base_points(
            self.metric, count or sampling.classify_count, self.seed, sampling.box
        )

    def phase_points(self, count: Optional[int] = None) -> List[PhasePoint]:
        sampling = self.config.sampling
        return sample_phase_points(
            self.metric,
            count or sampling.count,
            self.seed,
            sampling.box,
            sampling.momentum_box,
            sampling.phase_filter,
        )

    def numbers(self, values: Sequence[Any], what: str) -> np.ndarray:
        """Numbers or constant expressions such as "pi/3" as a float array."""
        n = self.metric.dimension
        out = []
        for v in values:
            if isinstance(v, bool):
                raise ConfigError(f"{what} has a non-numeric entry {v!r}")
            if isinstance(v, (int, float)):
                out.append(float(v))
                continue
            if not isinstance(v, str):
                raise ConfigError(f"{what} has a non-numeric entry {v!r}")
            e = parse(v, n, self.metric.parameters)
            if e.variables():
                raise ConfigError(f"{what} entry '{v}' must not depend on coordinates")
            out.append(e.value(np.zeros(n)))
        return np.array(out, dtype=float)

    def lift(self, task: TaskConfig) -> AtlSpec:
        """The lift a task names through 'lift' and the field keys."""
        y_name = task.Y if task.Y is not None else task.vector
        Y = self.vector(y_name) if y_name is not None else None
        A = self.tensor(task.A) if task.A is not None else None
        k = self.vector(task.k) if task.k is not None else None
        psi = self.scalar(task.psi) if task.psi is not None else None
        points = None
        if task.lift == KIND_MATTER:
            if A is None and Y is not None:
                A = SkewCovariantDerivativeField(Y)
            points = self.base_points(LIFT_SAMPLE_COUNT_DEFAULT)
        return lift_from_kind(self.metric, task.lift, Y, A, k, psi, points)


def _finish(
    task: TaskConfig, checks: Checks, result: Dict[str, Any], passed: Optional[bool] = None
) -> TaskReport:
    ok = checks.passed if passed is None else passed
    result["max_residuals"] = dict(sorted(checks.maxima.items()))
    return TaskReport(
        task.task,
        task.label,
        ok,
        EXIT_OK if ok else EXIT_VERIFICATION_FAILED,
        result,
        checks.violation,
    )


# ---------------------------------------------------------------- runners


def run_verify_brackets(ctx: RunContext, task: TaskConfig) -> TaskReport:
    """Connection-basis brackets at phase points, metric identities at their base points."""
    m = ctx.metric
    tol = ctx.tolerances
    checks = Checks()
    points = ctx.phase_points(task.count)
    for pt in points:
        where = pt.to_list()
        for name, r in verify_basis_brackets(m, pt).items():
            checks.record(name, r, tol.bracket, where)
        for name, r in identity_residuals(geometry_at(m, pt.x)).items():
            checks.record(name, r, tol.inverse if name == "inverse" else tol.identity, where)
    return _finish(task, checks, {"manifold": m.name, "points": len(points)})


def _random_atl(ctx: RunContext, rng: np.random.Generator) -> AtlSpec:
    m, box = ctx.metric, ctx.config.sampling.box
    return AtlSpec(
        random_vector_field(m, rng, box),
        random_tensor_field(m, rng, box),
        random_vector_field(m, rng, box),
    )


def _linearity_residual(
    ctx: RunContext, alpha: float, L1: AtlSpec, beta: float, L2: AtlSpec, pt: PhasePoint
) -> float:
    """[alpha L1 + beta L2, L2] against alpha [L1, L2], both in closed form."""
    geo = geometry_at(ctx.metric, pt.x)
    left = atl_bracket_at(geo, atl_combine(alpha, L1, beta, L2), L2)
    right = atl_bracket_at(geo, L1, L2).coordinate_components(geo, pt.p) * alpha
    diff = left.coordinate_components(geo, pt.p) - right
    return float(np.max(np.abs(diff))) / max(1.0, float(np.max(np.abs(right))))


def run_verify_atl_algebra(ctx: RunContext, task: TaskConfig) -> TaskReport:
    """Closed-form ATL bracket, bilinearity, skew closure, the factor-two rule
    and the classical lift table, on random fields at random phase points."""
    m = ctx.metric
    box = ctx.config.sampling.box
    tol = ctx.tolerances.algebra
    rng = ctx.rng()
    checks = Checks()
    declared = [ctx.vector(name) for name in task.fields]
    if declared and len(declared) < 2:
        raise ConfigError(f"Task '{task.label}' needs two vector fields for the lift table")
    points = ctx.phase_points(task.pairs)

    for i, pt in enumerate(points):
        where = pt.to_list()
        L1, L2 = _random_atl(ctx, rng), _random_atl(ctx, rng)
        checks.record("atl_bracket", atl_bracket_residual(m, L1, L2, pt, relative=True), tol, where)

        alpha, beta = rng.uniform(-2.0, 2.0, size=2)
        checks.record("bilinearity", _linearity_residual(ctx, alpha, L1, beta, L2, pt), tol, where)

        n = m.dimension
        S1 = AtlSpec(L1.Y, random_skew_field(m, rng, box), zero_vector(n))
        S2 = AtlSpec(L2.Y, random_skew_field(m, rng, box), zero_vector(n))
        checks.record(
            "skew_closure", skew_closure_residual(m, S1, S2, pt.x, relative=True), tol, where
        )

        psi_y = random_scalar_field(m, rng, box)
        psi_z = random_scalar_field(m, rng, box)
        checks.record(
            "iwai_bracket", iwai_bracket_residual(m, L1.Y, psi_y, L2.Y, psi_z, pt.x), tol, where
        )

        if i < TABLE_SAMPLE_LIMIT:
            Y, Z = (declared[0], declared[1]) if declared else (L1.Y, L2.Y)
            for name, r in classical_bracket_table(m, Y, Z, pt).items():
                checks.record(f"table_{name}", r, tol, where)

    result = {
        "manifold": m.name,
        "pairs": len(points),
        "table_points": min(len(points), TABLE_SAMPLE_LIMIT),
        "table_fields": list(task.fields[:2]) if declared else "random",
    }
    return _finish(task, checks, result)


def run_classify(ctx: RunContext, task: TaskConfig) -> TaskReport:
    m = ctx.metric
    Y = ctx.vector(task.vector)
    points = ctx.base_points(task.count)
    report = classify_vector_field(m, Y, points, ctx.tolerances.symmetry)

    mismatches: Dict[str, Dict[str, bool]] = {}
    violation = None
    for flag, want in sorted(task.expect.items()):
        if flag not in FLAG_NAMES:
            raise ConfigError(f"Unknown flag '{flag}'; expected one of {', '.join(FLAG_NAMES)}")
        got = report.flags.get(flag)
        if got is None:
            raise ConfigError(f"Flag '{flag}' is decided by check-matter, not classify")
        if got == want:
            continue
        mismatches[flag] = {"expected": want, "got": got}
        if violation is None:
            violation = {"check": flag, "expected": want, "got": got}
            series = report.residuals[FLAG_RESIDUALS[flag]]
            if want:
                worst = int(np.argmax(series))
                violation.update({"residual": series[worst], "point": report.points[worst]})

    result = report.to_dict()
    result.update({"field": task.vector, "expect": task.expect, "mismatches": mismatches})
    passed = not mismatches
    return TaskReport(
        task.task,
        task.label,
        passed,
        EXIT_OK if passed else EXIT_VERIFICATION_FAILED,
        result,
        violation,
    )


def run_check_dynamical(ctx: RunContext, task: TaskConfig) -> TaskReport:
    """Is the lift a dynamical symmetry of the spray at every sampled phase point?"""
    m = ctx.metric
    tol = ctx.tolerances.dynamical
    L = ctx.lift(task)
    sigma = L.field(m)
    psi = ctx.scalar(task.psi) if task.psi is not None else None
    checks = Checks()
    points = ctx.phase_points(task.count)

    psi_hat: List[float] = []
    for pt in points:
        where = pt.to_list()
        r = dynamical_residual(m, sigma, pt)
        psi_hat.append(r.psi_hat)
        checks.record("dynamical", r.residual, tol, where)
        if psi is not None and L.kind == KIND_DYNAMICAL:
            geo = geometry_at(m, pt.x, curvature=False)
            checks.record("psi", abs(r.psi_hat - psi.value(geo)), tol, where)
            for name, value in atl_dynamical_conditions(m, L, pt.x, psi).items():
                checks.record(name, value, tol, where)

    result = {
        "lift": describe_lift(L),
        "points": len(points),
        "psi_hat": psi_hat,
        "lie_symmetry": checks.passed and max(map(abs, psi_hat), default=0.0) <= tol,
    }
    return _finish(task, checks, result)


def run_check_matter(ctx: RunContext, task: TaskConfig) -> TaskReport:
    """Closed-form [Y^(A), G] against the numeric bracket, then whether the
    matter lift of Y is a dynamical symmetry exactly when Y is homothetic.

    matter_symmetry means A stayed skew and the closed-form bracket held at
    every sampled point; whether the spray is preserved is dynamical_symmetry.
    """
    m = ctx.metric
    tol = ctx.tolerances
    Y = ctx.vector(task.vector)
    A = ctx.tensor(task.A) if task.A is not None else SkewCovariantDerivativeField(Y)
    L = matter_lift(m, Y, A, ctx.base_points(LIFT_SAMPLE_COUNT_DEFAULT), SKEWNESS_TOL_DEFAULT)
    sigma = L.field(m)
    spray = SprayField(m)
    checks = Checks()
    points = ctx.phase_points(task.count)

    for pt in points:
        where = pt.to_list()
        geo = geometry_at(m, pt.x)
        checks.record("skewness", skew_violation(geo, A.value(geo)), SKEWNESS_TOL_DEFAULT, where)
        numeric = bracket_at(geo, pt.p, sigma, spray)
        closed = matter_spray_bracket(m, L, pt)
        scale = max(1.0, float(np.max(np.abs(numeric))))
        checks.record(
            "spray_bracket", float(np.max(np.abs(closed - numeric))) / scale, tol.algebra, where
        )

    coincidence = coincidence_check(m, Y, points, tol.symmetry, tol.dynamical)
    flags = {
        "homothetic": coincidence.homothetic,
        "dynamical_symmetry": coincidence.dynamical_symmetry,
        "matter_symmetry": checks.passed,
    }
    mismatches = {}
    for flag, want in sorted(task.expect.items()):
        if flag not in flags:
            raise ConfigError(f"check-matter decides only {', '.join(sorted(flags))}; got '{flag}'")
        if flags[flag] != want:
            mismatches[flag] = {"expected": want, "got": flags[flag]}

    result = {
        "field": task.vector,
        "lift": describe_lift(L),
        "points": len(points),
        "flags": flags,
        "coincidence": coincidence.to_dict(),
        "mismatches": mismatches,
    }
    passed = checks.passed and coincidence.coincide and not mismatches
    report = _finish(task, checks, result, passed)
    if report.violation is None and not passed:
        report.violation = {"check": "coincidence", "point": coincidence.worst_point}
    return report


def _angle_error(angle: float, expected: float) -> float:
    d = abs(angle - expected) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def run_integrate(ctx: RunContext, task: TaskConfig) -> TaskReport:
    """Integrate a lift or a geodesic, store the trajectory CSV and summarize."""
    m = ctx.metric
    cfg = IntegratorConfig(task.step, task.max_steps, task.check_every)
    start = PhasePoint.of(ctx.numbers(task.start_x, "start_x"), ctx.numbers(task.start_p, "start_p"))
    span = tuple(ctx.numbers(task.span, "span"))
    if start.dimension != m.dimension:
        raise ConfigError(f"Start point has dimension {start.dimension}, {m.name} has {m.dimension}")

    if task.geodesic:
        traj = integrate_geodesic(m, start, span, cfg)
        lift_info: Any = "geodesic"
    else:
        L = ctx.lift(task)
        companion = ctx.numbers(task.companion, "companion") if task.companion else None
        traj = integrate_atl(m, L, start, span, cfg, companion)
        lift_info = describe_lift(L)

    artifact = f"{task.label}.csv"
    stream = io.StringIO()
    traj.write_csv(stream)
    ctx.book.save_artifact(artifact, stream.getvalue())

    summary = summarize(m, traj, task.check_every)
    checks = Checks()
    end = traj.end.to_list()
    if summary.covariant_rate_max is not None:
        checks.record("covariant_rate", summary.covariant_rate_max, ctx.tolerances.transport, end)
    if task.expect_angle is not None:
        if summary.rotation_angle is None:
            raise ConfigError("expect_angle needs a 2-dimensional positive-definite metric")
        checks.record(
            "rotation_angle",
            _angle_error(summary.rotation_angle, task.expect_angle),
            ctx.tolerances.transport,
            end,
        )
    if task.max_norm_drift is not None:
        checks.record("norm_drift", summary.norm_drift, task.max_norm_drift, end)

    result = summary.to_dict()
    result.update(
        {"lift": lift_info, "span": list(span), "step": cfg.step, "trajectory": artifact}
    )
    report = _finish(task, checks, result)
    if traj.exited_region:
        report.passed = False
        report.exit_code = EXIT_NUMERICAL
        report.violation = {"check": "region", "point": end, "message": traj.exit_message}
    return report


RUNNERS: Dict[str, Callable[[RunContext, TaskConfig], TaskReport]] = {
    TASK_VERIFY_BRACKETS: run_verify_brackets,
    TASK_VERIFY_ATL_ALGEBRA: run_verify_atl_algebra,
    TASK_CLASSIFY: run_classify,
    TASK_CHECK_DYNAMICAL: run_check_dynamical,
    TASK_CHECK_MATTER: run_check_matter,
    TASK_INTEGRATE: run_integrate,
}


def run_task(ctx: RunContext, task: TaskConfig) -> TaskReport:
    """Run one task and store its report. Library errors become failed reports."""
    logger.info(f"Running task {task.label} ({task.task})")
    try:
        report = RUNNERS[task.task](ctx, task)
    except SkewnessError as e:
        report = TaskReport(
            task.task,
            task.label,
            False,
            e.exit_code,
            violation={"check": "skewness", "residual": e.max_violation},
            error=str(e),
        )
    except TangentLiftsError as e:
        logger.error(f"Task {task.label} stopped: {e}")
        report = TaskReport(task.task, task.label, False, e.exit_code, error=str(e))
    ctx.book.save(report)
    logger.info(f"Task {task.label}: {'passed' if report.passed else 'FAILED'}")
    return report


class RunOutcome(NamedTuple):
    exit_code: int
    reports: List[TaskReport]
    book: ReportBook


def run_config(
    config: RunConfig,
    envelope: Dict[str, Any],
    storage: Optional[Storage] = None,
    only: Optional[Sequence[str]] = None,
) -> RunOutcome:
    """Run the tasks of config in order, optionally only those of the given names.

    Raises:
        ConfigError: The manifold or a field declaration cannot be built
    """
    book = ReportBook(envelope, storage)
    ctx = RunContext(config, book)
    tasks = [t for t in config.tasks if only is None or t.task in only]
    if not tasks:
        logger.warning("No tasks to run")
    reports = [run_task(ctx, task) for task in tasks]
    return RunOutcome(combine_exit_codes([r.exit_code for r in reports]), reports, book)
