"""Integral curves of ATLs and geodesics, with invariant monitoring.

Along an integral curve of Y^(A,k) the state (x, p) obeys

    dx^a/dsigma = Y^a
    dp^a/dsigma = (A^a_b - Gamma^a_bc Y^c) p^b + k^a

which is the covariant law Dp/dsigma = A p + k. Integration is classical
fixed-step RK4; the last step is shortened to land on the end of the span.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import IO, Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from kybra_simple_logging import get_logger

from .bundle import PhasePoint
from .constants import CHECK_EVERY_DEFAULT, MAX_STEPS_DEFAULT, STEP_DEFAULT
from .errors import ConfigError, ExcludedRegionError, IntegrationError
from .fields import Tensor2Combination, Tensor2Field, VectorField
from .geometry import MetricSpec, geometry_at
from .lifts import AtlSpec, vertical_lift_tensor

logger = get_logger(__name__)

METHOD_RK4 = "rk4"


@dataclass
class IntegratorConfig:
    step: float = STEP_DEFAULT
    max_steps: int = MAX_STEPS_DEFAULT
    check_every: int = CHECK_EVERY_DEFAULT
    method: str = METHOD_RK4

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigError(f"Integrator step must be positive, got {self.step}")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be at least 1, got {self.max_steps}")
        if self.check_every < 1:
            raise ConfigError(f"check_every must be at least 1, got {self.check_every}")
        if self.method != METHOD_RK4:
            raise ConfigError(f"Unknown integration method '{self.method}'")

    def step_sizes(self, span: Tuple[float, float]) -> List[float]:
        """Step lengths covering span; all equal to step except possibly the last.

        Raises:
            ConfigError: Empty or reversed span
            IntegrationError: More than max_steps steps needed
        """
        start, end = float(span[0]), float(span[1])
        length = end - start
        if not length > 0:
            raise ConfigError(f"Integration span must be increasing, got {span}")
        full = int(math.floor(length / self.step + 1e-9))
        remainder = length - full * self.step
        count = full + (1 if remainder > 1e-12 * max(1.0, length) else 0)
        count = max(count, 1)
        if count > self.max_steps:
            raise IntegrationError(
                f"Span {length} needs {count} steps of {self.step}, max_steps is {self.max_steps}"
            )
        steps = [self.step] * (count - 1)
        steps.append(end - (start + self.step * (count - 1)))
        return steps


@dataclass
class Trajectory:
    """Samples (sigma_i, x_i, p_i) with g(p, p) at each sample.

    When a companion vector u was transported, u_i and g(p, u) are kept too.
    exited_region is set when the curve left the admitted region before the
    end of the span; the samples then stop at the last admitted point.
    """

    metric_name: str
    sigma: List[float] = field(default_factory=list)
    x: List[np.ndarray] = field(default_factory=list)
    p: List[np.ndarray] = field(default_factory=list)
    gpp: List[float] = field(default_factory=list)
    u: List[np.ndarray] = field(default_factory=list)
    gpu: List[float] = field(default_factory=list)
    lift: Optional[AtlSpec] = None
    exited_region: bool = False
    exit_message: str = ""

    def __len__(self) -> int:
        return len(self.sigma)

    @property
    def end(self) -> PhasePoint:
        return PhasePoint(self.x[-1], self.p[-1])

    def append(self, sigma, x, p, gpp, u=None, gpu=None) -> None:
        self.sigma.append(float(sigma))
        self.x.append(np.array(x, dtype=float))
        self.p.append(np.array(p, dtype=float))
        self.gpp.append(float(gpp))
        if u is not None:
            self.u.append(np.array(u, dtype=float))
            self.gpu.append(float(gpu))

    def write_csv(self, stream: IO[str]) -> None:
        """One row per sample: sigma, x0.., p0.., gpp with 17 significant digits."""
        n = self.x[0].shape[0] if self.x else 0
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(
            ["sigma"] + [f"x{i}" for i in range(n)] + [f"p{i}" for i in range(n)] + ["gpp"]
        )
        for s, x, p, gpp in zip(self.sigma, self.x, self.p, self.gpp):
            row = [s, *x.tolist(), *p.tolist(), gpp]
            writer.writerow([f"{v:.17g}" for v in row])


Rhs = Callable[[np.ndarray], np.ndarray]


def _rk4_step(f: Rhs, state: np.ndarray, h: float) -> np.ndarray:
    k1 = f(state)
    k2 = f(state + 0.5 * h * k1)
    k3 = f(state + 0.5 * h * k2)
    k4 = f(state + h * k3)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _run(
    m: MetricSpec,
    rhs: Rhs,
    start: PhasePoint,
    span: Tuple[float, float],
    cfg: IntegratorConfig,
    companion: Optional[np.ndarray],
    traj: Trajectory,
) -> Trajectory:
    n = m.dimension
    m.check_admitted(start.x)
    steps = cfg.step_sizes(span)
    parts = [start.x, start.p] + ([companion] if companion is not None else [])
    state = np.concatenate([np.asarray(v, dtype=float) for v in parts])

    def record(sigma: float, s: np.ndarray) -> None:
        g = m.metric_at(s[:n])
        p = s[n : 2 * n]
        if companion is not None:
            u = s[2 * n :]
            traj.append(sigma, s[:n], p, p @ g @ p, u, p @ g @ u)
        else:
            traj.append(sigma, s[:n], p, p @ g @ p)

    sigma = float(span[0])
    record(sigma, state)
    for i, h in enumerate(steps):
        try:
            candidate = _rk4_step(rhs, state, h)
            m.check_admitted(candidate[:n])
        except ExcludedRegionError as e:
            traj.exited_region = True
            traj.exit_message = str(e)
            logger.warning(
                f"Trajectory on {m.name} left the admitted region at sigma = {sigma:.6g}; truncated"
            )
            return traj
        state = candidate
        sigma = float(span[1]) if i == len(steps) - 1 else sigma + h
        record(sigma, state)
        if (i + 1) % cfg.check_every == 0:
            logger.debug(f"step {i + 1}: sigma = {sigma:.6g}, g(p,p) = {traj.gpp[-1]:.17g}")
    return traj


def atl_rate(m: MetricSpec, L: AtlSpec, x: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(dx/dsigma, dp/dsigma) for the integral curves of L at (x, p)."""
    geo = geometry_at(m, x, curvature=False)
    Y = L.Y.value(geo)
    M = L.A.value(geo) - np.einsum("abc,c->ab", geo.Gamma, Y)
    return Y, M @ p + L.k.value(geo)


def integrate_atl(
    m: MetricSpec,
    L: AtlSpec,
    start: PhasePoint,
    span: Tuple[float, float],
    cfg: Optional[IntegratorConfig] = None,
    companion: Optional[Sequence[float]] = None,
) -> Trajectory:
    """Integrate the integral curve of L from start over span.

    A companion vector u is carried by the linear part of the same rule,
    du/dsigma = (A - Gamma Y) u, so g(p, u) can be monitored.

    Raises:
        ExcludedRegionError: start itself is not admitted
        IntegrationError: span needs more than cfg.max_steps steps
    """
    cfg = cfg or IntegratorConfig()
    n = m.dimension
    u0 = None if companion is None else np.asarray(companion, dtype=float)

    def rhs(s: np.ndarray) -> np.ndarray:
        geo = geometry_at(m, s[:n], curvature=False)
        Y = L.Y.value(geo)
        M = L.A.value(geo) - np.einsum("abc,c->ab", geo.Gamma, Y)
        parts = [Y, M @ s[n : 2 * n] + L.k.value(geo)]
        if u0 is not None:
            parts.append(M @ s[2 * n :])
        return np.concatenate(parts)

    logger.info(f"Integrating {L.kind} lift on {m.name} over {tuple(span)} with h = {cfg.step}")
    return _run(m, rhs, start, span, cfg, u0, Trajectory(m.name, lift=L))


def integrate_geodesic(
    m: MetricSpec,
    start: PhasePoint,
    span: Tuple[float, float],
    cfg: Optional[IntegratorConfig] = None,
) -> Trajectory:
    """Integrate dx/dsigma = p, dp/dsigma = -Gamma^a_bc p^b p^c."""
    cfg = cfg or IntegratorConfig()
    n = m.dimension

    def rhs(s: np.ndarray) -> np.ndarray:
        geo = geometry_at(m, s[:n], curvature=False)
        p = s[n:]
        return np.concatenate([p, -np.einsum("abc,b,c->a", geo.Gamma, p, p)])

    logger.info(f"Integrating geodesic on {m.name} over {tuple(span)} with h = {cfg.step}")
    return _run(m, rhs, start, span, cfg, None, Trajectory(m.name))


def covariant_rate_residual(m: MetricSpec, L: AtlSpec, traj: Trajectory, index: int) -> float:
    """max |Dp/dsigma - (A p + k)| at sample index, Dp/dsigma = dp/dsigma + Gamma Y p."""
    x, p = traj.x[index], traj.p[index]
    Y, dp = atl_rate(m, L, x, p)
    geo = geometry_at(m, x, curvature=False)
    Dp = dp + np.einsum("abc,b,c->a", geo.Gamma, Y, p)
    return float(np.max(np.abs(Dp - (L.A.value(geo) @ p + L.k.value(geo)))))


def lie_transport_residual(m: MetricSpec, Y: VectorField, traj: Trajectory, index: int) -> float:
    """max |dp/dsigma - (d_b Y^a) p^b| at sample index, dp/dsigma from the
    rule the trajectory was integrated with."""
    if traj.lift is None:
        raise ConfigError("Lie transport residual needs a trajectory of a lift")
    x, p = traj.x[index], traj.p[index]
    _, dp = atl_rate(m, traj.lift, x, p)
    geo = geometry_at(m, x, curvature=False)
    return float(np.max(np.abs(dp - Y.jet(geo).grad @ p)))


class NormDrift(NamedTuple):
    gpp: List[float]
    max_drift: float


def norm_drift(m: MetricSpec, traj: Trajectory) -> NormDrift:
    """g(p, p) per sample and its largest departure from the first sample."""
    series = [float(p @ m.metric_at(x) @ p) for x, p in zip(traj.x, traj.p)]
    if not series:
        return NormDrift([], 0.0)
    return NormDrift(series, max(abs(v - series[0]) for v in series))


def rotation_angle(
    m: MetricSpec, x: Sequence[float], p0: Sequence[float], p1: Sequence[float]
) -> float:
    """Clockwise angle in [0, 2 pi) taking p0 to p1 in a g-orthonormal frame at x.

    Only for 2-dimensional positive-definite metrics.
    """
    if m.dimension != 2:
        raise ConfigError(f"Rotation angle needs a 2-dimensional metric, {m.name} has {m.dimension}")
    g = m.metric_at(x)
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise ConfigError(f"Rotation angle needs a positive-definite metric at {list(x)}")
    q0 = chol.T @ np.asarray(p0, dtype=float)
    q1 = chol.T @ np.asarray(p1, dtype=float)
    cross = q1[0] * q0[1] - q1[1] * q0[0]
    return float(math.atan2(cross, float(q0 @ q1)) % (2.0 * math.pi))


def fibre_action(
    m: MetricSpec,
    A: Tensor2Field,
    x: Sequence[float],
    p: Sequence[float],
    epsilon: float,
    cfg: Optional[IntegratorConfig] = None,
) -> np.ndarray:
    """exp(epsilon A) p at x, by integrating the vertical lift of A."""
    if epsilon == 0:
        return np.asarray(p, dtype=float).copy()
    generator = A if epsilon > 0 else Tensor2Combination([(-1.0, A)], A.dimension)
    traj = integrate_atl(
        m, vertical_lift_tensor(generator), PhasePoint.of(x, p), (0.0, abs(epsilon)), cfg
    )
    return traj.p[-1]


@dataclass
class TrajectorySummary:
    steps: int
    end: dict
    norm_drift: float
    covariant_rate_max: Optional[float] = None
    inner_product_drift: Optional[float] = None
    rotation_angle: Optional[float] = None
    exited_region: bool = False
    exit_message: str = ""

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "end": self.end,
            "norm_drift": self.norm_drift,
            "covariant_rate_max": self.covariant_rate_max,
            "inner_product_drift": self.inner_product_drift,
            "rotation_angle": self.rotation_angle,
            "exited_region": self.exited_region,
            "exit_message": self.exit_message,
        }


def summarize(m: MetricSpec, traj: Trajectory, check_every: int = CHECK_EVERY_DEFAULT) -> TrajectorySummary:
    """Endpoint, norm drift, covariant-rate residual and, in 2-D Riemannian
    charts, the rotation angle of p between the first and last samples."""
    summary = TrajectorySummary(
        steps=len(traj) - 1,
        end=traj.end.to_list(),
        norm_drift=norm_drift(m, traj).max_drift,
        exited_region=traj.exited_region,
        exit_message=traj.exit_message,
    )
    if traj.lift is not None:
        indices = sorted(set(range(0, len(traj), check_every)) | {len(traj) - 1})
        summary.covariant_rate_max = max(
            covariant_rate_residual(m, traj.lift, traj, i) for i in indices
        )
    if traj.gpu:
        summary.inner_product_drift = max(abs(v - traj.gpu[0]) for v in traj.gpu)
    if m.dimension == 2 and np.all(np.linalg.eigvalsh(m.metric_at(traj.x[-1])) > 0):
        summary.rotation_angle = rotation_angle(m, traj.x[-1], traj.p[0], traj.p[-1])
    return summary
