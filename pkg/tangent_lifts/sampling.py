"""Seeded quasi-random sample points on the base manifold and on TM.

Points come from a scrambled Halton sequence scaled into a coordinate box and
are rejected when they fall outside the metric's admitted region. A run draws
at most REJECTION_FACTOR times the requested count before giving up.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from kybra_simple_logging import get_logger
from scipy.stats import qmc

from .bundle import PhasePoint
from .constants import (
    PHASE_FILTER_FUTURE_CAUSAL,
    REJECTION_FACTOR,
    SEED_DEFAULT,
    SINGULAR_TOL_DEFAULT,
)
from .errors import ConfigError, SamplingError
from .fields import (
    RaisedTensorField,
    ScalarFieldSpec,
    Tensor2FieldSpec,
    VectorFieldSpec,
)
from .geometry import MetricSpec

logger = get_logger(__name__)

Box = Sequence[Tuple[float, float]]

MOMENTUM_BOX_DEFAULT = (-1.0, 1.0)
MIN_MOMENTUM_NORM = 1e-12


def box_of(m: MetricSpec, box: Optional[Box] = None) -> np.ndarray:
    """The sampling box as an (n, 2) array: the override, else the metric's own."""
    chosen = box if box is not None else m.box
    if chosen is None:
        raise ConfigError(f"Manifold {m.name} declares no sampling box; give one in the config")
    arr = np.asarray(chosen, dtype=float)
    if arr.shape != (m.dimension, 2):
        raise ConfigError(
            f"Sampling box needs {m.dimension} (low, high) pairs, got shape {arr.shape}"
        )
    if np.any(arr[:, 1] <= arr[:, 0]):
        raise ConfigError(f"Sampling box has empty intervals: {arr.tolist()}")
    return arr


def _momentum_box(n: int, momentum_box: Optional[Box]) -> np.ndarray:
    if momentum_box is None:
        return np.array([MOMENTUM_BOX_DEFAULT] * n, dtype=float)
    arr = np.asarray(momentum_box, dtype=float)
    if arr.shape != (n, 2) or np.any(arr[:, 1] <= arr[:, 0]):
        raise ConfigError(f"Momentum box needs {n} non-empty (low, high) pairs")
    return arr


def _future_causal(m: MetricSpec, x: np.ndarray, p: np.ndarray) -> bool:
    g = m.metric_at(x)
    if abs(np.linalg.det(g)) <= SINGULAR_TOL_DEFAULT:
        return False
    return float(p @ g @ p) <= 0.0 and p[0] > 0.0


def _draw(count: int, dimension: int, seed: int, accept) -> List[np.ndarray]:
    if count <= 0:
        raise ConfigError(f"Sample count must be positive, got {count}")
    sampler = qmc.Halton(d=dimension, scramble=True, seed=seed)
    cap = REJECTION_FACTOR * count
    accepted: List[np.ndarray] = []
    drawn = 0
    while len(accepted) < count:
        if drawn >= cap:
            raise SamplingError(
                f"Only {len(accepted)} of {count} samples admitted after {drawn} draws"
            )
        batch = sampler.random(min(count, cap - drawn))
        for u in batch:
            drawn += 1
            candidate = accept(u)
            if candidate is not None:
                accepted.append(candidate)
                if len(accepted) == count:
                    break
    rejected = drawn - count
    if rejected:
        logger.debug(f"Rejected {rejected} of {drawn} quasi-random draws")
    if rejected > (REJECTION_FACTOR - 1) * count // 2:
        logger.warning(f"High rejection rate while sampling: {rejected} of {drawn}")
    return accepted


def sample_base_points(
    m: MetricSpec,
    count: int,
    seed: int = SEED_DEFAULT,
    box: Optional[Box] = None,
) -> List[np.ndarray]:
    """count admitted base points of m, deterministic in seed.

    Raises:
        SamplingError: Rejection cap exceeded
    """
    bounds = box_of(m, box)

    def accept(u):
        x = bounds[:, 0] + u * (bounds[:, 1] - bounds[:, 0])
        return x if m.admitted(x) else None

    return _draw(count, m.dimension, seed, accept)


def sample_phase_points(
    m: MetricSpec,
    count: int,
    seed: int = SEED_DEFAULT,
    box: Optional[Box] = None,
    momentum_box: Optional[Box] = None,
    phase_filter: Optional[str] = None,
) -> List[PhasePoint]:
    """count admitted phase points (x, p) with p != 0, deterministic in seed.

    phase_filter "future-causal" keeps only g(p, p) <= 0 with p^0 > 0.
    """
    n = m.dimension
    bounds = np.vstack([box_of(m, box), _momentum_box(n, momentum_box)])
    if phase_filter not in (None, PHASE_FILTER_FUTURE_CAUSAL):
        raise ConfigError(f"Unknown phase filter '{phase_filter}'")

    def accept(u):
        xi = bounds[:, 0] + u * (bounds[:, 1] - bounds[:, 0])
        x, p = xi[:n], xi[n:]
        if np.max(np.abs(p)) < MIN_MOMENTUM_NORM or not m.admitted(x):
            return None
        if phase_filter == PHASE_FILTER_FUTURE_CAUSAL and not _future_causal(m, x, p):
            return None
        return PhasePoint(x, p)

    return _draw(count, 2 * n, seed, accept)


# ------------------------------------------------------- random fields


def _scales(m: MetricSpec, box: Optional[Box]) -> List[float]:
    bounds = box_of(m, box)
    return [float(max(1.0, abs(lo), abs(hi))) for lo, hi in bounds]


def random_polynomial(rng: np.random.Generator, scales: Sequence[float]) -> str:
    """A quadratic polynomial in x_i / scale_i with coefficients in [-1, 1]."""
    n = len(scales)
    # plain decimal text; numpy 2 scalars repr as np.float64(...)
    s = [f"{float(v):.17g}" for v in scales]
    terms = [f"{rng.uniform(-1, 1):.6f}"]
    for i in range(n):
        terms.append(f"{rng.uniform(-1, 1):.6f}*(x{i}/{s[i]})")
    for i in range(n):
        for j in range(i, n):
            terms.append(
                f"{rng.uniform(-1, 1):.6f}*(x{i}/{s[i]})*(x{j}/{s[j]})"
            )
    return " + ".join(terms)


def random_vector_field(
    m: MetricSpec, rng: np.random.Generator, box: Optional[Box] = None
) -> VectorFieldSpec:
    scales = _scales(m, box)
    return VectorFieldSpec.from_strings(
        [random_polynomial(rng, scales) for _ in range(m.dimension)], m.dimension
    )


def random_tensor_field(
    m: MetricSpec, rng: np.random.Generator, box: Optional[Box] = None
) -> Tensor2FieldSpec:
    scales = _scales(m, box)
    n = m.dimension
    return Tensor2FieldSpec.from_strings(
        [[random_polynomial(rng, scales) for _ in range(n)] for _ in range(n)], n
    )


def random_skew_field(
    m: MetricSpec, rng: np.random.Generator, box: Optional[Box] = None
) -> RaisedTensorField:
    """A^a_b = g^ac W_cb with W_ab = -W_ba random, so A_(ab) = 0."""
    scales = _scales(m, box)
    n = m.dimension
    texts = [["0"] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            w = random_polynomial(rng, scales)
            texts[a][b] = w
            texts[b][a] = f"-({w})"
    return RaisedTensorField(Tensor2FieldSpec.from_strings(texts, n))


def random_scalar_field(
    m: MetricSpec, rng: np.random.Generator, box: Optional[Box] = None
) -> ScalarFieldSpec:
    return ScalarFieldSpec.from_text(random_polynomial(rng, _scales(m, box)), m.dimension)
