"""
Trajectory integration and reachable-cloud statistics.

The simulator is a float-only diagnostic: it never overrides an analytic
verdict. Controls are piecewise constant; samples of a cloud are integrated
together as one batch with the classical fourth-order Runge-Kutta scheme,
and each sample draws its control values from its own generator seeded with
``(seed, sample index)``.
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from quadctrl.constants import (
    BLOW_UP_NORM,
    CLOUD_REL_TOL,
    DEFAULT_SIM_BOUND,
    DEFAULT_SIM_SAMPLES,
    DEFAULT_SIM_SEGMENTS,
    DEFAULT_SIM_STEPS_PER_SEGMENT,
    SCHEDULE_TOL,
)
from quadctrl.exceptions import NonFiniteError, ParameterError
from quadctrl.linalg import Subspace
from quadctrl.system import QuadraticSystem

logger = logging.getLogger(__name__)

RHS = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ControlSchedule:
    """
    Piecewise-constant control.

    Attributes:
        duration: Length of every segment.
        values: One control vector (length ``n - k``) per segment.
        bound: Radius of the box ``[-bound, bound]^(n-k)``.
    """

    duration: float
    values: Tuple[Tuple[float, ...], ...]
    bound: float = DEFAULT_SIM_BOUND

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ParameterError("Segment duration must be positive", field="duration")
        if self.bound <= 0:
            raise ParameterError("Control bound must be positive", field="bound")
        if not self.values:
            raise ParameterError("A schedule needs at least one segment", field="values")
        for value in self.values:
            if any(abs(u) > self.bound for u in value):
                raise ParameterError(
                    f"Control value {value} outside the box of radius {self.bound}",
                    field="values",
                )

    @classmethod
    def constant(
        cls, value: Sequence[float], horizon: float, bound: Optional[float] = None
    ) -> "ControlSchedule":
        """Single segment holding ``value`` over ``[0, horizon]``."""
        u = tuple(float(x) for x in value)
        radius = bound if bound is not None else max([abs(x) for x in u] + [DEFAULT_SIM_BOUND])
        return cls(float(horizon), (u,), radius)

    @property
    def horizon(self) -> float:
        return self.duration * len(self.values)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


@dataclass(frozen=True)
class Trajectory:
    """Sampled states ``states[i]`` at ``times[i]``, endpoints included."""

    times: np.ndarray
    states: np.ndarray

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]


def _float_rhs(sys: QuadraticSystem) -> RHS:
    """Batched right-hand side ``X -> X L^T + Phi(X) + U F^T`` (rows are samples)."""
    L = np.asarray(sys.L, dtype=float)
    a, b, c = (np.asarray(v, dtype=float) for v in (sys.a, sys.b, sys.c))
    F = np.asarray(sys.control_matrix, dtype=float)

    def rhs(X: np.ndarray, U: np.ndarray) -> np.ndarray:
        p2 = np.roll(X, -1, axis=1)
        p3 = np.roll(X, -2, axis=1)
        return X @ L.T + a * p2 * p2 + b * p3 * p3 + c * p2 * p3 + U @ F.T

    return rhs


def _rk4_step(rhs: RHS, X: np.ndarray, U: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(X, U)
    k2 = rhs(X + 0.5 * dt * k1, U)
    k3 = rhs(X + 0.5 * dt * k2, U)
    k4 = rhs(X + dt * k3, U)
    return X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _steps_per_segment(duration: float, dt: float) -> int:
    if dt <= 0:
        raise ParameterError("dt must be positive", field="dt")
    steps = int(round(duration / dt))
    if steps < 1 or abs(steps * dt - duration) > SCHEDULE_TOL:
        raise ParameterError(
            f"dt = {dt} does not divide the segment duration {duration}", field="dt"
        )
    return steps


def _escaped(X: np.ndarray) -> np.ndarray:
    finite = np.all(np.isfinite(X), axis=1)
    norms = np.linalg.norm(np.where(np.isfinite(X), X, 0.0), axis=1)
    return ~finite | (norms > BLOW_UP_NORM)


def integrate(
    sys: QuadraticSystem,
    x0: Sequence[float],
    schedule: ControlSchedule,
    dt: float,
) -> Trajectory:
    """
    Integrate ``x' = f0(x) + F u(t)`` with RK4.

    Args:
        sys: The system (any mode; integration is in float64).
        x0: Initial state.
        schedule: Piecewise-constant control.
        dt: Step size; must divide the segment duration within 1e-12.

    Raises:
        ParameterError: bad ``dt`` or a schedule of the wrong width.
        NonFiniteError: the state became NaN/inf or left the ball of radius 1e6.
    """
    values = schedule.matrix
    if values.shape[1] != sys.m:
        raise ParameterError(
            f"Schedule has {values.shape[1]} inputs, the system has {sys.m}", field="values"
        )
    steps = _steps_per_segment(schedule.duration, dt)
    rhs = _float_rhs(sys)
    X = np.asarray(x0, dtype=float).reshape(1, sys.n)
    states = [X[0].copy()]
    for u in values:
        U = u.reshape(1, -1)
        for _ in range(steps):
            X = _rk4_step(rhs, X, U, dt)
            if _escaped(X)[0]:
                raise NonFiniteError(
                    f"State left the finite region at t = {len(states) * dt:.6g}"
                )
            states.append(X[0].copy())
    times = np.arange(len(states)) * dt
    return Trajectory(times=times, states=np.array(states))


# ---------------------------------------------------------------------------
# Reachable clouds
# ---------------------------------------------------------------------------


@dataclass
class CloudStats:
    """
    Endpoints of random trajectories from the origin and their statistics.

    Attributes:
        endpoints: ``N' x n`` matrix of surviving endpoints.
        empirical_rank: Rank of the centered endpoint matrix.
        singular_values: Its singular values, largest first.
        orthant_coverage: Fraction of the ``2^d`` sign patterns realized by
            the endpoint coordinates in an orthonormal basis of ``S_k``
            (``d = dim S_k``; all coordinates when no subspace was given).
        dropped: Samples discarded because they blew up.
        samples: Samples requested.
    """

    endpoints: np.ndarray
    empirical_rank: int
    singular_values: List[float]
    orthant_coverage: float
    dropped: int = 0
    samples: int = 0
    horizon: float = 0.0
    seed: int = 0

    @property
    def coordinate_min(self) -> np.ndarray:
        return self.endpoints.min(axis=0)

    @property
    def coordinate_max(self) -> np.ndarray:
        return self.endpoints.max(axis=0)

    def to_dict(self) -> Dict[str, Any]:
        """Summary statistics (endpoints are left to :func:`write_endpoints_csv`)."""
        return {
            "samples": self.samples,
            "dropped": self.dropped,
            "horizon": self.horizon,
            "seed": self.seed,
            "empirical_rank": self.empirical_rank,
            "singular_values": [float(s) for s in self.singular_values],
            "orthant_coverage": self.orthant_coverage,
            "coordinate_min": [float(x) for x in self.coordinate_min],
            "coordinate_max": [float(x) for x in self.coordinate_max],
        }


def _sample_controls(seed: int, index: int, segments: int, m: int, bound: float) -> np.ndarray:
    rng = np.random.default_rng([seed, index])
    return rng.uniform(-bound, bound, size=(segments, m))


def _integrate_batch(
    rhs: RHS, controls: np.ndarray, n: int, steps: int, dt: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Endpoints of ``controls.shape[0]`` trajectories from 0, and the escape mask."""
    batch, segments, _ = controls.shape
    X = np.zeros((batch, n))
    escaped = np.zeros(batch, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for segment in range(segments):
            U = controls[:, segment, :]
            for _ in range(steps):
                X = _rk4_step(rhs, X, U, dt)
                newly = _escaped(X) & ~escaped
                if newly.any():
                    escaped |= newly
                    X[escaped] = 0.0
    return X, escaped


def reachable_cloud(
    sys: QuadraticSystem,
    T: float = 0.5,
    N: int = DEFAULT_SIM_SAMPLES,
    bound: float = DEFAULT_SIM_BOUND,
    segments: int = DEFAULT_SIM_SEGMENTS,
    seed: int = 0,
    dt: Optional[float] = None,
    workers: Optional[int] = None,
    s_k: Optional[Subspace] = None,
) -> CloudStats:
    """
    Sample ``N`` random piecewise-constant controls and collect endpoints.

    Args:
        sys: The system.
        T: Horizon.
        N: Number of samples.
        bound: Box radius of the control values.
        segments: Constant pieces per control.
        seed: Seed; sample ``i`` uses ``default_rng([seed, i])``.
        dt: Step size (default: 50 steps per segment).
        workers: Threads sharing the batch; results do not depend on it.
        s_k: Subspace whose coordinates define the orthant coverage.

    Raises:
        ParameterError: ``T <= 0``, ``N < 1``, ``segments < 1`` or bad ``dt``.
    """
    if T <= 0:
        raise ParameterError("T must be positive", field="T")
    if N < 1:
        raise ParameterError("N must be at least 1", field="N")
    if segments < 1:
        raise ParameterError("segments must be at least 1", field="segments")
    duration = T / segments
    dt = dt if dt is not None else duration / DEFAULT_SIM_STEPS_PER_SEGMENT
    steps = _steps_per_segment(duration, dt)
    ControlSchedule(duration, ((0.0,) * sys.m,), bound)

    controls = np.stack(
        [_sample_controls(seed, i, segments, sys.m, bound) for i in range(N)]
    )
    rhs = _float_rhs(sys)
    if workers and workers > 1 and N > 1:
        chunks = np.array_split(np.arange(N), min(workers, N))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(lambda idx: _integrate_batch(rhs, controls[idx], sys.n, steps, dt), chunks)
            )
        endpoints = np.concatenate([p[0] for p in parts])
        escaped = np.concatenate([p[1] for p in parts])
    else:
        endpoints, escaped = _integrate_batch(rhs, controls, sys.n, steps, dt)

    dropped = int(escaped.sum())
    if dropped:
        logger.warning("Dropped %d of %d samples that left the finite region", dropped, N)
    kept = endpoints[~escaped]
    if kept.shape[0] == 0:
        raise NonFiniteError("Every sample left the finite region")
    singular = _centered_singular_values(kept)
    return CloudStats(
        endpoints=kept,
        empirical_rank=_rank_from_singular(singular, CLOUD_REL_TOL),
        singular_values=[float(s) for s in singular],
        orthant_coverage=orthant_coverage(kept, s_k),
        dropped=dropped,
        samples=N,
        horizon=T,
        seed=seed,
    )


def _centered_singular_values(endpoints: np.ndarray) -> np.ndarray:
    centered = endpoints - endpoints.mean(axis=0)
    return np.linalg.svd(centered, compute_uv=False)


def _rank_from_singular(singular: np.ndarray, rel_tol: float) -> int:
    if singular.size == 0 or singular[0] == 0:
        return 0
    return int(np.sum(singular > rel_tol * singular[0]))


def empirical_rank(
    cloud: Union[CloudStats, np.ndarray, Sequence[Sequence[float]]],
    rel_tol: float = CLOUD_REL_TOL,
) -> int:
    """
    Rank of the centered endpoint matrix.

    Singular values at or below ``rel_tol * sigma_max`` count as zero.

    Raises:
        ValueError: the cloud is empty.
    """
    endpoints = cloud.endpoints if isinstance(cloud, CloudStats) else np.asarray(cloud, dtype=float)
    if endpoints.ndim != 2 or endpoints.shape[0] == 0:
        raise ValueError("Cannot take the rank of an empty cloud")
    return _rank_from_singular(_centered_singular_values(endpoints), rel_tol)


def orthant_coverage(endpoints: np.ndarray, s_k: Optional[Subspace] = None) -> float:
    """Fraction of sign patterns realized by the coordinates of ``endpoints``."""
    if s_k is not None:
        if s_k.rank == 0:
            return 0.0
        Q, _ = np.linalg.qr(np.array(s_k.basis, dtype=float).T)
        coords = endpoints @ Q
    else:
        coords = endpoints
    d = coords.shape[1]
    patterns = {tuple(row) for row in (coords > 0).astype(int)}
    return len(patterns) / float(2**d)


def write_endpoints_csv(cloud: CloudStats, path: Union[str, Path]) -> Path:
    """Write one endpoint per row under an ``x1,...,xn`` header."""
    path = Path(path)
    n = cloud.endpoints.shape[1]
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"x{i + 1}" for i in range(n)])
        for row in cloud.endpoints:
            writer.writerow([repr(float(x)) for x in row])
    logger.debug("Wrote %d endpoints to %s", len(cloud.endpoints), path)
    return path
