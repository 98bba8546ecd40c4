"""
Unit tests for trajectory integration and reachable-cloud statistics.
"""

import csv
import logging

import numpy as np
import pytest
from scipy.linalg import expm

from quadctrl import (
    ControlSchedule,
    NonFiniteError,
    ParameterError,
    QuadraticSystem,
    empirical_rank,
    integrate,
    reachable_cloud,
    rigid_body,
    s_chain,
    write_endpoints_csv,
)
from quadctrl.sim import orthant_coverage


@pytest.fixture
def damped_rotation():
    """x' = [[-1, 2], [-2, -1]] x + e2 u."""
    return QuadraticSystem.build(
        [[-1.0, 2.0], [-2.0, -1.0]], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [[0.0, 1.0]]
    )


@pytest.fixture
def riccati():
    """x1' = x1^2 + u on R^2 (x2 stays at 0)."""
    return QuadraticSystem.build([[0, 0], [0, 0]], [0, 0], [1, 0], [0, 0], [[1, 0]])


class TestControlSchedule:
    """Test schedule validation."""

    def test_horizon(self):
        """Horizon is duration times the number of segments."""
        schedule = ControlSchedule(0.25, ((0.5,), (-1.0,)))
        assert schedule.horizon == pytest.approx(0.5)
        assert schedule.matrix.shape == (2, 1)

    def test_constant(self):
        """A constant schedule has a single segment and a large enough box."""
        schedule = ControlSchedule.constant([3.0, -1.0], 2.0)
        assert schedule.horizon == 2.0
        assert schedule.bound == 3.0

    @pytest.mark.parametrize(
        "duration, values, bound",
        [(0.0, ((0.0,),), 1.0), (0.1, (), 1.0), (0.1, ((0.0,),), 0.0), (0.1, ((2.0,),), 1.0)],
    )
    def test_invalid(self, duration, values, bound):
        """Nonpositive durations or bounds, no segments or values outside the box."""
        with pytest.raises(ParameterError):
            ControlSchedule(duration, values, bound)


class TestIntegrate:
    """Test RK4 integration of single trajectories."""

    def test_linear_system_matches_matrix_exponential(self, damped_rotation):
        """With constant u the endpoint equals the exact affine flow."""
        x0 = np.array([1.0, -0.5])
        u = 0.7
        T = 1.0
        trajectory = integrate(damped_rotation, x0, ControlSchedule.constant([u], T), dt=0.01)
        L = np.array([[-1.0, 2.0], [-2.0, -1.0]])
        augmented = np.zeros((3, 3))
        augmented[:2, :2] = L
        augmented[:2, 2] = np.array([0.0, 1.0]) * u
        exact = (expm(augmented * T) @ np.append(x0, 1.0))[:2]
        assert np.allclose(trajectory.endpoint, exact, atol=1e-8)

    def test_time_grid(self, damped_rotation):
        """States are recorded at every step, endpoints included."""
        schedule = ControlSchedule(0.5, ((0.0,), (1.0,)))
        trajectory = integrate(damped_rotation, [0.0, 0.0], schedule, dt=0.05)
        assert trajectory.states.shape == (21, 2)
        assert trajectory.times[-1] == pytest.approx(1.0)
        assert np.all(trajectory.states[0] == 0.0)

    def test_rigid_body_conserves_energy_and_momentum(self):
        """Without torques the kinetic energy and |J w| are invariants."""
        xi = np.array([1.0, 2.0, 3.0])
        sys = rigid_body([1, 2, 3], [(1, 0, 0), (0, 1, 0)], torques=True)
        w0 = np.array([1.0, 0.5, -0.8])
        trajectory = integrate(sys, w0, ControlSchedule(1.0, ((0.0, 0.0),)), dt=1e-3)
        w1 = trajectory.endpoint
        assert np.dot(xi * w1, w1) == pytest.approx(np.dot(xi * w0, w0), rel=1e-9)
        assert np.linalg.norm(xi * w1) == pytest.approx(np.linalg.norm(xi * w0), rel=1e-9)

    def test_fourth_order_convergence(self):
        """Halving dt shrinks the endpoint change about 16-fold on a forced rigid body."""
        sys = rigid_body([1, 2, 3], [(1, 0, 0), (0, 1, 0)], torques=True)
        schedule = ControlSchedule.constant([0.3, -0.2], 1.0)
        w0 = [1.0, 0.5, -0.8]
        x1, x2, x4 = (
            integrate(sys, w0, schedule, dt=dt).endpoint for dt in (0.05, 0.025, 0.0125)
        )
        coarse = np.linalg.norm(x1 - x2)
        fine = np.linalg.norm(x2 - x4)
        assert fine > 1e-12
        assert 12.0 < coarse / fine < 20.0

    def test_dt_must_divide_segments(self, damped_rotation):
        """A step that does not divide the segment duration is rejected."""
        with pytest.raises(ParameterError):
            integrate(damped_rotation, [0.0, 0.0], ControlSchedule.constant([0.0], 0.5), dt=0.3)

    def test_schedule_width_checked(self, damped_rotation):
        """A two-input schedule does not fit a single-input system."""
        with pytest.raises(ParameterError):
            integrate(
                damped_rotation, [0.0, 0.0], ControlSchedule.constant([0.0, 0.0], 0.5), dt=0.1
            )

    def test_blow_up(self, riccati):
        """x1' = x1^2 from x1 = 1 leaves every ball before t = 1."""
        with pytest.raises(NonFiniteError):
            integrate(riccati, [1.0, 0.0], ControlSchedule.constant([0.0], 2.0), dt=0.01)


class TestReachableCloud:
    """Test reachable-set sampling."""

    def test_r5_cloud_stays_in_s_k(self, r5):
        """Endpoints of the non-accessible example stay in span{e1, e4}."""
        chain = s_chain(r5)
        cloud = reachable_cloud(r5, N=200, seed=1, s_k=chain.s_k)
        assert cloud.empirical_rank == 2
        assert np.all(cloud.endpoints[:, [1, 2, 4]] == 0.0)
        # x4 = -integral of x1^2 never becomes positive
        assert cloud.orthant_coverage == pytest.approx(0.5)

    def test_accessible_cloud_is_full(self, sprott_mu1):
        """An accessible system's cloud has full empirical rank."""
        cloud = reachable_cloud(sprott_mu1, N=200, seed=2)
        assert cloud.empirical_rank == 3
        assert cloud.dropped == 0
        assert cloud.endpoints.shape == (200, 3)

    def test_deterministic(self, sprott_mu1):
        """The same seed reproduces the cloud; another seed changes it."""
        first = reachable_cloud(sprott_mu1, N=30, seed=5)
        again = reachable_cloud(sprott_mu1, N=30, seed=5)
        other = reachable_cloud(sprott_mu1, N=30, seed=6)
        assert np.array_equal(first.endpoints, again.endpoints)
        assert not np.array_equal(first.endpoints, other.endpoints)

    def test_workers_do_not_change_results(self, sprott_mu1):
        """Splitting the batch over threads gives the same endpoints."""
        serial = reachable_cloud(sprott_mu1, N=40, seed=7)
        threaded = reachable_cloud(sprott_mu1, N=40, seed=7, workers=3)
        assert np.allclose(serial.endpoints, threaded.endpoints, rtol=0, atol=1e-12)

    def test_escaped_samples_are_dropped(self, riccati, caplog):
        """Blown-up samples are counted, dropped and logged."""
        with caplog.at_level(logging.WARNING, logger="quadctrl.sim"):
            cloud = reachable_cloud(riccati, T=20.0, N=100, seed=0)
        assert cloud.dropped > 0
        assert cloud.dropped + cloud.endpoints.shape[0] == 100
        assert np.all(np.isfinite(cloud.endpoints))
        assert "Dropped" in caplog.text

    @pytest.mark.parametrize(
        "kwargs", [{"T": 0.0}, {"N": 0}, {"segments": 0}, {"dt": 0.3}, {"bound": -1.0}]
    )
    def test_invalid_parameters(self, sprott_mu1, kwargs):
        """Bad horizons, sample counts, segments, steps and bounds are rejected."""
        with pytest.raises(ParameterError):
            reachable_cloud(sprott_mu1, **kwargs)

    def test_to_dict(self, sprott_mu1):
        """The summary omits endpoints and keeps the statistics."""
        data = reachable_cloud(sprott_mu1, N=20, seed=0).to_dict()
        assert "endpoints" not in data
        assert data["samples"] == 20
        assert len(data["coordinate_min"]) == 3
        assert data["singular_values"] == sorted(data["singular_values"], reverse=True)


class TestStatistics:
    """Test the rank and coverage helpers."""

    def test_rank_of_collinear_points(self):
        """Points on a line have empirical rank 1."""
        points = [[t, 2 * t, -t] for t in np.linspace(-1, 1, 11)]
        assert empirical_rank(points) == 1

    def test_rank_ignores_translation(self):
        """Centering removes a common offset."""
        assert empirical_rank([[5.0, 5.0], [5.0, 5.0]]) == 0
        assert empirical_rank([[5.0, 5.0], [6.0, 5.0], [5.0, 6.0]]) == 2

    def test_empty_cloud(self):
        """An empty cloud has no rank."""
        with pytest.raises(ValueError):
            empirical_rank(np.zeros((0, 3)))

    def test_orthant_coverage(self):
        """Coverage counts realized sign patterns."""
        assert orthant_coverage(np.array([[1.0, 1.0], [-1.0, 1.0]])) == 0.5
        assert orthant_coverage(np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])) == 1.0


class TestEndpointCsv:
    """Test the endpoint dump."""

    def test_write_and_read_back(self, sprott_mu1, tmp_path):
        """One header row, one row per endpoint, exact float text."""
        cloud = reachable_cloud(sprott_mu1, N=15, seed=4)
        path = write_endpoints_csv(cloud, tmp_path / "cloud.csv")
        with path.open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["x1", "x2", "x3"]
        assert len(rows) == 16
        values = np.array([[float(x) for x in row] for row in rows[1:]])
        assert np.array_equal(values, cloud.endpoints)
