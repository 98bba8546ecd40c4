"""
Simulation cross-checks at full budget (N = 2000) and model verdicts
that need many random draws.
"""

from fractions import Fraction

import numpy as np
import pytest

from quadctrl import (
    ControlSchedule,
    ControllabilityAnalyzer,
    Rule,
    VerdictTag,
    integrate,
    lorenz,
    lorenz_constants,
    reachable_cloud,
    rigid_body,
    s_chain,
    sprott,
    stlc_verdict,
)
from quadctrl.models import lorenz_hessian

pytestmark = pytest.mark.integration

N = 2000


class TestReachableClouds:
    """Empirical clouds against the analytic chain."""

    def test_sprott_cloud_is_full(self, sprott_mu1):
        """Sprott mu = 1, f = e1 fills R^3."""
        cloud = reachable_cloud(sprott_mu1, T=0.5, N=N, bound=1.0, segments=4, seed=0)
        assert cloud.empirical_rank == 3
        assert cloud.dropped == 0

    def test_r5_cloud_stays_in_s_k(self, r5):
        """The five-dimensional example reaches a plane; off-span coordinates are exactly 0."""
        cloud = reachable_cloud(r5, T=0.5, N=N, seed=0, s_k=s_chain(r5).s_k)
        assert cloud.empirical_rank == 2
        assert np.all(cloud.endpoints[:, [1, 2, 4]] == 0.0)

    def test_counterexample_third_coordinate_monotone(self, counterexample):
        """z' = y^2 keeps z >= 0 along every sample."""
        cloud = reachable_cloud(counterexample, T=0.5, N=N, seed=0)
        assert cloud.endpoints[:, 2].min() >= 0.0

    def test_analyzer_does_not_flag_examples(self, examples):
        """No bundled example is flagged by the simulation cross-check."""
        analyzer = ControllabilityAnalyzer(sim_samples=N, seed=11)
        for name in ("r5-nonaccessible", "sprott-counterexample-flow", "r3-stlc", "sprott-mu1"):
            report = analyzer.analyze(examples[name], simulate=True)
            assert not report.simulation.flagged, name
            assert report.simulation.empirical_rank == report.chain.degree_of_reachability


class TestRigidBodyInvariants:
    """Energy and angular momentum of the torque-free body."""

    def test_energy_drift(self):
        """Kinetic energy drifts by at most 1e-8 over T = 1."""
        xi = np.array([1.0, 2.0, 3.0])
        sys = rigid_body([1, 2, 3], [(1, 0, 0), (0, 1, 0)], torques=True)
        rng = np.random.default_rng(5)
        for _ in range(20):
            w0 = rng.uniform(-1, 1, size=3)
            trajectory = integrate(sys, w0, ControlSchedule(1.0, ((0.0, 0.0),)), dt=1e-3)
            energies = 0.5 * np.einsum("ij,j,ij->i", trajectory.states, xi, trajectory.states)
            assert np.max(np.abs(energies - energies[0])) <= 1e-8


class TestLorenzVerdicts:
    """Classic Lorenz parameters (10, 28, 8/3)."""

    PARAMS = (10, 28, Fraction(8, 3))

    def test_constants(self):
        """s = -2630/9 and d^2 = 1201."""
        constants = lorenz_constants(*self.PARAMS)
        assert constants.s == Fraction(-2630, 9)
        assert constants.d_squared == 1201

    def test_isotropic_directions(self):
        """v and w directions annihilate f^T H f."""
        constants = lorenz_constants(*self.PARAMS)
        H = np.array(lorenz_hessian(10.0, 28.0), dtype=float)
        for direction in (constants.v_plus, constants.v_minus, constants.w_plus, constants.w_minus):
            d = np.array(direction)
            assert d @ H @ d == pytest.approx(0.0, abs=1e-9)

    def test_reproduction(self):
        """(1,1,1) is STLC, e3 is not accessible."""
        assert stlc_verdict(lorenz(*self.PARAMS, [(1, 1, 1)])).tag is VerdictTag.STLC
        assert stlc_verdict(lorenz(*self.PARAMS, [(0, 0, 1)])).tag is VerdictTag.NOT_STLC
        assert s_chain(lorenz(*self.PARAMS, [(0, 0, 1)])).degree_of_reachability == 1

    def test_orthogonal_to_e3_is_never_stlc(self, suite_rng, nonzero_vector):
        """300 random f with f3 = 0 are all NotStlc."""
        for _ in range(300):
            f = nonzero_vector(suite_rng, 2) + [0]
            verdict = stlc_verdict(lorenz(*self.PARAMS, [f]))
            assert verdict.tag is VerdictTag.NOT_STLC, f


class TestSprottVerdicts:
    """Single-input Sprott reproduction."""

    @pytest.mark.parametrize(
        "f, tag",
        [
            ((1, 0, 0), VerdictTag.STLC),
            ((1, 1, 1), VerdictTag.NOT_STLC),
            ((1, -1, 0), VerdictTag.NOT_STLC),
        ],
    )
    def test_reproduction(self, f, tag):
        """Diagonal and complement directions are not STLC; e1 is."""
        for mu in (0, 1, Fraction(-3, 2)):
            assert stlc_verdict(sprott(mu, [f])).tag is tag

    def test_complement_is_accessible_but_not_stlc(self):
        """(1, -1, 0) is accessible and decided by the Sprott closed form."""
        sys = sprott(0, [(1, -1, 0)])
        verdict = stlc_verdict(sys)
        assert s_chain(sys).is_full
        assert verdict.rule is Rule.SPROTT_SINGLE_INPUT
