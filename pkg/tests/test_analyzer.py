"""
Unit tests for the ControllabilityAnalyzer pipeline.
"""

import csv
import logging

import numpy as np
import pytest

from quadctrl import (
    ArithmeticMode,
    ControllabilityAnalyzer,
    ParameterError,
    ResourceCapError,
    Rule,
    SpecError,
    VerdictTag,
)
from quadctrl.models import spec_json
from quadctrl.sim import CloudStats


class TestInit:
    """Test analyzer configuration."""

    def test_defaults(self):
        """No mode override and no tolerance by default."""
        analyzer = ControllabilityAnalyzer()
        assert analyzer.mode is None
        assert analyzer.tol is None

    def test_mode_from_string(self):
        """Mode names are accepted."""
        assert ControllabilityAnalyzer(mode="float").mode is ArithmeticMode.FLOAT

    @pytest.mark.parametrize("kwargs", [{"oracle_depth": 0}, {"tol": -1e-9}])
    def test_invalid_parameters(self, kwargs):
        """Depth must be positive and tolerances nonnegative."""
        with pytest.raises(ParameterError):
            ControllabilityAnalyzer(**kwargs)


class TestPrepare:
    """Test input coercion and overrides."""

    def test_accepts_mapping_and_json(self, r5):
        """A system, its spec mapping and its JSON text give the same system."""
        analyzer = ControllabilityAnalyzer()
        from_dict = analyzer.prepare(r5.to_dict())
        from_json = analyzer.prepare(r5.to_json())
        assert from_dict.to_dict() == r5.to_dict()
        assert from_json.to_dict() == r5.to_dict()

    def test_force_float(self, r5):
        """Forcing FLOAT converts the coefficients to binary64."""
        sys = ControllabilityAnalyzer(mode=ArithmeticMode.FLOAT).prepare(r5)
        assert sys.mode is ArithmeticMode.FLOAT
        assert sys.L.dtype == np.float64

    def test_force_rational_is_exact(self):
        """Forcing RATIONAL on float data converts the floats exactly."""
        spec = {
            "n": 2,
            "L": [[0.0, 1.0], [0.0, 0.0]],
            "a": [0.5, 0.0],
            "b": [0.0, 0.25],
            "c": [0.0, 0.0],
            "controls": [[0.0, 1.0]],
        }
        sys = ControllabilityAnalyzer(mode="rational").prepare(spec)
        assert sys.mode is ArithmeticMode.RATIONAL
        assert sys.to_dict()["a"] == ["1/2", "0"]

    def test_tolerance_override(self, sprott_mu1):
        """An explicit tolerance is stored on the system."""
        sys = ControllabilityAnalyzer(mode="float", tol=1e-6).prepare(sprott_mu1)
        assert sys.tol == 1e-6

    def test_invalid_spec(self):
        """Invalid input raises SpecError and produces no report."""
        with pytest.raises(SpecError):
            ControllabilityAnalyzer().analyze({"n": 3})


class TestAnalyze:
    """Test the pipeline on the worked systems."""

    def test_r5(self, analyzer, r5):
        """NotAccessible with degree of reachability 2."""
        report = analyzer.analyze(r5)
        assert report.accessibility.tag is VerdictTag.NOT_ACCESSIBLE
        assert report.stlc.tag is VerdictTag.NOT_STLC
        assert report.chain.dims == [1, 2, 2, 2, 2]
        assert report.chain.degree_of_reachability == 2
        assert report.is_decisive

    def test_float_mode_gives_the_same_verdicts(self, examples):
        """The worked systems have the same verdicts in both modes."""
        exact = ControllabilityAnalyzer()
        approx = ControllabilityAnalyzer(mode=ArithmeticMode.FLOAT)
        for name in ("r5-nonaccessible", "sprott-counterexample-flow", "r3-stlc", "sprott-mu1"):
            sys = examples[name]
            a, b = exact.analyze(sys), approx.analyze(sys)
            assert a.chain.dims == b.chain.dims, name
            assert a.accessibility.tag is b.accessibility.tag, name
            assert (a.stlc.tag, a.stlc.rule) == (b.stlc.tag, b.stlc.rule), name

    def test_json_spec_input(self, analyzer, counterexample):
        """A spec JSON string is analyzed directly."""
        report = analyzer.analyze(spec_json(counterexample))
        assert report.stlc.rule is Rule.MONOTONE_FUNCTIONAL

    def test_inconclusive_report(self, analyzer):
        """An undecided system still yields a full report."""
        spec = {
            "n": 3,
            "L": [[0, 0, 0]] * 3,
            "a": [0, 0, 0],
            "b": [0, 0, 1],
            "c": [0, 0, 1],
            "controls": [[1, 0, 0], [0, 1, 0]],
        }
        report = analyzer.analyze(spec)
        assert report.stlc.tag is VerdictTag.INCONCLUSIVE
        assert not report.is_decisive
        assert report.accessibility.tag is VerdictTag.STRONGLY_ACCESSIBLE


class TestOracleComparison:
    """Test the bracket-oracle cross-check."""

    @pytest.mark.parametrize(
        "name", ["r5-nonaccessible", "sprott-counterexample-flow", "r3-stlc", "sprott-mu1"]
    )
    def test_agrees_on_examples(self, analyzer, examples, name):
        """The oracle span equals S_k on the worked systems."""
        report = analyzer.analyze(examples[name], oracle=True)
        assert report.oracle.agrees
        assert report.oracle.rank == report.chain.degree_of_reachability

    def test_shallow_oracle_disagrees(self, counterexample, caplog):
        """Depth 1 only sees S_0; the disagreement is logged."""
        analyzer = ControllabilityAnalyzer(oracle_depth=1)
        with caplog.at_level(logging.WARNING, logger="quadctrl.analyzer"):
            report = analyzer.analyze(counterexample, oracle=True)
        assert report.oracle.agrees is False
        assert report.oracle.rank == 2
        assert "differs from S_k" in caplog.text
        # the verdicts are untouched
        assert report.stlc.rule is Rule.MONOTONE_FUNCTIONAL

    def test_bracket_cap(self, r5):
        """A tiny cap aborts the oracle."""
        with pytest.raises(ResourceCapError):
            ControllabilityAnalyzer(bracket_cap=1).analyze(r5, oracle=True)


class TestSimulation:
    """Test the simulation cross-check."""

    def test_cloud_matches_chain(self, analyzer, r5, sprott_mu1):
        """Empirical ranks equal dim S_k and nothing is flagged."""
        low = analyzer.analyze(r5, simulate=True).simulation
        full = analyzer.analyze(sprott_mu1, simulate=True).simulation
        assert (low.empirical_rank, low.flagged) == (2, False)
        assert (full.empirical_rank, full.flagged) == (3, False)
        assert low.samples == 200 and low.seed == 3

    def test_csv_implies_simulation(self, analyzer, sprott_mu1, tmp_path):
        """Passing a CSV path writes the endpoints and fills the summary."""
        path = tmp_path / "endpoints.csv"
        report = analyzer.analyze(sprott_mu1, endpoints_csv=path)
        assert report.simulation is not None
        with path.open() as handle:
            rows = list(csv.reader(handle))
        assert len(rows) == 1 + report.simulation.samples - report.simulation.dropped

    def test_rank_above_chain_is_flagged(self, analyzer, r5, caplog, monkeypatch):
        """A cloud wider than S_k is flagged and logged but verdicts stay."""
        rng = np.random.default_rng(0)
        wide = CloudStats(
            endpoints=rng.normal(size=(20, 5)),
            dropped=0,
            samples=20,
            horizon=0.5,
            seed=0,
            empirical_rank=5,
            singular_values=np.ones(5),
            orthant_coverage=0.5,
        )
        monkeypatch.setattr(analyzer, "cloud", lambda sys, chain=None: wide)
        with caplog.at_level(logging.WARNING, logger="quadctrl.analyzer"):
            report = analyzer.analyze(r5, simulate=True)
        assert report.simulation.flagged
        assert "exceeds the degree of reachability 2" in report.simulation.warning
        assert "exceeds" in caplog.text
        assert report.accessibility.tag is VerdictTag.NOT_ACCESSIBLE


class TestForest:
    """Test the forest dump."""

    def test_forest_is_inside_s_k(self, r5):
        """Every recorded bracket of r5 lies in span{e1, e4}."""
        entries = ControllabilityAnalyzer(oracle_depth=4).forest(r5)
        assert entries
        assert all(e.in_s_k for e in entries)
        assert max(e.length for e in entries) <= 4
