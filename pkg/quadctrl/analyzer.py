"""
Single entry point for the analysis pipeline.

The ControllabilityAnalyzer runs, in order:

S-chain
    ``S_0, ..., S_k`` in the configured arithmetic mode.
Accessibility
    StronglyAccessible iff ``S_k = R^n``.
STLC cascade
    The rules of :mod:`quadctrl.stlc`, first decisive rule wins.
Bracket oracle (optional)
    Exact bracket enumeration compared against ``S_k`` of the
    rationalized system.
Simulation (optional)
    A reachable cloud whose empirical rank is checked against ``dim S_k``.
    Disagreement is logged and flagged; it never changes a verdict.
"""

import logging
from pathlib import Path
from typing import Any, List, Mapping, Optional, Union

from quadctrl.chain import ChainResult, accessibility_verdict, s_chain
from quadctrl.constants import (
    DEFAULT_BRACKET_CAP,
    DEFAULT_ORACLE_DEPTH,
    DEFAULT_SIM_BOUND,
    DEFAULT_SIM_HORIZON,
    DEFAULT_SIM_SAMPLES,
    DEFAULT_SIM_SEGMENTS,
    ArithmeticMode,
)
from quadctrl.exceptions import ParameterError
from quadctrl.lie import ForestEntry, bracket_forest, c0_oracle
from quadctrl.linalg import subspace_equal
from quadctrl.report import AnalysisReport, ChainSummary, OracleComparison, SimulationSummary
from quadctrl.sim import CloudStats, reachable_cloud, write_endpoints_csv
from quadctrl.stlc import stlc_verdict
from quadctrl.system import QuadraticSystem

logger = logging.getLogger(__name__)

SystemInput = Union[QuadraticSystem, Mapping[str, Any], str]


class ControllabilityAnalyzer:
    """
    Accessibility and STLC analysis of quadratic affine control systems.

    Construct once and analyze any number of systems.

    Example::

        analyzer = ControllabilityAnalyzer(seed=7)
        report = analyzer.analyze(sprott(1, [(1, 0, 0)]), simulate=True)
        print(report.stlc.tag)                     # VerdictTag.STLC
        print(report.simulation.empirical_rank)    # 3
    """

    def __init__(
        self,
        mode: Optional[ArithmeticMode] = None,
        tol: Optional[float] = None,
        oracle_depth: int = DEFAULT_ORACLE_DEPTH,
        bracket_cap: int = DEFAULT_BRACKET_CAP,
        sim_horizon: float = DEFAULT_SIM_HORIZON,
        sim_samples: int = DEFAULT_SIM_SAMPLES,
        sim_bound: float = DEFAULT_SIM_BOUND,
        sim_segments: int = DEFAULT_SIM_SEGMENTS,
        sim_dt: Optional[float] = None,
        seed: int = 0,
        workers: Optional[int] = None,
    ):
        """
        Initialise the analyzer.

        Args:
            mode: Force an arithmetic mode. ``None`` keeps the system's own
                  mode (RATIONAL for all-rational specs, FLOAT otherwise).
            tol: Float-mode tolerance override (default: derived from the data).
            oracle_depth: Longest bracket word enumerated by the oracle.
            bracket_cap: Hard limit on enumerated brackets.
            sim_horizon: Horizon T of the reachable cloud.
            sim_samples: Number of sampled controls.
            sim_bound: Radius of the control box.
            sim_segments: Constant pieces per sampled control.
            sim_dt: Integration step (default: 50 steps per segment).
            seed: Seed of the per-sample generators.
            workers: Threads for bracket enumeration and sampling.
        """
        if oracle_depth < 1:
            raise ParameterError("oracle_depth must be at least 1", field="oracle_depth")
        if tol is not None and tol < 0:
            raise ParameterError("tol must be nonnegative", field="tol")
        self.mode = ArithmeticMode(mode) if mode is not None else None
        self.tol = tol
        self.oracle_depth = oracle_depth
        self.bracket_cap = bracket_cap
        self.sim_horizon = sim_horizon
        self.sim_samples = sim_samples
        self.sim_bound = sim_bound
        self.sim_segments = sim_segments
        self.sim_dt = sim_dt
        self.seed = seed
        self.workers = workers

    def prepare(self, system: SystemInput) -> QuadraticSystem:
        """
        Validate ``system`` and apply the mode and tolerance overrides.

        Accepts a :class:`QuadraticSystem`, a spec mapping or spec JSON text.
        Forcing RATIONAL mode on float data converts the floats exactly.

        Raises:
            SpecError: the spec is invalid.
        """
        if isinstance(system, str):
            system = QuadraticSystem.from_json(system)
        elif not isinstance(system, QuadraticSystem):
            system = QuadraticSystem.from_dict(system)

        if self.mode is ArithmeticMode.RATIONAL and system.mode is ArithmeticMode.FLOAT:
            system = system.rationalized()
        if self.mode is None and self.tol is None:
            return system
        data = system.to_dict()
        if self.mode is not None:
            data["mode"] = self.mode.value
        if self.tol is not None:
            data["tol"] = self.tol
        return QuadraticSystem.from_dict(data)

    def analyze(
        self,
        system: SystemInput,
        oracle: bool = False,
        simulate: bool = False,
        endpoints_csv: Optional[Union[str, Path]] = None,
    ) -> AnalysisReport:
        """
        Run the pipeline on one system.

        Args:
            system: System, spec mapping or spec JSON text.
            oracle: Add the bracket-enumeration comparison.
            simulate: Add reachable-cloud statistics.
            endpoints_csv: Also write the cloud endpoints to this CSV file
                (implies ``simulate``).

        Raises:
            SpecError: invalid input; no verdict is produced.
            ResourceCapError: the oracle exceeded ``bracket_cap``.
            NonFiniteError: every simulated sample blew up.
        """
        sys = self.prepare(system)
        chain = s_chain(sys)
        accessibility = accessibility_verdict(sys, chain)
        stlc = stlc_verdict(sys, chain)
        logger.debug("%r: %s / %s", sys, accessibility, stlc)

        report = AnalysisReport(
            system=sys.to_dict(),
            chain=ChainSummary.from_chain(chain),
            accessibility=accessibility,
            stlc=stlc,
        )
        if oracle:
            report.oracle = self.compare_oracle(sys, chain)
        if simulate or endpoints_csv is not None:
            report.simulation = self.simulate(sys, chain, endpoints_csv)
        return report

    def compare_oracle(
        self, sys: QuadraticSystem, chain: Optional[ChainResult] = None
    ) -> OracleComparison:
        """Enumerate brackets exactly and compare their span with ``S_k``."""
        exact = sys.rationalized()
        exact_chain = s_chain(exact)
        result = c0_oracle(exact, self.oracle_depth, self.bracket_cap, workers=self.workers)
        agrees = subspace_equal(result.span, exact_chain.s_k)
        if chain is not None and chain.degree_of_reachability != exact_chain.degree_of_reachability:
            logger.warning(
                "dim S_k is %d in %s mode but %d in exact arithmetic; check the tolerance",
                chain.degree_of_reachability,
                sys.mode.value,
                exact_chain.degree_of_reachability,
            )
        if not agrees:
            logger.warning(
                "Bracket span (rank %d, depth %d) differs from S_k (rank %d)",
                result.span.rank,
                self.oracle_depth,
                exact_chain.degree_of_reachability,
            )
        return OracleComparison.from_result(result, self.oracle_depth, agrees)

    def cloud(self, sys: QuadraticSystem, chain: Optional[ChainResult] = None) -> CloudStats:
        """Sample the reachable cloud with the configured budget."""
        return reachable_cloud(
            sys,
            T=self.sim_horizon,
            N=self.sim_samples,
            bound=self.sim_bound,
            segments=self.sim_segments,
            seed=self.seed,
            dt=self.sim_dt,
            workers=self.workers,
            s_k=chain.s_k if chain is not None else None,
        )

    def simulate(
        self,
        sys: QuadraticSystem,
        chain: Optional[ChainResult] = None,
        endpoints_csv: Optional[Union[str, Path]] = None,
    ) -> SimulationSummary:
        """Cloud statistics, flagged when the empirical rank exceeds ``dim S_k``."""
        chain = chain or s_chain(sys)
        cloud = self.cloud(sys, chain)
        if endpoints_csv is not None:
            write_endpoints_csv(cloud, endpoints_csv)
        flagged = cloud.empirical_rank > chain.degree_of_reachability
        warning = None
        if flagged:
            warning = (
                f"Empirical rank {cloud.empirical_rank} exceeds the degree of "
                f"reachability {chain.degree_of_reachability}"
            )
            logger.warning("%r: %s", sys, warning)
        return SimulationSummary.from_cloud(cloud, flagged=flagged, warning=warning)

    def forest(self, system: SystemInput) -> List[ForestEntry]:
        """Every enumerated bracket with its value at 0 and membership in ``S_k``."""
        exact = self.prepare(system).rationalized()
        s_k = s_chain(exact).s_k
        return bracket_forest(exact, self.oracle_depth, s_k=s_k, bracket_cap=self.bracket_cap)
