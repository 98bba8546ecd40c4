"""
Analysis report records.

An :class:`AnalysisReport` is what the analyzer returns and what the CLI
prints. It echoes the normalized system spec, so parsing the ``system``
block of an emitted report and analyzing it again reproduces the same
verdicts. Every record converts with ``to_dict()`` / ``from_dict()``;
:func:`validate_report` checks a payload against the published schema.

Schema (version ``"1.0"``)::

    {
      "schema_version": "1.0",
      "tool_version": "1.0.0",
      "system": {...spec JSON...},
      "chain": {"dims": [...], "stationary_at": int,
                "degree_of_reachability": int, "bases": [[...], ...]},
      "accessibility": {...verdict...},
      "stlc": {...verdict...},
      "oracle": null | {...},
      "simulation": null | {...},
      "citations": {"<rule>": "<statement>", ...}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from quadctrl.chain import ChainResult
from quadctrl.constants import REPORT_SCHEMA_VERSION, VERSION, Rule, VerdictTag
from quadctrl.exceptions import QuadCtrlError, ReportSchemaError
from quadctrl.lie import OracleResult
from quadctrl.sim import CloudStats
from quadctrl.system import QuadraticSystem
from quadctrl.verdicts import Verdict


# ---------------------------------------------------------------------------
# Sub-records
# ---------------------------------------------------------------------------


@dataclass
class ChainSummary:
    """Dimensions and bases of ``S_0, ..., S_k``."""

    dims: List[int]
    stationary_at: int
    degree_of_reachability: int
    bases: List[List[List[Any]]] = field(default_factory=list)

    @classmethod
    def from_chain(cls, chain: ChainResult) -> "ChainSummary":
        return cls.from_dict(chain.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ChainSummary":
        return cls(
            dims=[int(d) for d in data["dims"]],
            stationary_at=int(data["stationary_at"]),
            degree_of_reachability=int(data["degree_of_reachability"]),
            bases=[list(b) for b in data.get("bases", [])],
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dims": list(self.dims),
            "stationary_at": self.stationary_at,
            "degree_of_reachability": self.degree_of_reachability,
            "bases": [list(b) for b in self.bases],
        }


@dataclass
class OracleComparison:
    """
    Bracket-enumeration span compared against ``S_k``.

    ``agrees`` is True when both subspaces are equal.
    """

    depth: int
    rank: int
    agrees: bool
    stop_reason: str
    lengths_explored: int = 0
    brackets_enumerated: int = 0
    basis: List[List[Any]] = field(default_factory=list)

    @classmethod
    def from_result(cls, result: OracleResult, depth: int, agrees: bool) -> "OracleComparison":
        data = result.to_dict()
        return cls(
            depth=depth,
            rank=data["rank"],
            agrees=agrees,
            stop_reason=data["stop_reason"],
            lengths_explored=data["lengths_explored"],
            brackets_enumerated=data["brackets_enumerated"],
            basis=data["basis"],
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "OracleComparison":
        return cls(
            depth=int(data["depth"]),
            rank=int(data["rank"]),
            agrees=bool(data["agrees"]),
            stop_reason=str(data["stop_reason"]),
            lengths_explored=int(data.get("lengths_explored", 0)),
            brackets_enumerated=int(data.get("brackets_enumerated", 0)),
            basis=[list(v) for v in data.get("basis", [])],
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "depth": self.depth,
            "rank": self.rank,
            "agrees": self.agrees,
            "stop_reason": self.stop_reason,
            "lengths_explored": self.lengths_explored,
            "brackets_enumerated": self.brackets_enumerated,
            "basis": [list(v) for v in self.basis],
        }


@dataclass
class SimulationSummary:
    """
    Reachable-cloud statistics.

    ``flagged`` is set when the cloud disagrees with the analytic results:
    its empirical rank exceeds ``dim S_k``. The simulator never changes a
    verdict.
    """

    samples: int
    dropped: int
    horizon: float
    seed: int
    empirical_rank: int
    singular_values: List[float]
    orthant_coverage: float
    coordinate_min: List[float] = field(default_factory=list)
    coordinate_max: List[float] = field(default_factory=list)
    flagged: bool = False
    warning: Optional[str] = None

    @classmethod
    def from_cloud(
        cls, cloud: CloudStats, flagged: bool = False, warning: Optional[str] = None
    ) -> "SimulationSummary":
        data = cloud.to_dict()
        data.update(flagged=flagged, warning=warning)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimulationSummary":
        return cls(
            samples=int(data["samples"]),
            dropped=int(data["dropped"]),
            horizon=float(data["horizon"]),
            seed=int(data["seed"]),
            empirical_rank=int(data["empirical_rank"]),
            singular_values=[float(s) for s in data.get("singular_values", [])],
            orthant_coverage=float(data.get("orthant_coverage", 0.0)),
            coordinate_min=[float(x) for x in data.get("coordinate_min", [])],
            coordinate_max=[float(x) for x in data.get("coordinate_max", [])],
            flagged=bool(data.get("flagged", False)),
            warning=data.get("warning"),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "samples": self.samples,
            "dropped": self.dropped,
            "horizon": self.horizon,
            "seed": self.seed,
            "empirical_rank": self.empirical_rank,
            "singular_values": list(self.singular_values),
            "orthant_coverage": self.orthant_coverage,
            "coordinate_min": list(self.coordinate_min),
            "coordinate_max": list(self.coordinate_max),
            "flagged": self.flagged,
            "warning": self.warning,
        }


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass
class AnalysisReport:
    """
    Full result of analyzing one system.

    Attributes:
        system: Normalized spec JSON of the analyzed system.
        chain: Chain dimensions and bases.
        accessibility: StronglyAccessible / NotAccessible verdict.
        stlc: Verdict of the STLC cascade.
        oracle: Bracket-enumeration comparison, when requested.
        simulation: Reachable-cloud statistics, when requested.
        tool_version: quadctrl version that produced the report.
        schema_version: Report schema version.
    """

    system: Dict[str, Any]
    chain: ChainSummary
    accessibility: Verdict
    stlc: Verdict
    oracle: Optional[OracleComparison] = None
    simulation: Optional[SimulationSummary] = None
    tool_version: str = VERSION
    schema_version: str = REPORT_SCHEMA_VERSION

    @property
    def citations(self) -> Dict[str, str]:
        """Statement of every rule that appears in the report."""
        rules = [self.accessibility.rule, self.stlc.rule, *self.stlc.attempted]
        return {rule.value: rule.citation for rule in dict.fromkeys(rules)}

    @property
    def is_decisive(self) -> bool:
        return self.stlc.is_decisive

    def to_system(self) -> QuadraticSystem:
        """Rebuild the analyzed system from the echoed spec."""
        return QuadraticSystem.from_dict(self.system)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "system": dict(self.system),
            "chain": self.chain.to_dict(),
            "accessibility": self.accessibility.to_dict(),
            "stlc": self.stlc.to_dict(),
            "oracle": self.oracle.to_dict() if self.oracle else None,
            "simulation": self.simulation.to_dict() if self.simulation else None,
            "citations": self.citations,
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AnalysisReport":
        """Create a report from a payload; see :func:`validate_report`."""
        return cls(
            system=dict(data["system"]),
            chain=ChainSummary.from_dict(data["chain"]),
            accessibility=Verdict.from_dict(data["accessibility"]),
            stlc=Verdict.from_dict(data["stlc"]),
            oracle=OracleComparison.from_dict(data["oracle"]) if data.get("oracle") else None,
            simulation=(
                SimulationSummary.from_dict(data["simulation"])
                if data.get("simulation")
                else None
            ),
            tool_version=str(data.get("tool_version", VERSION)),
            schema_version=str(data["schema_version"]),
        )


_REQUIRED_KEYS = ("schema_version", "system", "chain", "accessibility", "stlc")
_ACCESSIBILITY_TAGS = {VerdictTag.STRONGLY_ACCESSIBLE, VerdictTag.NOT_ACCESSIBLE}


def validate_report(payload: Any) -> AnalysisReport:
    """
    Check a report payload against the published schema.

    Accepts a mapping or a JSON string.

    Raises:
        ReportSchemaError: wrong schema version, missing or malformed
            sections, unknown verdict tags or rules, or an unusable
            ``system`` echo.
    """
    if isinstance(payload, str):
        try:
            payload = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise ReportSchemaError(f"Report is not valid JSON: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ReportSchemaError("A report must be a JSON object")

    missing = [key for key in _REQUIRED_KEYS if key not in payload]
    if missing:
        raise ReportSchemaError(f"Missing report sections: {', '.join(missing)}")
    if payload["schema_version"] != REPORT_SCHEMA_VERSION:
        raise ReportSchemaError(
            f"Unsupported schema version {payload['schema_version']!r} "
            f"(expected {REPORT_SCHEMA_VERSION!r})"
        )

    try:
        report = AnalysisReport.from_dict(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise ReportSchemaError(f"Malformed report: {exc}") from exc

    if report.accessibility.tag not in _ACCESSIBILITY_TAGS:
        raise ReportSchemaError(
            f"Accessibility verdict has tag {report.accessibility.tag.value!r}"
        )
    if report.stlc.tag in _ACCESSIBILITY_TAGS:
        raise ReportSchemaError(f"STLC verdict has tag {report.stlc.tag.value!r}")
    if (report.stlc.tag is VerdictTag.INCONCLUSIVE) != (report.stlc.rule is Rule.NONE):
        raise ReportSchemaError("Only Inconclusive verdicts may carry rule 'none'")

    try:
        system = report.to_system()
    except QuadCtrlError as exc:
        raise ReportSchemaError(f"Report system echo is not a valid spec: {exc}") from exc
    if len(report.chain.dims) != system.k + 1:
        raise ReportSchemaError(
            f"Chain has {len(report.chain.dims)} entries, expected k + 1 = {system.k + 1}"
        )
    return report


def render_text(report: AnalysisReport) -> str:
    """Human-readable rendering; verdicts are the same as in the JSON form."""
    system = report.system
    title = system.get("name") or "system"
    lines = [
        f"quadctrl {report.tool_version} - {title} (n={system['n']}, k={system['k']}, "
        f"mode={system.get('mode', 'rational')})",
        "",
        f"S-chain dims:            {report.chain.dims}",
        f"Degree of reachability:  {report.chain.degree_of_reachability}",
        f"Stationary at:           S_{report.chain.stationary_at}",
        f"Accessibility:           {report.accessibility}",
        f"STLC:                    {report.stlc}",
    ]
    if report.stlc.certificate:
        lines.append(f"  certificate: {json.dumps(report.stlc.certificate, sort_keys=True)}")
    if report.stlc.attempted:
        lines.append(f"  rules tried: {', '.join(r.value for r in report.stlc.attempted)}")

    if report.oracle is not None:
        status = "agrees" if report.oracle.agrees else "DISAGREES"
        lines.append(
            f"Bracket oracle:          rank {report.oracle.rank} at depth "
            f"{report.oracle.depth} ({report.oracle.stop_reason}), {status} with S_k"
        )
    if report.simulation is not None:
        sim = report.simulation
        lines.append(
            f"Simulation:              empirical rank {sim.empirical_rank} from "
            f"{sim.samples - sim.dropped}/{sim.samples} samples (T={sim.horizon:g}, "
            f"seed={sim.seed})"
        )
        if sim.flagged:
            lines.append(f"  WARNING: {sim.warning}")

    lines.append("")
    lines.append("Citations:")
    for rule, statement in report.citations.items():
        lines.append(f"  [{rule}] {statement}")
    return "\n".join(lines)
