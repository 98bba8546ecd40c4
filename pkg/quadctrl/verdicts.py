"""
Verdict record shared by the chain, stlc and models modules.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List

from quadctrl.constants import Rule, VerdictTag


@dataclass(frozen=True)
class Verdict:
    """
    Outcome of one analysis rule.

    The certificate is a JSON-ready mapping (rationals already rendered as
    ``"p/q"`` strings) so it can be stored in a report as is and re-checked
    later by :func:`quadctrl.stlc.check_certificate`.

    Attributes:
        tag: Verdict family.
        rule: Result that decided the verdict (``Rule.NONE`` if inconclusive).
        certificate: Rule-specific evidence.
        attempted: Rules evaluated before the decision, in order.
    """

    tag: VerdictTag
    rule: Rule
    certificate: Dict[str, Any] = field(default_factory=dict)
    attempted: List[Rule] = field(default_factory=list)

    @property
    def citation(self) -> str:
        return self.rule.citation

    @property
    def is_decisive(self) -> bool:
        return self.tag is not VerdictTag.INCONCLUSIVE

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "tag": self.tag.value,
            "rule": self.rule.value,
            "citation": self.citation,
            "certificate": dict(self.certificate),
            "attempted": [r.value for r in self.attempted],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Verdict":
        """Create a Verdict from dictionary."""
        return cls(
            tag=VerdictTag(data["tag"]),
            rule=Rule(data["rule"]),
            certificate=dict(data.get("certificate") or {}),
            attempted=[Rule(r) for r in data.get("attempted", [])],
        )

    def __str__(self) -> str:
        return f"{self.tag.value} ({self.rule.value})"
