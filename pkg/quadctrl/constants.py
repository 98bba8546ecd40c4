"""
Constants and enumerations for quadctrl.
"""

from enum import Enum


class ArithmeticMode(str, Enum):
    """Arithmetic backends for every rank decision."""

    RATIONAL = "rational"  # exact Fraction arithmetic
    FLOAT = "float"  # binary64 with an explicit tolerance


class VerdictTag(str, Enum):
    """Outcome of an accessibility or STLC analysis."""

    STRONGLY_ACCESSIBLE = "StronglyAccessible"
    NOT_ACCESSIBLE = "NotAccessible"
    STLC = "Stlc"
    NOT_STLC = "NotStlc"
    INCONCLUSIVE = "Inconclusive"


class Rule(str, Enum):
    """
    Identifier of the result that decided a verdict.

    ``citation`` gives the human-readable statement carried into reports.
    """

    ACCESSIBILITY_THEOREM = "accessibility-theorem"
    ACCESSIBILITY_NECESSITY = "accessibility-necessity"
    LINEARIZATION = "linearization"
    SPROTT_SINGLE_INPUT = "sprott-single-input"
    LORENZ_SINGLE_INPUT = "lorenz-single-input"
    ZERO_LINEAR_PART = "zero-linear-part"
    HERMES_SUSSMANN = "hermes-sussmann"
    RANK_ONE_UNDERACTUATION = "rank-one-underactuation"
    MONOTONE_FUNCTIONAL = "monotone-functional"
    NONE = "none"

    @property
    def citation(self) -> str:
        return _CITATIONS[self]


_CITATIONS = {
    Rule.ACCESSIBILITY_THEOREM: (
        "Strong accessibility from the origin holds iff S_k = R^n; "
        "dim S_k is the degree of reachability"
    ),
    Rule.ACCESSIBILITY_NECESSITY: (
        "S_k = R^n is necessary for the accessibility property, hence for LARC and STLC"
    ),
    Rule.LINEARIZATION: (
        "Markus: a controllable linearization at an equilibrium implies STLC"
    ),
    Rule.SPROTT_SINGLE_INPUT: (
        "Sprott, single input: STLC iff f is neither on span{1} nor in span{1}^perp"
    ),
    Rule.LORENZ_SINGLE_INPUT: (
        "Lorenz, single input (s != 0): STLC iff f^T e3 != 0 and f^T H f != 0"
    ),
    Rule.ZERO_LINEAR_PART: (
        "Single-input systems with L = 0 are not STLC from the origin"
    ),
    Rule.HERMES_SUSSMANN: (
        "Hermes-Sussmann: [f1,[f0,f1]](0) outside S^1(f0,f1)(0) rules out STLC"
    ),
    Rule.RANK_ONE_UNDERACTUATION: (
        "k = 1 with S_0 not L-invariant or Phi(f_i) in S_0: STLC iff S_1 = R^n"
    ),
    Rule.MONOTONE_FUNCTIONAL: (
        "A linear functional that is monotone along every trajectory rules out STLC"
    ),
    Rule.NONE: "No implemented result decides this system",
}


class BracketKind(str, Enum):
    """Closed-form bracket families evaluated at the origin."""

    AD = "ad"  # ad_{f0}^l f_i
    MIXED2 = "mixed2"  # [f_j,[f0,f_i]]
    ORDER3 = "order3"  # [f_j, ad_{f0}^2 f_i]
    ORDER4 = "order4"  # [f_l,[f_j, ad_{f0}^2 f_i]]


class ExitCode(int, Enum):
    """CLI exit codes."""

    DECISIVE = 0
    INPUT_ERROR = 1
    INCONCLUSIVE = 2


# ---------------------------------------------------------------------------
# Numeric defaults
# ---------------------------------------------------------------------------

DEFAULT_ORACLE_DEPTH = 8
DEFAULT_BRACKET_CAP = 100_000
BLOW_UP_NORM = 1.0e6
CLOUD_REL_TOL = 1.0e-6
DEFAULT_SIM_HORIZON = 0.5
DEFAULT_SIM_SAMPLES = 2000
DEFAULT_SIM_BOUND = 1.0
DEFAULT_SIM_SEGMENTS = 4
DEFAULT_SIM_STEPS_PER_SEGMENT = 50
SCHEDULE_TOL = 1.0e-12
VERSION = "1.0.0"
REPORT_SCHEMA_VERSION = "1.0"
THREADS_ENV_VAR = "QUADCTRL_THREADS"
