"""
quadctrl
========

Accessibility and small-time local controllability (STLC) analysis of
quadratic affine control systems

    x' = L x + Phi(x) + sum_i u_i f_i,
    Phi(x) = a * P2x^2 + b * P3x^2 + c * P2x * P3x,

where ``P2``/``P3`` are cyclic coordinate shifts and products are
componentwise. Every rank decision is exact by default (rationals), with a
float mode for real-valued data.

Basic Usage::

    from quadctrl import ControllabilityAnalyzer, paper_examples, sprott

    analyzer = ControllabilityAnalyzer()

    # ── Analysis (chain, accessibility, STLC cascade) ────────────────────────
    report = analyzer.analyze(sprott(mu=1, controls=[(1, 0, 0)]))
    print(report.chain.dims)              # [1, 3, 3]
    print(report.accessibility.tag)       # VerdictTag.STRONGLY_ACCESSIBLE
    print(report.stlc)                    # Stlc (linearization)

    # ── Cross-checks (bracket oracle, reachable cloud) ───────────────────────
    report = analyzer.analyze(paper_examples()["r5-nonaccessible"], oracle=True, simulate=True)
    print(report.oracle.agrees, report.simulation.empirical_rank)

For the command-line front end see ``quadctrl --help``.
"""

from quadctrl.analyzer import ControllabilityAnalyzer
from quadctrl.chain import (
    ChainResult,
    accessibility_verdict,
    controllability_matrix,
    kalman_rank,
    s_chain,
)
from quadctrl.constants import (
    VERSION,
    ArithmeticMode,
    BracketKind,
    ExitCode,
    Rule,
    VerdictTag,
)
from quadctrl.exceptions import (
    ArithmeticModeError,
    BadRankError,
    ControlIndexError,
    DependentControlsError,
    DimensionError,
    InapplicableModelError,
    NonFiniteError,
    ParameterError,
    QuadCtrlError,
    ReportSchemaError,
    ResourceCapError,
    ShapeMismatchError,
    SpecError,
    WrongRankError,
)
from quadctrl.lie import (
    BracketWord,
    ForestEntry,
    OracleResult,
    PolyVectorField,
    bracket_forest,
    c0_oracle,
    c0_span_at_origin,
    closed_form_bracket,
    engine_bracket,
    lie_bracket,
)
from quadctrl.linalg import (
    Subspace,
    determinant,
    hodge_complement,
    is_semidefinite,
    krylov,
    null_space,
    rank,
    span_basis,
    subspace_contains,
    subspace_equal,
    subspace_sum,
)
from quadctrl.models import (
    LorenzConstants,
    ModelMatch,
    crouch_condition,
    hypergraph,
    hypergraph_accessibility_polynomial,
    krylov_determinant,
    lorenz,
    lorenz_constants,
    lorenz_determinant_gap,
    lorenz_single_input_stlc,
    match_model,
    paper_examples,
    rigid_body,
    sprott,
    sprott_determinant_gap,
    sprott_single_input_stlc,
    sprott_subclass_accessible,
)
from quadctrl.report import (
    AnalysisReport,
    ChainSummary,
    OracleComparison,
    SimulationSummary,
    render_text,
    validate_report,
)
from quadctrl.sim import (
    CloudStats,
    ControlSchedule,
    Trajectory,
    empirical_rank,
    integrate,
    reachable_cloud,
    write_endpoints_csv,
)
from quadctrl.stlc import (
    check_certificate,
    hermes_sussmann_obstruction,
    linearization_stlc,
    monotone_certificate,
    sigma1_stlc,
    stlc_verdict,
    zero_L_single_input,
)
from quadctrl.system import QuadraticSystem, phi_by_components, validate_system
from quadctrl.verdicts import Verdict

__version__ = VERSION

__all__ = [
    # ── Analyzer ─────────────────────────────────────────────────────────────
    "ControllabilityAnalyzer",
    # ── Exceptions ───────────────────────────────────────────────────────────
    "QuadCtrlError",
    "SpecError",
    "ShapeMismatchError",
    "DependentControlsError",
    "BadRankError",
    "ParameterError",
    "ArithmeticModeError",
    "DimensionError",
    "WrongRankError",
    "ControlIndexError",
    "ResourceCapError",
    "InapplicableModelError",
    "NonFiniteError",
    "ReportSchemaError",
    # ── Systems and linear algebra ───────────────────────────────────────────
    "QuadraticSystem",
    "validate_system",
    "phi_by_components",
    "Subspace",
    "span_basis",
    "subspace_contains",
    "subspace_sum",
    "subspace_equal",
    "rank",
    "determinant",
    "null_space",
    "krylov",
    "is_semidefinite",
    "hodge_complement",
    # ── Accessibility ────────────────────────────────────────────────────────
    "ChainResult",
    "s_chain",
    "accessibility_verdict",
    "controllability_matrix",
    "kalman_rank",
    # ── Lie brackets ─────────────────────────────────────────────────────────
    "PolyVectorField",
    "BracketWord",
    "ForestEntry",
    "OracleResult",
    "lie_bracket",
    "c0_oracle",
    "c0_span_at_origin",
    "bracket_forest",
    "closed_form_bracket",
    "engine_bracket",
    # ── STLC ─────────────────────────────────────────────────────────────────
    "Verdict",
    "stlc_verdict",
    "linearization_stlc",
    "sigma1_stlc",
    "hermes_sussmann_obstruction",
    "zero_L_single_input",
    "monotone_certificate",
    "check_certificate",
    # ── Models ───────────────────────────────────────────────────────────────
    "sprott",
    "lorenz",
    "rigid_body",
    "hypergraph",
    "LorenzConstants",
    "lorenz_constants",
    "krylov_determinant",
    "sprott_single_input_stlc",
    "lorenz_single_input_stlc",
    "crouch_condition",
    "sprott_subclass_accessible",
    "hypergraph_accessibility_polynomial",
    "ModelMatch",
    "match_model",
    "sprott_determinant_gap",
    "lorenz_determinant_gap",
    "paper_examples",
    # ── Simulation ───────────────────────────────────────────────────────────
    "ControlSchedule",
    "Trajectory",
    "CloudStats",
    "integrate",
    "reachable_cloud",
    "empirical_rank",
    "write_endpoints_csv",
    # ── Reports ──────────────────────────────────────────────────────────────
    "AnalysisReport",
    "ChainSummary",
    "OracleComparison",
    "SimulationSummary",
    "validate_report",
    "render_text",
    # ── Constants ────────────────────────────────────────────────────────────
    "ArithmeticMode",
    "VerdictTag",
    "Rule",
    "BracketKind",
    "ExitCode",
]
