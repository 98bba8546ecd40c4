"""
Small-time local controllability (STLC) from the origin.

:func:`stlc_verdict` runs the rules below in a fixed order and returns at the
first decisive one:

1. accessibility: ``S_k != R^n`` rules out STLC
2. controllable linearization (Kalman rank of ``(L, F)``) gives STLC
3. closed forms for recognized single-input Sprott and Lorenz systems
4. single input with ``L = 0`` is never STLC
5. Hermes-Sussmann obstruction for single inputs (at ``u = 0``)
6. the rank-one underactuation criterion (``k = 1``)
7. a monotone linear functional rules out STLC
8. otherwise Inconclusive, listing the rules attempted

:func:`check_certificate` re-checks any emitted verdict with code paths of
its own.
"""

import itertools
import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import sympy

from quadctrl.chain import ChainResult, accessibility_verdict, kalman_rank, s_chain
from quadctrl.constants import ArithmeticMode, BracketKind, Rule, VerdictTag
from quadctrl.exceptions import InapplicableModelError, WrongRankError
from quadctrl.lie import closed_form_bracket
from quadctrl.linalg import (
    Subspace,
    Vector,
    as_matrix,
    determinant,
    is_semidefinite,
    krylov,
    matrix_to_json,
    null_space,
    scalar_from_json,
    span_basis,
    vector_to_json,
)
from quadctrl.models import (
    SPROTT_HESSIAN,
    lorenz_constants,
    lorenz_hessian,
    lorenz_single_input_stlc,
    match_model,
    sprott_single_input_stlc,
)
from quadctrl.system import QuadraticSystem
from quadctrl.verdicts import Verdict

logger = logging.getLogger(__name__)

CASCADE_ORDER = (
    Rule.ACCESSIBILITY_NECESSITY,
    Rule.LINEARIZATION,
    Rule.SPROTT_SINGLE_INPUT,
    Rule.LORENZ_SINGLE_INPUT,
    Rule.ZERO_LINEAR_PART,
    Rule.HERMES_SUSSMANN,
    Rule.RANK_ONE_UNDERACTUATION,
    Rule.MONOTONE_FUNCTIONAL,
)

# (alpha, beta) directions tried for w = alpha n_i + beta n_j; w and -w are
# covered together since either semidefinite sign is accepted.
MONOTONE_RATIOS = ((1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1))


def _span(sys: QuadraticSystem, vectors: Sequence[Any]) -> Subspace:
    return span_basis(list(vectors), sys.mode, sys.tol, ambient_dim=sys.n)


def linearization_stlc(sys: QuadraticSystem) -> bool:
    """True iff the linearization ``(L, F)`` at the origin is controllable."""
    return kalman_rank(sys.L, sys.control_matrix, sys.mode, sys.tol)


def sigma1_stlc(sys: QuadraticSystem, chain: Optional[ChainResult] = None) -> Verdict:
    """
    Rank-one underactuation rule (``k = 1``).

    * ``S_1 != R^n``: NotStlc (accessibility is necessary).
    * ``S_1 = R^n`` and either ``S_0`` is not L-invariant or every
      ``Phi(f_i)`` lies in ``S_0``: Stlc.
    * otherwise Inconclusive.

    Raises:
        WrongRankError: ``k != 1``.
    """
    if sys.k != 1:
        raise WrongRankError(f"The rank-one rule needs k = 1, got k = {sys.k}")
    chain = chain or s_chain(sys)
    s0, s1 = chain.subspaces[0], chain.subspaces[1]
    if not s1.is_full:
        return Verdict(
            VerdictTag.NOT_STLC,
            Rule.ACCESSIBILITY_NECESSITY,
            {"degree_of_reachability": s1.rank, "subspace": s1.to_dict()},
        )
    escaping = [i for i, b in enumerate(s0.vectors) if not s0.contains(sys.L @ b)]
    if escaping:
        b = s0.vectors[escaping[0]]
        return Verdict(
            VerdictTag.STLC,
            Rule.RANK_ONE_UNDERACTUATION,
            {
                "branch": "not-L-invariant",
                "witness": vector_to_json(b),
                "L_witness": vector_to_json(sys.L @ b),
            },
        )
    if all(s0.contains(sys.phi(f)) for f in sys.controls):
        return Verdict(
            VerdictTag.STLC,
            Rule.RANK_ONE_UNDERACTUATION,
            {
                "branch": "phi-in-S0",
                "phi_controls": [vector_to_json(sys.phi(f)) for f in sys.controls],
            },
        )
    return Verdict(
        VerdictTag.INCONCLUSIVE,
        Rule.NONE,
        {"reason": "S_0 is L-invariant and some Phi(f_i) leaves S_0"},
    )


def hermes_sussmann_obstruction(sys: QuadraticSystem) -> Optional[Dict[str, Any]]:
    """
    Single-input necessary condition at ``u = 0``.

    With ``W = span{f, Lf, ..., L^{n-1} f}`` (the brackets containing ``f``
    once, at the origin), ``[f, [f0, f]](0) = -2 Phi(f)`` outside ``W`` rules
    out STLC. Returns the certificate, or ``None`` when there is no
    obstruction.

    Raises:
        WrongRankError: more than one input.
    """
    if sys.k != sys.n - 1:
        raise WrongRankError(f"The Hermes-Sussmann test needs a single input, got {sys.m}")
    f = sys.controls[0]
    W = _span(sys, krylov(sys.L, [f], sys.n - 1))
    bracket = closed_form_bracket(sys, BracketKind.MIXED2, 1, 1)
    if W.contains(bracket):
        return None
    return {
        "bracket": "[f1,[f0,f1]](0)",
        "bracket_value": vector_to_json(bracket),
        "krylov_basis": W.to_dict()["basis"],
    }


def zero_L_single_input(
    sys: QuadraticSystem, chain: Optional[ChainResult] = None
) -> Optional[Verdict]:
    """
    Single input with ``L = 0`` exactly: NotStlc.

    The certificate names the cause: the Hermes-Sussmann obstruction when
    ``Phi(f)`` leaves ``span{f}``, non-accessibility otherwise. Returns
    ``None`` when the rule does not apply.
    """
    if sys.k != sys.n - 1 or not sys.has_zero_linear_part:
        return None
    f = sys.controls[0]
    phi_f = sys.phi(f)
    certificate: Dict[str, Any] = {"f": vector_to_json(f), "phi_f": vector_to_json(phi_f)}
    if _span(sys, [f]).contains(phi_f):
        chain = chain or s_chain(sys)
        certificate["cause"] = "not-accessible"
        certificate["degree_of_reachability"] = chain.degree_of_reachability
    else:
        certificate["cause"] = "hermes-sussmann"
    return Verdict(VerdictTag.NOT_STLC, Rule.ZERO_LINEAR_PART, certificate)


def _monotone_constraints(sys: QuadraticSystem) -> np.ndarray:
    # w^T f_i = 0 and L^T w = 0 (the columns of L)
    return np.vstack([np.stack(sys.controls), sys.L.T])


def _semidefinite_sign(sys: QuadraticSystem, w: Vector) -> Optional[int]:
    tol = sys.tol if sys.tol is not None else 1e-9
    return is_semidefinite(sys.quadratic_form(w), sys.mode, tol)


def _to_fraction(value: sympy.Rational) -> Fraction:
    return Fraction(int(value.p), int(value.q))


def pencil_samples(q1: Any, q2: Any) -> List[Fraction]:
    """
    Rational parameters ``t`` that decide the semidefiniteness of ``q1 + t q2``.

    A symmetric matrix is positive semidefinite iff every elementary
    symmetric function ``E_j`` of its eigenvalues is nonnegative (negative
    semidefinite iff ``(-1)^j E_j >= 0``). Over the pencil the ``E_j`` are the
    coefficients of its characteristic polynomial, polynomials in ``t`` with
    constant sign between consecutive real roots. The samples are every
    rational root, the endpoints of disjoint isolating intervals, one point
    inside each gap and one beyond each end.

    Semidefiniteness attained only at an irrational root is not sampled.
    """
    t, lam = sympy.symbols("t lambda")
    n = len(q1)
    pencil = sympy.Matrix(
        n,
        n,
        lambda i, j: sympy.Rational(q1[i][j].numerator, q1[i][j].denominator)
        + t * sympy.Rational(q2[i][j].numerator, q2[i][j].denominator),
    )
    product = sympy.Poly(1, t)
    for coeff in pencil.charpoly(lam).all_coeffs()[1:]:
        poly = sympy.Poly(sympy.expand(coeff), t)
        if poly.degree() > 0:
            product = product * poly
    if product.degree() <= 0:
        return [Fraction(0)]
    product = product.sqf_part()
    points = set()
    for factor, _ in product.factor_list()[1]:
        if factor.degree() == 1:
            c1, c0 = factor.all_coeffs()
            points.add(_to_fraction(-c0 / c1))
    for (lo, hi), _ in product.intervals():
        points.update((_to_fraction(lo), _to_fraction(hi)))
    ordered = sorted(points)
    if not ordered:
        return [Fraction(0)]
    samples = set(ordered)
    samples.update((x + y) / 2 for x, y in zip(ordered, ordered[1:]))
    samples.update((ordered[0] - 1, ordered[-1] + 1))
    return sorted(samples)


def _pencil_certificate(sys: QuadraticSystem, n_i: Vector, n_j: Vector) -> Optional[Vector]:
    q1 = [list(r) for r in sys.quadratic_form(n_i)]
    q2 = [list(r) for r in sys.quadratic_form(n_j)]
    for t in pencil_samples(q1, q2):
        w = n_i + t * n_j
        sign = _semidefinite_sign(sys, w)
        if sign in (1, -1):
            return w if sign == 1 else -w
    return None


def monotone_certificate(sys: QuadraticSystem) -> Optional[Vector]:
    """
    Look for ``w != 0`` with ``w^T F = 0``, ``w^T L = 0`` and ``w^T Phi``
    semidefinite but not zero.

    Along every trajectory ``d/dt (w^T x) = w^T Phi(x)`` then has a fixed
    sign, so ``w^T x`` is monotone and the origin is not interior to its
    reachable set.

    The search runs over the basis of the admissible space and the planes
    spanned by pairs of basis vectors. Each plane is tried at the fixed
    ratios of ``MONOTONE_RATIOS``; in RATIONAL mode it is then scanned
    exactly with :func:`pencil_samples`. Admissible spaces of dimension
    three or more are not searched beyond these planes, and ``None`` is not
    a proof of STLC: the cascade ends Inconclusive.
    """
    admissible = null_space(_monotone_constraints(sys), sys.mode, sys.tol, n_cols=sys.n)
    basis = admissible.vectors
    if not basis:
        return None
    candidates: List[Vector] = list(basis)
    pairs = list(itertools.combinations(basis, 2))
    for n_i, n_j in pairs:
        candidates.extend(alpha * n_i + beta * n_j for alpha, beta in MONOTONE_RATIOS)
    for w in candidates:
        sign = _semidefinite_sign(sys, w)
        if sign in (1, -1):
            logger.debug("Monotone functional w=%s (sign %d)", list(w), sign)
            return w if sign == 1 else -w
    if sys.mode is ArithmeticMode.RATIONAL:
        for n_i, n_j in pairs:
            w = _pencil_certificate(sys, n_i, n_j)
            if w is not None:
                logger.debug("Monotone functional w=%s from the pencil scan", list(w))
                return w
    return None


def _model_rule(sys: QuadraticSystem) -> Optional[Verdict]:
    if sys.m != 1:
        return None
    match = match_model(sys)
    if match is None:
        return None
    f = list(sys.controls[0])
    if match.name == "sprott":
        return sprott_single_input_stlc(match.params["mu"], f, sys.mode)
    try:
        return lorenz_single_input_stlc(
            match.params["sigma"], match.params["rho"], match.params["beta"], f, sys.mode
        )
    except InapplicableModelError:
        logger.debug("Lorenz criterion inapplicable (s = 0); continuing the cascade")
        return None


def stlc_verdict(sys: QuadraticSystem, chain: Optional[ChainResult] = None) -> Verdict:
    """Run the STLC cascade; see the module docstring for the order."""
    chain = chain or s_chain(sys)
    attempted: List[Rule] = []

    def done(verdict: Verdict) -> Verdict:
        logger.debug("STLC verdict for %r: %s", sys, verdict)
        return Verdict(verdict.tag, verdict.rule, verdict.certificate, list(attempted))

    attempted.append(Rule.ACCESSIBILITY_NECESSITY)
    access = accessibility_verdict(sys, chain)
    if access.tag is VerdictTag.NOT_ACCESSIBLE:
        return done(Verdict(VerdictTag.NOT_STLC, Rule.ACCESSIBILITY_NECESSITY, access.certificate))

    attempted.append(Rule.LINEARIZATION)
    if linearization_stlc(sys):
        columns = krylov(sys.L, list(sys.controls), sys.n - 1)
        return done(
            Verdict(
                VerdictTag.STLC,
                Rule.LINEARIZATION,
                {"kalman_columns": matrix_to_json(columns)},
            )
        )

    match = match_model(sys) if sys.m == 1 else None
    if match is not None:
        attempted.append(
            Rule.SPROTT_SINGLE_INPUT if match.name == "sprott" else Rule.LORENZ_SINGLE_INPUT
        )
        model_verdict = _model_rule(sys)
        if model_verdict is not None and model_verdict.tag is not VerdictTag.NOT_ACCESSIBLE:
            return done(model_verdict)

    if sys.m == 1:
        attempted.append(Rule.ZERO_LINEAR_PART)
        zero_L = zero_L_single_input(sys, chain)
        if zero_L is not None:
            return done(zero_L)

        attempted.append(Rule.HERMES_SUSSMANN)
        obstruction = hermes_sussmann_obstruction(sys)
        if obstruction is not None:
            return done(Verdict(VerdictTag.NOT_STLC, Rule.HERMES_SUSSMANN, obstruction))

    if sys.k == 1:
        attempted.append(Rule.RANK_ONE_UNDERACTUATION)
        sigma1 = sigma1_stlc(sys, chain)
        if sigma1.is_decisive:
            return done(sigma1)

    attempted.append(Rule.MONOTONE_FUNCTIONAL)
    w = monotone_certificate(sys)
    if w is not None:
        return done(
            Verdict(VerdictTag.NOT_STLC, Rule.MONOTONE_FUNCTIONAL, {"w": vector_to_json(w)})
        )

    return done(
        Verdict(
            VerdictTag.INCONCLUSIVE,
            Rule.NONE,
            {"reason": "No implemented rule decides this system"},
        )
    )


# ---------------------------------------------------------------------------
# Independent certificate validation
# ---------------------------------------------------------------------------


def _read_vector(sys: QuadraticSystem, values: Sequence[Any]) -> Vector:
    return sys.vector([scalar_from_json(v) for v in values])


def _polarized(sys: QuadraticSystem, u: Vector, v: Vector) -> Vector:
    return sys.phi(u + v) - sys.phi(u) - sys.phi(v)


def _closure_rank(sys: QuadraticSystem) -> int:
    """Dimension of the smallest subspace containing F closed under L and Phi."""
    current = _span(sys, sys.controls)
    for _ in range(sys.n):
        vectors = current.vectors
        generators = list(vectors)
        generators += [sys.L @ b for b in vectors]
        generators += [sys.phi(b) for b in vectors]
        generators += [_polarized(sys, u, v) for u, v in itertools.combinations(vectors, 2)]
        grown = _span(sys, generators)
        if grown.rank == current.rank:
            break
        current = grown
    return current.rank


def _invariant_certificate(sys: QuadraticSystem, basis_json: Sequence[Any]) -> bool:
    basis = [_read_vector(sys, b) for b in basis_json]
    S = _span(sys, basis)
    if S.rank >= sys.n or S.rank != len(basis):
        return False
    if not all(S.contains(f) for f in sys.controls):
        return False
    for b in basis:
        if not (S.contains(sys.L @ b) and S.contains(sys.phi(b))):
            return False
    return all(S.contains(_polarized(sys, u, v)) for u, v in itertools.combinations(basis, 2))


def _hs_obstructed(sys: QuadraticSystem) -> bool:
    f = sys.controls[0]
    W = _span(sys, krylov(sys.L, [f], sys.n - 1))
    return not W.contains(sys.phi(f))


def _quadratic_form_by_values(sys: QuadraticSystem, w: Vector) -> List[List[Any]]:
    units = [sys.vector([1 if i == j else 0 for j in range(sys.n)]) for i in range(sys.n)]
    diag = [np.dot(w, sys.phi(e)) for e in units]
    half = 0.5 if sys.mode is ArithmeticMode.FLOAT else scalar_from_json("1/2")
    return [
        [
            diag[i]
            if i == j
            else half * (np.dot(w, sys.phi(units[i] + units[j])) - diag[i] - diag[j])
            for j in range(sys.n)
        ]
        for i in range(sys.n)
    ]


def _check_model(sys: QuadraticSystem, verdict: Verdict) -> bool:
    cert = verdict.certificate
    match = match_model(sys)
    if match is None or sys.m != 1 or match.name != cert.get("model"):
        return False
    f = sys.controls[0]
    det = determinant([f, sys.L @ f, sys.L @ (sys.L @ f)], sys.mode)
    if match.name == "sprott":
        H = SPROTT_HESSIAN
        first = sum(f)
    else:
        p = match.params
        if lorenz_constants(p["sigma"], p["rho"], p["beta"]).s == 0:
            return False
        H = lorenz_hessian(p["sigma"], p["rho"])
        first = f[2]
    second = sum(f[i] * H[i][j] * f[j] for i in range(3) for j in range(3))
    decided_stlc = first != 0 and second != 0
    if verdict.tag is VerdictTag.STLC:
        return decided_stlc and det != 0
    if verdict.tag is VerdictTag.NOT_STLC:
        return not decided_stlc and det == 0 and _closure_rank(sys) == sys.n
    if verdict.tag is VerdictTag.NOT_ACCESSIBLE:
        return _closure_rank(sys) < sys.n
    return False


def check_certificate(sys: QuadraticSystem, verdict: Verdict) -> bool:
    """
    Re-check ``verdict`` for ``sys`` without reusing the producing code.

    Invariant subspaces are tested for closure under ``L``, ``Phi`` and
    polarized ``Phi``; Kalman matrices are rebuilt from Krylov sequences;
    monotone functionals are tested on a quadratic form assembled from
    ``Phi`` values. Inconclusive verdicts carry nothing to check and pass.
    Malformed certificates fail.
    """
    cert = verdict.certificate
    try:
        if verdict.tag is VerdictTag.INCONCLUSIVE:
            return True
        if verdict.rule in (Rule.SPROTT_SINGLE_INPUT, Rule.LORENZ_SINGLE_INPUT):
            return _check_model(sys, verdict)
        if verdict.tag is VerdictTag.STRONGLY_ACCESSIBLE:
            return _closure_rank(sys) == sys.n
        if verdict.tag is VerdictTag.NOT_ACCESSIBLE or verdict.rule is Rule.ACCESSIBILITY_NECESSITY:
            return verdict.tag in (
                VerdictTag.NOT_ACCESSIBLE,
                VerdictTag.NOT_STLC,
            ) and _invariant_certificate(sys, cert["subspace"]["basis"])
        if verdict.rule is Rule.LINEARIZATION:
            columns = [_read_vector(sys, col) for col in cert["kalman_columns"]]
            expected = _krylov_by_powers(sys)
            if len(columns) != len(expected):
                return False
            tol = sys.tol if sys.tol is not None else 1e-9
            for col, exp in zip(columns, expected):
                if sys.mode is ArithmeticMode.RATIONAL and any(x != y for x, y in zip(col, exp)):
                    return False
                if sys.mode is ArithmeticMode.FLOAT and not np.allclose(col, exp, atol=tol):
                    return False
            return _span(sys, columns).rank == sys.n
        if verdict.rule is Rule.RANK_ONE_UNDERACTUATION:
            if sys.k != 1 or _closure_rank_one_step(sys) != sys.n:
                return False
            s0 = _span(sys, sys.controls)
            if cert.get("branch") == "not-L-invariant":
                return any(not s0.contains(sys.L @ f) for f in sys.controls)
            if cert.get("branch") == "phi-in-S0":
                return all(s0.contains(sys.phi(f)) for f in sys.controls)
            return False
        if verdict.rule is Rule.ZERO_LINEAR_PART:
            if sys.m != 1 or not sys.has_zero_linear_part:
                return False
            if cert.get("cause") == "hermes-sussmann":
                return _hs_obstructed(sys)
            return cert.get("cause") == "not-accessible" and _closure_rank(sys) < sys.n
        if verdict.rule is Rule.HERMES_SUSSMANN:
            return sys.m == 1 and _hs_obstructed(sys)
        if verdict.rule is Rule.MONOTONE_FUNCTIONAL:
            w = _read_vector(sys, cert["w"])
            if all(x == 0 for x in w):
                return False
            tol = sys.tol if sys.tol is not None else 1e-9
            if sys.mode is ArithmeticMode.FLOAT:
                residual = max(
                    np.max(np.abs(np.stack(sys.controls) @ w)), np.max(np.abs(sys.L.T @ w))
                )
                if residual > tol:
                    return False
            elif any(np.dot(w, f) != 0 for f in sys.controls) or any(x != 0 for x in sys.L.T @ w):
                return False
            sign = is_semidefinite(_quadratic_form_by_values(sys, w), sys.mode, tol)
            return sign in (1, -1)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        logger.warning("Malformed certificate for %s: %s", verdict, exc)
        return False
    return False


def _closure_rank_one_step(sys: QuadraticSystem) -> int:
    vectors = _span(sys, sys.controls).vectors
    generators = list(vectors) + [sys.L @ b for b in vectors] + [sys.phi(b) for b in vectors]
    generators += [_polarized(sys, u, v) for u, v in itertools.combinations(vectors, 2)]
    return _span(sys, generators).rank


def _krylov_by_powers(sys: QuadraticSystem) -> List[Vector]:
    """``L^p f_i`` from explicit matrix powers, ordered by control then power."""
    powers = [as_matrix(np.identity(sys.n, dtype=int).tolist(), sys.mode)]
    for _ in range(sys.n - 1):
        powers.append(powers[-1] @ sys.L)
    return [P @ f for f in sys.controls for P in powers]
