"""
Named systems and their closed-form criteria.

Constructors
    :func:`sprott`, :func:`lorenz`, :func:`rigid_body`, :func:`hypergraph`
    and the worked systems of :func:`paper_examples`.

Closed forms
    :func:`sprott_single_input_stlc`, :func:`lorenz_single_input_stlc`,
    :func:`crouch_condition`, :func:`sprott_subclass_accessible` and
    :func:`hypergraph_accessibility_polynomial`. They are deliberately kept
    apart from the generic cascade in :mod:`quadctrl.stlc` and cross-checked
    against it.

Symbolic checks
    :func:`sprott_determinant_gap` and :func:`lorenz_determinant_gap` evaluate
    ``det[f | Lf | L^2 f]`` minus its closed form with sympy, so a parameter
    dependence would show up instead of being assumed away.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from quadctrl.chain import s_chain
from quadctrl.constants import ArithmeticMode, Rule, VerdictTag
from quadctrl.exceptions import (
    DependentControlsError,
    InapplicableModelError,
    ParameterError,
)
from quadctrl.linalg import (
    Scalar,
    Vector,
    as_matrix,
    as_vector,
    detect_mode,
    determinant,
    rank,
    scalar_to_json,
    vector_to_json,
)
from quadctrl.system import QuadraticSystem
from quadctrl.verdicts import Verdict

logger = logging.getLogger(__name__)

SPROTT_HESSIAN = ((2, -1, -1), (-1, 2, -1), (-1, -1, 2))


def _param(value: Any) -> Any:
    """Parameters given as strings (CLI) are read exactly."""
    if isinstance(value, str):
        return Fraction(value.strip())
    return value


def _mode_for(*values: Any) -> ArithmeticMode:
    return detect_mode([_plain(v) for v in values])


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def sprott(
    mu: Any = 0,
    controls: Sequence[Any] = ((1, 0, 0),),
    mode: Optional[ArithmeticMode] = None,
) -> QuadraticSystem:
    """
    Sprott system ``L = -(mu I + P)``, ``a = (1, 1, 1)``, ``b = c = 0``.

    ``L = [[-mu, 0, -1], [-1, -mu, 0], [0, -1, -mu]]``; one or two controls.

    Raises:
        DependentControlsError: dependent control vectors.
    """
    mu = _param(mu)
    L = [[-mu, 0, -1], [-1, -mu, 0], [0, -1, -mu]]
    return QuadraticSystem.build(
        L, [1, 1, 1], [0, 0, 0], [0, 0, 0], list(controls), mode, name=f"sprott(mu={mu})"
    )


def lorenz(
    sigma: Any = 10,
    rho: Any = 28,
    beta: Any = Fraction(8, 3),
    controls: Sequence[Any] = ((0, 0, 1),),
    mode: Optional[ArithmeticMode] = None,
) -> QuadraticSystem:
    """
    Lorenz system ``L = [[-s, s, 0], [r, -1, 0], [0, 0, -b]]``, ``c = (0, -1, 1)``.

    The quadratic part is ``Phi(x) = (0, -x1 x3, x1 x2)``.

    Raises:
        ParameterError: a nonpositive ``sigma``, ``rho`` or ``beta``.
    """
    sigma, rho, beta = _positive(sigma=sigma, rho=rho, beta=beta)
    L = [[-sigma, sigma, 0], [rho, -1, 0], [0, 0, -beta]]
    return QuadraticSystem.build(
        L,
        [0, 0, 0],
        [0, 0, 0],
        [0, -1, 1],
        list(controls),
        mode,
        name=f"lorenz(sigma={sigma}, rho={rho}, beta={beta})",
    )


def rigid_body_coefficients(xi: Sequence[Any]) -> List[Any]:
    """``c_v = (xi_{v+1} - xi_{v+2}) / xi_v`` with cyclic indices."""
    xi = _inertia(xi)
    return [(xi[(v + 1) % 3] - xi[(v + 2) % 3]) / xi[v] for v in range(3)]


def rigid_body(
    xi: Sequence[Any],
    controls: Sequence[Any],
    torques: bool = False,
    mode: Optional[ArithmeticMode] = None,
) -> QuadraticSystem:
    """
    Free rigid body angular velocity dynamics, ``L = 0``, ``a = b = 0``.

    Args:
        xi: Principal moments of inertia (all positive).
        controls: Control fields ``f_i``; with ``torques=True`` they are raw
            torque axes ``b_i`` and are scaled to ``f_i = b_i / xi``.
        torques: See ``controls``.
        mode: Arithmetic mode (detected from the data by default).

    Raises:
        ParameterError: a nonpositive inertia entry.
    """
    xi = _inertia(xi)
    fields = [list(map(_param, f)) for f in controls]
    if torques:
        fields = [[b_v / xi_v for b_v, xi_v in zip(f, xi)] for f in fields]
    return QuadraticSystem.build(
        [[0] * 3 for _ in range(3)],
        [0, 0, 0],
        [0, 0, 0],
        rigid_body_coefficients(xi),
        fields,
        mode,
        name=f"rigid-body(xi={[str(x) for x in xi]})",
    )


def hypergraph(
    control: Sequence[Any], c: Sequence[Any] = (1, 1, 1), mode: Optional[ArithmeticMode] = None
) -> QuadraticSystem:
    """Single-input system ``x' = c * P2x * P3x + u f`` (``x'=yz, y'=xz, z'=xy``)."""
    return QuadraticSystem.build(
        [[0] * 3 for _ in range(3)],
        [0, 0, 0],
        [0, 0, 0],
        [_param(v) for v in c],
        [[_param(v) for v in control]],
        mode,
        name="hypergraph",
    )


def _positive(**params: Any) -> Tuple[Any, ...]:
    values = []
    for name, value in params.items():
        value = _param(value)
        if not value > 0:
            raise ParameterError(f"{name} must be positive, got {value}", field=name)
        values.append(value)
    return tuple(values)


def _inertia(xi: Sequence[Any]) -> List[Any]:
    values = [_param(v) for v in xi]
    if len(values) != 3:
        raise ParameterError(f"xi must have 3 entries, got {len(values)}", field="xi")
    if not all(v > 0 for v in values):
        raise ParameterError(f"Inertia entries must be positive, got {values}", field="xi")
    if any(isinstance(v, float) for v in values):
        return [float(v) for v in values]
    return [Fraction(v) for v in values]


# ---------------------------------------------------------------------------
# Lorenz constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LorenzConstants:
    """
    Constants of the Lorenz single-input criterion.

    Attributes:
        s: ``beta^2 - (sigma + 1) beta + sigma (1 - rho)`` (exact for
            rational parameters).
        d_squared: ``4 rho sigma + (sigma - 1)^2`` (exact for rational
            parameters).
        d: ``sqrt(d_squared)`` as a float.
        v_plus, v_minus: ``(1, (sigma - 1 +/- d) / (2 sigma), 0)``.
        w_plus, w_minus: ``((1 - sigma +/- d) / (2 rho), 1, 0)``.
    """

    s: Scalar
    d_squared: Scalar
    d: float
    v_plus: Tuple[float, float, float]
    v_minus: Tuple[float, float, float]
    w_plus: Tuple[float, float, float]
    w_minus: Tuple[float, float, float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "s": scalar_to_json(self.s),
            "d_squared": scalar_to_json(self.d_squared),
            "d": self.d,
            "v_plus": list(self.v_plus),
            "v_minus": list(self.v_minus),
            "w_plus": list(self.w_plus),
            "w_minus": list(self.w_minus),
        }


def lorenz_constants(sigma: Any, rho: Any, beta: Any) -> LorenzConstants:
    """Compute ``s``, ``d`` and the isotropic directions of ``f^T H f``."""
    sigma, rho, beta = _positive(sigma=sigma, rho=rho, beta=beta)
    exact = not any(isinstance(v, float) for v in (sigma, rho, beta))
    if exact:
        sigma, rho, beta = Fraction(sigma), Fraction(rho), Fraction(beta)
    s = beta**2 - (sigma + 1) * beta + sigma * (1 - rho)
    d_squared = 4 * rho * sigma + (sigma - 1) ** 2
    d = math.sqrt(float(d_squared))
    sf, rf = float(sigma), float(rho)
    return LorenzConstants(
        s=s,
        d_squared=d_squared,
        d=d,
        v_plus=(1.0, (sf - 1 + d) / (2 * sf), 0.0),
        v_minus=(1.0, (sf - 1 - d) / (2 * sf), 0.0),
        w_plus=((1 - sf + d) / (2 * rf), 1.0, 0.0),
        w_minus=((1 - sf - d) / (2 * rf), 1.0, 0.0),
    )


def lorenz_hessian(sigma: Any, rho: Any) -> List[List[Any]]:
    """Hessian of ``rho x^2 - sigma y^2 + (sigma - 1) x y``."""
    sigma, rho = _param(sigma), _param(rho)
    return [[2 * rho, sigma - 1, 0], [sigma - 1, -2 * sigma, 0], [0, 0, 0]]


# ---------------------------------------------------------------------------
# Closed-form criteria
# ---------------------------------------------------------------------------


def _quadratic(H: Sequence[Sequence[Any]], f: Vector) -> Any:
    return sum(f[i] * H[i][j] * f[j] for i in range(3) for j in range(3))


def krylov_determinant(sys: QuadraticSystem) -> Scalar:
    """``det[f | Lf | L^2 f]`` for a single-input system on R^3."""
    f = sys.controls[0]
    Lf = sys.L @ f
    return determinant([f, Lf, sys.L @ Lf], sys.mode)


def _single_control(f: Sequence[Any], mode: Optional[ArithmeticMode]) -> Vector:
    f = [_param(v) for v in f]
    vec = as_vector(f, mode or _mode_for(f), 3)
    if all(x == 0 for x in vec):
        raise ParameterError("The control vector must be nonzero", field="f")
    return vec


def sprott_single_input_stlc(
    mu: Any, f: Sequence[Any], mode: Optional[ArithmeticMode] = None
) -> Verdict:
    """
    Single-input Sprott criterion.

    STLC iff ``f`` is neither on the diagonal ``span{1}`` nor in its
    orthogonal complement; then ``det[f | Lf | L^2 f] = -1/2 (f^T 1)(f^T H f)``
    is nonzero. On the diagonal the system is not even accessible; on the
    complement it is accessible but not STLC.

    Raises:
        ParameterError: ``f`` is zero.
    """
    mu = _param(mu)
    mode = mode or _mode_for(mu, list(f))
    vec = _single_control(f, mode)
    sys = sprott(mu, [vec], mode)
    f_dot_one = sum(vec)
    f_H_f = _quadratic(SPROTT_HESSIAN, vec)
    certificate = {
        "model": "sprott",
        "params": {"mu": scalar_to_json(mu)},
        "f": vector_to_json(vec),
        "f_dot_one": scalar_to_json(f_dot_one),
        "f_H_f": scalar_to_json(f_H_f),
        "determinant": scalar_to_json(krylov_determinant(sys)),
    }
    if vec[0] == vec[1] == vec[2]:
        return Verdict(VerdictTag.NOT_ACCESSIBLE, Rule.SPROTT_SINGLE_INPUT, certificate)
    if f_dot_one == 0:
        certificate["accessible"] = True
        return Verdict(VerdictTag.NOT_STLC, Rule.SPROTT_SINGLE_INPUT, certificate)
    return Verdict(VerdictTag.STLC, Rule.SPROTT_SINGLE_INPUT, certificate)


def lorenz_single_input_stlc(
    sigma: Any, rho: Any, beta: Any, f: Sequence[Any], mode: Optional[ArithmeticMode] = None
) -> Verdict:
    """
    Single-input Lorenz criterion (requires ``s != 0``).

    STLC iff ``f^T e3 != 0`` and ``f^T H f != 0``; the two scalar tests
    decide membership in ``span{e3}^perp`` and in the isotropic cone of
    ``f^T H f`` without the irrational ``d``. Otherwise NotStlc, or
    NotAccessible when the S-chain stalls as well (``f = e3``).

    Raises:
        ParameterError: nonpositive parameters or zero ``f``.
        InapplicableModelError: ``s == 0``.
    """
    sigma, rho, beta = _positive(sigma=sigma, rho=rho, beta=beta)
    mode = mode or _mode_for(sigma, rho, beta, list(f))
    vec = _single_control(f, mode)
    constants = lorenz_constants(sigma, rho, beta)
    if constants.s == 0:
        raise InapplicableModelError(
            "The Lorenz criterion needs s = beta^2 - (sigma+1) beta + sigma (1 - rho) != 0"
        )
    sys = lorenz(sigma, rho, beta, [vec], mode)
    f_dot_e3 = vec[2]
    f_H_f = _quadratic(lorenz_hessian(sigma, rho), vec)
    certificate = {
        "model": "lorenz",
        "params": {
            "sigma": scalar_to_json(sigma),
            "rho": scalar_to_json(rho),
            "beta": scalar_to_json(beta),
        },
        "f": vector_to_json(vec),
        "s": scalar_to_json(constants.s),
        "f_dot_e3": scalar_to_json(f_dot_e3),
        "f_H_f": scalar_to_json(f_H_f),
        "determinant": scalar_to_json(krylov_determinant(sys)),
    }
    if f_dot_e3 != 0 and f_H_f != 0:
        return Verdict(VerdictTag.STLC, Rule.LORENZ_SINGLE_INPUT, certificate)
    chain = s_chain(sys)
    if not chain.is_full:
        certificate["degree_of_reachability"] = chain.degree_of_reachability
        return Verdict(VerdictTag.NOT_ACCESSIBLE, Rule.LORENZ_SINGLE_INPUT, certificate)
    certificate["accessible"] = True
    return Verdict(VerdictTag.NOT_STLC, Rule.LORENZ_SINGLE_INPUT, certificate)


def skew(x: Sequence[Any]) -> List[List[Any]]:
    """``S(x) = [[0, x3, -x2], [-x3, 0, x1], [x2, -x1, 0]]``."""
    return [[0, x[2], -x[1]], [-x[2], 0, x[0]], [x[1], -x[0], 0]]


CROUCH_DIRECTIONS = ((1, 0), (0, 1), (1, 1))


def crouch_condition(xi: Sequence[Any], b1: Sequence[Any], b2: Sequence[Any]) -> bool:
    """
    Rigid-body accessibility condition on two torque axes.

    True iff ``b1``, ``b2`` and ``S(w) (w / xi)`` for ``w`` over
    ``span{b1, b2}`` span R^3. By bilinearity these directions
    ``(1, 0), (0, 1), (1, 1)`` of ``w = alpha b1 + beta b2`` suffice.

    Raises:
        ParameterError: a nonpositive inertia entry.
        DependentControlsError: ``b1`` and ``b2`` are dependent.
    """
    xi = _inertia(xi)
    mode = _mode_for(xi, list(b1), list(b2))
    u = as_vector([_param(v) for v in b1], mode, 3)
    v = as_vector([_param(v) for v in b2], mode, 3)
    if rank([u, v], mode) < 2:
        raise DependentControlsError("Torque axes b1 and b2 are dependent", field="b")
    inv_xi = as_vector([1 / x for x in xi], mode)
    generators = [u, v]
    for alpha, beta in CROUCH_DIRECTIONS:
        w = alpha * u + beta * v
        generators.append(as_matrix(skew(w), mode) @ (w * inv_xi))
    return rank(generators, mode) == 3


def sprott_subclass_accessible(controls: Sequence[Any]) -> bool:
    """
    Accessibility for ``a = 1, b = c = 0`` on R^3 with an L-invariant diagonal.

    Two controls: accessible iff independent. One control: accessible iff it
    is not on the diagonal.
    """
    vectors = [[_param(v) for v in f] for f in controls]
    if len(vectors) == 2:
        return rank(vectors, _mode_for(vectors)) == 2
    if len(vectors) == 1:
        f = vectors[0]
        return not (f[0] == f[1] == f[2])
    raise ParameterError("The subclass criterion covers one or two controls", field="controls")


def hypergraph_accessibility_polynomial(f: Sequence[Any]) -> Any:
    """``(f1^2 - f2^2)(f2^2 - f3^2)(f3^2 - f1^2)``; nonzero iff accessible."""
    f1, f2, f3 = (_param(v) for v in f)
    return (f1**2 - f2**2) * (f2**2 - f3**2) * (f3**2 - f1**2)


# ---------------------------------------------------------------------------
# Model recognition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelMatch:
    """A system recognized as an instance of a named model."""

    name: str
    params: Dict[str, Any] = field(default_factory=dict)


def _equal(values: Any, expected: Sequence[Any]) -> bool:
    return all(x == y for x, y in zip(list(values), expected))


def match_model(sys: QuadraticSystem) -> Optional[ModelMatch]:
    """
    Recognize Sprott and Lorenz instances by exact structural equality.

    Returns ``None`` for any other system, including Lorenz-shaped systems
    with a nonpositive parameter.
    """
    if sys.n != 3:
        return None
    L = sys.L
    zero3 = [0, 0, 0]
    if _equal(sys.a, [1, 1, 1]) and _equal(sys.b, zero3) and _equal(sys.c, zero3):
        mu = -L[0][0]
        expected = [[-mu, 0, -1], [-1, -mu, 0], [0, -1, -mu]]
        if all(_equal(L[i], expected[i]) for i in range(3)):
            return ModelMatch("sprott", {"mu": mu})
    if _equal(sys.a, zero3) and _equal(sys.b, zero3) and _equal(sys.c, [0, -1, 1]):
        sigma, rho, beta = L[0][1], L[1][0], -L[2][2]
        expected = [[-sigma, sigma, 0], [rho, -1, 0], [0, 0, -beta]]
        if all(_equal(L[i], expected[i]) for i in range(3)) and min(sigma, rho, beta) > 0:
            return ModelMatch("lorenz", {"sigma": sigma, "rho": rho, "beta": beta})
    return None


# ---------------------------------------------------------------------------
# Symbolic determinant identities
# ---------------------------------------------------------------------------


def _symbolic_krylov_det(L: sympy.Matrix, f: sympy.Matrix) -> sympy.Expr:
    return sympy.Matrix.hstack(f, L * f, L * L * f).det()


def sprott_determinant_gap() -> sympy.Expr:
    """
    ``det[f | Lf | L^2 f] + 1/2 (f^T 1)(f^T H f)`` for symbolic ``mu`` and ``f``.

    Zero means the closed form holds for every ``mu``; anything else is the
    exact discrepancy.
    """
    mu = sympy.Symbol("mu")
    f = sympy.Matrix(sympy.symbols("f1 f2 f3"))
    L = sympy.Matrix([[-mu, 0, -1], [-1, -mu, 0], [0, -1, -mu]])
    H = sympy.Matrix(SPROTT_HESSIAN)
    ones = sympy.Matrix([1, 1, 1])
    closed = -sympy.Rational(1, 2) * (f.T * ones)[0] * (f.T * H * f)[0]
    gap = sympy.expand(_symbolic_krylov_det(L, f) - closed)
    if gap != 0:
        logger.warning("Sprott determinant identity fails: gap = %s", gap)
    return gap


def lorenz_determinant_gap() -> sympy.Expr:
    """``det[f | Lf | L^2 f] - 1/2 s (f^T e3)(f^T H f)`` for symbolic parameters."""
    sigma, rho, beta = sympy.symbols("sigma rho beta", positive=True)
    f = sympy.Matrix(sympy.symbols("f1 f2 f3"))
    L = sympy.Matrix([[-sigma, sigma, 0], [rho, -1, 0], [0, 0, -beta]])
    H = sympy.Matrix([[2 * rho, sigma - 1, 0], [sigma - 1, -2 * sigma, 0], [0, 0, 0]])
    s = beta**2 - (sigma + 1) * beta + sigma * (1 - rho)
    closed = sympy.Rational(1, 2) * s * f[2] * (f.T * H * f)[0]
    gap = sympy.expand(_symbolic_krylov_det(L, f) - closed)
    if gap != 0:
        logger.warning("Lorenz determinant identity fails: gap = %s", gap)
    return gap


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------


EXAMPLE_PROVENANCE: Dict[str, str] = {
    "r5-nonaccessible": (
        "Five-dimensional system whose chain stalls at S_4 = span{e1, e4}; not accessible"
    ),
    "sprott-counterexample-flow": (
        "x' = u1, y' = u2, z' = y^2: S_1 = R^3 yet not STLC since z never decreases"
    ),
    "r3-stlc": (
        "x' = 2x - yz with two inputs: not linearly controllable, STLC by the rank-one rule"
    ),
    "hypergraph": (
        "x' = yz, y' = xz, z' = xy with one input: never STLC (zero linear part)"
    ),
    "sprott-mu1": "Sprott system, mu = 1, single input f = (1, 0, 0): STLC",
    "lorenz-classic": "Lorenz system (10, 28, 8/3), single input f = (1, 1, 1): STLC",
    "rigid-body": "Rigid body, inertia (1, 2, 3), torques about e1 and e2: accessible",
}


def paper_examples() -> Dict[str, QuadraticSystem]:
    """The bundled worked systems, keyed by name, with exact rational data."""
    r5_L = [[0] * 5 for _ in range(5)]
    r5_L[1][1], r5_L[2][2], r5_L[3][4] = 1, -1, 1
    examples = {
        "r5-nonaccessible": QuadraticSystem.build(
            r5_L,
            [0] * 5,
            [0, 0, 0, -1, -1],
            [0, 0, 1, 0, 1],
            [[1, 0, 0, 0, 0]],
            name="r5-nonaccessible",
        ),
        "sprott-counterexample-flow": QuadraticSystem.build(
            [[0] * 3 for _ in range(3)],
            [0, 0, 0],
            [0, 0, 1],
            [0, 0, 0],
            [[1, 0, 0], [0, 1, 0]],
            name="sprott-counterexample-flow",
        ),
        "r3-stlc": QuadraticSystem.build(
            [[2, 0, 0], [0, 0, 0], [0, 0, -1]],
            [0, 0, 1],
            [0, 1, 1],
            [-1, -2, 0],
            [[0, 1, 0], [0, 0, 1]],
            name="r3-stlc",
        ),
        "hypergraph": hypergraph([1, 2, 3]),
        "sprott-mu1": sprott(1, [(1, 0, 0)]),
        "lorenz-classic": lorenz(10, 28, Fraction(8, 3), [(1, 1, 1)]),
        "rigid-body": rigid_body([1, 2, 3], [(1, 0, 0), (0, 1, 0)], torques=True),
    }
    return {name: _renamed(sys, name) for name, sys in examples.items()}


def _renamed(sys: QuadraticSystem, name: str) -> QuadraticSystem:
    data = sys.to_dict()
    data["name"] = name
    return QuadraticSystem.from_dict(data)


def spec_json(sys: QuadraticSystem, indent: Optional[int] = 2) -> str:
    """Spec JSON of ``sys``, in the same schema as user-supplied specs."""
    return json.dumps(sys.to_dict(), indent=indent)
