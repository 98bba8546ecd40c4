"""
Quadratic affine control systems.

A system of the class handled by this package reads::

    x' = L x + Phi(x) + u_1 f_1 + ... + u_{n-k} f_{n-k}

with constant, linearly independent control fields ``f_i`` and the
homogeneous quadratic map::

    Phi(x) = a * P2x * P2x + b * P3x * P3x + c * P2x * P3x

where ``*`` is the componentwise (Hadamard) product and ``P2``/``P3`` are the
cyclic shifts ``(x_2, ..., x_n, x_1)`` and ``(x_3, ..., x_1, x_2)``. Component
``v`` of ``Phi(x)`` is therefore ``a_v x_{v+1}^2 + b_v x_{v+2}^2 + c_v x_{v+1}
x_{v+2}`` with indices taken cyclically in ``1..n``.

The symmetric bilinear map ``Psi`` satisfies ``Psi(u, u) = 2 Phi(u)`` and
``D Phi(p) v = Psi(p, v)``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from quadctrl.constants import ArithmeticMode
from quadctrl.exceptions import (
    ArithmeticModeError,
    BadRankError,
    DependentControlsError,
    DimensionError,
    ShapeMismatchError,
    SpecError,
)
from quadctrl.linalg import (
    Matrix,
    Scalar,
    Vector,
    as_matrix,
    as_vector,
    detect_mode,
    matrix_to_json,
    rank,
    unit,
    vector_to_json,
)

logger = logging.getLogger(__name__)


def cyclic_shift(x: Vector, s: int) -> Vector:
    """
    Cyclic coordinate shift.

    ``s = 1`` realizes ``P2`` (``(1,2,3) -> (2,3,1)``) and ``s = 2`` realizes
    ``P3`` (``(1,2,3) -> (3,1,2)``).
    """
    return np.roll(x, -s)


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class QuadraticSystem:
    """
    Validated quadratic affine control system.

    Build instances through :func:`validate_system` (from a spec mapping) or
    :meth:`QuadraticSystem.build` (from arrays); both check shapes, the rank
    ``k`` and independence of the control fields.

    Attributes:
        n: State dimension (at least 2).
        k: Underactuation rank, ``1 <= k <= n - 1``.
        L: ``n x n`` linear part of the drift.
        a, b, c: Quadratic coefficient vectors of length ``n``.
        controls: The ``n - k`` control fields.
        mode: Arithmetic backend of every value above.
        tol: Membership tolerance in FLOAT mode (``None`` picks the default
            ``n * eps * largest column norm`` per rank decision).
        name: Optional label carried into reports.
    """

    n: int
    k: int
    L: Matrix
    a: Vector
    b: Vector
    c: Vector
    controls: Tuple[Vector, ...]
    mode: ArithmeticMode = ArithmeticMode.RATIONAL
    tol: Optional[float] = None
    name: str = field(default="")

    @classmethod
    def build(
        cls,
        L: Any,
        a: Any,
        b: Any,
        c: Any,
        controls: Sequence[Any],
        mode: Optional[ArithmeticMode] = None,
        tol: Optional[float] = None,
        name: str = "",
    ) -> "QuadraticSystem":
        """Validate raw arrays into a system; ``n`` and ``k`` are inferred."""
        spec: Dict[str, Any] = {
            "L": _plain(L),
            "a": _plain(a),
            "b": _plain(b),
            "c": _plain(c),
            "controls": [_plain(f) for f in controls],
            "name": name,
        }
        if mode is not None:
            spec["mode"] = ArithmeticMode(mode).value
        if tol is not None:
            spec["tol"] = tol
        return validate_system(spec)

    # -- evaluation --------------------------------------------------------

    def vector(self, values: Any) -> Vector:
        """Coerce ``values`` to a length-``n`` vector in this system's mode."""
        return as_vector(values, self.mode, self.n)

    def phi(self, x: Any) -> Vector:
        """Quadratic part ``Phi(x)`` via the Hadamard/shift formula."""
        x = self.vector(x)
        p2, p3 = cyclic_shift(x, 1), cyclic_shift(x, 2)
        return self.a * p2 * p2 + self.b * p3 * p3 + self.c * p2 * p3

    def psi(self, u: Any, v: Any) -> Vector:
        """Symmetric bilinear map with ``psi(u, u) == 2 * phi(u)``."""
        u, v = self.vector(u), self.vector(v)
        p2u, p3u = cyclic_shift(u, 1), cyclic_shift(u, 2)
        p2v, p3v = cyclic_shift(v, 1), cyclic_shift(v, 2)
        two = self._scalar(2)
        return (
            two * self.a * p2u * p2v
            + two * self.b * p3u * p3v
            + self.c * (p2u * p3v + p2v * p3u)
        )

    def dphi(self, p: Any) -> Matrix:
        """Jacobian of ``Phi`` at ``p``; column ``j`` is ``Psi(p, e_j)``."""
        p = self.vector(p)
        columns = [self.psi(p, unit(self.n, j, self.mode)) for j in range(self.n)]
        return np.stack(columns, axis=1)

    def drift(self, x: Any) -> Vector:
        """Drift ``f0(x) = L x + Phi(x)``."""
        x = self.vector(x)
        return self.L @ x + self.phi(x)

    def vector_field(self, x: Any, u: Any) -> Vector:
        """Right-hand side ``f0(x) + sum_i u_i f_i``."""
        out = self.drift(x)
        for u_i, f_i in zip(u, self.controls):
            out = out + u_i * f_i
        return out

    def quadratic_form(self, w: Any) -> Matrix:
        """
        Symmetric matrix ``Q`` with ``x^T Q x == w^T Phi(x)``.

        Entries are ``Q_ij = 1/2 w^T Psi(e_i, e_j)``.
        """
        w = self.vector(w)
        half = self._scalar(Fraction(1, 2))
        units = [unit(self.n, i, self.mode) for i in range(self.n)]
        rows = []
        for i in range(self.n):
            rows.append([half * np.dot(w, self.psi(units[i], units[j])) for j in range(self.n)])
        return as_matrix(rows, self.mode, shape=(self.n, self.n))

    # -- structure ---------------------------------------------------------

    @property
    def m(self) -> int:
        """Number of control fields, ``n - k``."""
        return len(self.controls)

    @property
    def control_matrix(self) -> Matrix:
        """``n x (n - k)`` matrix whose columns are the control fields."""
        return np.stack(self.controls, axis=1)

    @property
    def is_linear(self) -> bool:
        return not any(_nonzero(v) for v in (self.a, self.b, self.c))

    @property
    def has_zero_linear_part(self) -> bool:
        return not _nonzero(self.L)

    def with_controls(self, controls: Sequence[Any]) -> "QuadraticSystem":
        """Same drift, different control fields (``k`` follows)."""
        return QuadraticSystem.build(
            self.L, self.a, self.b, self.c, controls, self.mode, self.tol, self.name
        )

    def rationalized(self) -> "QuadraticSystem":
        """
        Exact copy of the system.

        Floats are converted bit-for-bit with ``Fraction(float)``, so no
        information is lost or invented.
        """
        if self.mode is ArithmeticMode.RATIONAL:
            return self

        def exact(values: Any) -> List[Any]:
            return [_plain_exact(v) for v in values]

        return QuadraticSystem.build(
            [exact(r) for r in self.L],
            exact(self.a),
            exact(self.b),
            exact(self.c),
            [exact(f) for f in self.controls],
            ArithmeticMode.RATIONAL,
            name=self.name,
        )

    def _scalar(self, value: Any) -> Scalar:
        if self.mode is ArithmeticMode.RATIONAL:
            return Fraction(value)
        return float(value)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        """Spec JSON mapping; rationals serialize as ``"p/q"`` strings."""
        data: Dict[str, Any] = {
            "n": self.n,
            "k": self.k,
            "L": matrix_to_json(self.L),
            "a": vector_to_json(self.a),
            "b": vector_to_json(self.b),
            "c": vector_to_json(self.c),
            "controls": matrix_to_json(self.controls),
            "mode": self.mode.value,
        }
        if self.tol is not None:
            data["tol"] = self.tol
        if self.name:
            data["name"] = self.name
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "QuadraticSystem":
        """Create a system from a spec mapping (see :func:`validate_system`)."""
        return validate_system(data)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "QuadraticSystem":
        """
        Parse a spec JSON document.

        Raises:
            SpecError: invalid JSON (with line and column) or an invalid spec.
        """
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"Invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
        if not isinstance(data, dict):
            raise SpecError("A system spec must be a JSON object")
        return validate_system(data)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<QuadraticSystem{label} n={self.n} k={self.k} mode={self.mode.value}>"


def phi_by_components(sys: QuadraticSystem, x: Any) -> Vector:
    """
    ``Phi(x)`` evaluated one component at a time.

    Computes ``Q_v(x_{v+1}, x_{v+2}) = a_v x_{v+1}^2 + b_v x_{v+2}^2 +
    c_v x_{v+1} x_{v+2}`` with cyclic indices; independent of
    :meth:`QuadraticSystem.phi` and used to cross-check it.
    """
    x = sys.vector(x)
    n = sys.n
    out = []
    for v in range(n):
        xi, xj = x[(v + 1) % n], x[(v + 2) % n]
        out.append(sys.a[v] * xi * xi + sys.b[v] * xj * xj + sys.c[v] * xi * xj)
    return as_vector(out, sys.mode)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


_FIELDS = ("L", "a", "b", "c", "controls")


def validate_system(raw: Mapping[str, Any]) -> QuadraticSystem:
    """
    Validate a raw system spec.

    Accepted keys: ``L``, ``a``, ``b``, ``c``, ``controls`` (required), ``n``,
    ``k``, ``mode`` (``"rational"`` or ``"float"``), ``tol`` and ``name``
    (optional). Numbers may be integers, rational strings such as ``"-8/3"``
    or JSON floats. Without ``mode`` the system is RATIONAL when every entry
    is rational, FLOAT otherwise.

    Raises:
        ShapeMismatchError: L not ``n x n``, coefficient vectors or controls of
            the wrong length, or a control count different from ``n - k``.
        BadRankError: ``k`` outside ``1..n-1``.
        DependentControlsError: dependent control fields.
        SpecError: missing fields, unparsable numbers, non-finite values.
    """
    if not isinstance(raw, Mapping):
        raise SpecError("A system spec must be a mapping")
    for key in _FIELDS:
        if key not in raw:
            raise SpecError("Missing required field", field=key)

    mode = _resolve_mode(raw)
    tol = raw.get("tol")
    if tol is not None:
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or tol < 0:
            raise SpecError("tol must be a nonnegative number", field="tol")
        tol = float(tol)

    L_rows = raw["L"]
    if not isinstance(L_rows, (list, tuple)) or not L_rows:
        raise ShapeMismatchError("L must be a nonempty list of rows", field="L")
    n = len(L_rows)
    if "n" in raw and raw["n"] != n:
        raise ShapeMismatchError(f"L has {n} rows but n = {raw['n']}", field="L")
    if n < 2:
        raise ShapeMismatchError("The state dimension n must be at least 2", field="n")

    L = _parse_matrix(L_rows, mode, "L", n)
    a, b, c = (_parse_vector(raw[key], mode, key, n) for key in ("a", "b", "c"))

    controls_raw = raw["controls"]
    if not isinstance(controls_raw, (list, tuple)):
        raise ShapeMismatchError("controls must be a list of vectors", field="controls")
    m = len(controls_raw)
    k = raw.get("k", n - m)
    if isinstance(k, bool) or not isinstance(k, int) or not 1 <= k <= n - 1:
        raise BadRankError(f"k must be an integer in 1..{n - 1}, got {k!r}", field="k")
    if m != n - k:
        raise ShapeMismatchError(
            f"Expected n - k = {n - k} control vectors, got {m}", field="controls"
        )
    controls = tuple(
        _parse_vector(f, mode, f"controls[{i}]", n) for i, f in enumerate(controls_raw)
    )
    if rank(list(controls), mode, tol, ambient_dim=n) < m:
        raise DependentControlsError(
            "Control vector fields are linearly dependent", field="controls"
        )

    system = QuadraticSystem(
        n=n,
        k=k,
        L=_freeze(L),
        a=_freeze(a),
        b=_freeze(b),
        c=_freeze(c),
        controls=tuple(_freeze(f) for f in controls),
        mode=mode,
        tol=tol,
        name=str(raw.get("name") or ""),
    )
    logger.debug("Validated %r", system)
    return system


def _resolve_mode(raw: Mapping[str, Any]) -> ArithmeticMode:
    declared = raw.get("mode")
    if declared is None:
        return detect_mode([raw[key] for key in _FIELDS])
    try:
        return ArithmeticMode(declared)
    except ValueError as exc:
        raise SpecError(
            f"Unknown arithmetic mode {declared!r} (expected 'rational' or 'float')",
            field="mode",
        ) from exc


def _parse_vector(values: Any, mode: ArithmeticMode, name: str, n: int) -> Vector:
    if not isinstance(values, (list, tuple, np.ndarray)):
        raise ShapeMismatchError(f"{name} must be a vector of length {n}", field=name)
    try:
        vec = as_vector(values, mode, n)
    except DimensionError as exc:
        raise ShapeMismatchError(str(exc), field=name) from exc
    except ArithmeticModeError as exc:
        raise SpecError(str(exc), field=name) from exc
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise SpecError(f"Unparsable number in {name}: {exc}", field=name) from exc
    if mode is ArithmeticMode.FLOAT and not all(math.isfinite(x) for x in vec):
        raise SpecError("Non-finite value", field=name)
    return vec


def _parse_matrix(rows: Any, mode: ArithmeticMode, name: str, n: int) -> Matrix:
    parsed = [_parse_vector(r, mode, f"{name}[{i}]", n) for i, r in enumerate(rows)]
    return as_matrix(parsed, mode, shape=(n, n))


def _plain(values: Any) -> Any:
    if isinstance(values, np.ndarray):
        return values.tolist()
    if isinstance(values, (list, tuple)):
        return [_plain(v) for v in values]
    return values


def _plain_exact(value: Any) -> Any:
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain_exact(v) for v in value]
    if isinstance(value, float):
        return Fraction(value)
    return value


def _nonzero(array: np.ndarray) -> bool:
    return any(x != 0 for x in np.asarray(array).flat)
