"""
Scalar and subspace arithmetic shared by every analysis module.

Two arithmetic backends are supported:

RATIONAL
    Vectors are numpy object arrays of :class:`fractions.Fraction`. Subspace
    bases are kept in reduced row echelon form, so two subspaces are equal
    exactly when their bases are.

FLOAT
    Vectors are float64 arrays. Bases are orthonormal, built by Gram-Schmidt
    with largest-residual (column-norm) pivoting, and every rank decision is
    taken against an explicit tolerance.

Coercion is one-way. FLOAT accepts integers, Fractions and rational strings
and rounds each to the nearest binary64 value. RATIONAL never rounds: a float
that reaches a rational computation raises :class:`ArithmeticModeError`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral
from typing import Any, Iterable, List, Optional, Sequence, Sized, Tuple, Union

import numpy as np

from quadctrl.constants import ArithmeticMode
from quadctrl.exceptions import ArithmeticModeError, DimensionError

Scalar = Union[Fraction, float]
Vector = np.ndarray
Matrix = np.ndarray

EPS = float(np.finfo(float).eps)


# ---------------------------------------------------------------------------
# Scalars and coercion
# ---------------------------------------------------------------------------


def _is_rational_leaf(value: Any) -> bool:
    if isinstance(value, bool):
        return False
    return isinstance(value, (Integral, Fraction, str))


def detect_mode(values: Any) -> ArithmeticMode:
    """
    Pick the arithmetic mode for a (possibly nested) collection of numbers.

    RATIONAL when every leaf is an integer, a Fraction or a rational string,
    FLOAT otherwise.
    """
    if isinstance(values, np.ndarray):
        if values.dtype == object:
            return detect_mode(values.tolist())
        return (
            ArithmeticMode.RATIONAL
            if np.issubdtype(values.dtype, np.integer)
            else ArithmeticMode.FLOAT
        )
    if isinstance(values, (list, tuple)):
        for item in values:
            if detect_mode(item) is ArithmeticMode.FLOAT:
                return ArithmeticMode.FLOAT
        return ArithmeticMode.RATIONAL
    return ArithmeticMode.RATIONAL if _is_rational_leaf(values) else ArithmeticMode.FLOAT


def to_scalar(value: Any, mode: ArithmeticMode) -> Scalar:
    """
    Convert one number to the representation used by ``mode``.

    FLOAT rounds exact inputs to the nearest float. RATIONAL rejects floats.
    """
    if isinstance(value, bool):
        raise ArithmeticModeError(f"Booleans are not numbers here: {value!r}")
    if mode is ArithmeticMode.RATIONAL:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, Integral):
            return Fraction(int(value))
        if isinstance(value, str):
            return Fraction(value.strip())
        raise ArithmeticModeError(
            f"Floating-point value {value!r} in a rational computation"
        )
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


def as_vector(values: Any, mode: ArithmeticMode, n: Optional[int] = None) -> Vector:
    """
    Coerce ``values`` to a 1-D vector in ``mode``.

    Raises:
        ArithmeticModeError: a float reaches a rational computation, or a
            float array is passed where rationals are expected.
        DimensionError: the length differs from ``n``.
    """
    if isinstance(values, np.ndarray):
        if mode is ArithmeticMode.RATIONAL and values.dtype.kind == "f":
            raise ArithmeticModeError("Float array passed to a rational computation")
        if mode is ArithmeticMode.FLOAT and values.dtype == float:
            vec = values.astype(float).reshape(-1)
            _check_length(vec, n)
            return vec
        values = values.tolist()
    items = list(values)
    _check_length(items, n)
    if mode is ArithmeticMode.RATIONAL:
        return np.array([to_scalar(v, mode) for v in items] or [], dtype=object)
    return np.array([to_scalar(v, mode) for v in items], dtype=float)


def as_matrix(
    rows: Any, mode: ArithmeticMode, shape: Optional[Tuple[int, int]] = None
) -> Matrix:
    """Coerce a row-major nested sequence to a 2-D matrix in ``mode``."""
    row_list = [as_vector(r, mode) for r in rows]
    if row_list and len({len(r) for r in row_list}) != 1:
        raise DimensionError("Ragged matrix rows")
    n_cols = len(row_list[0]) if row_list else (shape[1] if shape else 0)
    if shape is not None and (len(row_list), n_cols) != tuple(shape):
        raise DimensionError(
            f"Expected a {shape[0]}x{shape[1]} matrix, got {len(row_list)}x{n_cols}"
        )
    dtype = object if mode is ArithmeticMode.RATIONAL else float
    if not row_list:
        return np.zeros((0, n_cols), dtype=dtype)
    return np.array([list(r) for r in row_list], dtype=dtype).reshape(len(row_list), n_cols)


def mode_of(array: np.ndarray) -> ArithmeticMode:
    """Mode carried by an already-coerced array."""
    return ArithmeticMode.RATIONAL if array.dtype == object else ArithmeticMode.FLOAT


def zeros(n: int, mode: ArithmeticMode) -> Vector:
    if mode is ArithmeticMode.RATIONAL:
        return np.array([Fraction(0)] * n, dtype=object)
    return np.zeros(n)


def unit(n: int, i: int, mode: ArithmeticMode) -> Vector:
    """Canonical basis vector e_{i+1} (``i`` is 0-based)."""
    vec = zeros(n, mode)
    vec[i] = Fraction(1) if mode is ArithmeticMode.RATIONAL else 1.0
    return vec


def is_zero_vector(v: Vector, tol: float = 0.0) -> bool:
    if v.dtype == object:
        return all(x == 0 for x in v)
    return bool(np.linalg.norm(v) <= tol)


def _check_length(items: Sized, n: Optional[int]) -> None:
    if n is not None and len(items) != n:
        raise DimensionError(f"Expected a vector of length {n}, got {len(items)}")


def _norm(v: Vector) -> float:
    return float(np.linalg.norm(np.asarray(v, dtype=float)))


def default_tol(vectors: Iterable[Vector], n: int) -> float:
    """``n * machine-epsilon * largest column norm`` (at least ``n * eps``)."""
    largest = max((_norm(v) for v in vectors), default=0.0)
    return n * EPS * max(largest, 1.0)


# ---------------------------------------------------------------------------
# Exact elimination helpers
# ---------------------------------------------------------------------------


def _rref(rows: List[List[Fraction]], n_cols: int) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form of ``rows``; returns nonzero rows and pivot columns."""
    m = [list(r) for r in rows]
    pivots: List[int] = []
    r = 0
    for c in range(n_cols):
        pivot_row = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        p = m[r][c]
        if p != 1:
            m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [x - factor * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def _gram_schmidt(
    vectors: Sequence[Vector], tol: float
) -> List[np.ndarray]:
    """Orthonormal basis with largest-residual pivoting."""
    if not vectors:
        return []
    originals = np.array([np.asarray(v, dtype=float) for v in vectors])
    thresholds = tol * np.maximum(1.0, np.linalg.norm(originals, axis=1))
    residual = originals.copy()
    basis: List[np.ndarray] = []
    active = np.ones(len(originals), dtype=bool)
    while active.any():
        norms = np.linalg.norm(residual, axis=1)
        active &= norms > thresholds
        if not active.any():
            break
        pick = int(np.argmax(np.where(active, norms, -1.0)))
        q = residual[pick] / norms[pick]
        basis.append(q)
        active[pick] = False
        residual = residual - np.outer(residual @ q, q)
    return basis


# ---------------------------------------------------------------------------
# Subspaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Subspace:
    """
    Linear subspace of R^n given by an ordered, linearly independent basis.

    The zero subspace has an empty basis, so ``rank == len(basis)`` always.
    In RATIONAL mode the basis is in reduced row echelon form; in FLOAT mode
    it is orthonormal and ``tol`` is the membership tolerance.
    """

    ambient_dim: int
    basis: Tuple[Tuple[Scalar, ...], ...]
    mode: ArithmeticMode = ArithmeticMode.RATIONAL
    tol: float = 0.0

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def is_full(self) -> bool:
        return self.rank == self.ambient_dim

    @property
    def vectors(self) -> List[Vector]:
        return [as_vector(b, self.mode) for b in self.basis]

    @property
    def matrix(self) -> Matrix:
        """Basis vectors as the rows of a ``rank x n`` matrix."""
        return as_matrix(self.basis, self.mode, shape=(self.rank, self.ambient_dim))

    def contains(self, v: Any) -> bool:
        return subspace_contains(self, v)

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __contains__(self, v: Any) -> bool:
        return subspace_contains(self, v)

    def to_dict(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "rank": self.rank,
            "mode": self.mode.value,
            "basis": [vector_to_json(b) for b in self.basis],
        }


def span_basis(
    vectors: Sequence[Any],
    mode: ArithmeticMode = ArithmeticMode.RATIONAL,
    tol: Optional[float] = None,
    ambient_dim: Optional[int] = None,
) -> Subspace:
    """
    Basis of the span of ``vectors``.

    Args:
        vectors: Vectors of a common length n.
        mode: Arithmetic backend.
        tol: FLOAT mode only. A vector is dependent when its residual after
            projection is at most ``tol * max(1, |v|)``. Defaults to
            :func:`default_tol`.
        ambient_dim: Required when ``vectors`` is empty.

    Raises:
        DimensionError: vectors of different lengths, or no way to infer n.
        ArithmeticModeError: floats passed in RATIONAL mode.
    """
    if ambient_dim is None:
        if not vectors:
            raise DimensionError("Cannot infer the ambient dimension of an empty span")
        ambient_dim = len(vectors[0])
    coerced = [as_vector(v, mode, ambient_dim) for v in vectors]
    if mode is ArithmeticMode.RATIONAL:
        rows, _ = _rref([list(v) for v in coerced], ambient_dim)
        basis = tuple(tuple(r) for r in rows)
        return Subspace(ambient_dim, basis, mode, 0.0)
    if tol is None:
        tol = default_tol(coerced, ambient_dim)
    if tol < 0:
        raise ValueError("Tolerance must be nonnegative")
    ortho = _gram_schmidt(coerced, tol)
    return Subspace(ambient_dim, tuple(tuple(float(x) for x in q) for q in ortho), mode, tol)


def zero_subspace(n: int, mode: ArithmeticMode, tol: float = 0.0) -> Subspace:
    return Subspace(n, (), mode, tol)


def _check_compatible(s: Subspace, v: Vector) -> None:
    if len(v) != s.ambient_dim:
        raise DimensionError(
            f"Vector of length {len(v)} tested against a subspace of R^{s.ambient_dim}"
        )


def subspace_contains(s: Subspace, v: Any) -> bool:
    """
    Membership test.

    RATIONAL: exact reduction against the echelon basis.
    FLOAT: the least-squares residual has norm at most ``tol * max(1, |v|)``.
    """
    vec = as_vector(v, s.mode)
    _check_compatible(s, vec)
    if s.mode is ArithmeticMode.RATIONAL:
        residual = list(vec)
        for row in s.basis:
            pivot = next(i for i, x in enumerate(row) if x != 0)
            factor = residual[pivot]
            if factor != 0:
                residual = [x - factor * y for x, y in zip(residual, row)]
        return all(x == 0 for x in residual)
    if not s.basis:
        return _norm(vec) <= s.tol * max(1.0, _norm(vec))
    q = np.array(s.basis, dtype=float)
    residual = vec - q.T @ (q @ vec)
    return bool(np.linalg.norm(residual) <= s.tol * max(1.0, _norm(vec)))


def subspace_sum(s1: Subspace, s2: Subspace) -> Subspace:
    """Smallest subspace containing both operands."""
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionError(
            f"Cannot add subspaces of R^{s1.ambient_dim} and R^{s2.ambient_dim}"
        )
    if s1.mode is not s2.mode:
        raise ArithmeticModeError("Cannot add subspaces of different arithmetic modes")
    return span_basis(
        list(s1.basis) + list(s2.basis),
        s1.mode,
        tol=max(s1.tol, s2.tol) if s1.mode is ArithmeticMode.FLOAT else None,
        ambient_dim=s1.ambient_dim,
    )


def extend(s: Subspace, vectors: Sequence[Any]) -> Subspace:
    """``s + span(vectors)`` keeping the tolerance of ``s``."""
    return span_basis(
        list(s.basis) + list(vectors),
        s.mode,
        tol=s.tol if s.mode is ArithmeticMode.FLOAT else None,
        ambient_dim=s.ambient_dim,
    )


def subspace_equal(s1: Subspace, s2: Subspace) -> bool:
    """Span equality by mutual membership."""
    if s1.ambient_dim != s2.ambient_dim or s1.rank != s2.rank:
        return False
    return all(s2.contains(b) for b in s1.basis) and all(s1.contains(b) for b in s2.basis)


def rank(
    vectors: Sequence[Any],
    mode: ArithmeticMode = ArithmeticMode.RATIONAL,
    tol: Optional[float] = None,
    ambient_dim: Optional[int] = None,
) -> int:
    return span_basis(vectors, mode, tol, ambient_dim).rank


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


def determinant(matrix: Any, mode: ArithmeticMode = ArithmeticMode.RATIONAL) -> Scalar:
    """Determinant of a square matrix; exact in RATIONAL mode."""
    m = as_matrix(matrix, mode)
    n_rows, n_cols = m.shape
    if n_rows != n_cols:
        raise DimensionError(f"Determinant of a non-square {n_rows}x{n_cols} matrix")
    if mode is ArithmeticMode.FLOAT:
        return float(np.linalg.det(m)) if n_rows else 1.0
    a = [list(r) for r in m]
    det = Fraction(1)
    for c in range(n_rows):
        pivot_row = next((i for i in range(c, n_rows) if a[i][c] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != c:
            a[c], a[pivot_row] = a[pivot_row], a[c]
            det = -det
        p = a[c][c]
        det *= p
        for i in range(c + 1, n_rows):
            if a[i][c] != 0:
                factor = a[i][c] / p
                a[i] = [x - factor * y for x, y in zip(a[i], a[c])]
    return det


def null_space(
    matrix: Any,
    mode: ArithmeticMode = ArithmeticMode.RATIONAL,
    tol: Optional[float] = None,
    n_cols: Optional[int] = None,
) -> Subspace:
    """Subspace ``{w : M w = 0}`` of R^(number of columns of M)."""
    m = as_matrix(matrix, mode)
    if m.shape[0] == 0:
        if n_cols is None:
            raise DimensionError("Cannot infer the column count of an empty matrix")
        cols = n_cols
    else:
        cols = m.shape[1]
    if m.shape[0] == 0:
        return span_basis(
            [unit(cols, i, mode) for i in range(cols)], mode, tol, ambient_dim=cols
        )
    if mode is ArithmeticMode.RATIONAL:
        rows, pivots = _rref([list(r) for r in m], cols)
        free = [c for c in range(cols) if c not in pivots]
        generators = []
        for f in free:
            w = [Fraction(0)] * cols
            w[f] = Fraction(1)
            for row, p in zip(rows, pivots):
                w[p] = -row[f]
            generators.append(w)
        return span_basis(generators, mode, ambient_dim=cols)
    _, sv, vt = np.linalg.svd(m.astype(float))
    if tol is None:
        tol = default_tol(list(m), cols)
    scale = max(1.0, float(sv[0]) if len(sv) else 1.0)
    numeric_rank = int(np.sum(sv > tol * scale))
    return span_basis(list(vt[numeric_rank:]), mode, tol, ambient_dim=cols)


def krylov(matrix: Matrix, vectors: Sequence[Vector], steps: int) -> List[Vector]:
    """``[v, Mv, ..., M^steps v]`` for every ``v`` in ``vectors``."""
    out: List[Vector] = []
    for v in vectors:
        current = v
        out.append(current)
        for _ in range(steps):
            current = matrix @ current
            out.append(current)
    return out


def is_semidefinite(
    q: Any, mode: ArithmeticMode = ArithmeticMode.RATIONAL, tol: float = 0.0
) -> Optional[int]:
    """
    Sign-definiteness of a symmetric matrix.

    Returns:
        ``1`` for a nonzero positive semidefinite matrix, ``-1`` for a nonzero
        negative semidefinite one, ``0`` for the zero matrix and ``None`` when
        the form is indefinite.

    RATIONAL mode eliminates with symmetric diagonal pivots, which decides the
    same question as checking every principal minor, exactly. FLOAT mode
    compares the extreme eigenvalues with ``tol`` times the spectral scale.
    """
    m = as_matrix(q, mode)
    if mode is ArithmeticMode.RATIONAL:
        if all(x == 0 for x in m.flat):
            return 0
        if _psd_exact([list(r) for r in m]):
            return 1
        if _psd_exact([[-x for x in r] for r in m]):
            return -1
        return None
    eig = np.linalg.eigvalsh(m.astype(float))
    scale = max(1.0, float(np.max(np.abs(eig)))) if len(eig) else 1.0
    if np.all(np.abs(eig) <= tol * scale):
        return 0
    if eig[0] >= -tol * scale:
        return 1
    if eig[-1] <= tol * scale:
        return -1
    return None


def _psd_exact(a: List[List[Fraction]]) -> bool:
    remaining = list(range(len(a)))
    while remaining:
        if any(a[i][i] < 0 for i in remaining):
            return False
        pivot = next((i for i in remaining if a[i][i] > 0), None)
        if pivot is None:
            return all(a[i][j] == 0 for i in remaining for j in remaining)
        remaining.remove(pivot)
        p = a[pivot][pivot]
        for i in remaining:
            if a[i][pivot] == 0:
                continue
            factor = a[i][pivot] / p
            for j in remaining:
                a[i][j] -= factor * a[pivot][j]
    return True


def hodge_complement(
    vectors: Sequence[Any], mode: ArithmeticMode = ArithmeticMode.RATIONAL
) -> Vector:
    """
    Generalized cross product of ``n - 1`` vectors in R^n.

    Component ``i`` is the signed minor obtained by expanding the formal
    determinant whose first row holds the unit vectors. The result is
    orthogonal to every input and vanishes iff the inputs are dependent.
    """
    if not vectors:
        raise DimensionError("hodge_complement needs n - 1 >= 1 vectors")
    n = len(vectors) + 1
    m = as_matrix(vectors, mode)
    if m.shape != (n - 1, n):
        raise DimensionError(
            f"hodge_complement needs {n - 1} vectors of length {n}, got shape {m.shape}"
        )
    out = zeros(n, mode)
    for i in range(n):
        minor = np.delete(m, i, axis=1)
        value = determinant(minor, mode) if n > 1 else 1
        out[i] = value if i % 2 == 0 else -value
    return out


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------


def scalar_to_json(value: Any) -> Union[str, float, int]:
    """Rationals as ``"p/q"`` (``"p"`` for integers), floats as numbers."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, Integral):
        return str(int(value))
    return float(value)


def scalar_from_json(value: Any) -> Scalar:
    """Inverse of :func:`scalar_to_json`; JSON floats stay floats."""
    if isinstance(value, bool):
        raise ValueError(f"Booleans are not numbers: {value!r}")
    if isinstance(value, (Integral, str)):
        return Fraction(value.strip() if isinstance(value, str) else int(value))
    if isinstance(value, float):
        return value
    raise ValueError(f"Not a number: {value!r}")


def vector_to_json(v: Iterable[Any]) -> List[Union[str, float, int]]:
    return [scalar_to_json(x) for x in v]


def matrix_to_json(m: Iterable[Iterable[Any]]) -> List[List[Union[str, float, int]]]:
    return [vector_to_json(r) for r in m]
