"""
Exact Lie brackets of polynomial vector fields.

Brackets follow the convention ``[f, g](x) = Dg(x) f(x) - Df(x) g(x)``.
Coefficients are always exact rationals here: float systems are converted
bit-for-bit before any bracket is formed.

The oracle :func:`c0_span_at_origin` enumerates the left-normed brackets::

    ad_{X_l} ... ad_{X_1} f_j,   X_i in {f_0, f_1, ..., f_{n-k}}

evaluates them at the origin and returns their span, which must equal the
last subspace of the S-chain. Two facts keep the enumeration finite:

* a word of length ``s`` that will be bracketed at most ``max_len - s`` more
  times only matters through its jet of degree ``max_len - s`` (each bracket
  with a constant or degree-2 field lowers degrees by at most one), so jets
  are truncated there;
* ``ad_X`` is linear, so a word whose truncated jet depends linearly on the
  jets already kept at its length has descendants whose values are spanned
  by the descendants of the kept words. Such words are pruned.

An empty level means every longer bracket vanishes at the origin, so the
forest (not merely the span of values) is stationary and the search stops.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from quadctrl.constants import (
    DEFAULT_BRACKET_CAP,
    DEFAULT_ORACLE_DEPTH,
    ArithmeticMode,
    BracketKind,
)
from quadctrl.exceptions import ControlIndexError, DimensionError, ResourceCapError
from quadctrl.linalg import (
    Subspace,
    Vector,
    as_vector,
    extend,
    vector_to_json,
    zero_subspace,
)
from quadctrl.system import QuadraticSystem

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Polynomial = Dict[Monomial, Fraction]


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


def _degree(m: Monomial) -> int:
    return sum(m)


def _poly_add(p: Polynomial, q: Polynomial, sign: int = 1) -> Polynomial:
    out = dict(p)
    for mono, coeff in q.items():
        value = out.get(mono, 0) + sign * coeff
        if value:
            out[mono] = value
        else:
            out.pop(mono, None)
    return out


def _poly_scale(p: Polynomial, s: Fraction) -> Polynomial:
    if not s:
        return {}
    return {mono: s * coeff for mono, coeff in p.items()}


def _poly_mul_into(
    out: Polynomial, p: Polynomial, q: Polynomial, max_degree: Optional[int]
) -> None:
    for m1, c1 in p.items():
        d1 = _degree(m1)
        for m2, c2 in q.items():
            if max_degree is not None and d1 + _degree(m2) > max_degree:
                continue
            mono = tuple(x + y for x, y in zip(m1, m2))
            value = out.get(mono, 0) + c1 * c2
            if value:
                out[mono] = value
            else:
                out.pop(mono, None)


def _poly_deriv(p: Polynomial, var: int) -> Polynomial:
    out: Polynomial = {}
    for mono, coeff in p.items():
        e = mono[var]
        if e:
            lowered = mono[:var] + (e - 1,) + mono[var + 1 :]
            out[lowered] = out.get(lowered, 0) + coeff * e
    return {m: c for m, c in out.items() if c}


class PolyVectorField:
    """
    Vector field on R^n with exact polynomial components.

    Each component maps exponent tuples of length ``n`` to nonzero
    :class:`~fractions.Fraction` coefficients; zero coefficients are never
    stored.
    """

    __slots__ = ("n", "components")

    def __init__(self, n: int, components: Sequence[Polynomial]):
        if len(components) != n:
            raise DimensionError(f"Expected {n} components, got {len(components)}")
        self.n = n
        self.components: Tuple[Polynomial, ...] = tuple(
            {tuple(m): Fraction(c) for m, c in comp.items() if c} for comp in components
        )

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "PolyVectorField":
        return cls(n, [{} for _ in range(n)])

    @classmethod
    def constant(cls, vector: Iterable[Any]) -> "PolyVectorField":
        values = [_exact(v) for v in vector]
        n = len(values)
        origin = (0,) * n
        return cls(n, [{origin: v} if v else {} for v in values])

    @classmethod
    def drift_of(cls, sys: QuadraticSystem) -> "PolyVectorField":
        """The drift ``L x + Phi(x)`` of ``sys`` as an exact polynomial field."""
        exact = sys.rationalized()
        n = exact.n

        def mono(*pairs: Tuple[int, int]) -> Monomial:
            exps = [0] * n
            for var, power in pairs:
                exps[var] += power
            return tuple(exps)

        components: List[Polynomial] = []
        for v in range(n):
            comp: Polynomial = {}
            for j in range(n):
                if exact.L[v][j]:
                    comp[mono((j, 1))] = exact.L[v][j]
            i1, i2 = (v + 1) % n, (v + 2) % n
            for key, coeff in (
                (mono((i1, 2)), exact.a[v]),
                (mono((i2, 2)), exact.b[v]),
                (mono((i1, 1), (i2, 1)), exact.c[v]),
            ):
                if coeff:
                    comp[key] = comp.get(key, 0) + coeff
            components.append(comp)
        return cls(n, components)

    @classmethod
    def fields_of(cls, sys: QuadraticSystem) -> List["PolyVectorField"]:
        """``[f_0, f_1, ..., f_{n-k}]``; index 0 is the drift."""
        exact = sys.rationalized()
        return [cls.drift_of(exact)] + [cls.constant(f) for f in exact.controls]

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "PolyVectorField") -> None:
        if self.n != other.n:
            raise DimensionError(f"Vector fields on R^{self.n} and R^{other.n}")

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        self._check(other)
        return PolyVectorField(
            self.n, [_poly_add(p, q) for p, q in zip(self.components, other.components)]
        )

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        self._check(other)
        return PolyVectorField(
            self.n, [_poly_add(p, q, -1) for p, q in zip(self.components, other.components)]
        )

    def __neg__(self) -> "PolyVectorField":
        return self.scale(Fraction(-1))

    def scale(self, s: Any) -> "PolyVectorField":
        s = _exact(s)
        return PolyVectorField(self.n, [_poly_scale(p, s) for p in self.components])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.n == other.n and self.components == other.components

    def __hash__(self) -> int:
        return hash((self.n, tuple(frozenset(c.items()) for c in self.components)))

    # -- inspection --------------------------------------------------------

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero field."""
        return max((_degree(m) for comp in self.components for m in comp), default=-1)

    @property
    def is_zero(self) -> bool:
        return not any(self.components)

    def truncate(self, max_degree: int) -> "PolyVectorField":
        """Drop every monomial of degree above ``max_degree``."""
        return PolyVectorField(
            self.n,
            [
                {m: c for m, c in comp.items() if _degree(m) <= max_degree}
                for comp in self.components
            ],
        )

    def at_origin(self) -> Vector:
        origin = (0,) * self.n
        return as_vector([comp.get(origin, Fraction(0)) for comp in self.components],
                         ArithmeticMode.RATIONAL)

    def evaluate(self, point: Iterable[Any]) -> Vector:
        """Exact value at ``point``."""
        x = [_exact(v) for v in point]
        if len(x) != self.n:
            raise DimensionError(f"Point of length {len(x)} for a field on R^{self.n}")
        out = []
        for comp in self.components:
            total = Fraction(0)
            for mono, coeff in comp.items():
                term = coeff
                for xi, e in zip(x, mono):
                    if e:
                        term *= xi**e
                total += term
            out.append(total)
        return as_vector(out, ArithmeticMode.RATIONAL)

    def directional_derivative(
        self, direction: "PolyVectorField", max_degree: Optional[int] = None
    ) -> "PolyVectorField":
        """``D self . direction``, optionally truncated at ``max_degree``."""
        self._check(direction)
        partials = [[_poly_deriv(comp, j) for j in range(self.n)] for comp in self.components]
        out = []
        for row in partials:
            acc: Polynomial = {}
            for j, dp in enumerate(row):
                if dp and direction.components[j]:
                    _poly_mul_into(acc, dp, direction.components[j], max_degree)
            out.append(acc)
        return PolyVectorField(self.n, out)

    def sparse_items(self) -> Iterable[Tuple[Tuple[int, Monomial], Fraction]]:
        for v, comp in enumerate(self.components):
            for mono, coeff in comp.items():
                yield (v, mono), coeff

    def __repr__(self) -> str:
        return f"<PolyVectorField n={self.n} degree={self.degree}>"


def _exact(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    return Fraction(value)


def lie_bracket(
    f: PolyVectorField, g: PolyVectorField, max_degree: Optional[int] = None
) -> PolyVectorField:
    """``[f, g] = Dg f - Df g``, optionally truncated at ``max_degree``."""
    if f.n != g.n:
        raise DimensionError(f"Cannot bracket fields on R^{f.n} and R^{g.n}")
    return g.directional_derivative(f, max_degree) - f.directional_derivative(g, max_degree)


# ---------------------------------------------------------------------------
# Bracket words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BracketWord:
    """
    Binary bracket tree whose leaves are field indices (``0`` is the drift).

    Use :meth:`letter`, :meth:`bracket` or :meth:`left_normed` to build one.
    """

    leaf: Optional[int] = None
    left: Optional["BracketWord"] = None
    right: Optional["BracketWord"] = None

    @classmethod
    def letter(cls, index: int) -> "BracketWord":
        if index < 0:
            raise ValueError(f"Field indices are nonnegative, got {index}")
        return cls(leaf=index)

    @classmethod
    def bracket(cls, left: "BracketWord", right: "BracketWord") -> "BracketWord":
        return cls(left=left, right=right)

    @classmethod
    def left_normed(cls, letters: Sequence[int], j: int) -> "BracketWord":
        """``[X_l, [..., [X_1, f_j]]]`` for ``letters = (X_1, ..., X_l)``."""
        word = cls.letter(j)
        for x in letters:
            word = cls.bracket(cls.letter(x), word)
        return word

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None

    @property
    def leaves(self) -> List[int]:
        if self.is_leaf:
            return [self.leaf]  # type: ignore[list-item]
        return self.left.leaves + self.right.leaves  # type: ignore[union-attr]

    @property
    def degree(self) -> int:
        return len(self.leaves)

    def degree_counts(self, m: Optional[int] = None) -> Tuple[int, ...]:
        """Occurrences of each index ``0..m`` (``m`` defaults to the largest leaf)."""
        leaves = self.leaves
        top = max(leaves) if m is None else m
        return tuple(leaves.count(i) for i in range(top + 1))

    def is_bad(self, m: Optional[int] = None) -> bool:
        """Odd number of drift leaves and an even number of every control leaf."""
        counts = self.degree_counts(m)
        return counts[0] % 2 == 1 and all(c % 2 == 0 for c in counts[1:])

    def evaluate(self, fields: Sequence[PolyVectorField]) -> PolyVectorField:
        """The bracket as a vector field, ``fields[i]`` standing for leaf ``i``."""
        if self.is_leaf:
            if self.leaf >= len(fields):  # type: ignore[operator]
                raise ControlIndexError(f"No field for leaf index {self.leaf}")
            return fields[self.leaf]  # type: ignore[index]
        return lie_bracket(
            self.left.evaluate(fields),  # type: ignore[union-attr]
            self.right.evaluate(fields),  # type: ignore[union-attr]
        )

    def __str__(self) -> str:
        if self.is_leaf:
            return f"f{self.leaf}"
        return f"[{self.left},{self.right}]"


# ---------------------------------------------------------------------------
# The oracle
# ---------------------------------------------------------------------------


class _JetEchelon:
    """Incremental exact echelon form over sparse jets."""

    def __init__(self) -> None:
        self._rows: List[Tuple[Any, Dict[Any, Fraction]]] = []

    def add(self, jet: PolyVectorField) -> bool:
        vec: Dict[Any, Fraction] = dict(jet.sparse_items())
        for pivot, row in self._rows:
            factor = vec.get(pivot)
            if factor:
                for key, value in row.items():
                    updated = vec.get(key, 0) - factor * value
                    if updated:
                        vec[key] = updated
                    else:
                        vec.pop(key, None)
        if not vec:
            return False
        pivot = min(vec)
        scale = vec[pivot]
        self._rows.append((pivot, {key: value / scale for key, value in vec.items()}))
        return True


@dataclass
class _Node:
    word: BracketWord
    jet: PolyVectorField
    parent: Optional[str] = None


@dataclass(frozen=True)
class ForestEntry:
    """One enumerated bracket: its value at 0 and its membership in ``S_k``."""

    word: str
    length: int
    value: Tuple[Any, ...]
    in_s_k: Optional[bool]
    pruned: bool
    parent: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "word": self.word,
            "length": self.length,
            "value": vector_to_json(self.value),
            "in_s_k": self.in_s_k,
            "pruned": self.pruned,
            "parent": self.parent,
        }


@dataclass
class OracleResult:
    """
    Outcome of a bracket enumeration.

    Attributes:
        span: Span at the origin of the enumerated brackets (exact).
        lengths_explored: Longest word length evaluated.
        brackets_enumerated: Number of brackets computed.
        level_sizes: Kept (non-pruned) words per length.
        stop_reason: ``"full-rank"``, ``"empty-level"``, ``"max-length"`` or
            ``"stationary-window"``.
        forest: Every enumerated bracket when recording was requested.
    """

    span: Subspace
    lengths_explored: int
    brackets_enumerated: int
    level_sizes: List[int]
    stop_reason: str
    forest: List[ForestEntry] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rank": self.span.rank,
            "basis": self.span.to_dict()["basis"],
            "lengths_explored": self.lengths_explored,
            "brackets_enumerated": self.brackets_enumerated,
            "level_sizes": list(self.level_sizes),
            "stop_reason": self.stop_reason,
        }


def c0_oracle(
    sys: QuadraticSystem,
    max_len: int = DEFAULT_ORACLE_DEPTH,
    bracket_cap: int = DEFAULT_BRACKET_CAP,
    stationary_window: Optional[int] = None,
    workers: Optional[int] = None,
    record_forest: bool = False,
    s_k: Optional[Subspace] = None,
) -> OracleResult:
    """
    Enumerate left-normed brackets and span their values at the origin.

    Args:
        sys: Validated system; float data is rationalized exactly.
        max_len: Longest word length (``max_len = 1`` yields ``S_0``).
        bracket_cap: Hard limit on the number of computed brackets.
        stationary_window: If set, also stop once the value span has not
            grown for this many consecutive lengths.
        workers: Threads used to bracket the words of one length.
        record_forest: Keep every enumerated word for inspection.
        s_k: Subspace the forest entries are tested against.

    Raises:
        ValueError: ``max_len < 1``.
        ResourceCapError: more than ``bracket_cap`` brackets were needed.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be at least 1, got {max_len}")
    exact = sys.rationalized()
    fields = PolyVectorField.fields_of(exact)
    n = exact.n
    letters = list(range(len(fields)))

    span = zero_subspace(n, ArithmeticMode.RATIONAL)
    forest: List[ForestEntry] = []
    level_sizes: List[int] = []
    enumerated = 0
    unchanged = 0

    def keep_level(candidates: List[_Node], length: int) -> List[_Node]:
        nonlocal span
        echelon = _JetEchelon()
        kept: List[_Node] = []
        values: List[Vector] = []
        for node in candidates:
            independent = echelon.add(node.jet)
            if independent:
                kept.append(node)
                values.append(node.jet.at_origin())
            if record_forest:
                value = node.jet.at_origin()
                forest.append(
                    ForestEntry(
                        word=str(node.word),
                        length=length,
                        value=tuple(value),
                        in_s_k=s_k.contains(value) if s_k is not None else None,
                        pruned=not independent,
                        parent=node.parent,
                    )
                )
        span = extend(span, values)
        return kept

    level = keep_level(
        [
            _Node(BracketWord.letter(j), fields[j].truncate(max_len - 1))
            for j in letters[1:]
        ],
        1,
    )
    enumerated += len(letters) - 1
    level_sizes.append(len(level))
    length = 1
    stop_reason = "max-length"

    executor = ThreadPoolExecutor(max_workers=workers) if workers and workers > 1 else None
    try:
        while True:
            if span.is_full:
                stop_reason = "full-rank"
                break
            if not level:
                stop_reason = "empty-level"
                break
            if length >= max_len:
                stop_reason = "max-length"
                break
            enumerated += len(level) * len(letters)
            if enumerated > bracket_cap:
                raise ResourceCapError(
                    f"Bracket enumeration needs more than {bracket_cap} brackets "
                    f"(length {length + 1} of {max_len})"
                )
            degree = max_len - length - 1

            def children(node: _Node) -> List[_Node]:
                return [
                    _Node(
                        BracketWord.bracket(BracketWord.letter(x), node.word),
                        lie_bracket(fields[x], node.jet, degree),
                        parent=str(node.word),
                    )
                    for x in letters
                ]

            batches = executor.map(children, level) if executor else map(children, level)
            candidates = [child for batch in batches for child in batch]
            previous_rank = span.rank
            length += 1
            level = keep_level(candidates, length)
            level_sizes.append(len(level))
            logger.debug(
                "Oracle length %d: %d candidates, %d kept, span rank %d",
                length,
                len(candidates),
                len(level),
                span.rank,
            )
            unchanged = unchanged + 1 if span.rank == previous_rank else 0
            if stationary_window is not None and unchanged >= stationary_window:
                stop_reason = "stationary-window"
                break
    finally:
        if executor is not None:
            executor.shutdown()

    return OracleResult(
        span=span,
        lengths_explored=length,
        brackets_enumerated=enumerated,
        level_sizes=level_sizes,
        stop_reason=stop_reason,
        forest=forest,
    )


def c0_span_at_origin(
    sys: QuadraticSystem,
    max_len: int = DEFAULT_ORACLE_DEPTH,
    bracket_cap: int = DEFAULT_BRACKET_CAP,
    stationary_window: Optional[int] = None,
    workers: Optional[int] = None,
) -> Subspace:
    """Span at 0 of ``ad_{X_l}...ad_{X_1} f_j`` with ``l <= max_len - 1``."""
    return c0_oracle(sys, max_len, bracket_cap, stationary_window, workers).span


def bracket_forest(
    sys: QuadraticSystem,
    max_len: int = DEFAULT_ORACLE_DEPTH,
    s_k: Optional[Subspace] = None,
    bracket_cap: int = DEFAULT_BRACKET_CAP,
) -> List[ForestEntry]:
    """
    Every enumerated bracket with its value at 0.

    Pruned words are listed too; ``in_s_k`` is filled in when ``s_k`` (a
    RATIONAL subspace) is given.
    """
    result = c0_oracle(sys, max_len, bracket_cap, record_forest=True, s_k=s_k)
    return result.forest


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


_KIND_LETTERS = {
    BracketKind.MIXED2: 1,
    BracketKind.ORDER3: 2,
    BracketKind.ORDER4: 2,
}


def _control(sys: QuadraticSystem, index: Optional[int], name: str) -> Vector:
    if index is None or not 1 <= index <= sys.m:
        raise ControlIndexError(f"{name} = {index!r} outside 1..{sys.m}")
    return sys.controls[index - 1]


def closed_form_bracket(
    sys: QuadraticSystem,
    kind: Union[BracketKind, str],
    i: int,
    j: Optional[int] = None,
    l: Optional[int] = None,  # noqa: E741
) -> Vector:
    """
    Value at the origin of the bracket families with closed forms.

    ``AD``
        ``ad_{f0}^l f_i (0) = (-1)^l L^l f_i``; ``l`` is the power.
    ``MIXED2``
        ``[f_j, [f0, f_i]](0) = -Psi(f_i, f_j)``.
    ``ORDER3``
        ``[f_j, ad_{f0}^2 f_i](0) = L Psi(f_i, f_j) + Psi(f_j, L f_i) - Psi(f_i, L f_j)``.
    ``ORDER4``
        ``[f_l, [f_j, ad_{f0}^2 f_i]](0) = Psi(Psi(f_i, f_j), f_l) +
        Psi(Psi(f_i, f_l), f_j) - Psi(f_i, Psi(f_j, f_l))``; ``l`` is a
        control index.

    Control indices are 1-based.

    Raises:
        ControlIndexError: an index outside ``1..n-k``.
        ValueError: ``AD`` without a nonnegative power.
    """
    kind = BracketKind(kind)
    f_i = _control(sys, i, "i")
    L, psi = sys.L, sys.psi
    if kind is BracketKind.AD:
        if l is None or l < 0:
            raise ValueError("ad brackets need a nonnegative power l")
        out = f_i
        for _ in range(l):
            out = -(L @ out)
        return as_vector(out, sys.mode)
    f_j = _control(sys, j, "j")
    if kind is BracketKind.MIXED2:
        return -psi(f_i, f_j)
    if kind is BracketKind.ORDER3:
        return L @ psi(f_i, f_j) + psi(f_j, L @ f_i) - psi(f_i, L @ f_j)
    f_l = _control(sys, l, "l")
    return psi(psi(f_i, f_j), f_l) + psi(psi(f_i, f_l), f_j) - psi(f_i, psi(f_j, f_l))


def engine_bracket(
    sys: QuadraticSystem,
    kind: Union[BracketKind, str],
    i: int,
    j: Optional[int] = None,
    l: Optional[int] = None,  # noqa: E741
) -> Vector:
    """The bracket of :func:`closed_form_bracket` computed by the generic engine."""
    kind = BracketKind(kind)
    _control(sys, i, "i")
    if kind is BracketKind.AD:
        if l is None or l < 0:
            raise ValueError("ad brackets need a nonnegative power l")
        word = BracketWord.left_normed([0] * l, i)
    else:
        _control(sys, j, "j")
        prefix = [0] * _KIND_LETTERS[kind]
        if kind is not BracketKind.ORDER4:
            word = BracketWord.left_normed(prefix + [j], i)  # type: ignore[list-item]
        else:
            _control(sys, l, "l")
            word = BracketWord.left_normed(prefix + [j, l], i)  # type: ignore[list-item]
    return word.evaluate(PolyVectorField.fields_of(sys)).at_origin()
