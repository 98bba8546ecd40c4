"""
Unit tests for the exact and floating-point linear algebra layer.
"""

from fractions import Fraction

import numpy as np
import pytest

from quadctrl.constants import ArithmeticMode
from quadctrl.exceptions import ArithmeticModeError, DimensionError
from quadctrl.linalg import (
    as_matrix,
    as_vector,
    detect_mode,
    determinant,
    hodge_complement,
    is_semidefinite,
    krylov,
    null_space,
    rank,
    scalar_from_json,
    scalar_to_json,
    span_basis,
    subspace_contains,
    subspace_equal,
    subspace_sum,
)

R = ArithmeticMode.RATIONAL
F = ArithmeticMode.FLOAT


def _random_subspace(rng, n=4):
    rows = rng.integers(-3, 4, size=(int(rng.integers(0, 4)), n)).tolist()
    return span_basis(rows, R, ambient_dim=n)


class TestModes:
    """Test mode detection and coercion."""

    def test_integers_and_rational_strings_are_rational(self):
        """Integers, Fractions and "p/q" strings select RATIONAL mode."""
        assert detect_mode([[1, 2], ["8/3", Fraction(1, 2)]]) is R

    def test_any_float_selects_float(self):
        """A single float anywhere selects FLOAT mode."""
        assert detect_mode([[1, 2], [3, 0.5]]) is F

    def test_rational_string_is_read_exactly(self):
        """Decimal strings become exact fractions."""
        vec = as_vector(["2.5", "-8/3", 1], R)
        assert list(vec) == [Fraction(5, 2), Fraction(-8, 3), Fraction(1)]

    def test_float_in_rational_computation_rejected(self):
        """Floats cannot enter a RATIONAL computation."""
        with pytest.raises(ArithmeticModeError):
            as_vector([1, 0.5], R)

    def test_float_mode_rounds_exact_inputs(self):
        """Integers, Fractions and rational strings are rounded into FLOAT mode."""
        vec = as_vector([Fraction(1, 3), "2/3", 1], F)
        assert vec.dtype == float
        assert vec.tolist() == [1 / 3, 2 / 3, 1.0]

    def test_length_checked(self):
        """A vector of the wrong length raises DimensionError."""
        with pytest.raises(DimensionError):
            as_vector([1, 2], R, n=3)

    def test_ragged_matrix_rejected(self):
        """Rows of different lengths raise DimensionError."""
        with pytest.raises(DimensionError):
            as_matrix([[1, 2], [3]], R)


class TestSpanBasis:
    """Test span_basis and rank."""

    def test_dependent_vectors_dropped(self):
        """e1, e2, e1 + e2 span a plane."""
        s = span_basis([[1, 0, 0], [0, 1, 0], [1, 1, 0]], R)
        assert s.rank == 2
        assert not s.is_full

    def test_zero_vectors_span_zero_subspace(self):
        """Zero vectors contribute nothing."""
        assert span_basis([[0, 0], [0, 0]], R).rank == 0

    def test_empty_span_needs_ambient_dimension(self):
        """An empty list needs ambient_dim."""
        assert span_basis([], R, ambient_dim=4).rank == 0
        with pytest.raises(DimensionError):
            span_basis([], R)

    def test_rational_basis_is_reduced_echelon(self):
        """The exact basis is in reduced row echelon form."""
        s = span_basis([[2, 4, 0], [1, 3, 1]], R)
        assert s.basis == (
            (Fraction(1), Fraction(0), Fraction(-2)),
            (Fraction(0), Fraction(1), Fraction(1)),
        )

    def test_float_tolerance_decides_near_dependence(self):
        """With tol = 1e-9 a 1e-12 perturbation is dependent; by default it is not."""
        vectors = [[1.0, 0.0], [1.0, 1e-12]]
        assert span_basis(vectors, F, tol=1e-9).rank == 1
        assert span_basis(vectors, F).rank == 2

    def test_float_basis_is_orthonormal(self):
        """FLOAT bases are orthonormal."""
        s = span_basis([[1.0, 1.0, 0.0], [1.0, 2.0, 3.0]], F)
        q = np.array(s.basis)
        assert np.allclose(q @ q.T, np.eye(2))

    def test_rank_matches_numpy_on_random_integer_matrices(self, rng):
        """Exact rank agrees with numpy's rank on small integer matrices."""
        for _ in range(50):
            m = rng.integers(-2, 3, size=(4, 5))
            assert rank(m.tolist(), R) == np.linalg.matrix_rank(m.astype(float))

    def test_exact_and_float_rank_agree(self, rng):
        """With tol = 2^-30 the float rank equals the exact rank on integers up to 10."""
        for _ in range(200):
            n_rows = int(rng.integers(1, 6))
            if rng.random() < 0.5:
                rows = rng.integers(-10, 11, size=(n_rows, 5))
            else:
                base = rng.integers(-5, 6, size=(n_rows, 5))
                i, j = rng.integers(0, n_rows, size=2)
                rows = np.vstack([base, base[i] + base[j], -base[i]])
            assert rank(rows.tolist(), R) == rank(rows.astype(float).tolist(), F, tol=2**-30)


class TestSubspaceOperations:
    """Test membership, sums and equality."""

    def test_membership_exact(self):
        """(2, 3, 0) is in span{e1, e2}; e3 is not."""
        s = span_basis([[1, 0, 0], [0, 1, 0]], R)
        assert subspace_contains(s, [2, 3, 0])
        assert [0, 0, 1] not in s

    def test_membership_float_uses_tolerance(self):
        """A residual below tol counts as membership."""
        s = span_basis([[1.0, 0.0, 0.0]], F, tol=1e-9)
        assert s.contains([5.0, 1e-12, 0.0])
        assert not s.contains([5.0, 1e-3, 0.0])

    def test_membership_dimension_checked(self):
        """Testing a vector of the wrong length raises DimensionError."""
        s = span_basis([[1, 0, 0]], R)
        with pytest.raises(DimensionError):
            s.contains([1, 0])

    def test_sum(self):
        """span{e1} + span{e2} is the plane."""
        s = span_basis([[1, 0, 0]], R) + span_basis([[0, 1, 0]], R)
        assert s.rank == 2
        assert s.contains([1, 1, 0])

    def test_sum_of_mixed_modes_rejected(self):
        """Adding a RATIONAL and a FLOAT subspace fails."""
        with pytest.raises(ArithmeticModeError):
            subspace_sum(span_basis([[1, 0]], R), span_basis([[0.0, 1.0]], F))

    def test_equality_by_mutual_membership(self):
        """Different bases of the same plane are equal subspaces."""
        s1 = span_basis([[1, 1, 0], [1, -1, 0]], R)
        s2 = span_basis([[1, 0, 0], [0, 1, 0]], R)
        assert subspace_equal(s1, s2)
        assert not subspace_equal(s1, span_basis([[1, 0, 0], [0, 0, 1]], R))

    def test_sum_is_commutative_and_associative(self, rng):
        """Sums agree whatever the order or grouping of the operands."""
        for _ in range(100):
            s1, s2, s3 = (_random_subspace(rng) for _ in range(3))
            assert subspace_equal(s1 + s2, s2 + s1)
            assert (s1 + s2).basis == (s2 + s1).basis
            assert subspace_equal((s1 + s2) + s3, s1 + (s2 + s3))

    def test_float_sum_is_commutative(self, rng):
        """FLOAT sums span the same space in either order."""
        for _ in range(50):
            rows = rng.integers(-3, 4, size=(4, 4)).astype(float)
            s1 = span_basis(list(rows[:2]), F, tol=1e-9)
            s2 = span_basis(list(rows[2:]), F, tol=1e-9)
            assert subspace_equal(s1 + s2, s2 + s1)

    def test_span_of_a_basis_is_the_same_subspace(self, rng):
        """Re-spanning a basis returns it unchanged."""
        for _ in range(100):
            s = _random_subspace(rng)
            assert span_basis(list(s.basis), R, ambient_dim=s.ambient_dim).basis == s.basis
            rows = rng.integers(-3, 4, size=(3, 4)).astype(float)
            sf = span_basis(list(rows), F, tol=1e-9)
            again = span_basis(list(sf.basis), F, tol=1e-9, ambient_dim=4)
            assert subspace_equal(again, sf)

    def test_basis_does_not_depend_on_row_order(self, rng):
        """The reduced echelon basis is the same for every ordering of the generators."""
        for _ in range(50):
            rows = rng.integers(-4, 5, size=(4, 5)).tolist()
            order = rng.permutation(len(rows))
            shuffled = [rows[i] for i in order]
            assert span_basis(shuffled, R).basis == span_basis(rows, R).basis


class TestMatrices:
    """Test determinant, null space, Krylov sequences and definiteness."""

    def test_determinant_exact(self):
        """det [[1, 2], [3, 4]] = -2 exactly."""
        assert determinant([[1, 2], [3, 4]]) == Fraction(-2)
        assert determinant([["1/2", 0], [0, "2/3"]]) == Fraction(1, 3)

    def test_determinant_singular(self):
        """A singular matrix has determinant 0."""
        assert determinant([[1, 2], [2, 4]]) == 0

    def test_determinant_needs_square_matrix(self):
        """Non-square matrices raise DimensionError."""
        with pytest.raises(DimensionError):
            determinant([[1, 2, 3], [4, 5, 6]])

    def test_null_space(self):
        """The kernel of [1 1 0] is span{(1, -1, 0), e3}."""
        kernel = null_space([[1, 1, 0]])
        assert kernel.rank == 2
        assert kernel.contains([1, -1, 0])
        assert kernel.contains([0, 0, 1])
        assert not kernel.contains([1, 0, 0])

    def test_null_space_of_empty_matrix_is_everything(self):
        """No constraints leave the whole space."""
        assert null_space(np.zeros((0, 3), dtype=object), n_cols=3).is_full

    def test_null_space_float(self):
        """Float kernels agree with the exact one."""
        kernel = null_space([[1.0, 2.0], [2.0, 4.0]], F, tol=1e-9)
        assert kernel.rank == 1
        assert kernel.contains([2.0, -1.0])

    def test_krylov_order(self):
        """Vectors come as [v, Mv, M^2 v] per input vector."""
        M = as_matrix([[0, 1], [0, 0]], R)
        seq = krylov(M, [as_vector([0, 1], R)], 2)
        assert [list(v) for v in seq] == [[0, 1], [1, 0], [0, 0]]

    @pytest.mark.parametrize(
        "matrix, expected",
        [
            ([[1, 0], [0, 0]], 1),
            ([[-1, 0], [0, 0]], -1),
            ([[0, 0], [0, 0]], 0),
            ([[1, 0], [0, -1]], None),
            ([[0, 1], [1, 0]], None),
            ([[1, 1], [1, 1]], 1),
            ([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]], 1),
        ],
    )
    def test_semidefinite_exact(self, matrix, expected):
        """Exact sign-definiteness of small symmetric matrices."""
        assert is_semidefinite(matrix) == expected

    def test_semidefinite_float(self):
        """The float test agrees on a PSD and an indefinite matrix."""
        assert is_semidefinite([[2.0, 1.0], [1.0, 2.0]], F, 1e-9) == 1
        assert is_semidefinite([[1.0, 2.0], [2.0, 1.0]], F, 1e-9) is None

    def test_semidefinite_agrees_with_eigenvalues(self, rng):
        """Exact and eigenvalue-based answers agree on random Gram-type matrices."""
        for _ in range(40):
            A = rng.integers(-2, 3, size=(3, 2))
            G = (A @ A.T).tolist()
            assert is_semidefinite(G) in (0, 1)
            negated = [[-x for x in row] for row in G]
            assert is_semidefinite(negated) in (0, -1)


class TestHodgeComplement:
    """Test the generalized cross product."""

    def test_cross_product_of_unit_vectors(self):
        """e1 and e2 give e3."""
        assert list(hodge_complement([[1, 0, 0], [0, 1, 0]])) == [0, 0, 1]

    def test_orthogonal_to_inputs(self, rng):
        """The complement is orthogonal to every input vector."""
        for _ in range(30):
            vectors = rng.integers(-3, 4, size=(3, 4)).tolist()
            h = hodge_complement(vectors)
            for v in vectors:
                assert sum(Fraction(x) * y for x, y in zip(v, h)) == 0

    def test_vanishes_on_dependent_inputs(self):
        """Dependent inputs give the zero vector."""
        assert all(x == 0 for x in hodge_complement([[1, 2, 3], [2, 4, 6]]))

    def test_shape_checked(self):
        """n - 1 vectors of length n are required."""
        with pytest.raises(DimensionError):
            hodge_complement([[1, 0, 0]])


class TestJsonScalars:
    """Test scalar serialization."""

    def test_rationals_render_as_strings(self):
        """Fractions render as "p/q" and integers as "p"."""
        assert scalar_to_json(Fraction(8, 3)) == "8/3"
        assert scalar_to_json(Fraction(4)) == "4"
        assert scalar_to_json(2.5) == 2.5

    def test_parsing(self):
        """Strings parse exactly, JSON floats stay floats, booleans are rejected."""
        assert scalar_from_json("-2630/9") == Fraction(-2630, 9)
        assert scalar_from_json("2.5") == Fraction(5, 2)
        assert scalar_from_json(0.25) == 0.25
        with pytest.raises(ValueError):
            scalar_from_json(True)
