"""
Test exact sparse matrices.
"""

import pytest

from conftest import q
from qforge.errors import SingularMatrixError
from qforge.exactq import Scalar
from qforge.sparse import SparseMat, product


@pytest.fixture
def upper():
    # [[1, q], [0, q^2]]
    return SparseMat.from_entries([(0, 0, q(0, 1)), (0, 1, q(1, 1)), (1, 1, q(2, 1))], (2, 2), 1)


class TestSparseMat:
    def test_zero_entries_are_dropped(self):
        m = SparseMat.from_entries([(0, 0, q(1, 1)), (0, 0, q(1, 1, -1))], (2, 2), 1)
        assert m.is_zero()
        assert m.get(0, 0).is_zero()

    def test_inverse(self, upper):
        assert upper @ upper.inverse() == SparseMat.identity(2, 1)

    def test_singular(self):
        m = SparseMat.from_entries([(0, 0, q(1, 1)), (1, 0, q(1, 1))], (2, 2), 1)
        with pytest.raises(SingularMatrixError):
            m.inverse()

    def test_flip_squares_to_identity(self):
        P = SparseMat.flip(3, 1)
        assert P @ P == SparseMat.identity(9, 1)
        # v_0 ⊗ v_1 -> v_1 ⊗ v_0
        assert P.get(0 * 3 + 1, 1 * 3 + 0).is_one()

    def test_kron_index_is_row_major(self, upper):
        k = upper.kron(SparseMat.identity(2, 1))
        assert k.get(0 * 2 + 1, 1 * 2 + 1) == q(1, 1)
        assert k.nnz() == 2 * upper.nnz()

    def test_transpose_and_product(self, upper):
        assert upper.transpose().transpose() == upper
        assert product([upper, upper.inverse(), upper]) == upper

    def test_add_scalar_identity(self, upper):
        shifted = upper.add_scalar_identity(-Scalar.one(1))
        assert shifted.get(0, 0).is_zero()
        assert shifted.get(1, 1) == q(2, 1) - 1

    def test_submatrix(self, upper):
        assert upper.submatrix([1], [1]) == SparseMat.diagonal([q(2, 1)], 1)

    def test_apply(self, upper):
        assert upper.apply({1: Scalar.one(1)}) == {0: q(1, 1), 1: q(2, 1)}
