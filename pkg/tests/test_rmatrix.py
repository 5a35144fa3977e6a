"""
Test the braided R-matrix construction and its structural checks.
"""

from fractions import Fraction

import pytest

from conftest import q
from qforge.errors import QForgeError
from qforge.exactq import Scalar
from qforge.repmod import load_module
from qforge.rmatrix import (
    DEFAULT_CONVENTION,
    MINUS_CONVENTIONS,
    CheckMode,
    RMatrix,
    assemble_slices,
    braid_operator,
    candidate_conventions,
    check_diagonal_is_pairing,
    check_extreme_columns,
    check_intertwiner,
    check_qybe,
    check_triangular,
    coproduct_label,
    export_rmatrix,
    lplus_slice,
    mutate_entry,
    replace_diagonal_part,
    root_vectors,
    rvv,
    select_columns,
    select_convention,
)
from qforge.sparse import SparseMat


@pytest.fixture(scope="module")
def small_reps():
    return {name: load_module(name) for name in ("an_vector", "cn_vector", "dn_vector", "b3_spin8")}


class TestConventions:
    """Candidate enumeration and the self-test"""

    def test_default_first(self):
        candidates = candidate_conventions()
        assert candidates[0] == DEFAULT_CONVENTION
        assert len(set(candidates)) == len(candidates)

    def test_selection_is_stable(self):
        assert select_convention() == select_convention()

    def test_check_mode_parsing(self):
        assert CheckMode.parse("full").kind == "full"
        mode = CheckMode.parse("sampled:50", seed=7)
        assert (mode.kind, mode.n, mode.seed) == ("sampled", 50, 7)
        assert mode.label == "sampled:50"
        with pytest.raises(ValueError):
            CheckMode.parse("sampled:0")
        with pytest.raises(ValueError):
            CheckMode.parse("half")

    def test_sampled_columns_are_reproducible(self):
        mode = CheckMode("sampled", 10, 3)
        first = select_columns(4, mode)
        assert first == select_columns(4, mode)
        assert len(first) == 10
        assert select_columns(4, CheckMode()) == list(range(64))


class TestBraidAndRootVectors:
    """Lusztig operators on minuscule modules"""

    def test_braid_operator_inverse(self, d5_rep):
        conv = select_convention()
        for i in range(1, 6):
            T = braid_operator(d5_rep, i, conv)
            T_inv = braid_operator(d5_rep, i, conv, inverse=True)
            assert T @ T_inv == SparseMat.identity(d5_rep.dim, d5_rep.L)

    def test_first_root_vector_is_simple(self, d5_rep):
        rvs = root_vectors(d5_rep)
        first = rvs.vectors[0]
        assert first.E == d5_rep.matE[first.simple_index]
        assert len(rvs.vectors) == 20

    def test_non_reduced_word(self, d5_rep):
        with pytest.raises(QForgeError):
            root_vectors(d5_rep, word=[1, 1])


class TestD5Anchors:
    """Entries quoted for the 16-dimensional module"""

    def test_diagonal_anchor(self, d5_rep, d5_R):
        a, b = d5_rep.index_of(1), d5_rep.index_of(2)
        assert d5_R.entry(b, a, b, a) == q(Fraction(1, 4), 4)

    def test_off_diagonal_anchor(self, d5_rep, d5_R):
        a, b = d5_rep.index_of(1), d5_rep.index_of(2)
        assert d5_R.entry(a, b, b, a) == q(Fraction(1, 4), 4) * Scalar.q_minus_qinv(4)

    def test_pr_anchor(self, d5_rep, d5_R):
        a, top = d5_rep.index_of(1), d5_rep.index_of(16)
        assert d5_R.pr().get(d5_R.index(a, top), d5_R.index(top, a)) == q(Fraction(-3, 4), 4)

    def test_top_diagonal(self, d5_rep, d5_R):
        top = d5_rep.highest
        assert d5_R.entry(top, top, top, top) == q(Fraction(5, 4), 4)


class TestStructure:
    """Properties every R_VV must have"""

    def test_d5_structure(self, d5_R):
        assert check_triangular(d5_R)
        assert check_diagonal_is_pairing(d5_R)
        assert check_extreme_columns(d5_R)

    def test_d5_intertwiner(self, d5_rep, d5_R):
        assert check_intertwiner(d5_rep, d5_R)

    def test_tail_alone_is_not_an_intertwiner(self, d5_rep, d5_R):
        assert not check_intertwiner(d5_rep, replace_diagonal_part(d5_rep, d5_R))

    def test_identity_is_not_an_intertwiner(self, d5_rep, d5_R):
        identity = d5_R.with_matrix(SparseMat.identity(d5_R.p ** 2, d5_R.L), label="identity")
        assert not check_intertwiner(d5_rep, identity)

    def test_product_inverse(self, d5_R):
        assert d5_R.matrix @ d5_R.inverse() == SparseMat.identity(d5_R.p ** 2, d5_R.L)

    def test_d5_qybe_full(self, d5_R):
        assert check_qybe(d5_R, CheckMode("full"), threads=2)

    @pytest.mark.parametrize("name", ["an_vector", "cn_vector", "dn_vector", "b3_spin8"])
    def test_small_modules(self, small_reps, name):
        rep = small_reps[name]
        R = rvv(rep, select_convention())
        assert check_triangular(R)
        assert check_intertwiner(rep, R)
        assert check_qybe(R, CheckMode("full"))

    def test_mutation_breaks_qybe(self, small_reps):
        R = rvv(small_reps["an_vector"], select_convention())
        assert not check_qybe(mutate_entry(R), CheckMode("full"))

    def test_e6_structure(self, e6_rep, e6_R):
        assert check_triangular(e6_R)
        assert check_intertwiner(e6_rep, e6_R)

    @pytest.mark.slow
    def test_e6_qybe_full(self, e6_R):
        assert check_qybe(e6_R, CheckMode("full"), threads=2)

    @pytest.mark.slow
    def test_e7_sampled(self, e7_rep, e7_R):
        assert check_intertwiner(e7_rep, e7_R)
        assert check_qybe(e7_R, CheckMode("sampled", 200, 0), threads=2)


class TestCoproduct:
    """Which coproduct R_VV intertwines"""

    def test_inverse_group_like_is_intertwined(self, d5_rep, d5_R):
        assert check_intertwiner(d5_rep, d5_R, k_power=-1)

    def test_textbook_coproduct_is_not(self, d5_rep, d5_R):
        assert not check_intertwiner(d5_rep, d5_R, k_power=1)

    def test_labels(self):
        assert coproduct_label() == "Δ(E)=E⊗K^-1+1⊗E, Δ(F)=F⊗1+K⊗F"
        assert coproduct_label(1) == "Δ(E)=E⊗K+1⊗E, Δ(F)=F⊗1+K^-1⊗F"


class TestSlices:
    """p×p blocks used by the m± matrices"""

    def test_slice_vanishes_off_roots(self, d5_rep, d5_R):
        a, top = d5_rep.index_of(1), d5_rep.index_of(16)
        # wt_16 - wt_1 is not a negative root
        assert lplus_slice(d5_R, "plus", top, a).is_zero()

    def test_diagonal_slice_is_diagonal(self, d5_rep, d5_R):
        b = d5_rep.index_of(2)
        for convention in MINUS_CONVENTIONS:
            assert lplus_slice(d5_R, "minus", b, b, convention).is_diagonal()
        assert lplus_slice(d5_R, "plus", b, b).is_diagonal()

    def test_plus_slices_assemble_to_r_inverse(self, d5_R):
        assert assemble_slices(d5_R, "plus") == d5_R.inverse()

    def test_m_plus_is_blockwise_inverse_of_l_plus(self, d5_R):
        p, L = d5_R.p, d5_R.L

        def l_plus(a, j):
            return d5_R.matrix.submatrix([d5_R.index(a, z) for z in range(p)], [d5_R.index(j, y) for y in range(p)])

        for i in range(p):
            for j in range(p):
                acc = SparseMat.zeros(p, p, L)
                for a in range(p):
                    acc = acc + lplus_slice(d5_R, "plus", i, a) @ l_plus(a, j)
                expected = SparseMat.identity(p, L) if i == j else SparseMat.zeros(p, p, L)
                assert acc == expected, (i, j)

    def test_unknown_slice(self, d5_R):
        with pytest.raises(ValueError):
            lplus_slice(d5_R, "sideways", 0, 0)


class TestExport:
    def test_export_uses_one_based_indices(self, d5_R):
        data = export_rmatrix(d5_R)
        assert data["dim"] == 16
        assert len(data["entries"]) == d5_R.matrix.nnz()
        assert all(1 <= x <= 16 for entry in data["entries"] for x in entry[:4])

    def test_with_matrix_keeps_module_data(self, d5_R):
        copy = d5_R.with_matrix(d5_R.matrix, label="copy")
        assert isinstance(copy, RMatrix)
        assert copy.p == d5_R.p and copy.convention == "copy"
