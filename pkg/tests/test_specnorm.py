"""
Test minimal polynomials, normalization and the companion matrix R'.
"""

from fractions import Fraction

import pytest

from conftest import q
from qforge.errors import SpectralError
from qforge.exactq import Scalar
from qforge.rmatrix import CheckMode
from qforge.rootsys import Weight, weight_norm
from qforge.specnorm import (
    apply_poly,
    build_rprime,
    check_vector_algebra_conditions,
    closed_form_for,
    eigen_scalar,
    min_poly,
    monomial_roots,
    parse_eigenvalues,
    poly_degree,
    poly_from_roots,
    select_eigenvalue,
    top_eigenvalue,
    top_eigenvalue_matches,
)
from qforge.sparse import SparseMat


def _top_pair(rep):
    p = rep.highest
    (pp, _), = rep.predecessors(p)
    return p, pp


class TestMinimalPolynomial:
    """Krylov search and proof by substitution"""

    def test_identity(self):
        poly = min_poly(SparseMat.identity(4, 1))
        assert poly_degree(poly) == 1
        assert poly[0] == -1 and poly[1] == 1

    def test_d5_degree(self, d5_spectral):
        assert poly_degree(d5_spectral.minpoly) == 3

    def test_seed_does_not_change_result(self, d5_R, d5_spectral):
        assert min_poly(d5_R.pr(), seed=5) == d5_spectral.minpoly


class TestMonomialRoots:
    """Newton polygon root recovery"""

    def test_plus_minus_one(self):
        poly = [Scalar.from_rational(-1, 1), Scalar.zero(1), Scalar.one(1)]
        assert monomial_roots(poly) == [(-1, Fraction(0)), (1, Fraction(0))]

    def test_reciprocal_pair(self):
        # y² - (q + q^-1) y + 1
        poly = poly_from_roots([q(1, 1), q(-1, 1)])
        assert monomial_roots(poly) == [(1, Fraction(-1)), (1, Fraction(1))]

    def test_fractional_roots(self):
        poly = poly_from_roots([q(Fraction(5, 4), 4), q(Fraction(-3, 4), 4, -1)])
        assert monomial_roots(poly) == [(-1, Fraction(-3, 4)), (1, Fraction(5, 4))]

    def test_non_monomial_root(self):
        poly = [Scalar.from_rational(-2, 1), Scalar.zero(1), Scalar.one(1)]
        with pytest.raises(SpectralError):
            monomial_roots(poly)

    def test_repeated_root(self):
        poly = poly_from_roots([q(1, 1), q(1, 1)])
        with pytest.raises(SpectralError):
            monomial_roots(poly)


class TestSelectEigenvalue:
    def test_auto_prefers_small_exponent(self):
        eigenvalues = [(-1, Fraction(-1)), (1, Fraction(0)), (-1, Fraction(1))]
        assert select_eigenvalue(eigenvalues) == 0

    def test_explicit_choice(self):
        eigenvalues = [(-1, Fraction(-1, 2)), (-1, Fraction(1, 2)), (1, Fraction(3, 2))]
        assert select_eigenvalue(eigenvalues, Fraction(1, 2)) == 1

    def test_missing_choice(self):
        with pytest.raises(SpectralError):
            select_eigenvalue([(-1, Fraction(0))], Fraction(2))

    def test_no_negative_eigenvalue(self):
        with pytest.raises(SpectralError):
            select_eigenvalue([(1, Fraction(0)), (1, Fraction(2))])


class TestD5Normalization:
    """16-dimensional half-spin module"""

    def test_eigenvalues(self, d5_spectral):
        assert d5_spectral.eigenvalues == [(-1, Fraction(-3, 4)), (1, Fraction(-3, 4)), (1, Fraction(5, 4))]

    def test_lambda(self, d5_spectral):
        assert d5_spectral.lam == q(Fraction(-3, 4), 4)

    def test_normalized_spectrum(self, d5_spectral):
        assert d5_spectral.normalized_eigenvalues == [(-1, Fraction(0)), (1, Fraction(0)), (1, Fraction(2))]
        assert closed_form_for(d5_spectral.normalized_eigenvalues) == "three_term"

    def test_normalized_top_entry(self, d5_rep, d5_spectral):
        top = d5_rep.highest
        assert d5_spectral.Rnorm.entry(top, top, top, top) == q(2, 4)

    def test_forms_coincide(self, d5_spectral):
        a, b = d5_spectral.affine
        assert a.is_one() and b.is_zero()
        assert d5_spectral.rprime.convention == "closed"

    def test_vector_algebra_conditions(self, d5_spectral):
        result = check_vector_algebra_conditions(d5_spectral.Rnorm, d5_spectral.rprime, CheckMode("full"))
        assert result == (True, True, True)

    def test_rnorm_is_not_its_own_companion(self, d5_spectral):
        _, second, _ = check_vector_algebra_conditions(
            d5_spectral.Rnorm, d5_spectral.Rnorm, CheckMode("sampled", 20, 0)
        )
        assert second is False

    def test_spectrum_without_minus_one(self, d5_spectral):
        with pytest.raises(SpectralError):
            build_rprime(d5_spectral.Rnorm, [(1, Fraction(0)), (1, Fraction(2))])

    def test_report_fields(self, d5_spectral):
        data = d5_spectral.to_report()
        assert data["lambda_text"] == "q^(-3/4)"
        assert data["rprime_form"] == "closed"
        assert data["affine"] == {"a": "1", "b": "0"}


class TestE6Normalization:
    """27-dimensional module"""

    def test_lambda(self, e6_spectral):
        assert e6_spectral.lam == q(Fraction(-2, 3), 3)

    def test_rprime_entries(self, e6_rep, e6_spectral):
        p, pp = _top_pair(e6_rep)
        Rp = e6_spectral.rprime
        assert Rp.entry(p, pp, p, pp) == q(1, 3, -2)
        assert Rp.entry(p, pp, pp, p) == q(2, 3, 2) + Scalar.one(3)


@pytest.mark.slow
class TestE7Normalization:
    """56-dimensional module"""

    def test_anchor_is_alone_in_its_row(self, e7_rep, e7_R):
        i, k = e7_rep.index_of(5), e7_rep.index_of(11)
        row = e7_R.matrix.rows.get(e7_R.index(i, k), {})
        assert list(row) == [e7_R.index(i, k)]
        assert e7_R.entry(i, k, i, k) == q(Fraction(1, 2), 2)

    def test_eigenvalues(self, e7_spectral):
        assert e7_spectral.eigenvalues == [
            (-1, Fraction(-1, 2)),
            (-1, Fraction(1, 2)),
            (1, Fraction(1, 2)),
            (1, Fraction(3, 2)),
        ]
        assert e7_spectral.lam == q(Fraction(-1, 2), 2)
        assert closed_form_for(e7_spectral.normalized_eigenvalues) == "four_term"

    def test_rprime_entries(self, e7_rep, e7_spectral):
        p, pp = _top_pair(e7_rep)
        Rp = e7_spectral.rprime
        assert Rp.entry(p, pp, p, pp) == q(-1, 2) - q(-3, 2)
        assert Rp.entry(p, pp, pp, p) == q(-2, 2)

    def test_affine_relation(self, e7_spectral):
        a, b = e7_spectral.affine
        assert a == q(-4, 2, -1)
        assert b == Scalar.one(2) + q(-4, 2)

    def test_seed_does_not_change_result(self, e7_R, e7_spectral):
        assert min_poly(e7_R.pr(), seed=11) == e7_spectral.minpoly

    def test_generic_form_also_satisfies_conditions(self, e7_spectral):
        result = check_vector_algebra_conditions(
            e7_spectral.Rnorm, e7_spectral.Rprime_generic, CheckMode("sampled", 50, 0)
        )
        assert result == (True, True, True)


class TestWeightNorm:
    """Top eigenvalue and λ against the highest weight of the module"""

    @pytest.mark.parametrize(
        "fixture, norm",
        [("d5", Fraction(5, 4)), ("e6", Fraction(4, 3))],
    )
    def test_top_eigenvalue(self, request, fixture, norm):
        rep = request.getfixturevalue(f"{fixture}_rep")
        spectral = request.getfixturevalue(f"{fixture}_spectral")
        assert weight_norm(rep.root_system, Weight(tuple(rep.weights[rep.highest]))) == norm
        assert top_eigenvalue(spectral.eigenvalues) == (1, norm)
        assert top_eigenvalue_matches(spectral.eigenvalues, norm)
        assert spectral.lam == q(norm - 2, rep.L)

    @pytest.mark.slow
    def test_e7_top_eigenvalue(self, e7_rep, e7_spectral):
        norm = weight_norm(e7_rep.root_system, Weight(tuple(e7_rep.weights[e7_rep.highest])))
        assert norm == Fraction(3, 2)
        assert top_eigenvalue_matches(e7_spectral.eigenvalues, norm)
        assert e7_spectral.lam == q(norm - 2, e7_rep.L)

    def test_wrong_norm(self, d5_spectral):
        assert not top_eigenvalue_matches(d5_spectral.eigenvalues, Fraction(3, 4))


class TestE6Spectrum:
    """27-dimensional module: the dual summand gives q^(-26/3)"""

    def test_eigenvalues(self, e6_spectral):
        assert e6_spectral.eigenvalues == [(1, Fraction(-26, 3)), (-1, Fraction(-2, 3)), (1, Fraction(4, 3))]
        assert e6_spectral.lam == q(Fraction(-2, 3), 3)

    def test_published_cubic_does_not_annihilate(self, e6_R):
        published = parse_eigenvalues(["q^(4/3)", "q^(-2/3)", "-q^(-2/3)"], e6_R.L)
        cubic = poly_from_roots([eigen_scalar(x, e6_R.L) for x in published])
        assert not apply_poly(e6_R.pr(), cubic).is_zero()

    def test_normalized_spectrum_has_no_closed_form(self, e6_spectral):
        assert e6_spectral.normalized_eigenvalues == [(1, Fraction(-8)), (-1, Fraction(0)), (1, Fraction(2))]
        assert closed_form_for(e6_spectral.normalized_eigenvalues) is None
        assert e6_spectral.rprime.convention == "generic"

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_seed_does_not_change_result(self, e6_R, e6_spectral, seed):
        assert min_poly(e6_R.pr(), seed=seed) == e6_spectral.minpoly

    @pytest.mark.slow
    def test_vector_algebra_conditions(self, e6_spectral):
        result = check_vector_algebra_conditions(e6_spectral.Rnorm, e6_spectral.rprime, CheckMode("full"), threads=2)
        assert result == (True, True, True)


class TestParseEigenvalues:
    def test_sorted_pairs(self):
        assert parse_eigenvalues(["q^(5/4)", "-q^(-3/4)"], 4) == [(-1, Fraction(-3, 4)), (1, Fraction(5, 4))]

    def test_non_monomial(self):
        with pytest.raises(SpectralError):
            parse_eigenvalues(["q+1"], 1)
