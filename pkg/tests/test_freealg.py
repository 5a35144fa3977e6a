"""
Test noncommutative polynomials and word rewriting.
"""

import pytest

from conftest import q
from qforge.errors import QForgeError
from qforge.exactq import Scalar
from qforge.freealg import NCPoly, RewriteSystem, Rule, deglex_key, serre_polynomial


@pytest.fixture
def quantum_plane():
    """ba -> q·ab"""
    return RewriteSystem([Rule("ba", NCPoly.word("ab", 1, q(1, 1)))])


class TestNCPoly:
    def test_zero_terms_dropped(self):
        p = NCPoly.word("ab", 1) - NCPoly.word("ab", 1)
        assert p.is_zero()
        assert repr(p) == "0"

    def test_product_concatenates(self):
        p = NCPoly.word("a", 1) + NCPoly.word("b", 1)
        square = p * p
        assert set(square.terms) == {"aa", "ab", "ba", "bb"}

    def test_leading_word_is_deglex_maximal(self):
        p = NCPoly.word("b", 1) + NCPoly.word("aa", 1)
        assert p.leading_word() == "aa"
        assert deglex_key("ba") > deglex_key("ab")


class TestRewriting:
    """Normal forms"""

    def test_rejects_increasing_rule(self):
        with pytest.raises(QForgeError):
            RewriteSystem([Rule("ab", NCPoly.word("ba", 1))])

    def test_reduces_to_ordered_word(self, quantum_plane):
        result = quantum_plane.reduce(NCPoly.word("bba", 1))
        assert result == NCPoly.word("abb", 1, q(2, 1))

    def test_serre_relations_hold_in_quantum_plane(self, quantum_plane):
        assert quantum_plane.reduce(serre_polynomial("a", "b", 1)).is_zero()
        assert quantum_plane.reduce(serre_polynomial("b", "a", 1)).is_zero()

    def test_commuting_letters_break_serre(self):
        system = RewriteSystem([Rule("ba", NCPoly.word("ab", 1))])
        reduced = system.reduce(serre_polynomial("a", "b", 1))
        # aab (2 - [2])
        assert reduced == NCPoly.word("aab", 1, Scalar.from_rational(2, 1) - q(1, 1) - q(-1, 1))
