"""
Noncommutative polynomials over the exact scalar field and word rewriting.

Words are strings over single-letter symbols; a polynomial maps words to
nonzero scalars. Rewriting rules replace a leading word by a combination of
smaller words in degree-lexicographic order, so reduction terminates.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import QForgeError
from .exactq import Scalar

logger = logging.getLogger(__name__)

MAX_REWRITES = 10_000


def deglex_key(word: str) -> Tuple[int, str]:
    return len(word), word


class NCPoly:
    """Element of the free algebra: word -> coefficient"""

    __slots__ = ("terms", "L")

    def __init__(self, terms: Optional[Dict[str, Scalar]] = None, L: int = 1):
        self.terms = {w: c for w, c in (terms or {}).items() if not c.is_zero()}
        self.L = L

    @classmethod
    def word(cls, word: str, L: int, coeff: Optional[Scalar] = None) -> "NCPoly":
        return cls({word: coeff if coeff is not None else Scalar.one(L)}, L)

    def is_zero(self) -> bool:
        return not self.terms

    def leading_word(self) -> str:
        return max(self.terms, key=deglex_key)

    def __add__(self, other: "NCPoly") -> "NCPoly":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out[w] + c if w in out else c
        return NCPoly(out, self.L)

    def __sub__(self, other: "NCPoly") -> "NCPoly":
        return self + other.scale(Scalar.from_rational(-1, self.L))

    def scale(self, factor: Scalar) -> "NCPoly":
        return NCPoly({w: c * factor for w, c in self.terms.items()}, self.L)

    def __mul__(self, other: "NCPoly") -> "NCPoly":
        out: Dict[str, Scalar] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                out[w] = out[w] + c1 * c2 if w in out else c1 * c2
        return NCPoly(out, self.L)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = [f"({self.terms[w]})*{w}" for w in sorted(self.terms, key=deglex_key, reverse=True)]
        return " + ".join(parts)


@dataclass
class Rule:
    lhs: str
    rhs: NCPoly


class RewriteSystem:
    """
    Ordered list of rewriting rules lhs -> rhs.

    Args:
        rules: Rules whose right-hand sides only contain words smaller than lhs
    """

    def __init__(self, rules: Iterable[Rule]):
        self.rules: List[Rule] = list(rules)
        for rule in self.rules:
            if any(deglex_key(w) >= deglex_key(rule.lhs) for w in rule.rhs.terms):
                raise QForgeError(f"rule for {rule.lhs} does not decrease in deg-lex order")

    def _find(self, word: str) -> Optional[Tuple[int, Rule]]:
        for pos in range(len(word)):
            for rule in self.rules:
                if word.startswith(rule.lhs, pos):
                    return pos, rule
        return None

    def reduce(self, poly: NCPoly) -> NCPoly:
        """Normal form of poly"""
        current = poly
        for _ in range(MAX_REWRITES):
            target = None
            for w in sorted(current.terms, key=deglex_key, reverse=True):
                hit = self._find(w)
                if hit is not None:
                    target = (w, hit)
                    break
            if target is None:
                return current
            w, (pos, rule) = target
            coeff = current.terms[w]
            prefix = NCPoly.word(w[:pos], current.L)
            suffix = NCPoly.word(w[pos + len(rule.lhs):], current.L)
            replacement = (prefix * rule.rhs * suffix).scale(coeff)
            current = current - NCPoly.word(w, current.L, coeff) + replacement
        raise QForgeError("rewriting did not terminate")


def serre_polynomial(x: str, y: str, L: int) -> NCPoly:
    """x²y - (q + q^{-1}) xyx + yx²"""
    q_int = Scalar.q_power(1, L) + Scalar.q_power(-1, L)
    return (
        NCPoly.word(x + x + y, L)
        - NCPoly.word(x + y + x, L, q_int)
        + NCPoly.word(y + x + x, L)
    )
