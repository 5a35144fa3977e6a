"""
Exact coefficient arithmetic.

Rationals are ``fractions.Fraction``. Every matrix entry lives in the field of
rational functions in a formal variable t, where the quantum parameter is
q = t**L for a per-run exponent denominator L. A fractional power q**(a/L) is
therefore the monomial t**a.

Scalars are kept in a canonical form (numerator and denominator coprime,
denominator a monic polynomial with nonzero constant term) so that equal values
serialize identically.
"""

import logging
import random
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import sympy
from sympy.polys.domains import QQ
from sympy.polys.rings import ring

from .errors import ExactArithmeticError, ExponentDenominatorError, PoleError

logger = logging.getLogger(__name__)

Rat = Fraction
Number = Union[int, Fraction]

_POLY_RING, _T = ring("t", QQ)
_Q_SYMBOL = sympy.Symbol("q")


def _to_fraction(value: Any) -> Fraction:
    """Convert an int, Fraction or sympy/gmpy rational to a Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(int(value.numerator), int(value.denominator))


class Laurent:
    """
    Laurent polynomial in t with rational coefficients.

    Terms are stored as a tuple of (exponent, coefficient) pairs sorted by
    exponent, without zero coefficients.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[int, Number]] = None):
        items = terms or {}
        self.terms: Tuple[Tuple[int, Fraction], ...] = tuple(
            sorted((int(e), Fraction(c)) for e, c in items.items() if c != 0)
        )

    @classmethod
    def _from_sorted(cls, terms: Tuple[Tuple[int, Fraction], ...]) -> "Laurent":
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    @classmethod
    def monomial(cls, exponent: int, coeff: Number = 1) -> "Laurent":
        if coeff == 0:
            return cls._from_sorted(())
        return cls._from_sorted(((int(exponent), Fraction(coeff)),))

    @classmethod
    def constant(cls, coeff: Number) -> "Laurent":
        return cls.monomial(0, coeff)

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def is_one(self) -> bool:
        return self.terms == ((0, Fraction(1)),)

    @property
    def min_exp(self) -> int:
        return self.terms[0][0]

    @property
    def max_exp(self) -> int:
        return self.terms[-1][0]

    @property
    def leading_coeff(self) -> Fraction:
        return self.terms[-1][1]

    def as_dict(self) -> Dict[int, Fraction]:
        return dict(self.terms)

    def __add__(self, other: "Laurent") -> "Laurent":
        acc = dict(self.terms)
        for e, c in other.terms:
            acc[e] = acc.get(e, 0) + c
        return Laurent(acc)

    def __sub__(self, other: "Laurent") -> "Laurent":
        acc = dict(self.terms)
        for e, c in other.terms:
            acc[e] = acc.get(e, 0) - c
        return Laurent(acc)

    def __neg__(self) -> "Laurent":
        return Laurent._from_sorted(tuple((e, -c) for e, c in self.terms))

    def __mul__(self, other: "Laurent") -> "Laurent":
        if self.is_monomial() and other.is_monomial():
            (e1, c1), (e2, c2) = self.terms[0], other.terms[0]
            return Laurent._from_sorted(((e1 + e2, c1 * c2),))
        acc: Dict[int, Fraction] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                acc[e1 + e2] = acc.get(e1 + e2, 0) + c1 * c2
        return Laurent(acc)

    def scale(self, factor: Number) -> "Laurent":
        if factor == 0:
            return Laurent()
        return Laurent._from_sorted(tuple((e, c * factor) for e, c in self.terms))

    def shift(self, k: int) -> "Laurent":
        if k == 0:
            return self
        return Laurent._from_sorted(tuple((e + k, c) for e, c in self.terms))

    def evaluate(self, t0: Fraction) -> Fraction:
        return sum((c * t0**e for e, c in self.terms), Fraction(0))

    def to_poly(self) -> Any:
        """Polynomial in QQ[t] for a Laurent polynomial with min exponent >= 0"""
        return _POLY_RING.from_dict(
            {(e,): QQ(c.numerator, c.denominator) for e, c in self.terms}
        )

    @classmethod
    def from_poly(cls, poly: Any) -> "Laurent":
        return cls({monom[0]: _to_fraction(coeff) for monom, coeff in poly.terms()})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Laurent) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __repr__(self) -> str:
        return f"Laurent({dict(self.terms)})"


_ZERO = Laurent()
_ONE = Laurent.constant(1)


def _canonical(num: Laurent, den: Laurent) -> Tuple[Laurent, Laurent]:
    """Reduce num/den to lowest terms with a monic denominator, den(0) != 0"""
    if den.is_zero():
        raise ExactArithmeticError("division by zero")
    if num.is_zero():
        return _ZERO, _ONE
    if den.is_monomial():
        exp, coeff = den.terms[0]
        return num.shift(-exp).scale(1 / coeff), _ONE

    shift_den = den.min_exp
    den = den.shift(-shift_den)
    num = num.shift(-shift_den)
    shift_num = num.min_exp
    _, num_poly, den_poly = num.shift(-shift_num).to_poly().cofactors(den.to_poly())
    num = Laurent.from_poly(num_poly).shift(shift_num)
    den = Laurent.from_poly(den_poly)
    if den.is_monomial():
        return num.scale(1 / den.terms[0][1]), _ONE
    lead = den.leading_coeff
    if lead != 1:
        num = num.scale(1 / lead)
        den = den.scale(1 / lead)
    return num, den


class Scalar:
    """
    Element of Q(t) tagged with the exponent denominator L (q = t**L).

    Values are immutable. Arithmetic between scalars with different L raises
    ``ExponentDenominatorError``; ints and Fractions are coerced.
    """

    __slots__ = ("num", "den", "L")

    def __init__(self, num: Laurent, den: Optional[Laurent] = None, L: int = 1):
        if L < 1:
            raise ExponentDenominatorError(f"exponent denominator must be positive, got {L}")
        self.num, self.den = _canonical(num, den if den is not None else _ONE)
        self.L = L

    @classmethod
    def _make(cls, num: Laurent, den: Laurent, L: int) -> "Scalar":
        obj = cls.__new__(cls)
        obj.num, obj.den, obj.L = num, den, L
        return obj

    @classmethod
    def zero(cls, L: int) -> "Scalar":
        return cls._make(_ZERO, _ONE, L)

    @classmethod
    def one(cls, L: int) -> "Scalar":
        return cls._make(_ONE, _ONE, L)

    @classmethod
    def from_rational(cls, value: Number, L: int) -> "Scalar":
        return cls._make(Laurent.constant(value), _ONE, L)

    @classmethod
    def t_power(cls, exponent: int, L: int, coeff: Number = 1) -> "Scalar":
        return cls._make(Laurent.monomial(exponent, coeff), _ONE, L)

    @classmethod
    def q_power(cls, exponent: Number, L: int, coeff: Number = 1) -> "Scalar":
        """coeff * q**exponent; exponent must lie in (1/L)Z"""
        scaled = Fraction(exponent) * L
        if scaled.denominator != 1:
            raise ExponentDenominatorError(
                f"q^({exponent}) is not expressible with exponent denominator {L}"
            )
        return cls.t_power(int(scaled), L, coeff)

    @classmethod
    def q_minus_qinv(cls, L: int) -> "Scalar":
        return cls._make(Laurent({L: 1, -L: -1}), _ONE, L)

    def _coerce(self, other: Any) -> "Scalar":
        if isinstance(other, Scalar):
            if other.L != self.L:
                raise ExponentDenominatorError(
                    f"mixing scalars with exponent denominators {self.L} and {other.L}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar.from_rational(other, self.L)
        return NotImplemented

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_laurent(self) -> bool:
        return self.den.is_one()

    def __add__(self, other: Any) -> "Scalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        if self.den.is_one() and other.den.is_one():
            return Scalar._make(self.num + other.num, _ONE, self.L)
        if self.den == other.den:
            num, den = _canonical(self.num + other.num, self.den)
        else:
            num, den = _canonical(
                self.num * other.den + other.num * self.den, self.den * other.den
            )
        return Scalar._make(num, den, self.L)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar._make(-self.num, self.den, self.L)

    def __sub__(self, other: Any) -> "Scalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other: Any) -> "Scalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other: Any) -> "Scalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero() or other.num.is_zero():
            return Scalar.zero(self.L)
        if self.den.is_one() and other.den.is_one():
            return Scalar._make(self.num * other.num, _ONE, self.L)
        num, den = _canonical(self.num * other.num, self.den * other.den)
        return Scalar._make(num, den, self.L)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.num.is_zero():
            raise ExactArithmeticError("division by zero")
        num, den = _canonical(self.den, self.num)
        return Scalar._make(num, den, self.L)

    def __truediv__(self, other: Any) -> "Scalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.num.is_zero():
            raise ExactArithmeticError("division by zero")
        if self.num.is_zero():
            return Scalar.zero(self.L)
        if other.is_laurent() and other.num.is_monomial() and self.den.is_one():
            exp, coeff = other.num.terms[0]
            return Scalar._make(self.num.shift(-exp).scale(1 / coeff), _ONE, self.L)
        num, den = _canonical(self.num * other.den, self.den * other.num)
        return Scalar._make(num, den, self.L)

    def __rtruediv__(self, other: Any) -> "Scalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, exponent: int) -> "Scalar":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = Scalar.one(self.L)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Scalar.from_rational(other, self.L)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.L == other.L and self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den, self.L))

    def __repr__(self) -> str:
        return f"Scalar({format_q(self)}, L={self.L})"

    def __str__(self) -> str:
        return format_q(self)

    def __reduce__(self) -> Tuple[Any, ...]:
        return (_rebuild_scalar, (self.num.terms, self.den.terms, self.L))


def _rebuild_scalar(num_terms: Tuple, den_terms: Tuple, L: int) -> Scalar:
    return Scalar._make(Laurent._from_sorted(num_terms), Laurent._from_sorted(den_terms), L)


def scalar_arith(a: Scalar, b: Optional[Scalar], op: str) -> Scalar:
    """
    Apply one field operation.

    Args:
        a: Left operand
        b: Right operand (ignored for ``neg``)
        op: One of add, sub, mul, div, neg

    Returns:
        Canonical result
    """
    if op == "neg":
        return -a
    if b is None:
        raise ExactArithmeticError(f"operation {op} needs two operands")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ExactArithmeticError(f"unknown operation {op}")


def monomial_of(a: Scalar) -> Optional[Tuple[int, Fraction]]:
    """Return (sign, exponent) when a = sign * q**exponent, else None"""
    if not a.den.is_one() or not a.num.is_monomial():
        return None
    exp, coeff = a.num.terms[0]
    if coeff not in (1, -1):
        return None
    return int(coeff), Fraction(exp, a.L)


def valuation(a: Scalar) -> int:
    """Order of vanishing at t = 0 (in t units)"""
    if a.is_zero():
        raise ExactArithmeticError("valuation of zero")
    return a.num.min_exp


def degree(a: Scalar) -> int:
    """Degree at t = infinity (in t units)"""
    if a.is_zero():
        raise ExactArithmeticError("degree of zero")
    return a.num.max_exp - a.den.max_exp


def eval_at(a: Scalar, t0: Number) -> Fraction:
    """Evaluate a at the rational point t = t0"""
    t0 = Fraction(t0)
    if t0 == 0:
        raise ExactArithmeticError("evaluation at t = 0 is undefined for Laurent data")
    den_value = a.den.evaluate(t0)
    if den_value == 0:
        raise PoleError(f"pole at t = {t0}")
    return a.num.evaluate(t0) / den_value


def normalize(a: Scalar) -> Scalar:
    """Re-run canonicalization; identity on values built by this module"""
    return Scalar(a.num, a.den, a.L)


def _laurent_to_json(p: Laurent) -> List[List[int]]:
    return [[c.numerator, c.denominator, e] for e, c in p.terms]


def _laurent_from_json(data: Iterable[Iterable[int]]) -> Laurent:
    terms: Dict[int, Fraction] = {}
    for cnum, cden, exp in data:
        terms[int(exp)] = terms.get(int(exp), 0) + Fraction(cnum, cden)
    return Laurent(terms)


def to_json(a: Scalar) -> Dict[str, List[List[int]]]:
    """Serialize with exponents in t"""
    return {"num": _laurent_to_json(a.num), "den": _laurent_to_json(a.den)}


def from_json(data: Dict[str, Any], L: int) -> Scalar:
    return Scalar(_laurent_from_json(data["num"]), _laurent_from_json(data.get("den", [[1, 1, 0]])), L)


def _format_laurent(p: Laurent, L: int) -> str:
    if p.is_zero():
        return "0"
    parts: List[str] = []
    for exp, coeff in reversed(p.terms):
        q_exp = Fraction(exp, L)
        if q_exp == 0:
            body = str(abs(coeff))
        else:
            if q_exp == 1:
                power = "q"
            elif q_exp.denominator == 1 and q_exp > 0:
                power = f"q^{q_exp}"
            else:
                power = f"q^({q_exp})"
            body = power if abs(coeff) == 1 else f"{abs(coeff)}*{power}"
        sign = "-" if coeff < 0 else "+"
        parts.append(f"{sign} {body}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def format_q(a: Scalar) -> str:
    """Human-readable form in q, e.g. ``q^(5/4) - q^(-3/4)``"""
    num = _format_laurent(a.num, a.L)
    if a.den.is_one():
        return num
    return f"({num})/({_format_laurent(a.den, a.L)})"


def _laurent_from_expr(expr: sympy.Expr, L: int) -> Laurent:
    terms: Dict[int, Fraction] = {}
    expr = sympy.expand(expr)
    if expr == 0:
        return Laurent()
    for term, coeff in expr.as_coefficients_dict().items():
        if term == 1:
            exp = sympy.Integer(0)
        else:
            base, exp = term.as_base_exp()
            if base != _Q_SYMBOL:
                raise ExactArithmeticError(f"unexpected factor {term} in q-expression")
        scaled = sympy.Rational(exp) * L
        if scaled.q != 1:
            raise ExponentDenominatorError(f"q^({exp}) needs a larger exponent denominator than {L}")
        terms[int(scaled)] = terms.get(int(scaled), 0) + Fraction(int(coeff.p), int(coeff.q))
    return Laurent(terms)


def parse_q(text: str, L: int) -> Scalar:
    """
    Parse an expression in q such as ``-(q-q**-1)`` or ``q^(1/4)*(q^2-1)``.

    Args:
        text: Expression in the single symbol q
        L: Exponent denominator of the run

    Returns:
        Canonical scalar
    """
    try:
        expr = sympy.sympify(text, locals={"q": _Q_SYMBOL})
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise ExactArithmeticError(f"cannot parse q-expression {text!r}: {e}") from e
    num_expr, den_expr = sympy.fraction(sympy.together(expr))
    return Scalar(_laurent_from_expr(num_expr, L), _laurent_from_expr(den_expr, L), L)


def random_scalar(rng: random.Random, L: int, max_terms: int = 3, span: int = 4) -> Scalar:
    """Random scalar with small rational coefficients, used by property tests"""

    def _laurent() -> Laurent:
        count = rng.randint(1, max_terms)
        return Laurent({rng.randint(-span, span): Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(count)})

    num = _laurent()
    den = _laurent()
    while den.is_zero():
        den = _laurent()
    return Scalar(num, den, L)
