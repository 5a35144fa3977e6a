"""
Spectral analysis of PR_VV.

Minimal polynomials are found by Krylov linear dependence from a few random
integer vectors and then proved by substituting the matrix. Roots are recovered
from the Newton polygon of the coefficients, each candidate checked exactly.
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import SpectralError
from .exactq import Scalar, format_q, monomial_of, parse_q, to_json, valuation
from .rmatrix import CheckMode, RMatrix, check_triple_identity
from .sparse import SparseMat, SparseVec

logger = logging.getLogger(__name__)

Poly = List[Scalar]  # coefficients, constant term first
Eigen = Tuple[int, Fraction]  # (sign, exponent of q)

KRYLOV_VECTORS = 3
KRYLOV_RETRIES = 3


def _trim(p: Poly) -> Poly:
    p = list(p)
    while p and p[-1].is_zero():
        p.pop()
    return p


def poly_degree(p: Poly) -> int:
    return len(_trim(p)) - 1


def make_monic(p: Poly) -> Poly:
    p = _trim(p)
    if not p:
        raise SpectralError("zero polynomial has no monic form")
    lead = p[-1]
    return [c / lead for c in p]


def poly_mul(a: Poly, b: Poly) -> Poly:
    L = a[0].L
    out = [Scalar.zero(L) for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return _trim(out)


def poly_divmod(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    a, b = _trim(a), _trim(b)
    if not b:
        raise SpectralError("polynomial division by zero")
    L = b[0].L
    rem = list(a)
    if len(rem) < len(b):
        return [Scalar.zero(L)], rem
    quot = [Scalar.zero(L) for _ in range(len(rem) - len(b) + 1)]
    lead = b[-1]
    while len(rem) >= len(b) and rem:
        shift = len(rem) - len(b)
        factor = rem[-1] / lead
        quot[shift] = factor
        for k, c in enumerate(b):
            rem[shift + k] = rem[shift + k] - factor * c
        rem = _trim(rem)
    return _trim(quot) or [Scalar.zero(L)], rem


def poly_gcd(a: Poly, b: Poly) -> Poly:
    a, b = _trim(a), _trim(b)
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    return make_monic(a)


def poly_lcm(a: Poly, b: Poly) -> Poly:
    q, r = poly_divmod(poly_mul(a, b), poly_gcd(a, b))
    if r:
        raise SpectralError("lcm division left a remainder")
    return make_monic(q)


def poly_eval(p: Poly, x: Scalar) -> Scalar:
    acc = Scalar.zero(x.L)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_from_roots(roots: Sequence[Scalar]) -> Poly:
    L = roots[0].L
    out: Poly = [Scalar.one(L)]
    for r in roots:
        out = poly_mul(out, [-r, Scalar.one(L)])
    return out


def apply_poly(M: SparseMat, p: Poly) -> SparseMat:
    """p(M) by Horner's rule"""
    p = _trim(p)
    n = M.shape[0]
    acc = SparseMat.identity(n, M.L).scale(p[-1])
    for c in reversed(p[:-1]):
        acc = (acc @ M).add_scalar_identity(c)
    return acc


def _random_vector(rng: random.Random, n: int, L: int) -> SparseVec:
    return {i: Scalar.from_rational(rng.randint(1, 9), L) for i in range(n)}


def _vec_axpy(target: SparseVec, factor: Scalar, source: SparseVec) -> None:
    for k, v in source.items():
        updated = target[k] - factor * v if k in target else -(factor * v)
        if updated.is_zero():
            target.pop(k, None)
        else:
            target[k] = updated


def local_min_poly(M: SparseMat, v: SparseVec) -> Poly:
    """
    Minimal polynomial of M relative to v.

    Powers M^k v are reduced against the earlier ones while tracking the
    combination of powers; the first power that reduces to zero yields the
    polynomial.
    """
    L = M.L
    basis: List[Tuple[int, SparseVec, Poly]] = []
    w = dict(v)
    k = 0
    while True:
        comb: Poly = [Scalar.zero(L)] * k + [Scalar.one(L)]
        reduced = dict(w)
        for pivot, bvec, bcomb in basis:
            if pivot in reduced:
                factor = reduced[pivot] / bvec[pivot]
                _vec_axpy(reduced, factor, bvec)
                padded = bcomb + [Scalar.zero(L)] * (len(comb) - len(bcomb))
                comb = [c - factor * b for c, b in zip(comb, padded)]
        if not reduced:
            return make_monic(comb)
        basis.append((min(reduced), reduced, comb))
        if len(basis) > M.shape[0]:
            raise SpectralError("Krylov sequence exceeded the matrix dimension")
        w = M.apply(w)
        k += 1


def min_poly(M: SparseMat, seed: int = 0, vectors: int = KRYLOV_VECTORS, retries: int = KRYLOV_RETRIES) -> Poly:
    """
    Minimal polynomial of a square matrix over the exact field.

    Args:
        M: Square matrix
        seed: Seed for the random Krylov vectors
        vectors: Number of random vectors per attempt
        retries: Fresh attempts before giving up

    Returns:
        Monic coefficients, constant term first, proved by substitution
    """
    rng = random.Random(seed)
    n = M.shape[0]
    result: Optional[Poly] = None
    for attempt in range(retries):
        for _ in range(vectors):
            local = local_min_poly(M, _random_vector(rng, n, M.L))
            result = local if result is None else poly_lcm(result, local)
        if apply_poly(M, result).is_zero():
            logger.info(f"Minimal polynomial of degree {poly_degree(result)} verified (attempt {attempt + 1})")
            return result
        logger.warning(f"Krylov candidate of degree {poly_degree(result)} failed substitution, retrying")
    raise SpectralError(f"minimal polynomial not verified after {retries} attempts")


def _lower_hull_slopes(points: Sequence[Tuple[int, int]]) -> List[Fraction]:
    hull: List[Tuple[int, int]] = []
    for pt in sorted(points):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return [Fraction(y2 - y1, x2 - x1) for (x1, y1), (x2, y2) in zip(hull, hull[1:])]


def monomial_roots(p: Poly) -> List[Eigen]:
    """
    Factor a monic polynomial into monomial roots ±q^e.

    Candidate valuations come from the lower Newton polygon of the coefficient
    valuations; each candidate is confirmed by substitution and deflated.

    Raises:
        SpectralError: a root is not of monomial form
    """
    p = make_monic(p)
    L = p[0].L
    roots: List[Eigen] = []
    while poly_degree(p) > 0:
        points = [(k, valuation(c)) for k, c in enumerate(p) if not c.is_zero()]
        found = None
        for slope in _lower_hull_slopes(points):
            exponent = -slope
            if exponent.denominator != 1:
                continue
            for sign in (1, -1):
                x = Scalar.t_power(int(exponent), L, coeff=sign)
                if poly_eval(p, x).is_zero():
                    found = (sign, x)
                    break
            if found:
                break
        if found is None:
            raise SpectralError(f"non-monomial root in polynomial of degree {poly_degree(p)}")
        sign, x = found
        roots.append((sign, Fraction(monomial_of(x)[1])))
        p, rem = poly_divmod(p, [-x, Scalar.one(L)])
        if rem:
            raise SpectralError("deflation left a remainder")
    if len(set(roots)) != len(roots):
        raise SpectralError("minimal polynomial has a repeated root")
    return sorted(roots, key=lambda r: (r[1], r[0]))


def eigen_scalar(eig: Eigen, L: int) -> Scalar:
    return Scalar.q_power(eig[1], L, coeff=eig[0])


def top_eigenvalue(eigenvalues: Sequence[Eigen]) -> Eigen:
    return max(eigenvalues, key=lambda r: (r[1], r[0]))


def top_eigenvalue_matches(eigenvalues: Sequence[Eigen], highest_norm: Fraction) -> bool:
    """
    PR acts on v_hw ⊗ v_hw by q^{(λ_hw, λ_hw)}; no other summand of V⊗V has a
    larger exponent.
    """
    return top_eigenvalue(eigenvalues) == (1, Fraction(highest_norm))


def parse_eigenvalues(texts: Sequence[str], L: int) -> List[Eigen]:
    """Monomials such as ``-q^(-3/4)`` as sorted (sign, exponent) pairs"""
    out = []
    for text in texts:
        mono = monomial_of(parse_q(text, L))
        if mono is None:
            raise SpectralError(f"{text!r} is not a monomial ±q^e")
        out.append(mono)
    return sorted(out, key=lambda r: (r[1], r[0]))


def select_eigenvalue(eigenvalues: Sequence[Eigen], choice: Union[str, Fraction] = "auto") -> int:
    """
    Index of the negative eigenvalue used for normalization.

    ``auto`` picks the negative eigenvalue of smallest |exponent|, ties going to
    the smaller exponent; an explicit exponent e selects -q^e.
    """
    negatives = [k for k, (sign, _) in enumerate(eigenvalues) if sign < 0]
    if not negatives:
        raise SpectralError("no negative eigenvalue to normalize against")
    if choice == "auto":
        return min(negatives, key=lambda k: (abs(eigenvalues[k][1]), eigenvalues[k][1]))
    target = Fraction(choice)
    for k in negatives:
        if eigenvalues[k][1] == target:
            return k
    raise SpectralError(f"-q^({target}) is not an eigenvalue")


def normalize(
    R: RMatrix, eigenvalues: Sequence[Eigen], choice: Union[str, Fraction] = "auto"
) -> Tuple[Scalar, RMatrix, int]:
    """
    Rescale R_VV so that PR has eigenvalue -1.

    Returns:
        (lambda, Rnorm, selected index) with Rnorm = R_VV / lambda
    """
    selected = select_eigenvalue(eigenvalues, choice)
    lam = Scalar.q_power(eigenvalues[selected][1], R.L)
    matrix = R.matrix.scale(lam.inverse())
    Rnorm = RMatrix(
        p=R.p,
        L=R.L,
        matrix=matrix,
        weights=R.weights,
        convention=R.convention,
        name=R.name,
        inverse_matrix=R.inverse().scale(lam),
    )
    logger.info(f"{R.name}: normalized with lambda = {format_q(lam)}")
    return lam, Rnorm, selected


def _spectrum_set(eigenvalues: Sequence[Eigen]) -> set:
    return {(s, Fraction(e)) for s, e in eigenvalues}


CLOSED_FORMS: Dict[str, set] = {
    "three_term": {(1, Fraction(2)), (1, Fraction(0)), (-1, Fraction(0))},
    "four_term": {(-1, Fraction(0)), (-1, Fraction(1)), (1, Fraction(1)), (1, Fraction(2))},
}


def closed_form_for(eigenvalues: Sequence[Eigen]) -> Optional[str]:
    spectrum = _spectrum_set(eigenvalues)
    for name, expected in CLOSED_FORMS.items():
        if spectrum == expected:
            return name
    return None


def build_rprime(Rnorm: RMatrix, eigenvalues_normalized: Sequence[Eigen], form: str = "generic") -> Optional[RMatrix]:
    """
    Companion matrix R' with (PR + 1)(PR' - 1) = 0.

    Args:
        Rnorm: Normalized R-matrix
        eigenvalues_normalized: Spectrum of P·Rnorm, containing -1
        form: ``generic`` for P + P∏_{x≠-1}(PR - x), ``closed`` for the closed
            per-spectrum formula

    Returns:
        R' or None when ``form="closed"`` and no closed formula matches
    """
    if (-1, Fraction(0)) not in _spectrum_set(eigenvalues_normalized):
        raise SpectralError("normalized spectrum does not contain -1")
    L = Rnorm.L
    P = Rnorm.flip()
    R = Rnorm.matrix
    PR = P @ R
    if form == "generic":
        acc = P
        for sign, exp in eigenvalues_normalized:
            if (sign, exp) == (-1, 0):
                continue
            acc = acc @ PR.add_scalar_identity(-Scalar.q_power(exp, L, coeff=sign))
        matrix = P + acc
    elif form == "closed":
        name = closed_form_for(eigenvalues_normalized)
        if name is None:
            return None
        q = lambda e: Scalar.q_power(e, L)  # noqa: E731
        RPR = R @ PR
        if name == "three_term":
            c = q(2) + 1
            matrix = RPR - R.scale(c) + P.scale(c)
        else:
            matrix = (RPR @ PR).scale(-q(-4)) + RPR.scale(q(-2)) + R.scale(q(-2))
    else:
        raise ValueError(f"unknown R' form {form!r}")
    return RMatrix(p=Rnorm.p, L=L, matrix=matrix, weights=Rnorm.weights, convention=form, name=Rnorm.name)


def affine_relation(closed: RMatrix, generic: RMatrix) -> Optional[Tuple[Scalar, Scalar]]:
    """
    Constants (a, b) with R'_closed = a·R'_generic + b·P, a + b = 1.

    Returns:
        (a, b), or None when the two forms are not affinely related
    """
    P = closed.flip()
    d = generic.matrix - P
    e = closed.matrix - P
    first = next(iter(d.entries()), None)
    if first is None:
        return None
    row, col, value = first
    a = e.get(row, col) / value
    b = 1 - a
    if closed.matrix != generic.matrix.scale(a) + P.scale(b):
        logger.info(f"{closed.name}: R' forms are not affinely related")
        return None
    return a, b


def check_vector_algebra_conditions(
    R: RMatrix, Rprime: RMatrix, mode: CheckMode = CheckMode(), threads: int = 1
) -> Tuple[bool, bool, bool]:
    """
    (i) R12 R13 R'23 = R'23 R13 R12, (ii) (PR + 1)(PR' - 1) = 0,
    (iii) R21 R'12 = R'21 R12.
    """
    m, mp = R.matrix, Rprime.matrix
    first = check_triple_identity(
        [(m, (0, 1)), (m, (0, 2)), (mp, (1, 2))],
        [(mp, (1, 2)), (m, (0, 2)), (m, (0, 1))],
        R.p,
        R.L,
        mode,
        threads,
    )
    P = R.flip()
    second = ((P @ m).add_scalar_identity(Scalar.one(R.L)) @ (P @ mp).add_scalar_identity(-Scalar.one(R.L))).is_zero()
    third = (P @ m @ P) @ mp == (P @ mp @ P) @ m
    logger.info(f"{R.name}: vector algebra conditions ({first}, {second}, {third}) [{mode.label}]")
    return first, second, third


@dataclass
class SpectralData:
    """Minimal polynomial, spectrum and normalized R data of one module"""

    minpoly: Poly
    eigenvalues: List[Eigen]
    selected: int
    lam: Scalar
    Rnorm: RMatrix
    Rprime_generic: Optional[RMatrix] = None
    Rprime_closed: Optional[RMatrix] = None
    affine: Optional[Tuple[Scalar, Scalar]] = None
    conditions: Dict[str, object] = field(default_factory=dict)
    form: str = "closed"

    @property
    def normalized_eigenvalues(self) -> List[Eigen]:
        shift = self.eigenvalues[self.selected][1]
        return sorted(((s, e - shift) for s, e in self.eigenvalues), key=lambda r: (r[1], r[0]))

    @property
    def rprime(self) -> RMatrix:
        """R' used downstream: the closed form when one exists"""
        if self.form == "closed" and self.Rprime_closed is not None:
            return self.Rprime_closed
        return self.Rprime_generic

    def to_report(self) -> Dict[str, object]:
        out: Dict[str, object] = {
            "minpoly": [to_json(c) for c in self.minpoly],
            "eigenvalues": [[s, e.numerator, e.denominator] for s, e in self.eigenvalues],
            "eigenvalues_text": [format_q(eigen_scalar(x, self.lam.L)) for x in self.eigenvalues],
            "lambda": to_json(self.lam),
            "lambda_text": format_q(self.lam),
            "rprime_form": self.rprime.convention if self.rprime is not None else None,
        }
        if self.affine is not None:
            out["affine"] = {"a": format_q(self.affine[0]), "b": format_q(self.affine[1])}
        if self.conditions:
            out["conditions"] = dict(self.conditions)
        return out


def analyze(
    R: RMatrix,
    seed: int = 0,
    choice: Union[str, Fraction] = "auto",
    vectors: int = KRYLOV_VECTORS,
    retries: int = KRYLOV_RETRIES,
    form: str = "closed",
) -> SpectralData:
    """Minimal polynomial, roots, normalization and both R' forms"""
    PR = R.pr()
    poly = min_poly(PR, seed=seed, vectors=vectors, retries=retries)
    eigenvalues = monomial_roots(poly)
    lam, Rnorm, selected = normalize(R, eigenvalues, choice)
    data = SpectralData(
        minpoly=poly,
        eigenvalues=eigenvalues,
        selected=selected,
        lam=lam,
        Rnorm=Rnorm,
        form=form,
    )
    spectrum = data.normalized_eigenvalues
    data.Rprime_generic = build_rprime(Rnorm, spectrum, "generic")
    data.Rprime_closed = build_rprime(Rnorm, spectrum, "closed")
    if data.Rprime_closed is not None:
        data.affine = affine_relation(data.Rprime_closed, data.Rprime_generic)
    logger.info(f"{R.name}: eigenvalues {[format_q(eigen_scalar(x, R.L)) for x in eigenvalues]}")
    return data
