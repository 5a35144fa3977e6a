"""
R-matrices of minuscule modules.

R_VV = B · ∏_β (1 + (q_β - q_β^{-1}) X_β ⊗ Y_β), where B is the diagonal weight
pairing q^{(wt_i, wt_k)} and the product runs over positive roots in the order
of the longest-word reduced expression. Root vectors are obtained by conjugating
simple generators with braid operators; on minuscule modules E_β² = 0, so every
factor is linear and its inverse is 1 - (...).

The leg assignment, product order, braid sign/power and tail sign form a
convention that is selected once against anchor entries of the 16-dimensional
D5 module and then frozen.
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product as cartesian
from typing import Dict, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed

from .errors import ConventionError, NonMinusculeError, QForgeError
from .exactq import Scalar, to_json
from .repmod import RepModule, load_module
from .rootsys import Vector, inner, sub
from .sparse import SparseMat

logger = logging.getLogger(__name__)

MINUS_CONVENTIONS = ("cross_cartan", "row_cartan", "column_cartan", "inverse")


@dataclass(frozen=True)
class Convention:
    """Choices fixing the quasi-R product on a module"""

    legs: str = "FE"
    order: str = "forward"
    braid: str = "T'"
    braid_power: int = 1
    tail_sign: int = 1

    @property
    def label(self) -> str:
        sign = "+" if self.tail_sign > 0 else "-"
        return f"legs={self.legs},order={self.order},braid={self.braid}{self.braid_power:+d},tail={sign}"


DEFAULT_CONVENTION = Convention()


def candidate_conventions() -> List[Convention]:
    """Default first, then every other combination"""
    candidates = [DEFAULT_CONVENTION]
    for legs, order, braid, power, sign in cartesian(
        ("FE", "EF"), ("forward", "reverse"), ("T'", "T''"), (1, -1), (1, -1)
    ):
        conv = Convention(legs, order, braid, power, sign)
        if conv != DEFAULT_CONVENTION:
            candidates.append(conv)
    return candidates


@dataclass(frozen=True)
class CheckMode:
    """Exhaustive or column-sampled verification of tensor identities"""

    kind: str = "full"
    n: int = 200
    seed: int = 0

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "CheckMode":
        if text == "full":
            return cls("full", 0, seed)
        if text.startswith("sampled"):
            _, _, count = text.partition(":")
            n = int(count) if count else 200
            if n < 1:
                raise ValueError("sampled check needs at least one column")
            return cls("sampled", n, seed)
        raise ValueError(f"unknown check mode {text!r}")

    @property
    def label(self) -> str:
        return "full" if self.kind == "full" else f"sampled:{self.n}"


@dataclass
class RootVector:
    beta: Vector
    simple_index: int
    E: SparseMat
    F: SparseMat
    q_beta: Scalar


@dataclass
class RootVectorSet:
    word: Tuple[int, ...]
    vectors: List[RootVector]


@dataclass(eq=False)
class RMatrix:
    """
    R-matrix on V ⊗ V with composite index (i, k) -> i * p + k (0-based).

    ``factors`` keeps the nilpotent tail terms so the inverse can be formed as a
    product instead of by elimination.
    """

    p: int
    L: int
    matrix: SparseMat
    weights: List[Vector]
    convention: str = ""
    name: str = ""
    inverse_matrix: Optional[SparseMat] = None
    factors: List[SparseMat] = field(default_factory=list, repr=False)

    def index(self, i: int, k: int) -> int:
        return i * self.p + k

    def entry(self, i: int, k: int, j: int, l: int) -> Scalar:
        """Entry at row (i,k), column (j,l), 0-based basis indices"""
        return self.matrix.get(self.index(i, k), self.index(j, l))

    def inverse(self) -> SparseMat:
        if self.inverse_matrix is None:
            logger.info(f"Inverting {self.name} R-matrix by elimination (dim {self.p ** 2})")
            self.inverse_matrix = self.matrix.inverse()
        return self.inverse_matrix

    def inverse_entry(self, i: int, k: int, j: int, l: int) -> Scalar:
        return self.inverse().get(self.index(i, k), self.index(j, l))

    def flip(self) -> SparseMat:
        return SparseMat.flip(self.p, self.L)

    def pr(self) -> SparseMat:
        return self.flip() @ self.matrix

    def with_matrix(self, matrix: SparseMat, label: str = "") -> "RMatrix":
        """Same module data, different matrix (inverse recomputed on demand)"""
        return RMatrix(self.p, self.L, matrix, self.weights, label or self.convention, self.name)


def _edge_maps(rep: RepModule, i: int) -> Tuple[Dict[int, int], Dict[int, int]]:
    up = {a: b for a, b, r in rep.edges if r == i}
    down = {b: a for a, b, r in rep.edges if r == i}
    return up, down


def _braid_coefficients(rep: RepModule, i: int, conv: Convention) -> Tuple[Scalar, Scalar]:
    """(coefficient on n = 1 vectors, coefficient on n = -1 vectors)"""
    one = Scalar.one(rep.L)
    q_e = Scalar.q_power(conv.braid_power * rep.root_system.symmetrizers[i - 1], rep.L)
    if conv.braid == "T'":
        return -q_e, one
    return one, -q_e


def braid_operator(
    rep: RepModule, i: int, conv: Convention = DEFAULT_CONVENTION, inverse: bool = False
) -> SparseMat:
    """
    Braid operator T_i on a minuscule module.

    A weight vector v with n = ⟨wt(v), α_i^∨⟩ goes to v (n = 0), to c·F_i v
    (n = 1) or to c'·E_i v (n = -1), with c, c' fixed by the convention.

    Args:
        rep: Minuscule module
        i: Simple root index (1-based)
        conv: Sign and q-power convention
        inverse: Return T_i^{-1} instead

    Returns:
        Monomial matrix of T_i or its inverse
    """
    one = Scalar.one(rep.L)
    c_top, c_bottom = _braid_coefficients(rep, i, conv)
    up, down = _edge_maps(rep, i)
    rows: Dict[int, Dict[int, Scalar]] = {}
    for idx in range(rep.dim):
        n = rep.coroot_pairing(idx, i)
        if n == 0:
            target, coeff = idx, one
        elif n == 1 and idx in down:
            target, coeff = down[idx], c_top
        elif n == -1 and idx in up:
            target, coeff = up[idx], c_bottom
        else:
            raise NonMinusculeError(f"{rep.name}: weight of basis {idx} pairs to {n} with α_{i}^∨")
        if inverse:
            rows.setdefault(idx, {})[target] = coeff.inverse()
        else:
            rows.setdefault(target, {})[idx] = coeff
    return SparseMat(rows, (rep.dim, rep.dim), rep.L)


def _check_raises_by(rep: RepModule, matrix: SparseMat, beta: Vector) -> bool:
    return all(sub(rep.weights[y], rep.weights[x]) == beta for y, x, _ in matrix.entries())


def root_vectors(
    rep: RepModule, word: Optional[Sequence[int]] = None, conv: Convention = DEFAULT_CONVENTION
) -> RootVectorSet:
    """
    Root vectors E_β, F_β along a reduced word of the longest element.

    Args:
        rep: Minuscule module
        word: Reduced word (1-based); the root system's greedy word by default
        conv: Braid convention

    Returns:
        Ordered root vectors, one per positive root
    """
    rs = rep.root_system
    word = tuple(word) if word is not None else rs.w0_word
    conj = SparseMat.identity(rep.dim, rep.L)
    conj_inv = SparseMat.identity(rep.dim, rep.L)
    seen = set()
    vectors: List[RootVector] = []
    for j, i in enumerate(word):
        beta = rs.alpha(i)
        for k in reversed(word[:j]):
            beta = rs.reflect_simple(beta, k)
        if beta in seen or not rs.is_positive_root(beta):
            raise QForgeError(f"word {list(word)} is not reduced at position {j + 1}")
        seen.add(beta)
        e_beta = conj @ rep.matE[i] @ conj_inv
        f_beta = conj @ rep.matF[i] @ conj_inv
        if not _check_raises_by(rep, e_beta, beta):
            raise QForgeError(f"root vector {j + 1} does not raise weights by its root")
        q_beta = Scalar.q_power(inner(beta, beta) / 2, rep.L)
        vectors.append(RootVector(beta=beta, simple_index=i, E=e_beta, F=f_beta, q_beta=q_beta))
        conj = conj @ braid_operator(rep, i, conv)
        conj_inv = braid_operator(rep, i, conv, inverse=True) @ conj_inv
    if len(vectors) != len(rs.positive_roots):
        raise QForgeError(f"word of length {len(vectors)} does not reach all {len(rs.positive_roots)} positive roots")
    logger.debug(f"{rep.name}: {len(vectors)} root vectors built")
    return RootVectorSet(word=word, vectors=vectors)


def weight_pairing_matrix(rep: RepModule, sign: int = 1) -> SparseMat:
    """B = diag q^{sign (wt_i, wt_k)} on V ⊗ V"""
    values = [
        Scalar.q_power(sign * rep.weight_inner(i, k), rep.L) for i in range(rep.dim) for k in range(rep.dim)
    ]
    return SparseMat.diagonal(values, rep.L)


def _tail_terms(rep: RepModule, rvs: RootVectorSet, conv: Convention) -> List[SparseMat]:
    terms = []
    for rv in rvs.vectors:
        coeff = (rv.q_beta - rv.q_beta.inverse()) * conv.tail_sign
        legs = rv.F.kron(rv.E) if conv.legs == "FE" else rv.E.kron(rv.F)
        terms.append(legs.scale(coeff))
    return terms if conv.order == "forward" else list(reversed(terms))


def _times_one_plus(acc: SparseMat, term: SparseMat) -> SparseMat:
    return acc + acc @ term


def rvv(rep: RepModule, conv: Optional[Convention] = None) -> RMatrix:
    """
    Build R_VV for a validated minuscule module.

    Args:
        rep: Module
        conv: Convention; the frozen self-tested one when omitted

    Returns:
        R-matrix together with its product-form inverse
    """
    conv = conv or select_convention()
    rvs = root_vectors(rep, conv=conv)
    terms = _tail_terms(rep, rvs, conv)
    n = rep.dim * rep.dim

    tail = SparseMat.identity(n, rep.L)
    for term in terms:
        tail = _times_one_plus(tail, term)
    matrix = weight_pairing_matrix(rep) @ tail

    inverse_tail = SparseMat.identity(n, rep.L)
    for term in reversed(terms):
        inverse_tail = _times_one_plus(inverse_tail, -term)
    inverse = inverse_tail @ weight_pairing_matrix(rep, sign=-1)

    logger.info(f"{rep.name}: R_VV built with {matrix.nnz()} nonzero entries ({conv.label})")
    return RMatrix(
        p=rep.dim,
        L=rep.L,
        matrix=matrix,
        weights=list(rep.weights),
        convention=conv.label,
        name=rep.name,
        inverse_matrix=inverse,
        factors=terms,
    )


COPRODUCT_K_POWER = -1


def coproduct_label(k_power: int = COPRODUCT_K_POWER) -> str:
    k, k_inv = ("K", "K^-1") if k_power == 1 else ("K^-1", "K")
    return f"Δ(E)=E⊗{k}+1⊗E, Δ(F)=F⊗1+{k_inv}⊗F"


def _coproducts(rep: RepModule, k_power: int = COPRODUCT_K_POWER) -> List[Tuple[str, SparseMat]]:
    """
    Δ on generators for the group-like K̂_i = K_i^{k_power}:
    Δ(E) = E ⊗ K̂ + 1 ⊗ E, Δ(F) = F ⊗ 1 + K̂^{-1} ⊗ F, Δ(K) = K ⊗ K.

    R_VV built under the selected convention intertwines k_power = -1 only.
    """
    ident = SparseMat.identity(rep.dim, rep.L)
    out = []
    for i in range(1, rep.root_system.rank + 1):
        k_hat = rep.K(i, k_power)
        k_std = rep.K(i, 1)
        out.append((f"E{i}", rep.matE[i].kron(k_hat) + ident.kron(rep.matE[i])))
        out.append((f"F{i}", rep.matF[i].kron(ident) + rep.K(i, -k_power).kron(rep.matF[i])))
        out.append((f"K{i}", k_std.kron(k_std)))
    return out


def check_intertwiner(rep: RepModule, R: RMatrix, k_power: int = COPRODUCT_K_POWER) -> bool:
    """True iff P·R commutes with Δ(E_i), Δ(F_i), Δ(K_i) for all i"""
    pr = R.pr()
    for label, delta in _coproducts(rep, k_power):
        if pr @ delta != delta @ pr:
            logger.info(f"{R.name}: PR fails to commute with Δ({label})")
            return False
    return True


def _anchor_entries_match(R: RMatrix, rep: RepModule) -> bool:
    """Anchor entries of the 16-dimensional D5 module"""
    a, b, top = rep.index_of(1), rep.index_of(2), rep.index_of(16)
    quarter = Scalar.q_power(Fraction(1, 4), R.L)
    pr = R.pr()
    return (
        R.entry(b, a, b, a) == quarter
        and R.entry(a, b, b, a) == quarter * Scalar.q_minus_qinv(R.L)
        and pr.get(R.index(a, top), R.index(top, a)) == Scalar.q_power(Fraction(-3, 4), R.L)
    )


@lru_cache(maxsize=1)
def select_convention() -> Convention:
    """
    Pick the first candidate convention whose D5 R-matrix reproduces the anchor
    entries and intertwines the coproduct. Cached for the process.
    """
    rep = load_module("d5_halfspin16")
    for conv in candidate_conventions():
        try:
            R = rvv(rep, conv)
        except (QForgeError, NonMinusculeError) as e:
            logger.debug(f"Convention {conv.label} rejected: {e}")
            continue
        if _anchor_entries_match(R, rep) and check_intertwiner(rep, R):
            logger.info(f"Selected R-matrix convention {conv.label}")
            return conv
        logger.debug(f"Convention {conv.label} does not match the anchors")
    raise ConventionError("no candidate convention reproduces the D5 anchor entries")


def _apply_on_legs(
    cols: Dict[int, List[Tuple[int, Scalar]]], p: int, vec: Dict[Tuple[int, int, int], Scalar], legs: Tuple[int, int]
) -> Dict[Tuple[int, int, int], Scalar]:
    x, y = legs
    out: Dict[Tuple[int, int, int], Scalar] = {}
    for key, value in vec.items():
        for row, entry in cols.get(key[x] * p + key[y], ()):
            new_key = list(key)
            new_key[x], new_key[y] = divmod(row, p)
            new_key = tuple(new_key)
            updated = out[new_key] + entry * value if new_key in out else entry * value
            if updated.is_zero():
                out.pop(new_key, None)
            else:
                out[new_key] = updated
    return out


def _sequence_apply(
    sequence: Sequence[Tuple[Dict[int, List[Tuple[int, Scalar]]], Tuple[int, int]]],
    p: int,
    column: int,
    L: int,
) -> Dict[Tuple[int, int, int], Scalar]:
    """Apply operators right-to-left to the basis vector of a composite column"""
    a, rest = divmod(column, p * p)
    b, c = divmod(rest, p)
    vec = {(a, b, c): Scalar.one(L)}
    for cols, legs in reversed(sequence):
        vec = _apply_on_legs(cols, p, vec, legs)
    return vec


def _columns_agree(lhs, rhs, p: int, L: int, columns: Sequence[int]) -> Optional[int]:
    for column in columns:
        if _sequence_apply(lhs, p, column, L) != _sequence_apply(rhs, p, column, L):
            return column
    return None


def select_columns(p: int, mode: CheckMode) -> List[int]:
    total = p**3
    if mode.kind == "full" or mode.n >= total:
        return list(range(total))
    rng = random.Random(mode.seed)
    return sorted(rng.sample(range(total), mode.n))


def check_triple_identity(
    lhs: Sequence[Tuple[SparseMat, Tuple[int, int]]],
    rhs: Sequence[Tuple[SparseMat, Tuple[int, int]]],
    p: int,
    L: int,
    mode: CheckMode,
    threads: int = 1,
) -> bool:
    """
    Compare two products of two-leg operators on V⊗V⊗V column by column.

    Args:
        lhs: Operators with the legs they act on, written left to right
        rhs: Same for the right-hand side
        p: Module dimension
        L: Exponent denominator
        mode: Full or sampled columns
        threads: joblib workers

    Returns:
        True iff every checked column agrees
    """
    lhs_cols = [(m.columns(), legs) for m, legs in lhs]
    rhs_cols = [(m.columns(), legs) for m, legs in rhs]
    columns = select_columns(p, mode)
    if threads <= 1:
        failure = _columns_agree(lhs_cols, rhs_cols, p, L, columns)
    else:
        chunks = [columns[k::threads] for k in range(threads)]
        results = Parallel(n_jobs=threads)(
            delayed(_columns_agree)(lhs_cols, rhs_cols, p, L, chunk) for chunk in chunks if chunk
        )
        failures = [r for r in results if r is not None]
        failure = min(failures) if failures else None
    if failure is not None:
        logger.info(f"Triple identity fails on column {failure}")
        return False
    return True


def check_qybe(R: RMatrix, mode: CheckMode = CheckMode(), threads: int = 1) -> bool:
    """R12 R13 R23 = R23 R13 R12 on V⊗V⊗V"""
    m = R.matrix
    return check_triple_identity(
        [(m, (0, 1)), (m, (0, 2)), (m, (1, 2))],
        [(m, (1, 2)), (m, (0, 2)), (m, (0, 1))],
        R.p,
        R.L,
        mode,
        threads,
    )


def check_triangular(R: RMatrix) -> bool:
    """Nonzero ((i,k),(j,l)) only for i = j, k = l or i < j, k > l; weight graded"""
    p = R.p
    for row, col, _ in R.matrix.entries():
        i, k = divmod(row, p)
        j, l = divmod(col, p)
        if not ((i == j and k == l) or (i < j and k > l)):
            return False
        if tuple(a + b for a, b in zip(R.weights[i], R.weights[k])) != tuple(
            a + b for a, b in zip(R.weights[j], R.weights[l])
        ):
            return False
    return True


def check_diagonal_is_pairing(R: RMatrix) -> bool:
    p = R.p
    for i in range(p):
        for k in range(p):
            if R.entry(i, k, i, k) != Scalar.q_power(inner(R.weights[i], R.weights[k]), R.L):
                return False
    return True


def check_extreme_columns(R: RMatrix) -> bool:
    """R(v ⊗ v_lowest) and R(v_highest ⊗ v) are pure diagonal terms"""
    p = R.p
    cols = R.matrix.columns()
    for v in range(p):
        for column in (R.index(v, 0), R.index(p - 1, v)):
            entries = cols.get(column, [])
            if len(entries) != 1 or entries[0][0] != column:
                return False
    return True


def is_symmetric(matrix: SparseMat) -> bool:
    return matrix == matrix.transpose()


def lplus_slice(
    R: RMatrix, which: str, i: int, j: int, minus_convention: str = "cross_cartan"
) -> SparseMat:
    """
    p×p image of (m^±)^i_j read from R (0-based basis indices).

    plus: T[x, y] = R^{-1}((i,x),(j,y)).
    minus: first-leg slice of R with a Cartan factor selected by
    ``minus_convention``:
      cross_cartan   R((x,i),(y,j)) q^{(wt_y - wt_x, wt_i)}
      row_cartan     R((x,i),(y,j))
      column_cartan  R((x,i),(y,j)) q^{(wt_y, wt_j) - (wt_x, wt_i)}
      inverse        R^{-1}((x,i),(y,j))
    """
    p, L = R.p, R.L
    rows: Dict[int, Dict[int, Scalar]] = {}
    if which == "plus":
        source = R.inverse()
        for x in range(p):
            row = source.rows.get(R.index(i, x))
            if not row:
                continue
            picked = {col - j * p: v for col, v in row.items() if col // p == j}
            if picked:
                rows[x] = picked
        return SparseMat(rows, (p, p), L)
    if which != "minus":
        raise ValueError(f"unknown slice kind {which!r}")
    if minus_convention not in MINUS_CONVENTIONS:
        raise ValueError(f"unknown minus convention {minus_convention!r}")

    source = R.inverse() if minus_convention == "inverse" else R.matrix
    w = R.weights
    for x in range(p):
        row = source.rows.get(R.index(x, i))
        if not row:
            continue
        picked: Dict[int, Scalar] = {}
        for col, value in row.items():
            y, l = divmod(col, p)
            if l != j:
                continue
            if minus_convention == "cross_cartan":
                value = value * Scalar.q_power(inner(w[y], w[i]) - inner(w[x], w[i]), L)
            elif minus_convention == "column_cartan":
                value = value * Scalar.q_power(inner(w[y], w[j]) - inner(w[x], w[i]), L)
            picked[y] = value
        if picked:
            rows[x] = picked
    return SparseMat(rows, (p, p), L)


def assemble_slices(R: RMatrix, which: str = "plus", minus_convention: str = "cross_cartan") -> SparseMat:
    """Blockwise matrix with block (i, j) = slice (i, j); row (i,x), column (j,y)"""
    p = R.p
    entries = []
    for i in range(p):
        for j in range(p):
            for x, y, v in lplus_slice(R, which, i, j, minus_convention).entries():
                entries.append((i * p + x, j * p + y, v))
    return SparseMat.from_entries(entries, (p * p, p * p), R.L)


def export_rmatrix(R: RMatrix) -> Dict[str, object]:
    """{"dim", "L", "entries": [[i,k,j,l, scalar], ...]} with 1-based indices"""
    p = R.p
    entries = []
    for row, col, value in R.matrix.entries():
        i, k = divmod(row, p)
        j, l = divmod(col, p)
        entries.append([i + 1, k + 1, j + 1, l + 1, to_json(value)])
    return {"dim": p, "L": R.L, "convention": R.convention, "entries": entries}


def mutate_entry(R: RMatrix, factor: Optional[Scalar] = None) -> RMatrix:
    """Copy of R with its first off-diagonal entry multiplied by ``factor`` (default q)"""
    factor = factor or Scalar.q_power(1, R.L)
    for row, col, value in R.matrix.entries():
        if row != col:
            rows = {r: dict(cols) for r, cols in R.matrix.rows.items()}
            rows[row][col] = value * factor
            return R.with_matrix(SparseMat(rows, R.matrix.shape, R.L), label="mutated")
    raise QForgeError("R-matrix has no off-diagonal entry to mutate")


def replace_diagonal_part(rep: RepModule, R: RMatrix) -> RMatrix:
    """R with the weight-pairing factor B removed (tail only)"""
    tail = weight_pairing_matrix(rep, sign=-1) @ R.matrix
    return R.with_matrix(tail, label="tail-only")
