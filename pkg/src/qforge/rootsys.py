"""
Root systems and weight lattices for the finite types A-G.

Simple roots are given as exact vectors in an orthonormal ε-basis. The numbering
follows the diagrams used by the induction cases:

- ``series`` layouts grow the B, C and D chains at the high-index end, so
  B_n has the short root α1 = ε1 and D_n has the fork at α1, α2.
- ``bourbaki`` layouts use the usual numbering (D_n fork at α_{n-1}, α_n,
  E-types embedded in R^8).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from .errors import UnsupportedAlgebraError

logger = logging.getLogger(__name__)

Vector = Tuple[Fraction, ...]

SUPPORTED_RANKS: Dict[str, Tuple[int, ...]] = {
    "A": tuple(range(1, 10)),
    "B": tuple(range(2, 9)),
    "C": tuple(range(2, 9)),
    "D": tuple(range(4, 9)),
    "E": (6, 7, 8),
    "F": (4,),
    "G": (2,),
}

LAYOUTS: Dict[str, Tuple[str, ...]] = {
    "A": ("standard",),
    "B": ("series", "bourbaki"),
    "C": ("series", "bourbaki"),
    "D": ("bourbaki", "series"),
    "E": ("bourbaki",),
    "F": ("bourbaki",),
    "G": ("bourbaki",),
}


def vec(values: Sequence) -> Vector:
    return tuple(Fraction(v) for v in values)


def inner(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def add(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(c: Fraction, v: Vector) -> Vector:
    return tuple(c * a for a in v)


def pad(v: Vector, dim: int) -> Vector:
    """Embed v into a larger ε-space by appending zero coordinates"""
    if len(v) > dim:
        raise ValueError(f"cannot pad a {len(v)}-vector to dimension {dim}")
    return v + (Fraction(0),) * (dim - len(v))


def reflect(v: Vector, alpha: Vector) -> Vector:
    return sub(v, scale(2 * inner(v, alpha) / inner(alpha, alpha), alpha))


def _unit(dim: int, i: int, c: Fraction = Fraction(1)) -> List[Fraction]:
    out = [Fraction(0)] * dim
    out[i] = c
    return out


def _diff(dim: int, i: int, j: int) -> Vector:
    """ε_i - ε_j with 0-based indices"""
    out = _unit(dim, i)
    out[j] -= 1
    return tuple(out)


def _simple_roots(family: str, rank: int, layout: str) -> List[Vector]:
    n = rank
    if family == "A":
        return [_diff(n + 1, i, i + 1) for i in range(n)]
    if family in ("B", "C"):
        short = Fraction(1) if family == "B" else Fraction(2)
        if layout == "series":
            roots = [tuple(_unit(n, 0, short))]
            roots += [_diff(n, i, i - 1) for i in range(1, n)]
            return roots
        roots = [_diff(n, i, i + 1) for i in range(n - 1)]
        return roots + [tuple(_unit(n, n - 1, short))]
    if family == "D":
        if layout == "series":
            plus = _unit(n, 1)
            plus[0] = Fraction(1)
            roots = [_diff(n, 1, 0), tuple(plus)]
            return roots + [_diff(n, i, i - 1) for i in range(2, n)]
        roots = [_diff(n, i, i + 1) for i in range(n - 1)]
        last = _unit(n, n - 2)
        last[n - 1] = Fraction(1)
        return roots + [tuple(last)]
    if family == "E":
        half = Fraction(1, 2)
        first = vec([half, -half, -half, -half, -half, -half, -half, half])
        second = _unit(8, 0)
        second[1] = Fraction(1)
        chain = [_diff(8, i, i - 1) for i in range(1, 7)]
        return ([first, tuple(second)] + chain)[:n]
    if family == "F":
        half = Fraction(1, 2)
        return [
            _diff(4, 1, 2),
            _diff(4, 2, 3),
            tuple(_unit(4, 3)),
            vec([half, -half, -half, -half]),
        ]
    if family == "G":
        return [vec([1, -1, 0]), vec([-2, 1, 1])]
    raise UnsupportedAlgebraError(f"unknown family {family}")


@dataclass(frozen=True, eq=False)
class Weight:
    """Weight with its coordinate basis (``epsilon`` or ``fundamental``)"""

    coords: Vector
    basis: str = "epsilon"

    def __post_init__(self):
        if self.basis not in ("epsilon", "fundamental"):
            raise ValueError(f"unknown weight basis {self.basis}")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Weight) and self.coords == other.coords and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.coords, self.basis))


@dataclass(frozen=True, eq=False)
class RootSystem:
    """
    Finite root system with exact ε-coordinates.

    Attributes:
        family: Letter A-G
        rank: Number of simple roots
        layout: Simple-root numbering convention
        simple_roots: α_1..α_n as ε-vectors
        cartan: Integer matrix a_ij = 2(α_i,α_j)/(α_i,α_i)
        symmetrizers: d_i = (α_i,α_i)/2
        positive_roots: Φ+ in ε-coordinates
        rho: Half-sum of positive roots
        fundamental_weights: λ_1..λ_n as ε-vectors
        fw_gram: Matrix of (λ_i, λ_j)
        w0_word: Reduced word of the longest Weyl group element (1-based)
    """

    family: str
    rank: int
    layout: str
    simple_roots: Tuple[Vector, ...]
    cartan: np.ndarray
    symmetrizers: Tuple[Fraction, ...]
    positive_roots: Tuple[Vector, ...]
    rho: Vector
    fundamental_weights: Tuple[Vector, ...]
    fw_gram: Tuple[Tuple[Fraction, ...], ...]
    w0_word: Tuple[int, ...]
    _root_index: Dict[Vector, int] = field(default_factory=dict, repr=False)

    @property
    def name(self) -> str:
        return f"{self.family}{self.rank}"

    @property
    def dim(self) -> int:
        return len(self.simple_roots[0])

    def alpha(self, i: int) -> Vector:
        """Simple root α_i, 1-based"""
        return self.simple_roots[i - 1]

    def is_positive_root(self, v: Vector) -> bool:
        return v in self._root_index

    def root_coordinates(self, v: Vector) -> Vector:
        """Coefficients c_i with v = Σ c_i α_i, using (λ_i, v) = c_i d_i"""
        return tuple(inner(lam, v) / d for lam, d in zip(self.fundamental_weights, self.symmetrizers))

    def reflect_simple(self, v: Vector, i: int) -> Vector:
        return reflect(v, self.alpha(i))

    def w0_roots(self) -> List[Vector]:
        """β_j = s_{i_1}...s_{i_{j-1}}(α_{i_j}) along ``w0_word``"""
        roots = []
        for j, i in enumerate(self.w0_word):
            beta = self.alpha(i)
            for k in reversed(self.w0_word[:j]):
                beta = self.reflect_simple(beta, k)
            roots.append(beta)
        return roots

    def to_report(self) -> Dict[str, object]:
        return {
            "family": self.family,
            "rank": self.rank,
            "layout": self.layout,
            "cartan": self.cartan.tolist(),
            "positive_roots": len(self.positive_roots),
            "w0_word": list(self.w0_word),
        }


def cartan_from_roots(simple_roots: Sequence[Vector]) -> np.ndarray:
    n = len(simple_roots)
    matrix = np.zeros((n, n), dtype=int)
    for i, a in enumerate(simple_roots):
        for j, b in enumerate(simple_roots):
            value = 2 * inner(a, b) / inner(a, a)
            if value.denominator != 1:
                raise UnsupportedAlgebraError(f"non-integral Cartan entry a_{i + 1}{j + 1} = {value}")
            matrix[i, j] = int(value)
    return matrix


def _fundamental_weights(simple_roots: Sequence[Vector], cartan: np.ndarray) -> List[Vector]:
    inv = sympy.Matrix(cartan.tolist()).inv()
    n = len(simple_roots)
    weights = []
    for i in range(n):
        acc = tuple(Fraction(0) for _ in simple_roots[0])
        for j in range(n):
            coeff = Fraction(int(inv[j, i].p), int(inv[j, i].q))
            acc = add(acc, scale(coeff, simple_roots[j]))
        weights.append(acc)
    return weights


def _root_closure(simple_roots: Sequence[Vector]) -> List[Vector]:
    """All roots as the Weyl orbit of the simple roots"""
    seen = set(simple_roots)
    frontier = list(simple_roots)
    while frontier:
        nxt = []
        for root in frontier:
            for alpha in simple_roots:
                image = reflect(root, alpha)
                if image not in seen:
                    seen.add(image)
                    nxt.append(image)
        frontier = nxt
    return sorted(seen)


def _greedy_w0(rho: Vector, simple_roots: Sequence[Vector]) -> List[int]:
    """Descend from ρ to -ρ, always reflecting in the lowest-index descent"""
    word: List[int] = []
    v = rho
    while True:
        descent = next((i for i, a in enumerate(simple_roots) if inner(v, a) > 0), None)
        if descent is None:
            return word
        v = reflect(v, simple_roots[descent])
        word.append(descent + 1)


@lru_cache(maxsize=None)
def build_root_system(family: str, rank: int, layout: Optional[str] = None) -> RootSystem:
    """
    Build a root system with exact data.

    Args:
        family: A, B, C, D, E, F or G
        rank: Number of simple roots
        layout: Numbering convention; the family default when omitted

    Returns:
        Immutable root system
    """
    family = family.upper()
    if family not in SUPPORTED_RANKS or rank not in SUPPORTED_RANKS[family]:
        raise UnsupportedAlgebraError(f"unsupported root system {family}{rank}")
    layout = layout or LAYOUTS[family][0]
    if layout not in LAYOUTS[family]:
        raise UnsupportedAlgebraError(f"layout {layout!r} not available for family {family}")

    simple = [vec(r) for r in _simple_roots(family, rank, layout)]
    cartan = cartan_from_roots(simple)
    cartan.setflags(write=False)
    symmetrizers = tuple(inner(a, a) / 2 for a in simple)
    fundamental = _fundamental_weights(simple, cartan)
    height = tuple(sum(col) for col in zip(*fundamental))
    positive = [r for r in _root_closure(simple) if inner(r, height) > 0]
    rho = scale(Fraction(1, 2), tuple(sum(col) for col in zip(*positive)))
    gram = tuple(tuple(inner(a, b) for b in fundamental) for a in fundamental)
    word = _greedy_w0(rho, simple)

    rs = RootSystem(
        family=family,
        rank=rank,
        layout=layout,
        simple_roots=tuple(simple),
        cartan=cartan,
        symmetrizers=symmetrizers,
        positive_roots=tuple(positive),
        rho=rho,
        fundamental_weights=tuple(fundamental),
        fw_gram=gram,
        w0_word=tuple(word),
        _root_index={r: n for n, r in enumerate(positive)},
    )
    logger.debug(f"Built {rs.name} ({layout}): {len(positive)} positive roots")
    return rs


def pairing(rs: RootSystem, mu: Weight, beta: Vector) -> Fraction:
    """⟨μ, β^∨⟩ = 2(μ,β)/(β,β)"""
    norm = inner(beta, beta)
    if norm == 0:
        raise ValueError("pairing with the zero vector")
    return 2 * inner(to_epsilon(rs, mu).coords, beta) / norm


def fundamental_to_epsilon(rs: RootSystem, coeffs: Sequence) -> Weight:
    if len(coeffs) != rs.rank:
        raise ValueError(f"expected {rs.rank} fundamental coordinates, got {len(coeffs)}")
    acc = tuple(Fraction(0) for _ in range(rs.dim))
    for c, lam in zip(coeffs, rs.fundamental_weights):
        acc = add(acc, scale(Fraction(c), lam))
    return Weight(acc, "epsilon")


def epsilon_to_fundamental(rs: RootSystem, mu: Weight) -> Weight:
    """Fundamental coordinates ⟨μ, α_i^∨⟩; exact round trip on the weight lattice span"""
    if mu.basis == "fundamental":
        return mu
    return Weight(tuple(pairing(rs, mu, a) for a in rs.simple_roots), "fundamental")


def to_epsilon(rs: RootSystem, mu: Weight) -> Weight:
    return fundamental_to_epsilon(rs, mu.coords) if mu.basis == "fundamental" else mu


def weight_norm(rs: RootSystem, mu: Weight) -> Fraction:
    """(μ, μ) from fundamental coordinates and the Gram matrix of the λ_i"""
    c = epsilon_to_fundamental(rs, mu).coords
    return sum((c[i] * rs.fw_gram[i][j] * c[j] for i in range(rs.rank) for j in range(rs.rank)), Fraction(0))


def _dynkin_edges(cartan: np.ndarray) -> Dict[int, List[int]]:
    n = cartan.shape[0]
    adjacency: Dict[int, List[int]] = {i: [] for i in range(n)}
    for i in range(n):
        for j in range(n):
            if i != j and cartan[i, j] != 0:
                if cartan[j, i] == 0:
                    raise UnsupportedAlgebraError("Cartan matrix is not symmetrizable")
                adjacency[i].append(j)
    return adjacency


def symmetrizers_of(cartan: np.ndarray) -> List[Fraction]:
    """Positive d_i with d_i a_ij = d_j a_ji along a connected Dynkin diagram"""
    n = cartan.shape[0]
    adjacency = _dynkin_edges(cartan)
    d: List[Optional[Fraction]] = [None] * n
    d[0] = Fraction(1)
    stack = [0]
    while stack:
        i = stack.pop()
        for j in adjacency[i]:
            value = d[i] * Fraction(int(cartan[i, j]), int(cartan[j, i]))
            if d[j] is None:
                d[j] = value
                stack.append(j)
            elif d[j] != value:
                raise UnsupportedAlgebraError("Cartan matrix is not symmetrizable")
    if any(x is None for x in d):
        raise UnsupportedAlgebraError("Dynkin diagram is disconnected")
    return [x for x in d if x is not None]


def classify_cartan(cartan: np.ndarray) -> Tuple[str, int]:
    """
    Identify the family and rank of a connected finite-type Cartan matrix.

    B2 and C2 are both reported as ("B", 2).
    """
    cartan = np.asarray(cartan, dtype=int)
    n = cartan.shape[0]
    if n == 1:
        return "A", 1
    if any(cartan[i, i] != 2 for i in range(n)):
        raise UnsupportedAlgebraError("diagonal entries of a Cartan matrix must be 2")
    adjacency = _dynkin_edges(cartan)
    d = symmetrizers_of(cartan)
    edges = {(min(i, j), max(i, j)) for i in adjacency for j in adjacency[i]}
    if len(edges) != n - 1:
        raise UnsupportedAlgebraError("Dynkin diagram is not a tree")
    bonds = {e: int(cartan[e[0], e[1]] * cartan[e[1], e[0]]) for e in edges}
    degrees = {i: len(adjacency[i]) for i in range(n)}

    if any(b == 3 for b in bonds.values()):
        if n == 2:
            return "G", 2
        raise UnsupportedAlgebraError("triple bond outside G2")
    doubles = [e for e, b in bonds.items() if b == 2]
    if any(b > 3 for b in bonds.values()) or len(doubles) > 1:
        raise UnsupportedAlgebraError("not of finite type")
    if doubles:
        if max(degrees.values()) > 2:
            raise UnsupportedAlgebraError("branched diagram with a double bond")
        if n == 2:
            return "B", 2
        i, j = doubles[0]
        ends = [k for k in (i, j) if degrees[k] == 1]
        if not ends:
            if n == 4:
                return "F", 4
            raise UnsupportedAlgebraError("double bond inside a chain longer than F4")
        end = ends[0]
        other = j if end == i else i
        return ("B", n) if d[end] < d[other] else ("C", n)

    branch = [i for i in range(n) if degrees[i] >= 3]
    if not branch:
        return "A", n
    if len(branch) > 1 or degrees[branch[0]] > 3:
        raise UnsupportedAlgebraError("not of finite type")
    center = branch[0]
    arms = []
    for start in adjacency[center]:
        length, prev, cur = 1, center, start
        while True:
            nxt = [k for k in adjacency[cur] if k != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            length += 1
        arms.append(length)
    arms.sort()
    if arms[0] == 1 and arms[1] == 1:
        return "D", n
    if arms[:2] == [1, 2] and arms[2] in (2, 3, 4):
        return "E", n
    raise UnsupportedAlgebraError(f"simply-laced diagram with arms {arms} is not finite type")


def normalize_target(family: str, rank: int) -> Tuple[str, int]:
    if family.upper() == "C" and rank == 2:
        return "B", 2
    return family.upper(), rank
