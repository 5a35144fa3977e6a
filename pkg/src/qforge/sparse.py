"""
Dict-of-dicts sparse matrices over exact scalars.

Rows map column index to a nonzero ``Scalar``; zero entries are never stored.
Indices are 0-based. Matrices are treated as immutable values: every operation
returns a new matrix.
"""

import logging
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import ExactArithmeticError, SingularMatrixError
from .exactq import Scalar

logger = logging.getLogger(__name__)

Row = Dict[int, Scalar]
SparseVec = Dict[int, Scalar]


def _axpy(target: Row, factor: Scalar, source: Row) -> None:
    """target += factor * source, in place, dropping cancelled entries"""
    for j, value in source.items():
        current = target.get(j)
        updated = factor * value if current is None else current + factor * value
        if updated.is_zero():
            target.pop(j, None)
        else:
            target[j] = updated


class SparseMat:
    """
    Sparse matrix with exact ``Scalar`` entries.

    Args:
        rows: Mapping row -> (column -> value); zero values are dropped
        shape: (number of rows, number of columns)
        L: Exponent denominator shared by every entry
    """

    __slots__ = ("rows", "shape", "L")

    def __init__(self, rows: Dict[int, Row], shape: Tuple[int, int], L: int):
        self.rows: Dict[int, Row] = {}
        for i, row in rows.items():
            cleaned = {j: v for j, v in row.items() if not v.is_zero()}
            if cleaned:
                self.rows[i] = cleaned
        self.shape = shape
        self.L = L

    @classmethod
    def _wrap(cls, rows: Dict[int, Row], shape: Tuple[int, int], L: int) -> "SparseMat":
        obj = cls.__new__(cls)
        obj.rows, obj.shape, obj.L = rows, shape, L
        return obj

    @classmethod
    def zeros(cls, n: int, m: int, L: int) -> "SparseMat":
        return cls._wrap({}, (n, m), L)

    @classmethod
    def identity(cls, n: int, L: int) -> "SparseMat":
        one = Scalar.one(L)
        return cls._wrap({i: {i: one} for i in range(n)}, (n, n), L)

    @classmethod
    def diagonal(cls, values: Sequence[Scalar], L: int) -> "SparseMat":
        n = len(values)
        return cls({i: {i: v} for i, v in enumerate(values)}, (n, n), L)

    @classmethod
    def from_entries(
        cls, entries: Iterable[Tuple[int, int, Scalar]], shape: Tuple[int, int], L: int
    ) -> "SparseMat":
        rows: Dict[int, Row] = {}
        for i, j, v in entries:
            row = rows.setdefault(i, {})
            row[j] = row[j] + v if j in row else v
        return cls(rows, shape, L)

    @classmethod
    def flip(cls, p: int, L: int) -> "SparseMat":
        """Permutation P(v_i ⊗ v_k) = v_k ⊗ v_i on a p*p-dimensional space"""
        one = Scalar.one(L)
        return cls._wrap({i * p + k: {k * p + i: one} for i in range(p) for k in range(p)}, (p * p, p * p), L)

    def get(self, i: int, j: int) -> Scalar:
        value = self.rows.get(i, {}).get(j)
        return value if value is not None else Scalar.zero(self.L)

    def nnz(self) -> int:
        return sum(len(row) for row in self.rows.values())

    def entries(self) -> Iterator[Tuple[int, int, Scalar]]:
        """Nonzero entries sorted by (row, column)"""
        for i in sorted(self.rows):
            row = self.rows[i]
            for j in sorted(row):
                yield i, j, row[j]

    def is_zero(self) -> bool:
        return not self.rows

    def is_diagonal(self) -> bool:
        return all(set(row) == {i} for i, row in self.rows.items())

    def _check_shape(self, other: "SparseMat", op: str) -> None:
        if other.L != self.L:
            raise ExactArithmeticError(f"{op}: exponent denominators {self.L} and {other.L} differ")

    def __matmul__(self, other: "SparseMat") -> "SparseMat":
        self._check_shape(other, "matmul")
        if self.shape[1] != other.shape[0]:
            raise ExactArithmeticError(f"matmul: shapes {self.shape} and {other.shape}")
        result: Dict[int, Row] = {}
        for i, row in self.rows.items():
            acc: Row = {}
            for k, a in row.items():
                other_row = other.rows.get(k)
                if other_row:
                    _axpy(acc, a, other_row)
            if acc:
                result[i] = acc
        return SparseMat._wrap(result, (self.shape[0], other.shape[1]), self.L)

    def __add__(self, other: "SparseMat") -> "SparseMat":
        self._check_shape(other, "add")
        one = Scalar.one(self.L)
        result = {i: dict(row) for i, row in self.rows.items()}
        for i, row in other.rows.items():
            target = result.setdefault(i, {})
            _axpy(target, one, row)
            if not target:
                del result[i]
        return SparseMat._wrap(result, self.shape, self.L)

    def __sub__(self, other: "SparseMat") -> "SparseMat":
        return self + other.scale(Scalar.from_rational(-1, self.L))

    def __neg__(self) -> "SparseMat":
        return self.scale(Scalar.from_rational(-1, self.L))

    def scale(self, factor: Scalar) -> "SparseMat":
        if factor.is_zero():
            return SparseMat.zeros(*self.shape, L=self.L)
        return SparseMat._wrap(
            {i: {j: v * factor for j, v in row.items()} for i, row in self.rows.items()},
            self.shape,
            self.L,
        )

    def add_scalar_identity(self, value: Scalar) -> "SparseMat":
        """self + value * I"""
        return self + SparseMat.identity(self.shape[0], self.L).scale(value)

    def transpose(self) -> "SparseMat":
        result: Dict[int, Row] = {}
        for i, row in self.rows.items():
            for j, v in row.items():
                result.setdefault(j, {})[i] = v
        return SparseMat._wrap(result, (self.shape[1], self.shape[0]), self.L)

    def kron(self, other: "SparseMat") -> "SparseMat":
        """Kronecker product with row-major composite index i * n + k"""
        self._check_shape(other, "kron")
        n, m = other.shape
        result: Dict[int, Row] = {}
        for i, row in self.rows.items():
            for k, other_row in other.rows.items():
                target: Row = {}
                for j, a in row.items():
                    for l, b in other_row.items():
                        target[j * m + l] = a * b
                result[i * n + k] = target
        return SparseMat._wrap(result, (self.shape[0] * n, self.shape[1] * m), self.L)

    def columns(self) -> Dict[int, List[Tuple[int, Scalar]]]:
        """Column-major view: column -> list of (row, value)"""
        cols: Dict[int, List[Tuple[int, Scalar]]] = {}
        for i, j, v in self.entries():
            cols.setdefault(j, []).append((i, v))
        return cols

    def apply(self, vec: SparseVec) -> SparseVec:
        """Matrix-vector product for a sparse vector"""
        result: SparseVec = {}
        for i, row in self.rows.items():
            acc: Optional[Scalar] = None
            for j, a in row.items():
                x = vec.get(j)
                if x is not None:
                    acc = a * x if acc is None else acc + a * x
            if acc is not None and not acc.is_zero():
                result[i] = acc
        return result

    def submatrix(self, row_ids: Sequence[int], col_ids: Sequence[int]) -> "SparseMat":
        col_pos = {c: n for n, c in enumerate(col_ids)}
        result: Dict[int, Row] = {}
        for r_new, r in enumerate(row_ids):
            row = self.rows.get(r)
            if not row:
                continue
            picked = {col_pos[j]: v for j, v in row.items() if j in col_pos}
            if picked:
                result[r_new] = picked
        return SparseMat._wrap(result, (len(row_ids), len(col_ids)), self.L)

    def inverse(self) -> "SparseMat":
        """Gauss-Jordan inverse over the exact field"""
        n = self.shape[0]
        if n != self.shape[1]:
            raise SingularMatrixError(f"inverse of non-square matrix {self.shape}")
        one = Scalar.one(self.L)
        work: List[Row] = [dict(self.rows.get(i, {})) for i in range(n)]
        aug: List[Row] = [{i: one} for i in range(n)]
        for col in range(n):
            pivot = next((r for r in range(col, n) if col in work[r]), None)
            if pivot is None:
                raise SingularMatrixError(f"matrix is singular at column {col}")
            if pivot != col:
                work[col], work[pivot] = work[pivot], work[col]
                aug[col], aug[pivot] = aug[pivot], aug[col]
            inv_pivot = work[col][col].inverse()
            work[col] = {j: v * inv_pivot for j, v in work[col].items()}
            aug[col] = {j: v * inv_pivot for j, v in aug[col].items()}
            for r in range(n):
                if r != col and col in work[r]:
                    factor = -work[r][col]
                    _axpy(work[r], factor, work[col])
                    _axpy(aug[r], factor, aug[col])
        return SparseMat._wrap({i: row for i, row in enumerate(aug) if row}, (n, n), self.L)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseMat):
            return NotImplemented
        return self.shape == other.shape and self.L == other.L and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.shape, self.L, tuple(self.entries())))

    def __repr__(self) -> str:
        return f"SparseMat(shape={self.shape}, nnz={self.nnz()}, L={self.L})"


def product(factors: Sequence[SparseMat]) -> SparseMat:
    """Ordered product factors[0] @ factors[1] @ ..."""
    if not factors:
        raise ExactArithmeticError("empty product")
    result = factors[0]
    for factor in factors[1:]:
        result = result @ factor
    return result
