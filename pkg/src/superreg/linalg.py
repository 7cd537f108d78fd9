"""Dense exact matrices over a FieldCtx, and polynomial matrices over F[z].

Entries are kept as packed field values internally; indexing hands back
FieldElement objects.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

from .errors import (
    IndexOutOfRange,
    Inconsistent,
    MixedFields,
    NotSquare,
    OrderTooLarge,
    ShapeMismatch,
)
from .finite_field import FieldCtx, FieldElement

PERMUTATION_EXPANSION_LIMIT = 7


class Matrix:
    """Immutable rows x cols matrix over one field."""

    __slots__ = ("field", "rows", "cols", "_v")

    def __init__(self, field: FieldCtx, rows: int, cols: int, values: Sequence[int]):
        if len(values) != rows * cols:
            raise ShapeMismatch(f"{len(values)} entries for a {rows}x{cols} matrix")
        self.field = field
        self.rows = rows
        self.cols = cols
        self._v = tuple(values)

    @classmethod
    def from_rows(cls, field: FieldCtx, rows: Sequence[Sequence]) -> Matrix:
        """Rows of FieldElement or int (ints are taken as F_p constants)."""
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        vals = []
        for r in rows:
            if len(r) != ncols:
                raise ShapeMismatch("ragged rows")
            for x in r:
                vals.append(_raw(field, x))
        return cls(field, len(rows), ncols, vals)

    @classmethod
    def zeros(cls, field: FieldCtx, rows: int, cols: int) -> Matrix:
        return cls(field, rows, cols, [0] * (rows * cols))

    @classmethod
    def identity(cls, field: FieldCtx, n: int) -> Matrix:
        return cls(field, n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> list[FieldElement]:
        return [FieldElement(self.field, v) for v in self._v]

    def raw(self, i: int, j: int) -> int:
        return self._v[i * self.cols + j]

    def raw_rows(self) -> list[list[int]]:
        c = self.cols
        return [list(self._v[i * c:(i + 1) * c]) for i in range(self.rows)]

    def __getitem__(self, ij: tuple[int, int]) -> FieldElement:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexOutOfRange(f"({i}, {j}) outside {self.rows}x{self.cols}")
        return FieldElement(self.field, self._v[i * self.cols + j])

    def to_rows(self) -> list[list[FieldElement]]:
        return [[FieldElement(self.field, v) for v in row] for row in self.raw_rows()]

    def is_zero(self) -> bool:
        return not any(self._v)

    def transpose(self) -> Matrix:
        r, c = self.rows, self.cols
        return Matrix(self.field, c, r, [self._v[i * c + j] for j in range(c) for i in range(r)])

    T = property(transpose)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.field == other.field and self._v == other._v

    def __hash__(self):
        return hash((self.rows, self.cols, self._v))

    def __add__(self, other: Matrix) -> Matrix:
        return mat_add(self, other)

    def __sub__(self, other: Matrix) -> Matrix:
        _same_shape(self, other)
        f = self.field
        return Matrix(f, self.rows, self.cols, [f._sub(a, b) for a, b in zip(self._v, other._v)])

    def __neg__(self) -> Matrix:
        f = self.field
        return Matrix(f, self.rows, self.cols, [f._neg(a) for a in self._v])

    def __matmul__(self, other: Matrix) -> Matrix:
        return mat_mul(self, other)

    def scale(self, c: FieldElement) -> Matrix:
        f = self.field
        cv = _raw(f, c)
        return Matrix(f, self.rows, self.cols, [f._mul(cv, a) for a in self._v])

    def __repr__(self):
        body = "; ".join(
            ", ".join(repr(FieldElement(self.field, v).coeffs) for v in row) for row in self.raw_rows()
        )
        return f"Matrix({self.rows}x{self.cols}: [{body}])"


def _raw(field: FieldCtx, x) -> int:
    if isinstance(x, FieldElement):
        if x.field != field:
            raise MixedFields(f"{x.field!r} entry in a {field!r} matrix")
        return x.value
    if isinstance(x, int):
        return x % field.p
    raise TypeError(f"unsupported matrix entry {x!r}")


def _same_shape(a: Matrix, b: Matrix) -> None:
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    if a.field != b.field:
        raise MixedFields(f"{a.field!r} vs {b.field!r}")


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    _same_shape(a, b)
    f = a.field
    return Matrix(f, a.rows, a.cols, [f._add(x, y) for x, y in zip(a._v, b._v)])


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a.cols != b.rows:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    f = a.field
    ar, bc = a.raw_rows(), b.transpose().raw_rows()
    out = []
    for row in ar:
        for col in bc:
            acc = 0
            for x, y in zip(row, col):
                if x and y:
                    acc = f._add(acc, f._mul(x, y))
            out.append(acc)
    return Matrix(f, a.rows, b.cols, out)


def submatrix(m: Matrix, rows: Iterable[int], cols: Iterable[int]) -> Matrix:
    """Rows and columns kept in the order given."""
    rows, cols = list(rows), list(cols)
    for i in rows:
        if not 0 <= i < m.rows:
            raise IndexOutOfRange(f"row {i} outside 0..{m.rows - 1}")
    for j in cols:
        if not 0 <= j < m.cols:
            raise IndexOutOfRange(f"column {j} outside 0..{m.cols - 1}")
    c = m.cols
    return Matrix(m.field, len(rows), len(cols), [m._v[i * c + j] for i in rows for j in cols])


def hstack(blocks: Sequence[Matrix]) -> Matrix:
    rows = blocks[0].rows
    if any(b.rows != rows for b in blocks):
        raise ShapeMismatch("hstack needs equal row counts")
    out = []
    for i in range(rows):
        for b in blocks:
            out.extend(b._v[i * b.cols:(i + 1) * b.cols])
    return Matrix(blocks[0].field, rows, sum(b.cols for b in blocks), out)


def vstack(blocks: Sequence[Matrix]) -> Matrix:
    cols = blocks[0].cols
    if any(b.cols != cols for b in blocks):
        raise ShapeMismatch("vstack needs equal column counts")
    out = []
    for b in blocks:
        out.extend(b._v)
    return Matrix(blocks[0].field, sum(b.rows for b in blocks), cols, out)


# --------------------------------------------------------------------------
# elimination


def _det_raw(f: FieldCtx, a: list[list[int]]) -> int:
    n = len(a)
    det = 1
    for k in range(n):
        piv = next((r for r in range(k, n) if a[r][k]), None)
        if piv is None:
            return 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = f._neg(det)
        pk = a[k][k]
        det = f._mul(det, pk)
        pinv = f._inv(pk)
        rowk = a[k]
        for r in range(k + 1, n):
            x = a[r][k]
            if x:
                factor = f._mul(x, pinv)
                row = a[r]
                for c in range(k + 1, n):
                    if rowk[c]:
                        row[c] = f._sub(row[c], f._mul(factor, rowk[c]))
    return det


def det(m: Matrix) -> FieldElement:
    """Determinant by Gaussian elimination, first nonzero pivot in each column."""
    if m.rows != m.cols:
        raise NotSquare(f"{m.rows}x{m.cols} matrix has no determinant")
    return FieldElement(m.field, _det_raw(m.field, m.raw_rows()))


def is_singular_raw(f: FieldCtx, a: list[list[int]]) -> bool:
    """Singularity test without field inversions; ``a`` is consumed.

    Rows are eliminated by cross-multiplication (row_r <- p*row_r - x*row_k),
    which scales the determinant by a nonzero factor only.
    """
    n = len(a)
    for k in range(n):
        piv = next((r for r in range(k, n) if a[r][k]), None)
        if piv is None:
            return True
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
        pk = a[k][k]
        rowk = a[k]
        for r in range(k + 1, n):
            x = a[r][k]
            if x:
                row = a[r]
                for c in range(k + 1, n):
                    row[c] = f._sub(f._mul(pk, row[c]), f._mul(x, rowk[c]))
    return False


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def det_permutation_expansion(
    m: Matrix, limit: int = PERMUTATION_EXPANSION_LIMIT
) -> tuple[FieldElement, list[tuple[tuple[int, ...], FieldElement]]]:
    """Leibniz expansion: (value, [(sigma, product) for every nonzero term])."""
    if m.rows != m.cols:
        raise NotSquare(f"{m.rows}x{m.cols} matrix has no determinant")
    if m.rows > limit:
        raise OrderTooLarge(f"order {m.rows} exceeds permutation-expansion limit {limit}")
    f = m.field
    a = m.raw_rows()
    total = 0
    terms = []
    for perm in permutations(range(m.rows)):
        prod = 1
        for i, j in enumerate(perm):
            prod = f._mul(prod, a[i][j])
            if not prod:
                break
        if not prod:
            continue
        terms.append((perm, FieldElement(f, prod)))
        total = f._add(total, prod) if _perm_sign(perm) > 0 else f._sub(total, prod)
    return FieldElement(f, total), terms


def _rref(f: FieldCtx, a: list[list[int]], ncols: int) -> list[int]:
    """In-place reduced row echelon form on the first ``ncols`` columns.

    Returns pivot columns; pivots are normalised to 1.
    """
    pivots = []
    r = 0
    nrows = len(a)
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pinv = f._inv(a[r][c])
        a[r] = [f._mul(pinv, x) for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c]:
                factor = a[i][c]
                a[i] = [f._sub(x, f._mul(factor, y)) for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots


def rank(m: Matrix) -> int:
    return len(_rref(m.field, m.raw_rows(), m.cols))


def solve_left(M: Matrix, R: Matrix) -> Matrix:
    """Some X with X @ M == R; free unknowns are set to zero.

    Each row x of X solves M^T x^T = r^T.  Pivots are taken in unknown order,
    so the free unknowns are the trailing dependent ones.
    """
    if M.cols != R.cols:
        raise ShapeMismatch(f"X @ {M.shape} cannot equal {R.shape}")
    f = M.field
    q = M.rows
    mt = M.transpose().raw_rows()
    rt = R.transpose().raw_rows()
    aug = [mrow + rrow for mrow, rrow in zip(mt, rt)]
    pivots = _rref(f, aug, q)
    for row in aug[len(pivots):]:
        if any(row[q:]):
            residual = Matrix(f, 1, R.rows, row[q:])
            raise Inconsistent("X @ M = R has no solution", residual=residual)
    xt = [[0] * R.rows for _ in range(q)]
    for i, c in enumerate(pivots):
        xt[c] = aug[i][q:]
    X = Matrix(f, q, R.rows, [v for row in xt for v in row]).transpose()
    return X


# --------------------------------------------------------------------------
# polynomial matrices


@dataclass(frozen=True)
class PolyMatrix:
    """sum_i coeffs[i] z^i with all coefficient matrices of one shape."""

    coeffs: tuple[Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise ShapeMismatch("polynomial matrix needs at least one coefficient")
        shape, field = self.coeffs[0].shape, self.coeffs[0].field
        for c in self.coeffs:
            if c.shape != shape or c.field != field:
                raise ShapeMismatch("coefficient matrices differ in shape or field")

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs[0].shape

    @property
    def field(self) -> FieldCtx:
        return self.coeffs[0].field

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, i: int) -> Matrix:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Matrix.zeros(self.field, *self.shape)

    def canonicalize(self) -> PolyMatrix:
        cs = list(self.coeffs)
        while len(cs) > 1 and cs[-1].is_zero():
            cs.pop()
        return PolyMatrix(tuple(cs))


def poly_mat_eval_coefficient(P: PolyMatrix, Q: PolyMatrix, i: int) -> Matrix:
    """Coefficient of z^i in P(z) Q(z)."""
    if P.shape[1] != Q.shape[0]:
        raise ShapeMismatch(f"cannot multiply {P.shape} by {Q.shape}")
    acc = Matrix.zeros(P.field, P.shape[0], Q.shape[1])
    for t in range(max(0, i - Q.degree), min(i, P.degree) + 1):
        acc = acc + P.coeffs[t] @ Q.coeffs[i - t]
    return acc


def poly_mat_mul(P: PolyMatrix, Q: PolyMatrix) -> PolyMatrix:
    return PolyMatrix(
        tuple(poly_mat_eval_coefficient(P, Q, i) for i in range(P.degree + Q.degree + 1))
    )


# --------------------------------------------------------------------------
# JSON entry format: coefficient lists (lowest degree first, trailing zeros
# dropped) or the shorthand "a^K" for alpha^K.


def parse_entry(field: FieldCtx, x) -> FieldElement:
    if isinstance(x, FieldElement):
        return x
    if isinstance(x, int):
        return field.scalar(x)
    if isinstance(x, (list, tuple)):
        return field.element(x)
    if isinstance(x, str):
        s = x.replace(" ", "")
        if s.startswith(("a^", "alpha^")):
            if not field.primitive:
                raise ValueError("exponent shorthand needs a primitive (verified or asserted) field")
            return field.alpha ** int(s.split("^", 1)[1])
        return field.element([int(c) for c in s.split(",") if c])
    raise TypeError(f"cannot parse matrix entry {x!r}")


def format_entry(e: FieldElement) -> list[int]:
    c = list(e.coeffs)
    while c and c[-1] == 0:
        c.pop()
    return c


def matrix_to_json(m: Matrix) -> list[list[list[int]]]:
    return [[format_entry(e) for e in row] for row in m.to_rows()]


def matrix_from_json(field: FieldCtx, rows: Sequence[Sequence]) -> Matrix:
    return Matrix.from_rows(field, [[parse_entry(field, x) for x in row] for row in rows])
