"""Exact rational-arithmetic kernel for small symmetric matrices.

Entries are stdlib :class:`fractions.Fraction` values (arbitrary-precision,
always reduced, positive denominator), so traces, determinants and
inverses come out with zero rounding error.  Intended for fixtures; the
dimension is capped because rational bit-length grows quickly.

The built-in fixture is the classic inverse-trace counterexample: the
3x3 integer matrix X whose inverse A violates the strong subadditivity
inequality for f(t) = -1/t by exactly 5/9.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import ParamOutOfRange, ShapeError, SingularError
from .matcore import Partition, SymMatrix
from .functions import catalog_get
from .ssa import SsaReport, ssa_gap

MAX_EXACT_DIM = 12


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)  # exact binary value of the float
    raise TypeError(f"cannot convert {type(v).__name__} to Fraction")


def _as_rows(m) -> list:
    rows = [[_as_fraction(v) for v in row] for row in (m.rows if isinstance(m, RatMatrix) else m)]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ShapeError("expected a non-empty square array of rationals")
    return rows


class RatMatrix:
    """Immutable symmetric matrix over the rationals."""

    __slots__ = ("_rows",)

    def __init__(self, rows):
        rows = _as_rows(rows)
        n = len(rows)
        if n > MAX_EXACT_DIM:
            raise ParamOutOfRange(f"exact kernel capped at dim {MAX_EXACT_DIM}, got {n}")
        for i in range(n):
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise ShapeError(
                        f"exact matrix not symmetric at ({i},{j}): "
                        f"{rows[i][j]} != {rows[j][i]}"
                    )
        self._rows = tuple(tuple(r) for r in rows)

    @property
    def dim(self):
        return len(self._rows)

    @property
    def rows(self):
        return self._rows

    @classmethod
    def identity(cls, n):
        return cls([[Fraction(int(i == j)) for j in range(n)] for i in range(n)])

    def submatrix(self, lo, hi):
        return RatMatrix([row[lo:hi] for row in self._rows[lo:hi]])

    def to_float(self) -> SymMatrix:
        return SymMatrix([[float(v) for v in row] for row in self._rows])

    def __eq__(self, other):
        return isinstance(other, RatMatrix) and self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self):
        return f"RatMatrix(dim={self.dim})"


def rat_trace(m) -> Fraction:
    rows = m.rows if isinstance(m, RatMatrix) else _as_rows(m)
    return sum((rows[i][i] for i in range(len(rows))), Fraction(0))


def rat_det(m) -> Fraction:
    """Exact determinant by fraction-free (Bareiss) elimination.

    Accepts a RatMatrix or any square array of rationals (products of
    symmetric matrices are generally not symmetric).
    """
    rows = [list(r) for r in (m.rows if isinstance(m, RatMatrix) else _as_rows(m))]
    n = len(rows)
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if rows[k][k] == 0:
            for r in range(k + 1, n):
                if rows[r][k] != 0:
                    rows[k], rows[r] = rows[r], rows[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        pivot = rows[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                rows[i][j] = (rows[i][j] * pivot - rows[i][k] * rows[k][j]) / prev
            rows[i][k] = Fraction(0)
        prev = pivot
    return sign * rows[n - 1][n - 1]


def rat_matmul(a, b) -> list:
    ra = a.rows if isinstance(a, RatMatrix) else _as_rows(a)
    rb = b.rows if isinstance(b, RatMatrix) else _as_rows(b)
    n = len(ra)
    if len(rb) != n:
        raise ShapeError("matmul dimension mismatch")
    return [
        [sum((ra[i][k] * rb[k][j] for k in range(n)), Fraction(0)) for j in range(n)]
        for i in range(n)
    ]


def rat_inverse(m: RatMatrix) -> RatMatrix:
    """Exact inverse by Gauss-Jordan elimination with pivoting.

    M times the result is exactly the identity; a zero determinant raises
    SingularError.
    """
    n = m.dim
    work = [list(row) + [Fraction(int(i == j)) for j in range(n)]
            for i, row in enumerate(m.rows)]
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if work[r][col] != 0), None)
        if pivot_row is None:
            raise SingularError(f"matrix is singular (no pivot in column {col})")
        if pivot_row != col:
            work[col], work[pivot_row] = work[pivot_row], work[col]
        pivot = work[col][col]
        work[col] = [v / pivot for v in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[col])]
    return RatMatrix([row[n:] for row in work])


def rat_str(v: Fraction) -> str:
    """Fixed 'num/den' serialization, denominator always present."""
    return f"{v.numerator}/{v.denominator}"


# The counterexample fixture: X is A^{-1}.
_ANDO_X = [[4, 8, -2], [8, 20, 0], [-2, 0, 9]]


def ando_matrix_x() -> RatMatrix:
    return RatMatrix(_ANDO_X)


def ando_matrix_a() -> RatMatrix:
    return rat_inverse(ando_matrix_x())


@dataclass(frozen=True)
class AndoReport:
    """Exact inverse traces of the fixture and its f(t) = -1/t gap.

    gap = tr_a_inv + tr_a22_inv - tr_b_inv - tr_c_inv, the exact amount by
    which the inequality fails (negative).  float_gap is the independent
    floating-point pipeline's value for cross-checking.
    """

    tr_a_inv: Fraction
    tr_b_inv: Fraction
    tr_c_inv: Fraction
    tr_a22_inv: Fraction
    gap: Fraction
    float_gap: float
    float_abs_diff: float
    matrix_a: RatMatrix
    float_report: SsaReport


def ando_report() -> AndoReport:
    """Exact reproduction of the counterexample, with a float cross-check."""
    a = ando_matrix_a()
    n = a.dim
    tr_a_inv = rat_trace(rat_inverse(a))
    b = a.submatrix(0, 2)
    c = a.submatrix(1, 3)
    a22 = a.submatrix(1, 2)
    tr_b_inv = rat_trace(rat_inverse(b))
    tr_c_inv = rat_trace(rat_inverse(c))
    tr_a22_inv = rat_trace(rat_inverse(a22))
    # For f(t) = -1/t each trace term is the negated inverse trace, so the
    # gap reduces to the inverse-trace combination below.
    gap = tr_a_inv + tr_a22_inv - tr_b_inv - tr_c_inv
    report = ssa_gap(catalog_get("neg_inverse"), a.to_float(), Partition(1, 1, 1))
    float_gap = report.gap
    return AndoReport(
        tr_a_inv=tr_a_inv,
        tr_b_inv=tr_b_inv,
        tr_c_inv=tr_c_inv,
        tr_a22_inv=tr_a22_inv,
        gap=gap,
        float_gap=float_gap,
        float_abs_diff=abs(float_gap - float(gap)),
        matrix_a=a,
        float_report=report,
    )
