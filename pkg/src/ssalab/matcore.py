"""Dense real symmetric matrix kernel.

Provides the value types (:class:`SymMatrix`, :class:`Partition`,
:class:`EigDecomp`), spectral functional calculus, block extraction,
compressions onto leading/trailing coordinate ranges, pinchings,
majorization checks, and the plain-text matrix file format.

All operations are pure: inputs are never mutated and every returned
matrix owns its storage.  Matrices are real symmetric only; symmetry is
enforced at construction by averaging with the transpose, and inputs that
are asymmetric beyond a small relative tolerance are rejected outright.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DomainError, ParseError, ShapeError

# Inputs with max |M - M^T| above this times max |M| are rejected.
SYMMETRY_REJECT_RTOL = 1e-8
# Eigenvalues within this times max(1, ||A||_2) outside a function's domain
# boundary are clamped onto the boundary (when the function is finite there).
CLAMP_RTOL = 1e-12


class SymMatrix:
    """Immutable real symmetric matrix with an explicit dimension.

    Construction symmetrizes the input as (M + M^T)/2 and records the
    asymmetry max |M - M^T| that was removed.  A 0x0 matrix is legal (it
    arises as a block of a degenerate partition) and has trace 0.
    """

    __slots__ = ("_m", "_asymmetry")

    def __init__(self, entries):
        m = np.array(entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {m.shape}")
        if m.size and not np.all(np.isfinite(m)):
            raise ShapeError("matrix entries must be finite")
        if m.size:
            scale = float(np.max(np.abs(m)))
            asym = float(np.max(np.abs(m - m.T)))
            if asym > SYMMETRY_REJECT_RTOL * scale:
                raise ShapeError(
                    f"matrix is not symmetric: max |M - M^T| = {asym:.3g} "
                    f"exceeds {SYMMETRY_REJECT_RTOL:g} * max|M| = "
                    f"{SYMMETRY_REJECT_RTOL * scale:.3g}"
                )
        else:
            asym = 0.0
        m = (m + m.T) / 2.0
        m.setflags(write=False)
        self._m = m
        self._asymmetry = asym

    @property
    def dim(self):
        return self._m.shape[0]

    @property
    def entries(self):
        """Read-only (dim, dim) float64 view."""
        return self._m

    @property
    def asymmetry(self):
        """max |M - M^T| of the raw input before symmetrization."""
        return self._asymmetry

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @classmethod
    def from_diag(cls, values):
        return cls(np.diag(np.asarray(values, dtype=np.float64)))

    def trace(self):
        return float(np.trace(self._m)) if self.dim else 0.0

    def fro_norm(self):
        return float(np.linalg.norm(self._m)) if self.dim else 0.0

    def max_norm(self):
        return float(np.max(np.abs(self._m))) if self.dim else 0.0

    def two_norm(self):
        if self.dim == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvalsh(self._m))))

    def __repr__(self):
        return f"SymMatrix(dim={self.dim})"


@dataclass(frozen=True)
class Partition:
    """Split of the coordinate range into three consecutive groups.

    Encodes the orthogonal projections onto the first d1 coordinates, the
    next d2, and the last d3; the three projections sum to the identity.
    Empty parts are legal.
    """

    d1: int
    d2: int
    d3: int

    def __post_init__(self):
        for d in (self.d1, self.d2, self.d3):
            if not isinstance(d, int) or d < 0:
                raise ShapeError(f"partition parts must be nonnegative ints, got {self}")

    @property
    def dim(self):
        return self.d1 + self.d2 + self.d3

    def check(self, dim):
        if self.dim != dim:
            raise ShapeError(
                f"partition {self.as_tuple()} sums to {self.dim}, matrix dim is {dim}"
            )

    def as_tuple(self):
        return (self.d1, self.d2, self.d3)

    @property
    def s1(self):
        return slice(0, self.d1)

    @property
    def s2(self):
        return slice(self.d1, self.d1 + self.d2)

    @property
    def s3(self):
        return slice(self.d1 + self.d2, self.dim)

    @property
    def s12(self):
        return slice(0, self.d1 + self.d2)

    @property
    def s23(self):
        return slice(self.d1, self.dim)


@dataclass(frozen=True)
class EigDecomp:
    """Eigendecomposition with eigenvalues ascending, column i of vectors
    paired with eigenvalue i."""

    eigenvalues: np.ndarray
    vectors: np.ndarray


class Blocks(NamedTuple):
    a11: np.ndarray
    a12: np.ndarray
    a13: np.ndarray
    a22: np.ndarray
    a23: np.ndarray
    a33: np.ndarray


def eig_sym(a: SymMatrix) -> EigDecomp:
    """Full symmetric eigendecomposition, eigenvalues sorted ascending.

    Backed by LAPACK's symmetric solver; a convergence failure there (rare,
    pathological input) surfaces as ConvergenceError.
    """
    if a.dim == 0:
        return EigDecomp(np.zeros(0), np.zeros((0, 0)))
    try:
        w, v = np.linalg.eigh(a.entries)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc
    w.setflags(write=False)
    v.setflags(write=False)
    return EigDecomp(w, v)


def _eigvals(a: SymMatrix) -> np.ndarray:
    if a.dim == 0:
        return np.zeros(0)
    try:
        return np.linalg.eigvalsh(a.entries)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc


def _clamped_spectrum(f, w):
    """Eigenvalues of a matrix moved onto f's domain where rounding pushed
    them marginally off it.

    Clamp tolerance is CLAMP_RTOL * max(1, ||A||_2).  An eigenvalue farther
    outside, or one at a boundary where f is not finite, raises DomainError.
    """
    if len(w) == 0:
        return w
    tol = CLAMP_RTOL * max(1.0, float(np.max(np.abs(w))))
    dom = f.domain
    out = []
    for lam in w:
        lam = float(lam)
        if dom.contains(lam):
            out.append(lam)
            continue
        # Inf upper end means the only boundary to consider is the lower one.
        dist = dom.lo - lam if lam < dom.lo else 0.0
        finite_at_boundary = f.finite_at_zero if dom.lo == 0.0 else False
        if dist <= tol and finite_at_boundary:
            out.append(dom.lo)
        else:
            raise DomainError(
                f"eigenvalue {lam!r} outside domain {dom.label()} of {f.name}",
                offending=lam,
            )
    return out


def apply_spectral(f, a: SymMatrix) -> SymMatrix:
    """f applied to a through the spectral calculus: V diag(f(lambda)) V^T."""
    dec = eig_sym(a)
    lams = _clamped_spectrum(f, dec.eigenvalues)
    fw = np.array([f.value(lam) for lam in lams], dtype=np.float64)
    return SymMatrix((dec.vectors * fw) @ dec.vectors.T)


def trace_f(f, a: SymMatrix) -> float:
    """Trace of f(A), computed as the sum of f over the spectrum."""
    lams = _clamped_spectrum(f, _eigvals(a))
    return math.fsum(f.value(lam) for lam in lams)


def blocks(a: SymMatrix, p: Partition) -> Blocks:
    """The six distinct blocks of A under the 3-way partition.

    Reassembling them (with transposes below the diagonal) reproduces A
    exactly.
    """
    p.check(a.dim)
    m = a.entries
    return Blocks(
        a11=m[p.s1, p.s1].copy(),
        a12=m[p.s1, p.s2].copy(),
        a13=m[p.s1, p.s3].copy(),
        a22=m[p.s2, p.s2].copy(),
        a23=m[p.s2, p.s3].copy(),
        a33=m[p.s3, p.s3].copy(),
    )


def compress_b(a: SymMatrix, p: Partition) -> SymMatrix:
    """Leading principal submatrix over the first two parts (d1+d2 rows)."""
    p.check(a.dim)
    return SymMatrix(a.entries[p.s12, p.s12])


def compress_c(a: SymMatrix, p: Partition) -> SymMatrix:
    """Trailing principal submatrix over the last two parts (d2+d3 rows)."""
    p.check(a.dim)
    return SymMatrix(a.entries[p.s23, p.s23])


def project_form(a: SymMatrix, p: Partition, which) -> SymMatrix:
    """Full-dimension compression P A P for P in {P12, P2, P23}.

    This is the zero-padded version of the corresponding principal
    submatrix; its spectrum is that submatrix's spectrum plus zeros.
    """
    p.check(a.dim)
    key = str(which)
    if key not in ("12", "2", "23"):
        raise ValueError(f"which must be one of 12, 2, 23, got {which!r}")
    s = {"12": p.s12, "2": p.s2, "23": p.s23}[key]
    z = np.zeros((a.dim, a.dim))
    z[s, s] = a.entries[s, s]
    return SymMatrix(z)


def pinch(a: SymMatrix, k: int) -> SymMatrix:
    """P A P + Q A Q for P the projection onto the first k coordinates.

    Equals A with the off-diagonal blocks coupling the first k and last
    dim-k coordinates zeroed; the diagonal (hence the trace) is unchanged.
    """
    if not (0 <= k <= a.dim):
        raise ShapeError(f"pinch split {k} outside [0, {a.dim}]")
    m = a.entries.copy()
    m[:k, k:] = 0.0
    m[k:, :k] = 0.0
    return SymMatrix(m)


@dataclass(frozen=True)
class MajorizationReport:
    """Outcome of a majorization test with the observed slack.

    min_slack is the smallest partial-sum surplus of x over y after
    sorting both descending (negative means a violated prefix).
    """

    holds: bool
    min_slack: float
    total_x: float
    total_y: float

    def __bool__(self):
        return self.holds


# Partial sums may dip below by this times the vector scale and still pass.
MAJORIZE_SLACK_RTOL = 1e-10
# Totals must agree to this relative tolerance.
MAJORIZE_TOTAL_RTOL = 1e-9


def majorizes(x, y) -> MajorizationReport:
    """Does x majorize y (sorted partial sums dominate, equal totals)?"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError(f"majorizes needs equal-length vectors, got {x.shape}, {y.shape}")
    xs = np.sort(x)[::-1]
    ys = np.sort(y)[::-1]
    cx = np.cumsum(xs)
    cy = np.cumsum(ys)
    total_x = float(cx[-1]) if len(cx) else 0.0
    total_y = float(cy[-1]) if len(cy) else 0.0
    scale = max(1.0, float(np.sum(np.abs(x))), float(np.sum(np.abs(y))))
    min_slack = float(np.min(cx - cy)) if len(cx) else 0.0
    totals_ok = abs(total_x - total_y) <= MAJORIZE_TOTAL_RTOL * max(
        1.0, abs(total_x), abs(total_y)
    )
    holds = totals_ok and min_slack >= -MAJORIZE_SLACK_RTOL * scale
    return MajorizationReport(holds, min_slack, total_x, total_y)


# ---------------------------------------------------------------------------
# Plain-text matrix format: first significant line is the dimension, then
# dim rows of dim whitespace-separated decimals.  Lines whose first
# non-blank character is '#' are comments.  Decimal separator is '.'
# regardless of locale.
# ---------------------------------------------------------------------------


def parse_matrix_text(text: str) -> SymMatrix:
    rows = []
    dim = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if dim is None:
            try:
                dim = int(line)
            except ValueError:
                raise ParseError(f"line {lineno}: expected integer dimension, got {line!r}")
            if dim < 1:
                raise ParseError(f"line {lineno}: dimension must be >= 1, got {dim}")
            continue
        parts = line.split()
        if len(parts) != dim:
            raise ParseError(
                f"line {lineno}: expected {dim} values, got {len(parts)}"
            )
        try:
            rows.append([float(tok) for tok in parts])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}")
        if len(rows) > dim:
            raise ParseError(f"line {lineno}: more than {dim} data rows")
    if dim is None:
        raise ParseError("empty matrix file")
    if len(rows) != dim:
        raise ParseError(f"expected {dim} data rows, found {len(rows)}")
    return SymMatrix(rows)


def format_matrix_text(a: SymMatrix, comment: str | None = None) -> str:
    lines = []
    if comment:
        for part in comment.splitlines():
            lines.append(f"# {part}")
    lines.append(str(a.dim))
    for row in a.entries:
        lines.append(" ".join(format(v, ".17g") for v in row))
    return "\n".join(lines) + "\n"


def read_matrix(path) -> SymMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_matrix_text(fh.read())


def write_matrix(path, a: SymMatrix, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix_text(a, comment))
