"""The inequality engine.

Computes the trace gap

    gap = Tr f(B) + Tr f(C) - Tr f(A) - Tr f(A22)

for a partitioned symmetric matrix A with leading compression B and
trailing compression C, in either the compressed form above or the
projected form that replaces the three submatrices by the full-dimension
compressions P12 A P12, P2 A P2, P23 A P23 (which only differ by zero
eigenvalues, so the gap is identical whenever f(0) is finite).  Also
provides the log-determinant identity for f = log, the equality residual
A13 - A12 A22^{-1} A23, Krylov-style detection of the block-diagonal
splitting that characterizes equality, and a polynomial residual check
for the A12 g(A22) A23 = 0 family.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, ShapeError
from .matcore import (
    Partition,
    SymMatrix,
    _eigvals,
    blocks,
    compress_b,
    compress_c,
    eig_sym,
    project_form,
    trace_f,
)

DEFAULT_TOL_REL = 1e-8
# A required matrix counts as numerically singular below this times ||.||_2.
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class KrylovStructure:
    """Smallest A22-invariant subspace containing the range of A23.

    decomposable means the three residuals and |A13| all vanish to
    tolerance, i.e. A splits into two diagonal blocks after reordering.
    """

    basis: np.ndarray
    invariance_residual: float
    range_residual: float
    kernel_residual: float
    decomposable: bool


@dataclass(frozen=True)
class EqualityDiagnostics:
    log_residual: float
    a13_norm: float
    a12a23_norm: float
    krylov: Optional[KrylovStructure] = None


@dataclass(frozen=True)
class SsaReport:
    """Gap, the four traces it was built from, and the verdict.

    gap is stored exactly as tr_b + tr_c - tr_a - tr_a22 evaluated left to
    right, so the identity can be re-checked bitwise.  holds means
    gap >= -tol_used; equality means |gap| <= tol_used.
    """

    gap: float
    tr_a: float
    tr_a22: float
    tr_b: float
    tr_c: float
    form: str
    holds: bool
    tol_used: float
    equality: bool
    diagnostics: Optional[EqualityDiagnostics] = None


def ssa_gap(f, a: SymMatrix, p: Partition, form: str = "compressed",
            tol_rel: float = DEFAULT_TOL_REL) -> SsaReport:
    """The strong-subadditivity gap of f at (A, partition).

    The projected form requires f to be finite at zero because the padded
    compressions carry zero eigenvalues.
    """
    p.check(a.dim)
    if form == "compressed":
        blk = blocks(a, p)
        tr_a = trace_f(f, a)
        tr_a22 = trace_f(f, SymMatrix(blk.a22))
        tr_b = trace_f(f, compress_b(a, p))
        tr_c = trace_f(f, compress_c(a, p))
    elif form == "projected":
        if not f.finite_at_zero:
            raise DomainError(
                f"projected form needs f finite at 0, but {f.name} is not"
            )
        tr_a = trace_f(f, a)
        tr_a22 = trace_f(f, project_form(a, p, 2))
        tr_b = trace_f(f, project_form(a, p, 12))
        tr_c = trace_f(f, project_form(a, p, 23))
    else:
        raise ValueError(f"form must be 'compressed' or 'projected', got {form!r}")
    gap = tr_b + tr_c - tr_a - tr_a22
    tol_used = tol_rel * max(1.0, abs(tr_a) + abs(tr_a22) + abs(tr_b) + abs(tr_c))
    return SsaReport(
        gap=gap,
        tr_a=tr_a,
        tr_a22=tr_a22,
        tr_b=tr_b,
        tr_c=tr_c,
        form=form,
        holds=gap >= -tol_used,
        tol_used=tol_used,
        equality=abs(gap) <= tol_used,
    )


def _logdet_pd(m: SymMatrix, what: str) -> float:
    """log det of a positive definite matrix via its eigenvalue logs."""
    if m.dim == 0:
        return 0.0
    w = _eigvals(m)
    top = float(np.max(np.abs(w)))
    if float(w[0]) <= SINGULAR_RTOL * top:
        raise DomainError(
            f"{what} is numerically singular (min eigenvalue {w[0]:.3g})",
            offending=float(w[0]),
        )
    return float(np.sum(np.log(w)))


def gap_log_det(a: SymMatrix, p: Partition) -> float:
    """log det B + log det C - log det A - log det A22.

    Agrees with ssa_gap(log, ...) since Tr log M = log det M for positive
    definite M.
    """
    p.check(a.dim)
    blk = blocks(a, p)
    lb = _logdet_pd(compress_b(a, p), "B")
    lc = _logdet_pd(compress_c(a, p), "C")
    la = _logdet_pd(a, "A")
    la22 = _logdet_pd(SymMatrix(blk.a22), "A22")
    return lb + lc - la - la22


def log_equality_residual(a: SymMatrix, p: Partition) -> EqualityDiagnostics:
    """Frobenius residual of the equality condition A13 = A12 A22^{-1} A23.

    A22 must be positive definite; a numerically singular A22 is an error
    rather than a pseudoinverse fallback.
    """
    p.check(a.dim)
    blk = blocks(a, p)
    if p.d2 > 0:
        w = np.linalg.eigvalsh(blk.a22)
        top = float(np.max(np.abs(w)))
        if top == 0.0 or float(w[0]) <= SINGULAR_RTOL * top:
            raise DomainError(
                f"A22 is numerically singular (min eigenvalue {w[0]:.3g})",
                offending=float(w[0]),
            )
        schur_cross = blk.a12 @ np.linalg.solve(blk.a22, blk.a23)
    else:
        schur_cross = np.zeros_like(blk.a13)
    return EqualityDiagnostics(
        log_residual=float(np.linalg.norm(blk.a13 - schur_cross)),
        a13_norm=float(np.linalg.norm(blk.a13)),
        a12a23_norm=float(np.linalg.norm(blk.a12 @ blk.a23)),
    )


DETECT_TOL = 1e-8


def detect_structure(a: SymMatrix, p: Partition, tol: float = DETECT_TOL) -> KrylovStructure:
    """Search for the invariant splitting of the middle space.

    Builds the smallest subspace K of the middle coordinates that contains
    the numerical range of A23 and is invariant under A22, by repeated
    application of A22 with re-orthonormalization until no direction of
    relative size above tol appears.  A is decomposable into two diagonal
    blocks exactly when A22 K stays in K, A23 maps into K, A12 kills K,
    and A13 vanishes; the returned residuals measure each requirement.
    """
    p.check(a.dim)
    blk = blocks(a, p)
    scale = max(1.0, a.fro_norm())
    d2 = p.d2

    if d2 == 0 or p.d3 == 0 or not blk.a23.size:
        basis = np.zeros((d2, 0))
    else:
        u, s, _ = np.linalg.svd(blk.a23, full_matrices=False)
        smax = float(s[0]) if len(s) else 0.0
        rank = int(np.sum(s > tol * smax)) if smax > 0.0 else 0
        basis = u[:, :rank]
        # Expand K under A22 until no new direction above the threshold.
        for _ in range(d2):
            if basis.shape[1] >= d2:
                break
            w = blk.a22 @ basis
            w = w - basis @ (basis.T @ w)
            uw, sw, _ = np.linalg.svd(w, full_matrices=False)
            thresh = tol * max(1.0, float(np.linalg.norm(blk.a22) or 1.0))
            keep = int(np.sum(sw > thresh))
            if keep == 0:
                break
            basis = np.hstack([basis, uw[:, :keep]])
            # Re-orthonormalize to keep the columns clean after stacking.
            basis, _ = np.linalg.qr(basis)

    if basis.shape[1] and d2:
        proj = blk.a22 @ basis
        invariance = float(np.linalg.norm(proj - basis @ (basis.T @ proj)))
        kernel = float(np.linalg.norm(blk.a12 @ basis))
    else:
        invariance = 0.0
        kernel = 0.0
    if blk.a23.size:
        range_res = float(np.linalg.norm(blk.a23 - basis @ (basis.T @ blk.a23)))
    else:
        range_res = 0.0
    a13_norm = float(np.linalg.norm(blk.a13)) if blk.a13.size else 0.0
    decomposable = (
        invariance <= tol * scale
        and range_res <= tol * scale
        and kernel <= tol * scale
        and a13_norm <= tol * scale
    )
    basis = np.ascontiguousarray(basis)
    basis.setflags(write=False)
    return KrylovStructure(basis, invariance, range_res, kernel, decomposable)


def stone_weierstrass_check(a: SymMatrix, p: Partition, gs) -> float:
    """max over polynomials g of ||A12 g(A22) A23||_F.

    gs is a list of coefficient vectors, coeffs[k] multiplying x^k, each of
    degree at most 8.  For a decomposable matrix every such residual
    vanishes because polynomials in A22 preserve the invariant splitting.
    """
    p.check(a.dim)
    blk = blocks(a, p)
    worst = 0.0
    if p.d2 == 0:
        return 0.0
    dec = eig_sym(SymMatrix(blk.a22))
    lam = dec.eigenvalues
    v = dec.vectors
    for coeffs in gs:
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.ndim != 1 or len(coeffs) > 9:
            raise ShapeError(
                f"polynomial coefficients must be a vector of degree <= 8, got shape {coeffs.shape}"
            )
        g_lam = np.zeros_like(lam)
        for c in coeffs[::-1]:
            g_lam = g_lam * lam + c
        g_mat = (v * g_lam) @ v.T
        worst = max(worst, float(np.linalg.norm(blk.a12 @ g_mat @ blk.a23)))
    return worst
