"""Random instance generation and counterexample search.

Generators produce symmetric positive definite matrices, either generic
(G^T G + eps I with Gaussian G) or with a structural pattern enforced
exactly: zero coupling blocks, the arrow pattern (both off-diagonal blocks
touching the middle part zero), the Schur-consistent pattern that forces
equality for f = log, the two-block splitting that forces equality for
every admissible f, or a near-singular variant.  All randomness flows
through PortableRng, so a (kind, dims, seed) triple is reproducible bit
for bit.

falsify minimizes the gap by seeded random-restart hill climbing over the
factor G (so every iterate stays inside the positive definite cone), and
scan sweeps independent instances with a per-trial seed schedule.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import indexed_map
from .errors import DomainError, ParamOutOfRange
from .matcore import Partition, SymMatrix
from .rng import PortableRng, subseed
from .ssa import DEFAULT_TOL_REL, SsaReport, ssa_gap

KINDS = ("generic_spd", "arrow_abcd", "a23_zero", "log_equality",
         "trivi_block", "near_singular")

DEFAULT_EPS = 1e-3


@dataclass(frozen=True)
class GenSpec:
    """Recipe for one random instance."""

    kind: str
    dims: tuple
    seed: int
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParamOutOfRange(f"unknown generator kind {self.kind!r}; known: {KINDS}")
        d = tuple(int(v) for v in self.dims)
        if len(d) != 3 or any(v < 0 for v in d) or sum(d) == 0:
            raise ParamOutOfRange(f"dims must be three nonnegative ints, not all zero: {self.dims}")
        object.__setattr__(self, "dims", d)
        if not (self.eps > 0.0):
            raise ParamOutOfRange(f"eps must be positive, got {self.eps}")

    @property
    def partition(self) -> Partition:
        return Partition(*self.dims)


def _spd(rng: PortableRng, n: int, eps: float) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0))
    g = rng.normal_matrix(n, n)
    return g.T @ g + eps * np.eye(n)


def generate(spec: GenSpec) -> SymMatrix:
    """Draw the instance described by spec (deterministic in spec.seed)."""
    rng = PortableRng(spec.seed)
    d1, d2, d3 = spec.dims
    n = d1 + d2 + d3
    eps = spec.eps

    if spec.kind == "generic_spd":
        g = rng.normal_matrix(n, n)
        return SymMatrix(g.T @ g + eps * np.eye(n))

    if spec.kind == "near_singular":
        # Rank-deficient G leaves the smallest eigenvalue at the eps floor.
        rows = max(1, n - 1)
        g = rng.normal_matrix(rows, n)
        return SymMatrix(g.T @ g + eps * np.eye(n))

    if spec.kind == "arrow_abcd":
        m = np.zeros((n, n))
        outer = _spd(rng, d1 + d3, eps)
        middle = _spd(rng, d2, eps)
        m[:d1, :d1] = outer[:d1, :d1]
        m[:d1, d1 + d2:] = outer[:d1, d1:]
        m[d1 + d2:, :d1] = outer[d1:, :d1]
        m[d1 + d2:, d1 + d2:] = outer[d1:, d1:]
        m[d1:d1 + d2, d1:d1 + d2] = middle
        return SymMatrix(m)

    if spec.kind == "a23_zero":
        # Lower-right part is exactly block diagonal; the first-row blocks
        # are free, with A11 inflated so the Schur complement stays SPD.
        s22 = _spd(rng, d2, eps)
        s33 = _spd(rng, d3, eps)
        r = rng.normal_matrix(d1, d2 + d3)
        s = np.zeros((d2 + d3, d2 + d3))
        s[:d2, :d2] = s22
        s[d2:, d2:] = s33
        if d2 + d3 > 0:
            cross = r @ np.linalg.solve(s, r.T)
        else:
            cross = np.zeros((d1, d1))
        p11 = cross + _spd(rng, d1, eps)
        m = np.zeros((n, n))
        m[:d1, :d1] = (p11 + p11.T) / 2.0
        m[:d1, d1:] = r
        m[d1:, :d1] = r.T
        m[d1:, d1:] = s
        return SymMatrix(m)

    if spec.kind == "log_equality":
        # A13 is set to A12 A22^{-1} A23, and the corner blocks are padded
        # above their Schur terms, which makes the full matrix SPD and the
        # log-gap vanish.
        a22 = _spd(rng, d2, eps)
        a12 = rng.normal_matrix(d1, d2)
        a23 = rng.normal_matrix(d2, d3)
        if d2 > 0:
            x23 = np.linalg.solve(a22, a23)
            x12 = np.linalg.solve(a22, a12.T)
        else:
            x23 = np.zeros((d2, d3))
            x12 = np.zeros((d2, d1))
        a13 = a12 @ x23
        a11 = a12 @ x12 + _spd(rng, d1, eps)
        a33 = a23.T @ x23 + _spd(rng, d3, eps)
        m = np.zeros((n, n))
        m[:d1, :d1] = (a11 + a11.T) / 2.0
        m[:d1, d1:d1 + d2] = a12
        m[d1:d1 + d2, :d1] = a12.T
        m[:d1, d1 + d2:] = a13
        m[d1 + d2:, :d1] = a13.T
        m[d1:d1 + d2, d1:d1 + d2] = a22
        m[d1:d1 + d2, d1 + d2:] = a23
        m[d1 + d2:, d1:d1 + d2] = a23.T
        m[d1 + d2:, d1 + d2:] = (a33 + a33.T) / 2.0
        return SymMatrix(m)

    # trivi_block: two independent SPD blocks embedded so that the middle
    # part splits, the (1,3) block vanishes, A12 feeds only the first
    # sub-part and A23 only the second.
    split = rng.index_below(d2 + 1) if d2 > 0 else 0
    first = _spd(rng, d1 + split, eps)
    second = _spd(rng, (d2 - split) + d3, eps)
    m = np.zeros((n, n))
    k = d2 - split
    m[:d1, :d1] = first[:d1, :d1]
    m[:d1, d1:d1 + split] = first[:d1, d1:]
    m[d1:d1 + split, :d1] = first[d1:, :d1]
    m[d1:d1 + split, d1:d1 + split] = first[d1:, d1:]
    m[d1 + split:d1 + d2, d1 + split:d1 + d2] = second[:k, :k]
    m[d1 + split:d1 + d2, d1 + d2:] = second[:k, k:]
    m[d1 + d2:, d1 + split:d1 + d2] = second[k:, :k]
    m[d1 + d2:, d1 + d2:] = second[k:, k:]
    return SymMatrix(m)


@dataclass(frozen=True)
class ScanSummary:
    kind: str
    dims: tuple
    trials: int
    seed: int
    eps: float
    form: str
    min_gap: Optional[float]
    argmin_seed: Optional[int]
    worst_report: Optional[SsaReport]
    skipped: int
    violated: bool
    histogram_edges: tuple
    histogram_counts: tuple


def scan(f, kind: str, dims, trials: int, seed: int, eps: float = DEFAULT_EPS,
         form: str = "compressed", tol_rel: float = DEFAULT_TOL_REL) -> ScanSummary:
    """Gap statistics over `trials` independent seeded instances.

    Per-trial seed is seed + index, so any individual instance can be
    reproduced from the summary.  Instances whose spectrum falls outside
    the domain of f are counted as skipped, not fatal.
    """
    if trials < 1:
        raise ParamOutOfRange(f"trials must be >= 1, got {trials}")
    p = Partition(*[int(v) for v in dims])

    def one_trial(i):
        sub = subseed(seed, i)
        a = generate(GenSpec(kind, tuple(dims), sub, eps))
        try:
            return sub, ssa_gap(f, a, p, form=form, tol_rel=tol_rel)
        except DomainError:
            return sub, None

    gaps = []
    min_gap = None
    argmin = None
    worst = None
    skipped = 0
    for sub, rep in indexed_map(one_trial, trials):
        if rep is None:
            skipped += 1
            continue
        gaps.append(rep.gap)
        if min_gap is None or rep.gap < min_gap:
            min_gap = rep.gap
            argmin = sub
            worst = rep
    if gaps:
        counts, edges = np.histogram(np.array(gaps), bins=20)
        hist_edges = tuple(float(e) for e in edges)
        hist_counts = tuple(int(c) for c in counts)
    else:
        hist_edges = ()
        hist_counts = ()
    return ScanSummary(
        kind=kind,
        dims=tuple(int(v) for v in dims),
        trials=trials,
        seed=int(seed),
        eps=eps,
        form=form,
        min_gap=min_gap,
        argmin_seed=argmin,
        worst_report=worst,
        skipped=skipped,
        violated=(worst is not None and not worst.holds),
        histogram_edges=hist_edges,
        histogram_counts=hist_counts,
    )


@dataclass(frozen=True)
class SearchResult:
    best_gap: float
    best_matrix: SymMatrix
    best_report: SsaReport
    iterations: int
    violated: bool
    trace: tuple = field(default_factory=tuple)


# Hill-climbing schedule: halve the step after this many consecutive
# non-improvements, restart from a fresh draw after this many.
_HALVE_AFTER = 20
_RESTART_AFTER = 200


def _assemble(kind: str, theta: np.ndarray, dims, eps: float) -> SymMatrix:
    d1, d2, d3 = dims
    n = d1 + d2 + d3
    if kind == "generic_spd":
        g = theta.reshape(n, n)
        return SymMatrix(g.T @ g + eps * np.eye(n))
    # arrow_abcd: theta packs the outer factor then the middle factor.
    no = d1 + d3
    g1 = theta[: no * no].reshape(no, no)
    g2 = theta[no * no:].reshape(d2, d2)
    outer = g1.T @ g1 + eps * np.eye(no)
    middle = g2.T @ g2 + eps * np.eye(d2)
    m = np.zeros((n, n))
    m[:d1, :d1] = outer[:d1, :d1]
    m[:d1, d1 + d2:] = outer[:d1, d1:]
    m[d1 + d2:, :d1] = outer[d1:, :d1]
    m[d1 + d2:, d1 + d2:] = outer[d1:, d1:]
    m[d1:d1 + d2, d1:d1 + d2] = middle
    return SymMatrix(m)


def _theta_size(kind: str, dims) -> int:
    d1, d2, d3 = dims
    n = d1 + d2 + d3
    if kind == "generic_spd":
        return n * n
    return (d1 + d3) ** 2 + d2 * d2


def falsify(f, dims, iters: int, seed: int, step0: float = 0.5,
            kind: str = "generic_spd", start: Optional[SymMatrix] = None,
            eps: float = DEFAULT_EPS,
            tol_rel: float = DEFAULT_TOL_REL) -> SearchResult:
    """Hill-climb the factor parameterization to minimize the gap.

    Deterministic in seed.  The step size halves after 20 consecutive
    non-improvements and the walk restarts from a fresh random draw after
    200; the reported best never regresses.  `start` (generic kind only)
    seeds the walk at a given SPD matrix, whose smallest eigenvalue must
    exceed eps.
    """
    if iters < 1:
        raise ParamOutOfRange(f"iters must be >= 1, got {iters}")
    if kind not in ("generic_spd", "arrow_abcd"):
        raise ParamOutOfRange(f"falsify supports generic_spd or arrow_abcd, got {kind!r}")
    dims = tuple(int(v) for v in dims)
    p = Partition(*dims)
    rng = PortableRng(seed)
    size = _theta_size(kind, dims)

    def evaluate(theta):
        a = _assemble(kind, theta, dims, eps)
        try:
            return a, ssa_gap(f, a, p, tol_rel=tol_rel)
        except DomainError:
            return a, None

    if start is not None:
        if kind != "generic_spd":
            raise ParamOutOfRange("start matrix is only supported for generic_spd")
        if start.dim != p.dim:
            raise ParamOutOfRange(f"start matrix dim {start.dim} != partition dim {p.dim}")
        shifted = start.entries - eps * np.eye(start.dim)
        try:
            chol = np.linalg.cholesky(shifted)
        except np.linalg.LinAlgError:
            raise ParamOutOfRange(
                f"start matrix must have min eigenvalue above eps = {eps:g}"
            )
        theta = chol.T.reshape(-1).copy()
    else:
        theta = rng.normals(size)

    def fresh_feasible():
        for _ in range(100):
            t = rng.normals(size)
            a, rep = evaluate(t)
            if rep is not None:
                return t, a, rep
        raise DomainError(f"could not draw a feasible start for {f.name} in 100 attempts")

    cur = theta
    cur_a, cur_rep = evaluate(cur)
    if cur_rep is None:
        cur, cur_a, cur_rep = fresh_feasible()
    best_a, best_rep = cur_a, cur_rep
    cur_gap = cur_rep.gap
    trace = [(0, best_rep.gap)]
    step = step0
    stall = 0
    for it in range(1, iters + 1):
        cand = cur + step * rng.normals(size)
        cand_a, cand_rep = evaluate(cand)
        if cand_rep is not None and cand_rep.gap < cur_gap:
            cur, cur_gap = cand, cand_rep.gap
            stall = 0
            if cand_rep.gap < best_rep.gap:
                best_a, best_rep = cand_a, cand_rep
                trace.append((it, best_rep.gap))
        else:
            stall += 1
            if stall >= _RESTART_AFTER:
                cur, cur_a, cur_rep = fresh_feasible()
                cur_gap = cur_rep.gap
                if cur_rep.gap < best_rep.gap:
                    best_a, best_rep = cur_a, cur_rep
                    trace.append((it, best_rep.gap))
                step = step0
                stall = 0
            elif stall % _HALVE_AFTER == 0:
                step *= 0.5
    return SearchResult(
        best_gap=best_rep.gap,
        best_matrix=best_a,
        best_report=best_rep,
        iterations=iters,
        violated=not best_rep.holds,
        trace=tuple(trace),
    )
