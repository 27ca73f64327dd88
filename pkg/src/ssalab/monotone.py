"""Numerical matrix-monotonicity certification via divided-difference
(Loewner) matrices.

A function g is matrix monotone of order n on an interval exactly when
every n-point Loewner matrix [ (g(x_i) - g(x_j)) / (x_i - x_j) ], with
g'(x_i) on the diagonal, is positive semidefinite.  Sampling over point
configurations therefore yields evidence, never proof: a PASSED verdict
means no violation was found in the requested number of trials.

The connection to the trace inequality: if -f' is matrix monotone then f
satisfies the strong subadditivity inequality, so check_ssa_sufficient
runs the sampler on g = -f'.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from ._parallel import indexed_map
from .errors import DegeneratePoints, DomainError, ParamOutOfRange
from .matcore import SymMatrix, eig_sym
from .rng import PortableRng, subseed

# Minimum spacing between points, relative to the configuration span.
MIN_GAP_RTOL = 1e-6
# Spacing of the deliberately near-coincident pair in adversarial trials.
ADVERSARIAL_GAP_RTOL = 1e-5
# PSD acceptance: min eigenvalue >= -tol with
# tol = max(PSD_TOL_RTOL * ||L||_2, DD_NOISE_FACTOR * eps * max|g| / min_gap).
# The second term bounds the cancellation noise of divided differences over
# near-coincident points, which exceeds 1e-10 * ||L||_2 whenever |g| is many
# orders larger than g' (a rank-deficient Loewner matrix would otherwise be
# flagged as a violation purely from rounding).
PSD_TOL_RTOL = 1e-10
DD_NOISE_FACTOR = 64.0
_EPS = np.finfo(np.float64).eps
# Fraction of trials allowed to hit evaluation trouble before the verdict
# degrades to INCONCLUSIVE.
CLAMP_FRACTION = 0.01


class Verdict(str, Enum):
    PASSED = "PASSED"
    FAILED = "FAILED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class LoewnerReport:
    points: np.ndarray
    loewner: SymMatrix
    min_eig: float
    psd: bool
    tol: float


@dataclass(frozen=True)
class MonotoneVerdict:
    """Outcome of a sampled monotonicity test.

    worst is the report with the smallest min eigenvalue seen; FAILED
    implies worst.min_eig < -worst.tol.  clamped_trials counts trials
    whose function evaluations failed (domain trouble), which never count
    as violations.
    """

    order: int
    trials: int
    worst: Optional[LoewnerReport]
    verdict: Verdict
    clamped_trials: int = 0


def loewner_matrix(g: Callable[[float], float], gp: Callable[[float], float],
                   points) -> LoewnerReport:
    """Divided-difference matrix of g at strictly increasing points.

    Off-diagonal entries are first divided differences, diagonal entries
    are g'.  Points closer than MIN_GAP_RTOL times the span raise
    DegeneratePoints.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 1 or len(pts) < 1:
        raise DegeneratePoints(f"need a 1-d point vector, got shape {pts.shape}")
    n = len(pts)
    if n > 1:
        gaps = np.diff(pts)
        span = float(pts[-1] - pts[0])
        if span <= 0.0 or np.any(gaps <= 0.0):
            raise DegeneratePoints("points must be strictly increasing")
        if float(np.min(gaps)) < MIN_GAP_RTOL * span:
            raise DegeneratePoints(
                f"minimum point gap {np.min(gaps):.3g} below {MIN_GAP_RTOL:g} "
                f"times span {span:.3g}"
            )
    gv = np.array([g(float(x)) for x in pts], dtype=np.float64)
    m = np.empty((n, n))
    for i in range(n):
        m[i, i] = gp(float(pts[i]))
        for j in range(i + 1, n):
            d = (gv[i] - gv[j]) / (pts[i] - pts[j])
            m[i, j] = d
            m[j, i] = d
    loewner = SymMatrix(m)
    w = eig_sym(loewner).eigenvalues
    min_eig = float(w[0])
    two_norm = float(np.max(np.abs(w)))
    tol = PSD_TOL_RTOL * two_norm
    if n > 1:
        dd_noise = DD_NOISE_FACTOR * _EPS * float(np.max(np.abs(gv))) / float(np.min(gaps))
        tol = max(tol, dd_noise)
    return LoewnerReport(
        points=pts,
        loewner=loewner,
        min_eig=min_eig,
        psd=min_eig >= -tol,
        tol=tol,
    )


def _draw_points(rng: PortableRng, lo: float, hi: float, n: int,
                 adversarial: bool) -> np.ndarray:
    """One admissible point configuration, log-uniform over [lo, hi].

    Adversarial configurations append a partner at ADVERSARIAL_GAP_RTOL
    times the span next to one of the points; configurations violating the
    minimum-gap rule are resampled.
    """
    for _ in range(200):
        if adversarial and n >= 2:
            base = np.sort(rng.log_uniforms(lo, hi, n - 1))
            span = float(base[-1] - base[0]) if n > 2 else (hi - lo)
            if span <= 0.0:
                continue
            anchor = int(rng.index_below(n - 1))
            partner = float(base[anchor]) + ADVERSARIAL_GAP_RTOL * span
            if partner > hi:
                partner = float(base[anchor]) - ADVERSARIAL_GAP_RTOL * span
            pts = np.sort(np.append(base, partner))
        else:
            pts = np.sort(rng.log_uniforms(lo, hi, n))
        span = float(pts[-1] - pts[0])
        if span > 0.0 and float(np.min(np.diff(pts))) >= MIN_GAP_RTOL * span:
            return pts
    raise DegeneratePoints(
        f"could not draw an admissible {n}-point configuration in [{lo}, {hi}]"
    )


def test_matrix_monotone(g, gp, interval, order: int = 5, trials: int = 100,
                         seed: int = 0) -> MonotoneVerdict:
    """Sample Loewner matrices of g and report the worst one.

    One trial in ten uses a near-coincident adversarial pair.  Trials are
    independent with per-trial seeds, so the result does not depend on
    evaluation order.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (0.0 < lo < hi):
        raise ParamOutOfRange(f"interval must satisfy 0 < lo < hi, got [{lo}, {hi}]")
    if order < 2:
        raise ParamOutOfRange(f"order must be >= 2, got {order}")
    if trials < 1:
        raise ParamOutOfRange(f"trials must be >= 1, got {trials}")

    def one_trial(trial):
        rng = PortableRng(subseed(seed, trial))
        pts = _draw_points(rng, lo, hi, order, adversarial=(trial % 10 == 0))
        try:
            rep = loewner_matrix(g, gp, pts)
        except (DomainError, ValueError, OverflowError, ZeroDivisionError):
            return None
        if not (math.isfinite(rep.min_eig) and np.all(np.isfinite(rep.loewner.entries))):
            return None
        return rep

    worst: Optional[LoewnerReport] = None
    worst_violator: Optional[LoewnerReport] = None
    clamped = 0
    for rep in indexed_map(one_trial, trials):
        if rep is None:
            clamped += 1
            continue
        if worst is None or rep.min_eig < worst.min_eig:
            worst = rep
        if not rep.psd and (worst_violator is None or rep.min_eig < worst_violator.min_eig):
            worst_violator = rep
    if worst_violator is not None:
        # Report a genuine violator so that FAILED always pairs with a
        # report whose min_eig is below its own tolerance.
        worst = worst_violator
        verdict = Verdict.FAILED
    elif clamped > CLAMP_FRACTION * trials or worst is None:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASSED
    return MonotoneVerdict(order=order, trials=trials, worst=worst,
                           verdict=verdict, clamped_trials=clamped)


# keep pytest from collecting the library function by its test_ name
test_matrix_monotone.__test__ = False

_FD_STEP = float(np.cbrt(np.finfo(np.float64).eps))


def _fd_of(fn):
    """Central finite difference, used when no analytic derivative exists.

    The step scales with 1 + |x| (not |x| alone) so that the rounding error
    eps * |fn| / h stays small when fn is of order one near zero, but is
    capped at |x|/2 to stay inside half-line domains.
    """

    def deriv(x):
        h = _FD_STEP * (1.0 + abs(x))
        if x > 0.0:
            h = min(h, 0.5 * x)
        return (fn(x + h) - fn(x - h)) / (2.0 * h)

    return deriv


def check_ssa_sufficient(f, interval=(1e-3, 1e3), order: int = 5,
                         trials: int = 500, seed: int = 0) -> MonotoneVerdict:
    """Test the sufficient condition: is -f' matrix monotone?

    Uses the analytic second derivative for the Loewner diagonal when the
    catalog provides one, otherwise a central finite difference of f'.
    A PASSED verdict is sampling evidence that the sufficient condition
    holds, reported as 'no violation found in N trials'.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not f.domain.contains(lo) or not f.domain.contains(hi):
        raise DomainError(
            f"interval [{lo}, {hi}] not inside domain {f.domain.label()} of {f.name}"
        )

    def g(x):
        return -f.derivative(x)

    if f.second_derivative is not None:
        def gp(x):
            return -f.second_derivative(x)
    else:
        gp = _fd_of(g)

    return test_matrix_monotone(g, gp, (lo, hi), order=order, trials=trials, seed=seed)


def verdict_message(v: MonotoneVerdict) -> str:
    if v.verdict is Verdict.PASSED:
        return f"no violation found in {v.trials} trials"
    if v.verdict is Verdict.FAILED:
        return (
            f"violation found: min eigenvalue {v.worst.min_eig:.6g} "
            f"below -{v.worst.tol:.3g}"
        )
    return "evaluation hit domain limits in more than 1% of trials"
