"""Catalog of scalar functions with derivatives, domains and metadata.

Each entry is a :class:`ScalarFn` bundling the value, first derivative,
optional second derivative (used for divided-difference diagonals), the
domain, and flags describing concavity and behaviour at zero.  The module
also provides adaptive Gauss-Legendre evaluation of two half-line integral
representations of the fractional power, and of the split integral for the
entropy-like function kappa(x) = -x log x + (x+1) log(x+1).
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    DomainError,
    ParamOutOfRange,
    ParseError,
    QuadratureError,
    UnknownFunction,
)
from .rng import PortableRng


class SsaStatus(str, Enum):
    PROVED_SSA = "PROVED_SSA"
    FAILS_SSA = "FAILS_SSA"
    CONJECTURED = "CONJECTURED"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class Interval:
    """Half-line domain [lo, inf) or (lo, inf)."""

    lo: float = 0.0
    lo_closed: bool = True

    def contains(self, x: float) -> bool:
        return x > self.lo or (self.lo_closed and x == self.lo)

    def label(self) -> str:
        return f"{'[' if self.lo_closed else '('}{self.lo:g},inf)"


@dataclass(frozen=True)
class ScalarFn:
    """A scalar function of one variable plus the metadata the inequality
    engine needs.

    value and derivative raise DomainError outside the domain (the
    derivative may additionally be undefined on the boundary even when the
    value is not).  second_derivative is optional; when absent, callers
    fall back to a finite difference of the derivative.
    """

    name: str
    domain: Interval
    value: Callable[[float], float]
    derivative: Callable[[float], float]
    concave: bool
    finite_at_zero: bool
    ssa_status: SsaStatus
    params: dict = field(default_factory=dict)
    second_derivative: Optional[Callable[[float], float]] = None

    def label(self) -> str:
        """Spec-string form, e.g. 'power:t=0.5'."""
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name}:{inner}"


def _need_positive(x, name):
    if x <= 0.0:
        raise DomainError(f"{name} undefined at {x!r}", offending=x)


def _need_nonnegative(x, name):
    if x < 0.0:
        raise DomainError(f"{name} undefined at {x!r}", offending=x)


def _log_fn() -> ScalarFn:
    def val(x):
        _need_positive(x, "log")
        return math.log(x)

    def der(x):
        _need_positive(x, "log'")
        return 1.0 / x

    def der2(x):
        _need_positive(x, "log''")
        return -1.0 / (x * x)

    return ScalarFn("log", Interval(0.0, False), val, der, True, False,
                    SsaStatus.PROVED_SSA, {}, der2)


def _neg_inverse_fn() -> ScalarFn:
    def val(x):
        _need_positive(x, "neg_inverse")
        return -1.0 / x

    def der(x):
        _need_positive(x, "neg_inverse'")
        return 1.0 / (x * x)

    def der2(x):
        _need_positive(x, "neg_inverse''")
        return -2.0 / (x * x * x)

    return ScalarFn("neg_inverse", Interval(0.0, False), val, der, True, False,
                    SsaStatus.FAILS_SSA, {}, der2)


def _neg_square_fn() -> ScalarFn:
    def val(x):
        _need_nonnegative(x, "neg_square")
        return -x * x

    return ScalarFn("neg_square", Interval(0.0, True), val,
                    lambda x: -2.0 * x, True, True,
                    SsaStatus.PROVED_SSA, {}, lambda x: -2.0)


def _power_fn(t: float) -> ScalarFn:
    if not (0.0 < t < 1.0):
        raise ParamOutOfRange(f"power exponent t must satisfy 0 < t < 1, got {t}")

    def val(x):
        _need_nonnegative(x, "power")
        return x ** t

    def der(x):
        _need_positive(x, "power'")
        return t * x ** (t - 1.0)

    def der2(x):
        _need_positive(x, "power''")
        return t * (t - 1.0) * x ** (t - 2.0)

    return ScalarFn("power", Interval(0.0, True), val, der, True, True,
                    SsaStatus.PROVED_SSA, {"t": t}, der2)


def _neg_power_fn(t: float) -> ScalarFn:
    if not (1.0 <= t <= 2.0):
        raise ParamOutOfRange(f"neg_power exponent t must satisfy 1 <= t <= 2, got {t}")

    def val(x):
        _need_nonnegative(x, "neg_power")
        return -(x ** t)

    def der(x):
        _need_nonnegative(x, "neg_power'")
        return -t * x ** (t - 1.0)

    def der2(x):
        if t == 1.0:
            return 0.0
        _need_positive(x, "neg_power''")
        return -t * (t - 1.0) * x ** (t - 2.0)

    return ScalarFn("neg_power", Interval(0.0, True), val, der, True, True,
                    SsaStatus.PROVED_SSA, {"t": t}, der2)


def kappa_value(x: float) -> float:
    """-x log x + (x+1) log(x+1), continued by 0 at x = 0."""
    _need_nonnegative(x, "kappa")
    if x == 0.0:
        return 0.0
    # x log(1 + 1/x) + log(1 + x) is the same quantity without cancellation.
    return x * math.log1p(1.0 / x) + math.log1p(x)


def _kappa_fn() -> ScalarFn:
    def der(x):
        _need_positive(x, "kappa'")
        return math.log1p(1.0 / x)

    def der2(x):
        _need_positive(x, "kappa''")
        return -1.0 / (x * (x + 1.0))

    return ScalarFn("kappa", Interval(0.0, True), kappa_value, der, True, True,
                    SsaStatus.PROVED_SSA, {}, der2)


def _shifted_entropy_fn(c: float) -> ScalarFn:
    if c < 0.0:
        raise ParamOutOfRange(f"shifted_entropy shift c must be >= 0, got {c}")

    def val(x):
        _need_nonnegative(x, "shifted_entropy")
        s = x + c
        if s == 0.0:
            return 0.0  # limit of -s log s as s -> 0
        return -s * math.log(s)

    def der(x):
        _need_nonnegative(x, "shifted_entropy'")
        s = x + c
        if s == 0.0:
            raise DomainError("shifted_entropy' undefined at 0 when c = 0", offending=x)
        return -math.log(s) - 1.0

    def der2(x):
        s = x + c
        if s <= 0.0:
            raise DomainError("shifted_entropy'' undefined here", offending=x)
        return -1.0 / s

    return ScalarFn("shifted_entropy", Interval(0.0, True), val, der, True, True,
                    SsaStatus.PROVED_SSA, {"c": c}, der2)


# f_p near x = 1 is evaluated from the truncated Taylor expansion of
# (x^p - 1)(x^{1-p} - 1) / (p (1-p) (x-1)^2) around x = 1; the window and
# term count keep value, first and second derivative at full precision at
# the crossover (the direct formula loses ~1/u^2 worth of bits there).
_FP_WINDOW = 1e-3
_FP_TERMS = 9


def _fp_denominator_series(p: float):
    """Coefficients of T(u) with f_p(1+u) = 1/T(u), T(0) = 1, degree < _FP_TERMS."""

    def shape(e):
        # x^e - 1 = e u * sum_k c_k u^k with c_0 = 1, c_k = c_{k-1} (e-k)/(k+1).
        c = [1.0]
        for k in range(1, _FP_TERMS):
            c.append(c[-1] * (e - k) / (k + 1.0))
        return c

    cp = shape(p)
    cq = shape(1.0 - p)
    t = [0.0] * _FP_TERMS
    for i, a in enumerate(cp):
        for j, b in enumerate(cq):
            if i + j < _FP_TERMS:
                t[i + j] += a * b
    return t


def _poly_d012(coeffs, u):
    """Value, first and second derivative of a polynomial at u (Horner)."""
    v = d1 = d2 = 0.0
    for c in reversed(coeffs):
        d2 = d2 * u + 2.0 * d1
        d1 = d1 * u + v
        v = v * u + c
    return v, d1, d2


def _powm1(e: float, x: float) -> float:
    """x^e - 1 computed without cancellation (x > 0)."""
    return math.expm1(e * math.log(x))


def _fp_fn(p: float) -> ScalarFn:
    if not (0.0 < p < 1.0):
        raise ParamOutOfRange(f"f_p parameter p must satisfy 0 < p < 1, got {p}")
    q = 1.0 - p
    pq = p * q
    series = _fp_denominator_series(p)

    def val(x):
        _need_nonnegative(x, "f_p")
        if x == 0.0:
            return pq
        u = x - 1.0
        if abs(u) <= _FP_WINDOW:
            t, _, _ = _poly_d012(series, u)
            return 1.0 / t
        return pq * u * u / (_powm1(p, x) * _powm1(q, x))

    def _logderivs(x):
        # h = log |f_p|; returns h', h'' away from the x = 1 window.
        u = x - 1.0
        ap = _powm1(p, x)
        aq = _powm1(q, x)
        xp1 = p * x ** (p - 1.0)
        xq1 = q * x ** (q - 1.0)
        h1 = 2.0 / u - xp1 / ap - xq1 / aq
        dp = p * x ** (p - 2.0) * ((p - 1.0) * ap - p * (ap + 1.0)) / (ap * ap)
        dq = q * x ** (q - 2.0) * ((q - 1.0) * aq - q * (aq + 1.0)) / (aq * aq)
        h2 = -2.0 / (u * u) - dp - dq
        return h1, h2

    def der(x):
        _need_positive(x, "f_p'")
        u = x - 1.0
        if abs(u) <= _FP_WINDOW:
            t, t1, _ = _poly_d012(series, u)
            return -t1 / (t * t)
        h1, _ = _logderivs(x)
        return val(x) * h1

    def der2(x):
        _need_positive(x, "f_p''")
        u = x - 1.0
        if abs(u) <= _FP_WINDOW:
            t, t1, t2 = _poly_d012(series, u)
            return (2.0 * t1 * t1 - t * t2) / (t * t * t)
        h1, h2 = _logderivs(x)
        return val(x) * (h1 * h1 + h2)

    status = SsaStatus.PROVED_SSA if p == 0.5 else SsaStatus.CONJECTURED
    return ScalarFn("f_p", Interval(0.0, True), val, der, True, True,
                    status, {"p": p}, der2)


_CATALOG = {
    "log": (_log_fn, ()),
    "neg_inverse": (_neg_inverse_fn, ()),
    "neg_square": (_neg_square_fn, ()),
    "power": (_power_fn, ("t",)),
    "neg_power": (_neg_power_fn, ("t",)),
    "kappa": (_kappa_fn, ()),
    "shifted_entropy": (_shifted_entropy_fn, ("c",)),
    "f_p": (_fp_fn, ("p",)),
}


def catalog_names():
    return sorted(_CATALOG)


def catalog_get(name: str, params: dict | None = None) -> ScalarFn:
    """Fully populated catalog entry; UnknownFunction / ParamOutOfRange on
    bad name or parameter."""
    if name not in _CATALOG:
        raise UnknownFunction(f"unknown function {name!r}; known: {', '.join(catalog_names())}")
    builder, wanted = _CATALOG[name]
    params = dict(params or {})
    extra = set(params) - set(wanted)
    if extra:
        raise ParamOutOfRange(f"{name} does not take parameters {sorted(extra)}")
    missing = [k for k in wanted if k not in params]
    if missing:
        raise ParamOutOfRange(f"{name} requires parameters {missing}")
    return builder(*[float(params[k]) for k in wanted])


def parse_function_spec(spec: str) -> ScalarFn:
    """Parse the CLI naming grammar name[:param=value,...]."""
    spec = spec.strip()
    name, _, rest = spec.partition(":")
    name = name.strip()
    if not name:
        raise ParseError(f"empty function name in {spec!r}")
    params = {}
    if rest:
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep or not key.strip():
                raise ParseError(f"malformed parameter {item!r} in {spec!r}")
            try:
                params[key.strip()] = float(value)
            except ValueError:
                raise ParseError(f"non-numeric parameter value {value!r} in {spec!r}")
    return catalog_get(name, params)


def midpoint_concave(value, lo: float, hi: float, pairs: int = 200,
                     seed: int = 0, tol: float = 1e-12) -> bool:
    """Sampled midpoint concavity: f((a+b)/2) >= (f(a)+f(b))/2 - tol*scale."""
    rng = PortableRng(seed)
    pts = rng.log_uniforms(max(lo, 1e-6), hi, 2 * pairs)
    for i in range(pairs):
        a, b = float(pts[2 * i]), float(pts[2 * i + 1])
        fa, fb, fm = value(a), value(b), value(0.5 * (a + b))
        scale = max(1.0, abs(fa), abs(fb))
        if fm < 0.5 * (fa + fb) - tol * scale:
            return False
    return True


# ---------------------------------------------------------------------------
# Adaptive Gauss-Legendre quadrature.
#
# Panels are accepted when the low- and doubled-node rules agree to the
# stability tolerance distributed proportionally to panel width, otherwise
# bisected; the total evaluation budget is capped.  Half-line integrals are
# first mapped onto [0, 1] with substitutions chosen so that the endpoint
# behaviour of the integrand (the lambda^(t-1) factor and the matching decay
# of the tail) is absorbed into the measure rather than left as an
# algebraic singularity.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    base_nodes: int = 16
    stability_tol: float = 1e-8
    max_nodes: int = 2 ** 14

    def __post_init__(self):
        if self.base_nodes < 16:
            raise ParamOutOfRange(f"quadrature needs >= 16 base nodes, got {self.base_nodes}")
        if self.stability_tol <= 0.0 or self.max_nodes < 3 * self.base_nodes:
            raise ParamOutOfRange("invalid quadrature spec")


_DEFAULT_QUAD = QuadratureSpec()
_GAUSS_CACHE: dict = {}


def _gauss(n):
    if n not in _GAUSS_CACHE:
        _GAUSS_CACHE[n] = leggauss(n)
    return _GAUSS_CACHE[n]


def _panel(f, a, b, rule):
    nodes, weights = rule
    x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
    return 0.5 * (b - a) * float(np.dot(weights, f(x)))


def _adaptive_unit(f, spec: QuadratureSpec) -> float:
    """Integral of the vectorized f over [0, 1] by adaptive bisection."""
    coarse = _gauss(spec.base_nodes)
    fine = _gauss(2 * spec.base_nodes)
    cost = 3 * spec.base_nodes
    used = 0
    total = 0.0
    stack = [(0.0, 1.0)]
    while stack:
        lo, hi = stack.pop()
        used += cost
        if used > spec.max_nodes:
            raise QuadratureError(
                f"adaptive quadrature exceeded its {spec.max_nodes} node budget"
            )
        c = _panel(f, lo, hi, coarse)
        d = _panel(f, lo, hi, fine)
        if abs(c - d) <= spec.stability_tol * (hi - lo) or (hi - lo) <= 1e-14:
            total += d
        else:
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid))
            stack.append((mid, hi))
    return total


def power_integral(x: float, t: float, variant: str = "resolvent",
                   quad: QuadratureSpec | None = None) -> float:
    """x^t via one of its two half-line integral representations.

    variant 'resolvent' integrates lambda^(t-1) x/(lambda+x); variant 'log'
    integrates t lambda^(t-1) log(1 + x/lambda).  Both carry the
    sin(pi t)/pi prefactor.  Accuracy is far better than the documented
    1e-6 over x in [0.1, 10], t in [0.1, 0.9].
    """
    if x <= 0.0:
        raise DomainError(f"power_integral needs x > 0, got {x}", offending=x)
    if not (0.0 < t < 1.0):
        raise ParamOutOfRange(f"power_integral needs 0 < t < 1, got t={t}")
    if variant not in ("resolvent", "log"):
        raise ValueError(f"variant must be 'resolvent' or 'log', got {variant!r}")
    spec = quad or _DEFAULT_QUAD

    # Head (lambda in (0,1]): lambda = w^(1/t) turns lambda^(t-1) d lambda
    # into dw/t.  Tail (lambda in [1,inf)): lambda = s^(-1/(1-t)) turns
    # lambda^(t-2) d lambda into -ds/(1-t).
    if variant == "resolvent":
        def head(w):
            return x / (np.power(w, 1.0 / t) + x)

        def tail(s):
            return x / (1.0 + x * np.power(s, 1.0 / (1.0 - t)))
    else:
        def head(w):
            lam = np.power(w, 1.0 / t)
            return np.log(lam + x) - np.log(w) / t

        def tail(s):
            r = x * np.power(s, 1.0 / (1.0 - t))
            ratio = np.ones_like(r)
            np.divide(np.log1p(r), r, out=ratio, where=r > 0.0)
            return x * ratio

    total = _adaptive_unit(head, spec) / t + _adaptive_unit(tail, spec) / (1.0 - t)
    prefactor = math.sin(math.pi * t) / math.pi
    if variant == "log":
        prefactor *= t
    return prefactor * total


def kappa_integral(x: float, quad: QuadratureSpec | None = None) -> float:
    """kappa(x) from its split integral form.

    The finite part integrates 1 - x/(1+t) - t/(x+t) over [0,1]; the tail
    integrates (x+1)/t - x/(1+t) - 1/(x+t) over [1,inf), mapped onto [0,1)
    by t = 1/(1-u).
    """
    if x < 0.0:
        raise DomainError(f"kappa_integral needs x >= 0, got {x}", offending=x)
    spec = quad or _DEFAULT_QUAD

    def head(t):
        return 1.0 - x / (1.0 + t) - t / (x + t)

    def tail(u):
        t = 1.0 / (1.0 - u)
        return ((x + 1.0) / t - x / (1.0 + t) - 1.0 / (x + t)) * t * t

    return _adaptive_unit(head, spec) + _adaptive_unit(tail, spec)
