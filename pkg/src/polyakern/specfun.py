"""Scalar special functions used by the kernel and distribution catalogs.

Everything here is evaluated from scratch with series, continued fractions,
and a Lanczos approximation, so the package core has no dependency beyond
the standard library. Branch cuts between expansions follow the usual
practice: power series on the region where terms shrink quickly, continued
fractions elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError

EULER_GAMMA = 0.57721566490153286061

_SERIES_CAP = 10000
_CF_CAP = 10000
_REL_EPS = 1e-16


@dataclass(frozen=True)
class EvalResult:
    """A numeric value together with an estimate of its absolute error."""

    value: float
    est_abs_error: float

    def __post_init__(self):
        if self.est_abs_error < 0:
            raise ValueError("error estimate must be nonnegative")


# ---------------------------------------------------------------------------
# Gamma function (Lanczos, g = 7, 9 terms; relative error ~ 1e-13)

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


def _lanczos_sum(x):
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (x - 1.0 + i)
    return acc


def gamma_fn(s):
    """Gamma function for s > 0."""
    if not s > 0.0:
        raise ValueError(f"gamma_fn requires s > 0, got {s}")
    if s < 0.5:
        # recurrence keeps the Lanczos kernel on its accurate range
        return gamma_fn(s + 1.0) / s
    t = s + _LANCZOS_G - 0.5
    return _SQRT_TWO_PI * t ** (s - 0.5) * math.exp(-t) * _lanczos_sum(s)


def log_gamma(s):
    """Natural log of the gamma function for s > 0, safe for large s."""
    if not s > 0.0:
        raise ValueError(f"log_gamma requires s > 0, got {s}")
    if s < 0.5:
        return log_gamma(s + 1.0) - math.log(s)
    t = s + _LANCZOS_G - 0.5
    return (
        0.5 * math.log(2.0 * math.pi)
        + (s - 0.5) * math.log(t)
        - t
        + math.log(_lanczos_sum(s))
    )


# ---------------------------------------------------------------------------
# Incomplete gamma functions

def _reg_lower_series(s, t):
    """Regularized lower incomplete gamma by power series; needs t < s + 1."""
    term = 1.0 / s
    total = term
    for n in range(1, _SERIES_CAP + 1):
        term *= t / (s + n)
        total += term
        if abs(term) <= abs(total) * _REL_EPS:
            break
    else:
        raise ConvergenceError(f"lower incomplete gamma series stalled at s={s}, t={t}")
    log_pref = -t + s * math.log(t) - log_gamma(s)
    return total * math.exp(log_pref)


def _reg_upper_cf(s, t):
    """Regularized upper incomplete gamma by Lentz continued fraction; t >= s + 1."""
    tiny = 1e-300
    b = t + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _CF_CAP + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _REL_EPS:
            break
    else:
        raise ConvergenceError(f"upper incomplete gamma fraction stalled at s={s}, t={t}")
    log_pref = -t + s * math.log(t) - log_gamma(s)
    return h * math.exp(log_pref)


def reg_upper_inc_gamma(s, t):
    """Regularized upper incomplete gamma Q(s, t) for s > 0, t >= 0."""
    if not s > 0.0:
        raise ValueError(f"reg_upper_inc_gamma requires s > 0, got {s}")
    if t < 0.0:
        raise ValueError(f"reg_upper_inc_gamma requires t >= 0, got {t}")
    if t == 0.0:
        return 1.0
    if t < s + 1.0:
        return 1.0 - _reg_lower_series(s, t)
    return _reg_upper_cf(s, t)


def reg_lower_inc_gamma(s, t):
    """Regularized lower incomplete gamma P(s, t) = 1 - Q(s, t)."""
    if not s > 0.0:
        raise ValueError(f"reg_lower_inc_gamma requires s > 0, got {s}")
    if t < 0.0:
        raise ValueError(f"reg_lower_inc_gamma requires t >= 0, got {t}")
    if t == 0.0:
        return 0.0
    if t < s + 1.0:
        return _reg_lower_series(s, t)
    return 1.0 - _reg_upper_cf(s, t)


def upper_inc_gamma(s, t):
    """Upper incomplete gamma for s >= 0 and t >= 0 (s > 0 required at t = 0).

    At s = 0 the integral reduces to the exponential integral E1(t).
    """
    if s < 0.0:
        raise ValueError(f"upper_inc_gamma requires s >= 0, got {s}")
    if t < 0.0:
        raise ValueError(f"upper_inc_gamma requires t >= 0, got {t}")
    if s == 0.0:
        if t == 0.0:
            raise ValueError("upper_inc_gamma diverges at s = 0, t = 0")
        return exp_integral_e1(t)
    return reg_upper_inc_gamma(s, t) * gamma_fn(s)


# ---------------------------------------------------------------------------
# Exponential integral

def exp_integral_e1(z):
    """Exponential integral E1(z) for z > 0."""
    if not z > 0.0:
        raise ValueError(f"exp_integral_e1 requires z > 0, got {z}")
    if z <= 1.0:
        # alternating series around the log singularity at zero
        total = -EULER_GAMMA - math.log(z)
        power = 1.0
        for k in range(1, _SERIES_CAP + 1):
            power *= -z / k
            term = -power / k
            total += term
            if abs(term) <= abs(total) * _REL_EPS:
                return total
        raise ConvergenceError(f"E1 series stalled at z={z}")
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _CF_CAP + 1):
        an = -i * i
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _REL_EPS:
            return h * math.exp(-z)
    raise ConvergenceError(f"E1 continued fraction stalled at z={z}")


# ---------------------------------------------------------------------------
# Kummer confluent hypergeometric function

def _kummer_series(a, b, z):
    """Direct series for M(a, b, z) with running rescale to dodge overflow."""
    total = 1.0
    term = 1.0
    log_scale = 0.0
    for n in range(_SERIES_CAP):
        term *= (a + n) * z / ((b + n) * (n + 1))
        total += term
        if not math.isfinite(total):
            raise ConvergenceError(f"Kummer series overflowed at a={a}, b={b}, z={z}")
        if abs(term) <= abs(total) * 1e-15 and n > 0:
            return total, log_scale
        if abs(total) > 1e280:
            total *= 1e-280
            term *= 1e-280
            log_scale += 280.0 * math.log(10.0)
    raise ConvergenceError(f"Kummer series stalled at a={a}, b={b}, z={z}")


def kummer_m(a, b, z):
    """Confluent hypergeometric function M(a, b, z).

    b must not be zero or a negative integer. For negative z the series
    alternates destructively (13 digits are already gone near z = -30), so
    the reflection M(a, b, z) = exp(z) M(b - a, b, -z) is applied to every
    negative argument; the reflected series has fixed sign beyond finitely
    many terms.
    """
    if b <= 0.0 and abs(b - round(b)) < 1e-12:
        raise ValueError(f"kummer_m requires b not in (0, -1, -2, ...), got {b}")
    if z == 0.0:
        return 1.0
    if z < 0.0:
        total, log_scale = _kummer_series(b - a, b, -z)
        if total == 0.0:
            return 0.0
        return math.copysign(1.0, total) * math.exp(z + log_scale + math.log(abs(total)))
    total, log_scale = _kummer_series(a, b, z)
    return total * math.exp(log_scale)


# ---------------------------------------------------------------------------
# Error-function family

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def _erf_series(x):
    if x == 0.0:
        return 0.0
    total = x
    term = x
    xx = x * x
    for n in range(1, _SERIES_CAP + 1):
        term *= -xx / n
        total += term / (2 * n + 1)
        if abs(term) <= abs(total) * _REL_EPS:
            return _TWO_OVER_SQRT_PI * total
    raise ConvergenceError(f"erf series stalled at x={x}")


def erf(x):
    """Error function."""
    if x < 0.0:
        return -erf(-x)
    if x <= 1.5:
        return _erf_series(x)
    return 1.0 - erfc(x)


def erfc(x):
    """Complementary error function, relatively accurate in the far tail."""
    if x < 0.0:
        return 2.0 - erfc(-x)
    if x <= 1.5:
        return 1.0 - _erf_series(x)
    return reg_upper_inc_gamma(0.5, x * x)


def erfi(x):
    """Imaginary error function via its (all-positive) odd power series.

    Used for reporting only; nothing on the kernel evaluation path calls it.
    """
    if x < 0.0:
        return -erfi(-x)
    if x == 0.0:
        return 0.0
    total = x
    term = x
    xx = x * x
    for n in range(1, _SERIES_CAP + 1):
        term *= xx / n
        total += term / (2 * n + 1)
        if abs(term) <= abs(total) * _REL_EPS:
            return _TWO_OVER_SQRT_PI * total
    raise ConvergenceError(f"erfi series stalled at x={x}")


def erf_family(kind, x):
    """Dispatch to erf, erfc, or erfi by name."""
    try:
        fn = {"erf": erf, "erfc": erfc, "erfi": erfi}[kind]
    except KeyError:
        raise ValueError(f"unknown erf-family member {kind!r}") from None
    return fn(x)
