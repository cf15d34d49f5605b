"""Positive-definite kernels built from positively-supported distributions.

A distribution F on (0, inf) defines the even function

    k(r) = integral over x > |r| of (1 - |r|/x) dF(x),

a mixture of triangular bumps. It satisfies k(0) = 1, is convex and
nonincreasing on [0, inf), and is positive definite on the line; products
of one-dimensional evaluations extend it to vectors. A scale rho > 0
evaluates at rho * r. The Fourier transform of the kernel is a nonnegative
even function whose value at zero equals the mean of F divided by rho, and
the generating cdf can be recovered from the kernel and its one-sided
derivative: F(x) = 1 - k(x) + x * k'(x).

Closed forms are provided for the whole catalog except gamma with shape
below one, Weibull with exponent below one, and chi-square with one degree
of freedom; those fall back to direct quadrature of the mixture integral.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import distributions as dists
from . import specfun as sf
from .errors import ConvergenceError, ParseError, QuadratureError, SpectralMismatchError

_SQRT_PI = math.sqrt(math.pi)
_SQRT_2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Agreement demanded between the two independent spectral routes.
SPECTRAL_AGREEMENT = 1e-6


@dataclass(frozen=True)
class KernelSpec:
    """A generating distribution plus an evaluation scale.

    Exactly one of rho (direct scale) or tau (target whole-line area under
    the scaled kernel; rho = mean / tau) may be given; neither means
    rho = 1.
    """

    dist: dists.Distribution
    rho: float = None
    tau: float = None

    def __post_init__(self):
        if not isinstance(self.dist, dists.Distribution):
            raise ValueError(f"dist must be a catalog distribution, got {self.dist!r}")
        if self.tau is not None:
            if self.rho is not None:
                raise ValueError("give rho or tau, not both")
            tau = float(self.tau)
            if not (math.isfinite(tau) and tau > 0.0):
                raise ValueError(f"tau must be positive and finite, got {self.tau}")
            object.__setattr__(self, "tau", tau)
            object.__setattr__(self, "rho", self.dist.mean() / tau)
        elif self.rho is None:
            object.__setattr__(self, "rho", 1.0)
        rho = float(self.rho)
        if not (math.isfinite(rho) and rho > 0.0):
            raise ValueError(f"rho must be positive and finite, got {self.rho}")
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True)
class SpectralValue:
    """One point of a kernel's Fourier transform; never negative."""

    t: float
    value: float

    def __post_init__(self):
        if not self.value >= 0.0:
            raise ValueError(f"spectral value must be nonnegative, got {self.value}")


def _quad(f, a, b, epsabs=1e-12, epsrel=1e-10, limit=200):
    """Adaptive quadrature with warnings silenced; accuracy is checked by
    the caller through the returned error estimate."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit)
    return val, err


def _unit_floor(r):
    """Floor that snaps values a hair below an integer up to it, so scaled
    inputs that should land exactly on a knot take the right branch."""
    n = math.floor(r)
    if r - n > 1.0 - 1e-12:
        n += 1
    return int(n)


# ---------------------------------------------------------------------------
# Closed forms: kernel values, one-sided kernel derivatives, spectra.
# Each returns None when the family/parameter combination has no closed form.


def _exp_kernel(theta, r):
    if r == 0.0:
        return 1.0
    x = r / theta
    return math.exp(-x) - x * sf.exp_integral_e1(x)


def _half_normal_kernel(sigma, r):
    if r == 0.0:
        return 1.0
    u = r / (sigma * _SQRT_2)
    return sf.erfc(u) - (u / _SQRT_PI) * sf.exp_integral_e1(u * u)


def _closed_kernel(d, r):
    """Closed-form k(r) for r >= 0 at the unscaled distribution, or None."""
    if isinstance(d, dists.ShiftedPoisson):
        n = _unit_floor(r)
        if n < 1:
            return 1.0 - (r / d.mu) * (1.0 - sf.reg_upper_inc_gamma(1.0, d.mu))
        return (1.0 - sf.reg_upper_inc_gamma(float(n), d.mu)) - (r / d.mu) * (
            1.0 - sf.reg_upper_inc_gamma(float(n + 1), d.mu)
        )
    if isinstance(d, dists.Gamma):
        if d.s == 1.0:
            return _exp_kernel(d.theta, r)
        if d.s < 1.0:
            return None
        x = r / d.theta
        return sf.reg_upper_inc_gamma(d.s, x) - x / (d.s - 1.0) * sf.reg_upper_inc_gamma(
            d.s - 1.0, x
        )
    if isinstance(d, dists.Exponential):
        return _exp_kernel(d.theta, r)
    if isinstance(d, dists.Weibull):
        if d.alpha == 1.0:
            return _exp_kernel(d.theta, r)
        if d.alpha < 1.0:
            return None
        if r == 0.0:
            return 1.0
        x = r / d.theta
        z = x ** d.alpha
        return math.exp(-z) - x * sf.upper_inc_gamma(1.0 - 1.0 / d.alpha, z)
    if isinstance(d, dists.ChiSquare):
        if d.nu < 2:
            return None
        return _closed_kernel(dists.Gamma(d.nu / 2.0, 2.0), r)
    if isinstance(d, dists.Chi):
        if d.nu == 1:
            return _half_normal_kernel(1.0, r)
        y = 0.5 * r * r
        coef = math.exp(sf.log_gamma((d.nu - 1) / 2.0) - sf.log_gamma(d.nu / 2.0))
        return sf.reg_upper_inc_gamma(d.nu / 2.0, y) - (r / _SQRT_2) * coef * (
            sf.reg_upper_inc_gamma((d.nu - 1) / 2.0, y)
        )
    if isinstance(d, dists.HalfNormal):
        return _half_normal_kernel(d.sigma, r)
    if isinstance(d, dists.Rayleigh):
        u = r / (d.sigma * _SQRT_2)
        return math.exp(-u * u) - _SQRT_PI * u * sf.erfc(u)
    if isinstance(d, dists.Nakagami):
        if d.m == 0.5:
            return _half_normal_kernel(math.sqrt(d.omega), r)
        y = d.m * r * r / d.omega
        coef = math.sqrt(d.m / d.omega) * math.exp(
            sf.log_gamma(d.m - 0.5) - sf.log_gamma(d.m)
        )
        return sf.reg_upper_inc_gamma(d.m, y) - r * coef * sf.reg_upper_inc_gamma(
            d.m - 0.5, y
        )
    return None


def _closed_kernel_deriv(d, r):
    """Closed-form one-sided derivative k'(r) for r > 0, or None."""
    if isinstance(d, dists.ShiftedPoisson):
        n = _unit_floor(r)
        return -(1.0 - sf.reg_upper_inc_gamma(float(max(n, 0) + 1), d.mu)) / d.mu
    if isinstance(d, dists.Gamma):
        if d.s == 1.0:
            return -sf.exp_integral_e1(r / d.theta) / d.theta
        if d.s < 1.0:
            return None
        return -sf.reg_upper_inc_gamma(d.s - 1.0, r / d.theta) / ((d.s - 1.0) * d.theta)
    if isinstance(d, dists.Exponential):
        return -sf.exp_integral_e1(r / d.theta) / d.theta
    if isinstance(d, dists.Weibull):
        if d.alpha == 1.0:
            return -sf.exp_integral_e1(r / d.theta) / d.theta
        if d.alpha < 1.0:
            return None
        return -sf.upper_inc_gamma(1.0 - 1.0 / d.alpha, (r / d.theta) ** d.alpha) / d.theta
    if isinstance(d, dists.ChiSquare):
        if d.nu < 2:
            return None
        return _closed_kernel_deriv(dists.Gamma(d.nu / 2.0, 2.0), r)
    if isinstance(d, dists.Chi):
        if d.nu == 1:
            return _closed_kernel_deriv(dists.HalfNormal(1.0), r)
        coef = math.exp(sf.log_gamma((d.nu - 1) / 2.0) - sf.log_gamma(d.nu / 2.0)) / _SQRT_2
        return -coef * sf.reg_upper_inc_gamma((d.nu - 1) / 2.0, 0.5 * r * r)
    if isinstance(d, dists.HalfNormal):
        return -sf.exp_integral_e1(r * r / (2.0 * d.sigma * d.sigma)) / (d.sigma * _SQRT_2PI)
    if isinstance(d, dists.Rayleigh):
        return -math.sqrt(math.pi / 2.0) / d.sigma * sf.erfc(r / (d.sigma * _SQRT_2))
    if isinstance(d, dists.Nakagami):
        if d.m == 0.5:
            return _closed_kernel_deriv(dists.HalfNormal(math.sqrt(d.omega)), r)
        coef = math.sqrt(d.m / d.omega) * math.exp(
            sf.log_gamma(d.m - 0.5) - sf.log_gamma(d.m)
        )
        return -coef * sf.reg_upper_inc_gamma(d.m - 0.5, d.m * r * r / d.omega)
    return None


def _exp_ft(theta, a):
    x = theta * a
    return math.log1p(x * x) / (theta * a * a)


def _half_normal_ft(sigma, a):
    """Spectrum of the half-normal kernel by oscillatory panel quadrature.

    After integrating by parts the transform is
        (2 / (a sqrt(pi))) * integral_0^inf E1(v^2) sin(T v) dv,  T = sigma sqrt(2) a.
    Panels run between consecutive zeros of the sine; the envelope decays
    like exp(-v^2), so panel magnitudes are eventually monotone and the
    first omitted panel bounds the tail.
    """
    big_t = sigma * _SQRT_2 * a

    def f(v):
        vv = v * v
        if vv == 0.0:
            return 0.0
        return sf.exp_integral_e1(vv) * math.sin(big_t * v)

    width = math.pi / big_t
    total = 0.0
    for k in range(5000):
        lo = k * width
        val, _ = _quad(f, lo, lo + width, epsabs=1e-13, epsrel=1e-11, limit=200)
        total += val
        if k >= 1 and abs(val) <= 1e-13 * max(1.0, abs(total)):
            return 2.0 * total / (a * _SQRT_PI)
    raise ConvergenceError(
        f"half-normal spectral panels did not decay (sigma={sigma}, t={a})"
    )


def _closed_ft(d, a):
    """Closed-form transform at frequency a > 0 for the unscaled law, or None."""
    if isinstance(d, dists.ShiftedPoisson):
        damp = math.exp(d.mu * (math.cos(a) - 1.0))
        return 2.0 * (1.0 - damp * math.cos(d.mu * math.sin(a))) / (d.mu * a * a)
    if isinstance(d, dists.Gamma):
        if d.s == 1.0:
            return _exp_ft(d.theta, a)
        if d.s < 1.0:
            return None
        x = d.theta * a
        w = math.atan(x)
        cosw = 1.0 / math.sqrt(1.0 + x * x)
        return (
            2.0
            * (1.0 - cosw ** (d.s - 1.0) * math.cos((d.s - 1.0) * w))
            / ((d.s - 1.0) * d.theta * a * a)
        )
    if isinstance(d, dists.Exponential):
        return _exp_ft(d.theta, a)
    if isinstance(d, dists.Weibull):
        if d.alpha == 1.0:
            return _exp_ft(d.theta, a)
        return None
    if isinstance(d, dists.ChiSquare):
        if d.nu < 2:
            return None
        return _closed_ft(dists.Gamma(d.nu / 2.0, 2.0), a)
    if isinstance(d, dists.Chi):
        if d.nu == 1:
            return _half_normal_ft(1.0, a)
        coef = _SQRT_2 * math.exp(sf.log_gamma((d.nu - 1) / 2.0) - sf.log_gamma(d.nu / 2.0))
        return coef * (1.0 - sf.kummer_m((d.nu - 1) / 2.0, 0.5, -0.5 * a * a)) / (a * a)
    if isinstance(d, dists.HalfNormal):
        return _half_normal_ft(d.sigma, a)
    if isinstance(d, dists.Rayleigh):
        x = d.sigma * a
        return _SQRT_2PI * (-math.expm1(-0.5 * x * x)) / (d.sigma * a * a)
    if isinstance(d, dists.Nakagami):
        if d.m == 0.5:
            return _half_normal_ft(math.sqrt(d.omega), a)
        coef = 2.0 * math.sqrt(d.m / d.omega) * math.exp(
            sf.log_gamma(d.m - 0.5) - sf.log_gamma(d.m)
        )
        arg = -d.omega * a * a / (4.0 * d.m)
        return coef * (1.0 - sf.kummer_m(d.m - 0.5, 0.5, arg)) / (a * a)
    return None


def _kernel_evaluator(d):
    """Callable r -> k(r) using the closed form when one exists."""

    def k(r):
        v = _closed_kernel(d, r)
        if v is None:
            v = eval_kernel_numeric(d, r)
        return v

    return k


# ---------------------------------------------------------------------------
# Public evaluation API


def eval_kernel(spec, r):
    """Kernel value k(rho * |r|); always within [0, 1]."""
    r = float(r)
    if not math.isfinite(r):
        raise ValueError(f"r must be finite, got {r}")
    u = spec.rho * abs(r)
    if u == 0.0:
        return 1.0
    v = _closed_kernel(spec.dist, u)
    if v is None:
        v = eval_kernel_numeric(spec.dist, u)
    return min(1.0, max(0.0, v))


def eval_kernel_numeric(d, r):
    """k(|r|) by direct quadrature/summation of the mixture integral.

    Independent of every closed form; serves as the oracle they are
    validated against. Absolute accuracy well below 1e-9.
    """
    r = abs(float(r))
    if d.discrete:
        total = 0.0
        k = max(_unit_floor(r) + 1, 1)
        top = int(d.upper_tail_cutoff(1e-16)) + 1
        while k <= top:
            total += (1.0 - r / k) * d.density(float(k))
            k += 1
        return total
    cutoff = d.upper_tail_cutoff(1e-15)
    if r >= cutoff:
        return 0.0

    def f(x):
        return (1.0 - r / x) * d.density(x)

    mid = min(cutoff, max(d.mean(), 1.5 * r))
    total = 0.0
    err = 0.0
    lo = r
    for hi in sorted({mid, cutoff}):
        if hi <= lo:
            continue
        v, e = _quad(f, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=300)
        total += v
        err += e
        lo = hi
    if err > 1e-9:
        raise QuadratureError(
            f"kernel quadrature error {err:.2e} too large at r={r} for {d!r}"
        )
    return total


def eval_ft(spec, t):
    """Fourier transform of the scaled kernel at frequency t."""
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    if t == 0.0:
        return SpectralValue(0.0, spec.dist.mean() / spec.rho)
    a = abs(t) / spec.rho
    v = _closed_ft(spec.dist, a)
    if v is None:
        v = eval_ft_numeric(spec.dist, a)
    return SpectralValue(t, _nonneg(v) / spec.rho)


def _nonneg(v):
    if v < -1e-9:
        raise QuadratureError(f"spectral evaluation came out negative: {v}")
    return max(0.0, v)


def eval_ft_numeric(d, t):
    """Transform at t != 0 by two independent numeric routes.

    Route one integrates (2 - 2 cos(x t)) / (x t^2) against the generating
    law; route two is the direct cosine transform of the kernel. Both are
    computed every call and must agree within SPECTRAL_AGREEMENT, else
    SpectralMismatchError is raised. Returns the first route's value.
    """
    t = float(t)
    if t == 0.0 or not math.isfinite(t):
        raise ValueError(f"t must be nonzero and finite, got {t}")
    a = abs(t)
    first = _ft_from_law(d, a)
    second = _ft_from_kernel(d, a)
    if abs(first - second) > SPECTRAL_AGREEMENT:
        raise SpectralMismatchError(
            f"spectral routes disagree at t={t} for {d!r}", first, second
        )
    return first


def _ft_from_law(d, a):
    if d.discrete:
        total = 0.0
        top = int(d.upper_tail_cutoff(1e-16)) + 1
        for k in range(1, top + 1):
            sn = math.sin(0.5 * a * k)
            total += 4.0 * sn * sn / (k * a * a) * d.density(float(k))
        return total

    def h(x):
        if x <= 0.0:
            return 0.0
        sn = math.sin(0.5 * a * x)
        return 4.0 * sn * sn * d.density(x) / (x * a * a)

    cutoff = d.upper_tail_cutoff(1e-15)
    return _panel_sum(h, cutoff, a)


def _ft_from_kernel(d, a):
    kern = _kernel_evaluator(d)

    def f(r):
        return kern(r) * math.cos(a * r)

    cutoff = d.upper_tail_cutoff(1e-14)
    return 2.0 * _panel_sum(f, cutoff, a)


def _panel_sum(f, cutoff, a):
    """Integrate f over [0, cutoff] in half-period panels of the frequency."""
    width = math.pi / a
    npanels = int(math.ceil(cutoff / width))
    if npanels > 20000:
        raise QuadratureError(
            f"too many oscillation panels ({npanels}); frequency {a} too high"
        )
    total = 0.0
    lo = 0.0
    for _ in range(npanels):
        hi = min(cutoff, lo + width)
        if hi <= lo:
            break
        v, _ = _quad(f, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=150)
        total += v
        lo = hi
    return total


def kernel_to_cdf(spec, x):
    """Recover the generating cdf at x from the kernel alone:
    F(x) = 1 - k(u) + u k'(u) with u = rho x, using the closed derivative
    when available and a five-point central difference otherwise."""
    x = float(x)
    if x <= 0.0:
        return 0.0
    u = spec.rho * x
    d = spec.dist
    kv = _closed_kernel(d, u)
    gv = _closed_kernel_deriv(d, u)
    if kv is None or gv is None:
        kv = eval_kernel_numeric(d, u)
        gv = _kernel_deriv_numeric(d, u)
    return min(1.0, max(0.0, 1.0 - kv + u * gv))


def _kernel_deriv_numeric(d, u):
    """Right derivative of the kernel by quadrature of its exact form,
    k'(r) = -integral of density(x)/x over x > r (continuous case)."""
    if d.discrete:
        # Piecewise linear: the slope on [n, n+1) is k(n+1) - k(n).
        n = _unit_floor(u)
        kern = _kernel_evaluator(d)
        return kern(float(n + 1)) - kern(float(n))
    cutoff = d.upper_tail_cutoff(1e-16)
    mid = min(cutoff, max(d.mean(), 1.5 * u))
    total = 0.0
    lo = u
    for hi in sorted({mid, cutoff}):
        if hi <= lo:
            continue
        value, err = _quad(lambda x: d.density(x) / x, lo, hi)
        if err > 1e-9:
            raise QuadratureError(
                f"derivative quadrature error {err:.2e} for {d!r} at {u}"
            )
        total += value
        lo = hi
    return -total


def area_under_curve(spec):
    """Integral of the scaled kernel over the whole line; equals mean / rho
    (and the transform's value at frequency zero)."""
    d = spec.dist
    if d.discrete:
        # exact trapezoid over the unit segments of the piecewise-linear kernel
        total = 0.0
        prev = 1.0
        for n in range(1, 10 ** 6):
            cur = _closed_kernel(d, float(n))
            total += 0.5 * (prev + cur)
            if cur < 1e-15:
                return 2.0 * total / spec.rho
            prev = cur
        raise ConvergenceError(f"kernel of {d!r} did not decay")
    kern = _kernel_evaluator(d)
    cutoff = d.upper_tail_cutoff(1e-14)
    mid = min(d.mean(), cutoff)
    total = 0.0
    lo = 0.0
    for hi in sorted({mid, cutoff}):
        if hi <= lo:
            continue
        v, _ = _quad(kern, lo, hi, epsabs=1e-10, epsrel=1e-10, limit=300)
        total += v
        lo = hi
    return 2.0 * total / spec.rho


def tensor_eval(spec, x, xp):
    """Product of one-dimensional kernel values over coordinates."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if x.shape != xp.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {xp.shape}")
    total = 1.0
    for a, b in zip(np.ravel(x), np.ravel(xp)):
        total *= eval_kernel(spec, a - b)
    return total


# ---------------------------------------------------------------------------
# Text form: "<distribution-spec>[;tau=V|;rho=V]"


def parse_kernel_spec(text):
    """Parse a kernel description like "gamma:s=2,theta=1;tau=0.5"."""
    parts = [p.strip() for p in str(text).strip().split(";")]
    d = dists.parse_distribution(parts[0])
    rho = None
    tau = None
    for part in parts[1:]:
        key, sep, value = part.partition("=")
        if not sep:
            raise ParseError(f"expected key=value after ';', got {part!r}")
        key = key.strip()
        try:
            num = float(value.strip())
        except ValueError:
            raise ParseError(f"scale value is not a number: {value.strip()!r}") from None
        if key == "rho":
            if rho is not None:
                raise ParseError("duplicate rho clause")
            rho = num
        elif key == "tau":
            if tau is not None:
                raise ParseError("duplicate tau clause")
            tau = num
        else:
            raise ParseError(f"unknown scale key {key!r} (expected rho or tau)")
    if rho is not None and tau is not None:
        raise ParseError("give rho or tau, not both")
    return KernelSpec(d, rho=rho, tau=tau)


def format_kernel_spec(spec):
    """Inverse of parse_kernel_spec."""
    base = spec.dist.spec_string()
    if spec.tau is not None:
        return f"{base};tau={spec.tau!r}"
    if spec.rho != 1.0:
        return f"{base};rho={spec.rho!r}"
    return base
