"""Catalog of positively supported distributions that generate kernels.

Each family carries closed-form density, cdf, and mean, an exact sampler
built on :class:`~polyakern.rng.RandomStream`, and - where the
reciprocal-moment integral C = int f(x)/x dx converges - a decomposition
into (C, tilted law) with tilted density f(x)/(C x). The tilted law is a
catalog member when the family is closed under tilting, a plain Poisson for
shifted counts, and a quadrature-backed cdf otherwise.
"""

from __future__ import annotations

import math
from bisect import bisect_right, insort
from dataclasses import dataclass, fields

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceError, InfiniteTiltError, ParseError
from .specfun import (
    erf,
    gamma_fn,
    log_gamma,
    reg_lower_inc_gamma,
    reg_upper_inc_gamma,
)

_SQRT_2 = math.sqrt(2.0)
_SQRT_PI = math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# Support types

@dataclass(frozen=True)
class TiltDecomposition:
    """Constant C and the law of the tilted variable with density f(x)/(Cx)."""

    c: float
    tilted: object


class QuadratureCdf:
    """Distribution function computed by integrating a density numerically.

    Evaluations are cached as anchor points; a new query integrates only the
    panel from the nearest anchor below, so sweeps over a grid cost one
    short quadrature per point. Absolute accuracy target 1e-10.
    """

    def __init__(self, density, lower=0.0):
        self._density = density
        self.lower = lower
        self._anchors = [(lower, 0.0)]

    def density(self, x):
        if x <= self.lower:
            return 0.0
        return self._density(x)

    def cdf(self, x):
        if x <= self.lower:
            return 0.0
        keys = [a for a, _ in self._anchors]
        i = bisect_right(keys, x) - 1
        x0, f0 = self._anchors[i]
        if x == x0:
            return f0
        inc, _ = quad(self._density, x0, x, epsabs=1e-12, epsrel=1e-10, limit=200)
        f = min(f0 + inc, 1.0)
        insort(self._anchors, (x, f))
        return f


@dataclass(frozen=True)
class Poisson:
    """Plain count law on {0, 1, 2, ...}.

    Only produced as the tilted half of a shifted-count decomposition; it is
    not a kernel source itself because of the atom at zero.
    """

    mu: float
    discrete = True

    def __post_init__(self):
        if not self.mu > 0.0:
            raise ValueError(f"Poisson requires mu > 0, got {self.mu}")

    def density(self, x):
        k = round(float(x))
        if abs(x - k) > 1e-9 or k < 0:
            return 0.0
        return math.exp(-self.mu + k * math.log(self.mu) - log_gamma(k + 1.0))

    def cdf(self, x):
        if x < 0.0:
            return 0.0
        return reg_upper_inc_gamma(math.floor(x) + 1.0, self.mu)

    def mean(self):
        return self.mu


# ---------------------------------------------------------------------------
# Shared machinery

class Distribution:
    """Base for catalog families. Subclasses are frozen dataclasses."""

    discrete = False
    family = "?"

    def sample(self, stream):
        """One draw with the exact law of the family."""
        return float(self.sample_many(stream, 1)[0])

    def sample_many(self, stream, size):
        raise NotImplementedError

    def decompose(self):
        raise InfiniteTiltError(
            f"{self!r}: the reciprocal-moment integral diverges"
        )

    def upper_tail_cutoff(self, eps=1e-13):
        """Point with no more than eps upper-tail mass, found by doubling."""
        x = max(self.mean(), 1.0)
        for _ in range(200):
            if 1.0 - self.cdf(x) < eps:
                return x
            x *= 2.0
        raise ConvergenceError(f"{self!r}: tail cutoff search did not terminate")

    def spec_string(self):
        return format_distribution(self)


def _positive(name, value):
    if not value > 0.0 or not math.isfinite(value):
        raise ValueError(f"{name} must be positive and finite, got {value}")


def _integer_at_least_one(name, value):
    v = float(value)
    if not v.is_integer() or v < 1:
        raise ValueError(f"{name} must be an integer >= 1, got {value}")
    return int(v)


def _gamma_shape_draws(stream, s, size):
    """Standard (unit-scale) gamma draws by the Marsaglia-Tsang squeeze.

    Shapes below one are drawn at shape s + 1 and boosted by U^(1/s).
    """
    s_eff = s if s >= 1.0 else s + 1.0
    d = s_eff - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(size)
    pending = np.arange(size)
    while pending.size:
        x = stream.normal(pending.size)
        u = stream.uniform_open(pending.size)
        v = (1.0 + c * x) ** 3
        ok = v > 0.0
        logv = np.log(np.where(ok, v, 1.0))
        accept = ok & (np.log(u) < 0.5 * x * x + d - d * v + d * logv)
        out[pending[accept]] = d * v[accept]
        pending = pending[~accept]
    if s < 1.0:
        out *= stream.uniform_open(size) ** (1.0 / s)
    return out


def _poisson_block(stream, mu, size):
    """Counts by inversion (sequential cdf search); efficient for mu <= 30."""
    u = stream.uniform(size)
    k = np.zeros(size, dtype=np.int64)
    p = np.full(size, math.exp(-mu))
    f = p.copy()
    pending = u >= f
    guard = int(mu + 20.0 * math.sqrt(mu) + 60.0)
    for _ in range(guard):
        if not pending.any():
            return k
        k[pending] += 1
        p[pending] *= mu / k[pending]
        f[pending] += p[pending]
        pending = u >= f
    raise ConvergenceError(f"count search exceeded {guard} steps at mu={mu}")


def _poisson_draws(stream, mu, size):
    """Counts for any rate: additivity splits large rates into small blocks."""
    if mu <= 30.0:
        return _poisson_block(stream, mu, size)
    blocks = int(math.ceil(mu / 30.0))
    rate = mu / blocks
    total = np.zeros(size, dtype=np.int64)
    for _ in range(blocks):
        total += _poisson_block(stream, rate, size)
    return total


# ---------------------------------------------------------------------------
# Families

@dataclass(frozen=True)
class ShiftedPoisson(Distribution):
    """Count law on {1, 2, ...}: one plus a Poisson variable."""

    mu: float
    discrete = True
    family = "shifted_poisson"

    def __post_init__(self):
        _positive("mu", self.mu)

    def density(self, x):
        k = round(float(x))
        if abs(x - k) > 1e-9 or k < 1:
            return 0.0
        return math.exp(-self.mu + (k - 1) * math.log(self.mu) - log_gamma(float(k)))

    def cdf(self, x):
        if x < 1.0:
            return 0.0
        return reg_upper_inc_gamma(math.floor(x), self.mu)

    def mean(self):
        return self.mu + 1.0

    def sample_many(self, stream, size):
        return 1.0 + _poisson_draws(stream, self.mu, size).astype(float)

    def decompose(self):
        return TiltDecomposition(1.0 / self.mu, Poisson(self.mu))


@dataclass(frozen=True)
class Gamma(Distribution):
    s: float
    theta: float
    family = "gamma"

    def __post_init__(self):
        _positive("s", self.s)
        _positive("theta", self.theta)

    def density(self, x):
        if x < 0.0:
            return 0.0
        if x == 0.0:
            if self.s > 1.0:
                return 0.0
            if self.s == 1.0:
                return 1.0 / self.theta
            return math.inf
        return math.exp(
            (self.s - 1.0) * math.log(x)
            - x / self.theta
            - log_gamma(self.s)
            - self.s * math.log(self.theta)
        )

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        return reg_lower_inc_gamma(self.s, x / self.theta)

    def mean(self):
        return self.s * self.theta

    def sample_many(self, stream, size):
        return self.theta * _gamma_shape_draws(stream, self.s, size)

    def decompose(self):
        if self.s <= 1.0:
            raise InfiniteTiltError(
                f"{self!r}: tilting requires shape s > 1 (density at zero kills 1/x)"
            )
        return TiltDecomposition(
            1.0 / ((self.s - 1.0) * self.theta), Gamma(self.s - 1.0, self.theta)
        )


@dataclass(frozen=True)
class Exponential(Distribution):
    theta: float
    family = "exponential"

    def __post_init__(self):
        _positive("theta", self.theta)

    def density(self, x):
        if x < 0.0:
            return 0.0
        return math.exp(-x / self.theta) / self.theta

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        return -math.expm1(-x / self.theta)

    def mean(self):
        return self.theta

    def sample_many(self, stream, size):
        return self.theta * -np.log(stream.uniform_open(size))


@dataclass(frozen=True)
class Weibull(Distribution):
    theta: float
    alpha: float
    family = "weibull"

    def __post_init__(self):
        _positive("theta", self.theta)
        _positive("alpha", self.alpha)

    def density(self, x):
        if x < 0.0:
            return 0.0
        if x == 0.0:
            if self.alpha > 1.0:
                return 0.0
            if self.alpha == 1.0:
                return 1.0 / self.theta
            return math.inf
        z = x / self.theta
        return (self.alpha / self.theta) * z ** (self.alpha - 1.0) * math.exp(-(z ** self.alpha))

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        return -math.expm1(-((x / self.theta) ** self.alpha))

    def mean(self):
        return self.theta * gamma_fn(1.0 + 1.0 / self.alpha)

    def sample_many(self, stream, size):
        return self.theta * (-np.log(stream.uniform_open(size))) ** (1.0 / self.alpha)

    def decompose(self):
        if self.alpha <= 1.0:
            raise InfiniteTiltError(
                f"{self!r}: tilting requires alpha > 1 (density at zero kills 1/x)"
            )
        c = gamma_fn(1.0 - 1.0 / self.alpha) / self.theta
        tilted = QuadratureCdf(lambda x, d=self, cc=c: d.density(x) / (cc * x))
        return TiltDecomposition(c, tilted)


@dataclass(frozen=True)
class ChiSquare(Distribution):
    nu: int
    family = "chi_square"

    def __post_init__(self):
        object.__setattr__(self, "nu", _integer_at_least_one("nu", self.nu))

    def _as_gamma(self):
        return Gamma(self.nu / 2.0, 2.0)

    def density(self, x):
        return self._as_gamma().density(x)

    def cdf(self, x):
        return self._as_gamma().cdf(x)

    def mean(self):
        return float(self.nu)

    def sample_many(self, stream, size):
        return 2.0 * _gamma_shape_draws(stream, self.nu / 2.0, size)

    def decompose(self):
        if self.nu <= 2:
            raise InfiniteTiltError(f"{self!r}: tilting requires nu > 2")
        return self._as_gamma().decompose()


@dataclass(frozen=True)
class Chi(Distribution):
    nu: int
    family = "chi"

    def __post_init__(self):
        object.__setattr__(self, "nu", _integer_at_least_one("nu", self.nu))

    def density(self, x):
        if x < 0.0:
            return 0.0
        if x == 0.0:
            return math.sqrt(2.0 / math.pi) if self.nu == 1 else 0.0
        return math.exp(
            (1.0 - self.nu / 2.0) * math.log(2.0)
            + (self.nu - 1.0) * math.log(x)
            - x * x / 2.0
            - log_gamma(self.nu / 2.0)
        )

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        return reg_lower_inc_gamma(self.nu / 2.0, x * x / 2.0)

    def mean(self):
        return _SQRT_2 * math.exp(log_gamma((self.nu + 1.0) / 2.0) - log_gamma(self.nu / 2.0))

    def sample_many(self, stream, size):
        return np.sqrt(2.0 * _gamma_shape_draws(stream, self.nu / 2.0, size))

    def decompose(self):
        if self.nu < 2:
            raise InfiniteTiltError(f"{self!r}: tilting requires nu >= 2")
        c = math.exp(log_gamma((self.nu - 1.0) / 2.0) - log_gamma(self.nu / 2.0)) / _SQRT_2
        return TiltDecomposition(c, Chi(self.nu - 1))


@dataclass(frozen=True)
class HalfNormal(Distribution):
    sigma: float
    family = "half_normal"

    def __post_init__(self):
        _positive("sigma", self.sigma)

    def density(self, x):
        if x < 0.0:
            return 0.0
        return (_SQRT_2 / (self.sigma * _SQRT_PI)) * math.exp(
            -x * x / (2.0 * self.sigma * self.sigma)
        )

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        return erf(x / (self.sigma * _SQRT_2))

    def mean(self):
        return self.sigma * _SQRT_2 / _SQRT_PI

    def sample_many(self, stream, size):
        return self.sigma * np.abs(stream.normal(size))


@dataclass(frozen=True)
class Rayleigh(Distribution):
    sigma: float
    family = "rayleigh"

    def __post_init__(self):
        _positive("sigma", self.sigma)

    def density(self, x):
        if x < 0.0:
            return 0.0
        ss = self.sigma * self.sigma
        return (x / ss) * math.exp(-x * x / (2.0 * ss))

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        return -math.expm1(-x * x / (2.0 * self.sigma * self.sigma))

    def mean(self):
        return self.sigma * math.sqrt(math.pi / 2.0)

    def sample_many(self, stream, size):
        return self.sigma * np.sqrt(-2.0 * np.log(stream.uniform_open(size)))

    def decompose(self):
        return TiltDecomposition(
            math.sqrt(math.pi / 2.0) / self.sigma, HalfNormal(self.sigma)
        )


@dataclass(frozen=True)
class Nakagami(Distribution):
    m: float
    omega: float
    family = "nakagami"

    def __post_init__(self):
        if not (self.m >= 0.5 and math.isfinite(self.m)):
            raise ValueError(f"m must be >= 1/2, got {self.m}")
        _positive("omega", self.omega)

    def density(self, x):
        if x < 0.0:
            return 0.0
        if x == 0.0:
            if self.m == 0.5:
                return math.sqrt(2.0 / (math.pi * self.omega))
            return 0.0
        return 2.0 * math.exp(
            self.m * math.log(self.m)
            + (2.0 * self.m - 1.0) * math.log(x)
            - self.m * x * x / self.omega
            - log_gamma(self.m)
            - self.m * math.log(self.omega)
        )

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        return reg_lower_inc_gamma(self.m, self.m * x * x / self.omega)

    def mean(self):
        return math.exp(log_gamma(self.m + 0.5) - log_gamma(self.m)) * math.sqrt(
            self.omega / self.m
        )

    def sample_many(self, stream, size):
        return np.sqrt((self.omega / self.m) * _gamma_shape_draws(stream, self.m, size))

    def decompose(self):
        if self.m <= 0.5:
            raise InfiniteTiltError(f"{self!r}: tilting requires m > 1/2")
        c = math.sqrt(self.m / self.omega) * math.exp(
            log_gamma(self.m - 0.5) - log_gamma(self.m)
        )
        m2 = self.m - 0.5
        return TiltDecomposition(c, Nakagami(m2, self.omega * m2 / self.m))


# ---------------------------------------------------------------------------
# Auxiliary (symmetric) sampling laws used by Fourier feature maps

def sample_cauchy(stream, scale, size=None):
    """Centered Cauchy draws by inverse cdf."""
    _positive("scale", scale)
    u = stream.uniform(size)
    return scale * np.tan(math.pi * (u - 0.5))


def sample_normal(stream, stddev, size=None):
    """Centered normal draws."""
    _positive("stddev", stddev)
    return stddev * stream.normal(size)


# ---------------------------------------------------------------------------
# Textual spec form: "family:key=value,key=value"

FAMILIES = {
    cls.family: cls
    for cls in (
        ShiftedPoisson,
        Gamma,
        Exponential,
        Weibull,
        ChiSquare,
        Chi,
        HalfNormal,
        Rayleigh,
        Nakagami,
    )
}

# shorthand accepted on input
_FAMILY_ALIASES = {"exp": "exponential"}


def format_distribution(d):
    parts = ",".join(f"{f.name}={getattr(d, f.name)!r}" for f in fields(d))
    return f"{d.family}:{parts}"


def parse_distribution(text):
    t = text.strip()
    fam, sep, rest = t.partition(":")
    fam = fam.strip().lower()
    fam = _FAMILY_ALIASES.get(fam, fam)
    if not sep or not rest.strip():
        raise ParseError(
            f"expected 'family:key=value,...', got {text!r}"
        )
    cls = FAMILIES.get(fam)
    if cls is None:
        raise ParseError(f"unknown family {fam!r} (known: {sorted(FAMILIES)})")
    names = [f.name for f in fields(cls)]
    kv = {}
    for part in rest.split(","):
        key, eq, raw = part.partition("=")
        key = key.strip()
        raw = raw.strip()
        if not eq or not key or not raw:
            raise ParseError(f"malformed parameter {part!r} in {text!r}")
        if key not in names:
            raise ParseError(f"unknown parameter {key!r} for family {fam!r}")
        if key in kv:
            raise ParseError(f"duplicate parameter {key!r} in {text!r}")
        try:
            kv[key] = float(raw)
        except ValueError:
            raise ParseError(f"parameter {key!r} is not a number: {raw!r}") from None
    missing = [n for n in names if n not in kv]
    if missing:
        raise ParseError(f"family {fam!r} is missing parameters {missing}")
    return cls(**kv)
