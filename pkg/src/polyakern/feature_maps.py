"""Random Fourier and random binning feature maps.

Each map produces D independent copies of a randomized feature whose inner
product is an unbiased estimate of the kernel; averaging the copies divides
the estimator variance by D. Per-copy variances:

    complex Fourier  1 - k(r)^2
    real Fourier     1 + k(2r)/2 - k(r)^2
    binning          k(r) - k(r)^2

The Fourier map is provided for exactly two frequency laws: independent
per-coordinate Cauchy frequencies (pairing with the tensor exponential
kernel exp(-||x-x'||_1 / sigma)) and isotropic normal frequencies (pairing
with the Gaussian kernel). The binning map accepts any KernelSpec from the
catalog: spacings are drawn from the generating law and divided by rho,
offsets are uniform within each spacing, and two points contribute to the
same feature column exactly when every coordinate lands in the same bin.

Copy l always draws from the stream child (seed, l), so maps are
deterministic, copies are independent, and enlarging D keeps the first
copies unchanged.
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse as sp

from . import distributions as dists
from .polya_kernels import KernelSpec
from .rng import RandomStream

FOURIER_COMPLEX = "fourier_complex"
FOURIER_REAL = "fourier_real"
BINNING = "binning"
KINDS = (FOURIER_COMPLEX, FOURIER_REAL, BINNING)


@dataclass(frozen=True)
class TensorCauchy:
    """Per-coordinate independent Cauchy frequencies with the given scale.

    Pairs with the tensor exponential kernel exp(-scale * sum_j |x_j - x'_j|);
    for exp(-r/sigma) use scale = 1/sigma.
    """

    scale: float

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")

    def sample(self, stream, size):
        return dists.sample_cauchy(stream, self.scale, size)

    def kernel_value(self, x, xp):
        d = np.abs(np.asarray(x, dtype=float) - np.asarray(xp, dtype=float))
        return math.exp(-self.scale * float(np.sum(d)))


@dataclass(frozen=True)
class IsotropicNormal:
    """I.i.d. normal frequencies with the given standard deviation.

    Pairs with the Gaussian kernel exp(-stddev^2 ||x - x'||^2 / 2); for
    exp(-r^2/(2 sigma^2)) use stddev = 1/sigma.
    """

    stddev: float

    def __post_init__(self):
        if not (math.isfinite(self.stddev) and self.stddev > 0.0):
            raise ValueError(f"stddev must be positive and finite, got {self.stddev}")

    def sample(self, stream, size):
        return dists.sample_normal(stream, self.stddev, size)

    def kernel_value(self, x, xp):
        d = np.asarray(x, dtype=float) - np.asarray(xp, dtype=float)
        return math.exp(-0.5 * self.stddev ** 2 * float(np.sum(d * d)))


FREQUENCY_LAWS = (TensorCauchy, IsotropicNormal)


@dataclass(frozen=True)
class FeatureMapConfig:
    """What to build: map kind, source kernel/frequency law, sizes, seed.

    hash_buckets (binning only) replaces the exact bin vocabulary with a
    stable 64-bit hash modulo that many columns; colliding bins then share
    a column, which biases inner products upward. Off by default.
    """

    kind: str
    kernel: object
    dim: int
    copies: int
    seed: int
    hash_buckets: int = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not (isinstance(self.copies, int) and self.copies >= 1):
            raise ValueError(f"copies must be an integer >= 1, got {self.copies!r}")
        if not (isinstance(self.dim, int) and self.dim >= 1):
            raise ValueError(f"dim must be an integer >= 1, got {self.dim!r}")
        if self.kind == BINNING:
            if not isinstance(self.kernel, KernelSpec):
                raise ValueError("binning requires a KernelSpec kernel")
        else:
            if not isinstance(self.kernel, FREQUENCY_LAWS):
                raise ValueError(
                    "Fourier maps require a TensorCauchy or IsotropicNormal law"
                )
        if self.hash_buckets is not None:
            if self.kind != BINNING:
                raise ValueError("hash_buckets applies to the binning map only")
            if not (isinstance(self.hash_buckets, int) and self.hash_buckets >= 2):
                raise ValueError(
                    f"hash_buckets must be an integer >= 2, got {self.hash_buckets!r}"
                )


@dataclass(frozen=True)
class FourierMapState:
    cfg: FeatureMapConfig
    frequencies: np.ndarray  # copies x dim
    offsets: np.ndarray  # copies, in [0, 2*pi); None for the complex map


@dataclass(frozen=True)
class BinningMapState:
    cfg: FeatureMapConfig
    spacings: np.ndarray  # copies x dim, positive
    offsets: np.ndarray  # copies x dim, 0 <= offset < spacing
    vocabulary: dict = field(default_factory=dict)  # (copy, bin tuple) -> column


@dataclass(frozen=True)
class FeatureBatch:
    """Featurized points: a dense copies x n matrix for Fourier kinds, or
    per-copy column indices plus the column-space width for binning."""

    kind: str
    n: int
    copies: int
    data: np.ndarray = None  # fourier kinds
    indices: np.ndarray = None  # binning: copies x n int64
    width: int = 0  # binning: number of feature columns


def build_map(cfg):
    """Draw the random grid/frequencies for every copy, deterministically."""
    root = RandomStream(cfg.seed)
    if cfg.kind == BINNING:
        spec = cfg.kernel
        spacings = np.empty((cfg.copies, cfg.dim))
        offsets = np.empty((cfg.copies, cfg.dim))
        for l in range(cfg.copies):
            child = root.child(l)
            spacings[l] = spec.dist.sample_many(child, cfg.dim) / spec.rho
            offsets[l] = child.uniform(cfg.dim) * spacings[l]
        return BinningMapState(cfg=cfg, spacings=spacings, offsets=offsets)
    frequencies = np.empty((cfg.copies, cfg.dim))
    offsets = np.empty(cfg.copies) if cfg.kind == FOURIER_REAL else None
    for l in range(cfg.copies):
        child = root.child(l)
        frequencies[l] = cfg.kernel.sample(child, cfg.dim)
        if offsets is not None:
            offsets[l] = 2.0 * math.pi * child.uniform(1)[0]
    return FourierMapState(cfg=cfg, frequencies=frequencies, offsets=offsets)


def _check_points(state, X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != state.cfg.dim:
        raise ValueError(
            f"points must be n x {state.cfg.dim}, got array of shape {X.shape}"
        )
    return X


def _stable_bucket(copy, bins, buckets):
    payload = repr((copy, bins)).encode()
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little") % buckets


def featurize(state, X):
    """Map points to features. For binning, unseen bin tuples extend the
    vocabulary (at train or test time alike); inner products against
    columns absent from another batch are zero either way."""
    X = _check_points(state, X)
    n = X.shape[0]
    cfg = state.cfg
    d_sqrt = math.sqrt(cfg.copies)
    if cfg.kind == FOURIER_COMPLEX:
        phases = state.frequencies @ X.T
        return FeatureBatch(
            kind=cfg.kind, n=n, copies=cfg.copies, data=np.exp(1j * phases) / d_sqrt
        )
    if cfg.kind == FOURIER_REAL:
        phases = state.frequencies @ X.T + state.offsets[:, None]
        scale = math.sqrt(2.0 / cfg.copies)
        return FeatureBatch(
            kind=cfg.kind, n=n, copies=cfg.copies, data=scale * np.cos(phases)
        )
    bins = np.floor(
        (X[None, :, :] - state.offsets[:, None, :]) / state.spacings[:, None, :]
    ).astype(np.int64)
    indices = np.empty((cfg.copies, n), dtype=np.int64)
    if cfg.hash_buckets is not None:
        for l in range(cfg.copies):
            for i in range(n):
                indices[l, i] = _stable_bucket(
                    l, tuple(bins[l, i].tolist()), cfg.hash_buckets
                )
        width = cfg.hash_buckets
    else:
        vocab = state.vocabulary
        for l in range(cfg.copies):
            for i in range(n):
                key = (l, tuple(bins[l, i].tolist()))
                idx = vocab.get(key)
                if idx is None:
                    idx = len(vocab)
                    vocab[key] = idx
                indices[l, i] = idx
        width = len(vocab)
    return FeatureBatch(
        kind=cfg.kind, n=n, copies=cfg.copies, indices=indices, width=width
    )


def to_sparse(batch):
    """Binning batch as a sparse width x n matrix with entries 1/sqrt(D)."""
    if batch.kind != BINNING:
        raise ValueError("to_sparse applies to binning batches only")
    n, copies = batch.n, batch.copies
    cols = np.repeat(np.arange(n), copies)
    rows = batch.indices.T.reshape(-1)
    vals = np.full(n * copies, 1.0 / math.sqrt(copies))
    return sp.csr_matrix((vals, (rows, cols)), shape=(batch.width, n))


def gram(batch):
    """Approximate kernel matrix Z^T Z (real part for the complex map)."""
    if batch.kind == FOURIER_COMPLEX:
        return (batch.data.conj().T @ batch.data).real
    if batch.kind == FOURIER_REAL:
        return batch.data.T @ batch.data
    eq = batch.indices[:, :, None] == batch.indices[:, None, :]
    return eq.sum(axis=0) / float(batch.copies)


def complex_gram(batch):
    """The full Hermitian Gram matrix of a complex-map batch, imaginary
    part included; this is the matrix the error expectations describe."""
    if batch.kind != FOURIER_COMPLEX:
        raise ValueError("complex_gram applies to complex Fourier batches only")
    return batch.data.conj().T @ batch.data


def per_copy_inner_products(state, x, xp):
    """The D single-copy kernel estimates for one pair of points.

    Complex Fourier copies are complex numbers of unit modulus; real Fourier
    copies are 2 cos(wx+b) cos(wx'+b); binning copies are 0/1 indicators.
    """
    X = _check_points(state, np.vstack([np.atleast_1d(x), np.atleast_1d(xp)]))
    cfg = state.cfg
    if cfg.kind == FOURIER_COMPLEX:
        delta = X[1] - X[0]
        return np.exp(1j * (state.frequencies @ delta))
    if cfg.kind == FOURIER_REAL:
        phases = state.frequencies @ X.T + state.offsets[:, None]
        c = np.cos(phases)
        return 2.0 * c[:, 0] * c[:, 1]
    bins = np.floor(
        (X[None, :, :] - state.offsets[:, None, :]) / state.spacings[:, None, :]
    ).astype(np.int64)
    return np.all(bins[:, 0, :] == bins[:, 1, :], axis=1).astype(float)


def variance_theory(kind, k_value, k_2r_value=None):
    """Per-copy variance of the kernel estimate at a pair with kernel value
    k_value (and value k_2r_value at the doubled difference, real map only)."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    k = float(k_value)
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"kernel value must lie in [0, 1], got {k}")
    if kind == FOURIER_COMPLEX:
        return 1.0 - k * k
    if kind == BINNING:
        return k - k * k
    if k_2r_value is None:
        raise ValueError("the real Fourier variance needs the kernel at 2r")
    return 1.0 + 0.5 * float(k_2r_value) - k * k
