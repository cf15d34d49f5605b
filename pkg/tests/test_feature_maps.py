"""Tests for random Fourier and random binning feature maps.

The binning geometry and both unbiasedness/variance identities are checked
against Monte Carlo with seeded streams; tolerances are stated in standard
errors or relative terms.
"""

import math

import numpy as np
import pytest

from polyakern import distributions as dist
from polyakern import feature_maps as fm
from polyakern.polya_kernels import KernelSpec, eval_kernel

LAPLACE_SPEC = KernelSpec(dist.Gamma(2.0, 1.0))  # kernel exp(-|r|)
CAUCHY_LAW = fm.TensorCauchy(1.0)  # frequencies for the same kernel


def cfg(kind, copies, seed=77, dim=1, kernel=None, hash_buckets=None):
    if kernel is None:
        kernel = LAPLACE_SPEC if kind == fm.BINNING else CAUCHY_LAW
    return fm.FeatureMapConfig(
        kind=kind, kernel=kernel, dim=dim, copies=copies, seed=seed,
        hash_buckets=hash_buckets,
    )


class TestConfig:
    def test_rejects_bad_kind(self):
        with pytest.raises(ValueError):
            cfg("fourier", 4)

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            cfg(fm.BINNING, 0)
        with pytest.raises(ValueError):
            cfg(fm.BINNING, 4, dim=0)

    def test_binning_needs_kernel_spec(self):
        with pytest.raises(ValueError):
            cfg(fm.BINNING, 4, kernel=CAUCHY_LAW)

    def test_fourier_needs_frequency_law(self):
        with pytest.raises(ValueError):
            cfg(fm.FOURIER_REAL, 4, kernel=LAPLACE_SPEC)

    def test_hashing_only_for_binning(self):
        with pytest.raises(ValueError):
            cfg(fm.FOURIER_REAL, 4, hash_buckets=64)
        with pytest.raises(ValueError):
            cfg(fm.BINNING, 4, hash_buckets=1)

    def test_law_validation(self):
        with pytest.raises(ValueError):
            fm.TensorCauchy(0.0)
        with pytest.raises(ValueError):
            fm.IsotropicNormal(-1.0)


class TestFrequencyLaws:
    def test_tensor_cauchy_kernel(self):
        law = fm.TensorCauchy(2.0)
        x = np.array([0.0, 1.0])
        xp = np.array([1.0, -0.5])
        assert law.kernel_value(x, xp) == pytest.approx(math.exp(-2.0 * 2.5), rel=1e-12)

    def test_isotropic_normal_kernel(self):
        law = fm.IsotropicNormal(0.5)
        x = np.array([0.0, 0.0])
        xp = np.array([1.0, 2.0])
        assert law.kernel_value(x, xp) == pytest.approx(
            math.exp(-0.25 * 5.0 / 2.0), rel=1e-12
        )


class TestBuildMap:
    def test_deterministic(self):
        for kind in (fm.FOURIER_COMPLEX, fm.FOURIER_REAL, fm.BINNING):
            a = fm.build_map(cfg(kind, 5, dim=3))
            b = fm.build_map(cfg(kind, 5, dim=3))
            if kind == fm.BINNING:
                assert np.array_equal(a.spacings, b.spacings)
                assert np.array_equal(a.offsets, b.offsets)
            else:
                assert np.array_equal(a.frequencies, b.frequencies)

    def test_copy_prefix_stable_in_d(self):
        small = fm.build_map(cfg(fm.BINNING, 3, dim=2))
        large = fm.build_map(cfg(fm.BINNING, 8, dim=2))
        assert np.array_equal(large.spacings[:3], small.spacings)
        assert np.array_equal(large.offsets[:3], small.offsets)
        fs = fm.build_map(cfg(fm.FOURIER_REAL, 3, dim=2))
        fl = fm.build_map(cfg(fm.FOURIER_REAL, 8, dim=2))
        assert np.array_equal(fl.frequencies[:3], fs.frequencies)

    def test_shapes_and_ranges(self):
        st = fm.build_map(cfg(fm.BINNING, 4, dim=2))
        assert st.spacings.shape == (4, 2) and st.offsets.shape == (4, 2)
        assert np.all(st.spacings > 0)
        assert np.all(st.offsets >= 0) and np.all(st.offsets < st.spacings)
        assert st.vocabulary == {}
        fr = fm.build_map(cfg(fm.FOURIER_REAL, 4, dim=2))
        assert fr.frequencies.shape == (4, 2)
        assert fr.offsets.shape == (4,)
        assert np.all(fr.offsets >= 0) and np.all(fr.offsets < 2 * math.pi)
        fc = fm.build_map(cfg(fm.FOURIER_COMPLEX, 4, dim=2))
        assert fc.offsets is None

    def test_binning_spacings_follow_scaled_law(self):
        # with rho = 2 every spacing is half of a draw from the raw law;
        # the mean over many copies reflects mean / rho
        spec = KernelSpec(dist.Gamma(2.0, 1.0), rho=2.0)
        st = fm.build_map(cfg(fm.BINNING, 4000, kernel=spec))
        assert st.spacings.mean() == pytest.approx(2.0 / 2.0, rel=0.05)


class TestFeaturize:
    def test_complex_self_inner_product(self):
        state = fm.build_map(cfg(fm.FOURIER_COMPLEX, 7, dim=2))
        X = np.array([[0.3, -1.2]])
        batch = fm.featurize(state, X)
        g = fm.gram(batch)
        assert g[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_real_entry_bounds(self):
        state = fm.build_map(cfg(fm.FOURIER_REAL, 9, dim=2))
        X = np.random.default_rng(3).normal(size=(20, 2))
        batch = fm.featurize(state, X)
        bound = math.sqrt(2.0 / 9) + 1e-12
        assert np.all(np.abs(batch.data) <= bound)

    def test_binning_identical_points(self):
        state = fm.build_map(cfg(fm.BINNING, 6, dim=2))
        X = np.array([[0.5, 0.5], [0.5, 0.5]])
        batch = fm.featurize(state, X)
        assert np.array_equal(batch.indices[:, 0], batch.indices[:, 1])
        assert fm.gram(batch)[0, 1] == 1.0

    def test_binning_sparse_structure(self):
        state = fm.build_map(cfg(fm.BINNING, 5, dim=1))
        X = np.linspace(-1, 1, 7).reshape(-1, 1)
        batch = fm.featurize(state, X)
        Z = fm.to_sparse(batch)
        assert Z.shape == (batch.width, 7)
        percol = np.diff(Z.tocsc().indptr)
        assert np.all(percol == 5)
        assert np.allclose(Z.data, 1.0 / math.sqrt(5.0))

    def test_dimension_mismatch(self):
        state = fm.build_map(cfg(fm.FOURIER_REAL, 3, dim=2))
        with pytest.raises(ValueError):
            fm.featurize(state, np.zeros((4, 3)))

    def test_bit_identical_across_runs(self):
        X = np.random.default_rng(5).normal(size=(11, 2))
        for kind in (fm.FOURIER_COMPLEX, fm.FOURIER_REAL, fm.BINNING):
            a = fm.featurize(fm.build_map(cfg(kind, 4, dim=2)), X)
            b = fm.featurize(fm.build_map(cfg(kind, 4, dim=2)), X)
            if kind == fm.BINNING:
                assert np.array_equal(a.indices, b.indices)
            else:
                assert np.array_equal(a.data, b.data)

    def test_vocabulary_grows_at_test_time(self):
        state = fm.build_map(cfg(fm.BINNING, 3, dim=1))
        train = fm.featurize(state, np.array([[0.0], [0.1]]))
        size_after_train = len(state.vocabulary)
        test = fm.featurize(state, np.array([[500.0]]))
        assert len(state.vocabulary) > size_after_train
        assert test.width == len(state.vocabulary)
        # far-away point shares no bins: inner products with train are zero
        assert not np.any(test.indices[:, 0:1] == train.indices)

    def test_vocabulary_order_deterministic(self):
        X = np.random.default_rng(9).uniform(-1, 1, size=(30, 2))
        s1 = fm.build_map(cfg(fm.BINNING, 4, dim=2))
        s2 = fm.build_map(cfg(fm.BINNING, 4, dim=2))
        fm.featurize(s1, X)
        fm.featurize(s2, X)
        assert list(s1.vocabulary.items()) == list(s2.vocabulary.items())


class TestGram:
    def test_symmetric_and_diagonals(self):
        X = np.random.default_rng(11).normal(size=(12, 2))
        gc = fm.gram(fm.featurize(fm.build_map(cfg(fm.FOURIER_COMPLEX, 8, dim=2)), X))
        gr = fm.gram(fm.featurize(fm.build_map(cfg(fm.FOURIER_REAL, 8, dim=2)), X))
        gb = fm.gram(fm.featurize(fm.build_map(cfg(fm.BINNING, 8, dim=2)), X))
        for g in (gc, gr, gb):
            assert np.allclose(g, g.T)
            assert g.dtype == np.float64
        assert np.allclose(np.diag(gc), 1.0, atol=1e-12)
        assert np.array_equal(np.diag(gb), np.ones(12))
        assert np.all(np.diag(gr) >= 0.0) and np.all(np.diag(gr) <= 2.0)

    def test_single_point_binning(self):
        batch = fm.featurize(fm.build_map(cfg(fm.BINNING, 4, dim=1)), np.zeros((1, 1)))
        assert fm.gram(batch).tolist() == [[1.0]]

    def test_gram_is_average_of_copies(self):
        X = np.random.default_rng(13).normal(size=(5, 1))
        state = fm.build_map(cfg(fm.BINNING, 6, dim=1))
        batch = fm.featurize(state, X)
        g = fm.gram(batch)
        per_copy = (batch.indices[:, :, None] == batch.indices[:, None, :]).astype(float)
        assert np.allclose(g, per_copy.mean(axis=0))

    def test_unbiased_entry(self):
        # mean of the approximate entry over many independent copies lands
        # within four standard errors of the kernel value
        r = 0.8
        x = np.array([0.0])
        xp = np.array([r])
        copies = 10 ** 4
        k_true = math.exp(-r)
        for kind in (fm.FOURIER_COMPLEX, fm.FOURIER_REAL, fm.BINNING):
            state = fm.build_map(cfg(kind, copies, seed=2024))
            samples = fm.per_copy_inner_products(state, x, xp)
            mean = float(np.mean(np.real(samples)))
            se = float(np.std(np.real(samples), ddof=1)) / math.sqrt(copies)
            assert abs(mean - k_true) <= 4.0 * se, kind


class TestBinGeometry:
    def test_same_bin_probability(self):
        # fixed spacing w, offset uniform on (0, w): two points at distance r
        # share a bin with probability max{0, 1 - r/w}
        copies = 10 ** 5
        rng = np.random.default_rng(404)
        for w, r in [(1.5, 0.5), (1.5, 1.0), (0.5, 0.7), (2.0, 0.2)]:
            c = cfg(fm.BINNING, copies)
            spacings = np.full((copies, 1), w)
            offsets = rng.uniform(0.0, w, size=(copies, 1))
            state = fm.BinningMapState(
                cfg=c, spacings=spacings, offsets=offsets, vocabulary={}
            )
            batch = fm.featurize(state, np.array([[0.0], [r]]))
            hits = float(np.mean(batch.indices[:, 0] == batch.indices[:, 1]))
            p = max(0.0, 1.0 - r / w)
            sigma = math.sqrt(max(p * (1 - p), 1e-12) / copies)
            assert abs(hits - p) <= max(3.0 * sigma, 1e-9), (w, r)


class TestVarianceTheory:
    def test_frozen_values(self):
        assert fm.variance_theory(fm.BINNING, 0.5) == pytest.approx(0.25)
        assert fm.variance_theory(fm.FOURIER_COMPLEX, 1.0) == 0.0
        got = fm.variance_theory(fm.FOURIER_REAL, math.exp(-1), math.exp(-2))
        assert got == pytest.approx(1.0 - math.exp(-2) / 2.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            fm.variance_theory(fm.FOURIER_REAL, 0.5)  # missing k(2r)
        with pytest.raises(ValueError):
            fm.variance_theory(fm.BINNING, 1.5)
        with pytest.raises(ValueError):
            fm.variance_theory("nope", 0.5)

    def test_empirical_variance_matches(self):
        r = 1.0
        x = np.array([0.0])
        xp = np.array([r])
        copies = 10 ** 5
        k = math.exp(-r)
        k2 = math.exp(-2 * r)
        for kind in (fm.FOURIER_COMPLEX, fm.FOURIER_REAL, fm.BINNING):
            state = fm.build_map(cfg(kind, copies, seed=515))
            samples = fm.per_copy_inner_products(state, x, xp)
            emp = float(np.var(samples))
            theory = fm.variance_theory(kind, k, k2)
            assert emp == pytest.approx(theory, rel=0.05), kind

    def test_binning_samples_are_bernoulli(self):
        state = fm.build_map(cfg(fm.BINNING, 2000, seed=21))
        samples = fm.per_copy_inner_products(state, np.array([0.2]), np.array([0.9]))
        assert set(np.unique(samples)).issubset({0.0, 1.0})

    def test_averaging_divides_variance(self):
        copies = 32000
        state = fm.build_map(cfg(fm.BINNING, copies, seed=929))
        samples = fm.per_copy_inner_products(state, np.array([0.0]), np.array([1.0]))
        base = float(np.var(samples))
        for d in (4, 16):
            means = samples.reshape(-1, d).mean(axis=1)
            assert float(np.var(means)) == pytest.approx(base / d, rel=0.10), d


class TestHashedVariant:
    def test_deterministic_and_bounded(self):
        X = np.random.default_rng(6).uniform(-1, 1, size=(9, 2))
        a = fm.featurize(fm.build_map(cfg(fm.BINNING, 4, dim=2, hash_buckets=128)), X)
        b = fm.featurize(fm.build_map(cfg(fm.BINNING, 4, dim=2, hash_buckets=128)), X)
        assert np.array_equal(a.indices, b.indices)
        assert a.width == 128
        assert np.all(a.indices >= 0) and np.all(a.indices < 128)

    def test_matches_exact_without_collisions(self):
        X = np.random.default_rng(8).uniform(-1, 1, size=(6, 1))
        exact = fm.featurize(fm.build_map(cfg(fm.BINNING, 4, seed=31)), X)
        hashed = fm.featurize(
            fm.build_map(cfg(fm.BINNING, 4, seed=31, hash_buckets=1 << 20)), X
        )
        assert np.array_equal(fm.gram(exact), fm.gram(hashed))
