import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from planesearch.kernels import (
    HyperPrior,
    KernelHyperparams,
    kernel,
    kernel_cross,
    kernel_matrix,
    kernel_matrix_with_grads,
)
from planesearch.rng import stream


def hp(amplitude=1.0, scales=(1.0, 1.0)):
    return KernelHyperparams(amplitude, np.asarray(scales))


class TestKernelValues:
    def test_same_point_returns_amplitude_exactly(self):
        h = hp(amplitude=0.7, scales=(0.3, 2.0, 1.1))
        x = np.array([0.2, 0.4, 0.9])
        assert kernel(x, x, h) == 0.7

    def test_unit_distance_closed_form(self):
        # (1 + sqrt5 + 5/3) * exp(-sqrt5), evaluated with 40-digit arithmetic
        h = hp()
        val = kernel(np.array([0.0, 0.0]), np.array([1.0, 0.0]), h)
        assert val == pytest.approx(0.5239941088318203, abs=1e-15)

    def test_symmetry(self):
        rng = stream(0, 1)
        h = hp(amplitude=0.4, scales=(0.5, 1.5, 0.7, 1.0))
        for _ in range(20):
            x, y = rng.uniform(0, 1, 4), rng.uniform(0, 1, 4)
            assert kernel(x, y, h) == pytest.approx(kernel(y, x, h), rel=1e-15)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            kernel(np.zeros(2), np.zeros(3), hp())
        with pytest.raises(ValueError):
            kernel(np.zeros(3), np.zeros(3), hp())

    @given(st.floats(0.01, 0.99), st.floats(0.05, 2.0))
    def test_monotone_decay_in_single_coordinate(self, start, step):
        h = hp(scales=(0.5, 0.5))
        x = np.array([start, 0.5])
        near = np.array([start + step, 0.5])
        far = np.array([start + 2 * step, 0.5])
        assert kernel(x, near, h) > kernel(x, far, h)

    def test_values_in_zero_amplitude_interval(self):
        rng = stream(0, 2)
        h = hp(amplitude=0.25, scales=(0.5,) * 6)
        X = rng.uniform(0, 1, (30, 6))
        K = kernel_cross(X, X, h)
        assert np.all(K > 0)
        assert np.all(K <= 0.25 + 1e-15)


class TestGramMatrices:
    @pytest.mark.parametrize("n,count", [(2, 40), (7, 80), (20, 100)])
    def test_jittered_factorization_exists(self, n, count):
        rng = stream(n, 3)
        h = KernelHyperparams(0.2, rng.uniform(0.2, 1.5, n))
        X = rng.uniform(0, 1, (count, n))
        K = kernel_matrix(X, h)
        L = np.linalg.cholesky(K + 1e-8 * h.amplitude * np.eye(count))
        assert np.all(np.isfinite(L))

    def test_gradient_matches_finite_differences(self):
        rng = stream(4, 4)
        n = 3
        X = rng.uniform(0, 1, (6, n))
        h = KernelHyperparams(0.5, np.array([0.4, 0.8, 1.2]))
        _, dK = kernel_matrix_with_grads(X, h)
        eps = 1e-6
        for k in range(n):
            up = h.length_scales.copy()
            up[k] *= np.exp(eps)
            dn = h.length_scales.copy()
            dn[k] *= np.exp(-eps)
            fd = (
                kernel_matrix(X, KernelHyperparams(0.5, up))
                - kernel_matrix(X, KernelHyperparams(0.5, dn))
            ) / (2 * eps)
            assert np.max(np.abs(fd - dK[k])) < 1e-8


class TestHyperPrior:
    def test_defaults(self):
        prior = HyperPrior()
        assert prior.median_amplitude == 0.2
        assert prior.median_length_scale == 0.5
        assert prior.log_variance == 0.01

    def test_log_density_peaks_at_median(self):
        prior = HyperPrior()
        at_median = prior.log_density(0.2, 0.2)
        assert at_median > prior.log_density(0.3, 0.2)
        assert at_median > prior.log_density(0.15, 0.2)

    def test_gradient_matches_finite_differences(self):
        prior = HyperPrior()
        for value in (0.1, 0.2, 0.7):
            eps = 1e-7
            fd = (
                prior.log_density(value * np.exp(eps), 0.2)
                - prior.log_density(value * np.exp(-eps), 0.2)
            ) / (2 * eps)
            assert prior.log_density_grad_wrt_log(value, 0.2) == pytest.approx(fd, abs=1e-6)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            HyperPrior(median_amplitude=0.0)
        with pytest.raises(ValueError):
            KernelHyperparams(1.0, np.array([1.0, -0.1]))
