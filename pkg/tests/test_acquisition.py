import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from planesearch import (
    AcquisitionConfig,
    Dataset,
    KernelHyperparams,
    Plane,
    SearchSpace,
    build_model,
    ei_closed_form,
    expected_improvement,
    map_fit,
    maximize_ei,
    plane_acquisition,
    posterior,
)
from planesearch.acquisition import ei_values, lattice_local_coords
from planesearch.optim import fd_gradient
from planesearch.prefgp import best_point
from planesearch.rng import stream
from planesearch.subspace import plane_points

from conftest import random_dataset

PHI0 = 0.3989422804014327  # standard normal density at 0


def single_point_model(amplitude=1.0):
    ds = Dataset(SearchSpace(2))
    ds.add_point([0.5, 0.5])
    h = KernelHyperparams(amplitude, np.array([0.5, 0.5]))
    return build_model(ds, h, np.array([0.0]))


class TestClosedForm:
    def test_zero_gamma_reduces_to_density(self):
        assert ei_closed_form(0.3, 1.0, 0.3) == pytest.approx(PHI0, abs=1e-12)

    def test_gamma_two(self):
        # 2 Phi(2) + phi(2), from 40-digit arithmetic
        assert ei_closed_form(2.0, 1.0, 0.0) == pytest.approx(2.0084907026168296, abs=1e-12)

    def test_zero_sigma_is_zero(self):
        assert ei_closed_form(5.0, 0.0, 0.0) == 0.0

    @given(
        st.floats(-3, 3),
        st.floats(-3, 3),
        st.floats(0.01, 2.0),
        st.floats(0.01, 2.0),
    )
    def test_nondecreasing_in_sigma(self, mu, mu_best, s1, s2):
        lo, hi = sorted((s1, s2))
        assert ei_closed_form(mu, hi, mu_best) >= ei_closed_form(mu, lo, mu_best) - 1e-12

    @given(st.floats(-50, 50), st.floats(0, 5), st.floats(-50, 50))
    def test_never_negative(self, mu, sigma, mu_best):
        assert ei_closed_form(mu, sigma, mu_best) >= 0.0


class TestExpectedImprovement:
    def test_zero_at_observed_points(self):
        model = map_fit(random_dataset(21, 2), jitter=1e-10)
        x_plus = best_point(model)
        for p in model.points:
            assert expected_improvement(model, p, x_plus) <= 1e-8

    def test_zero_at_observed_points_with_default_jitter(self):
        model = map_fit(random_dataset(22, 3))
        x_plus = best_point(model)
        for p in model.points:
            assert expected_improvement(model, p, x_plus) <= 1e-8

    def test_nonnegative_everywhere(self, model_5d):
        rng = stream(1, 70)
        X = rng.uniform(0, 1, (300, 5))
        x_plus = best_point(model_5d)
        mu_best, _ = posterior(model_5d, x_plus)
        assert np.all(ei_values(model_5d, X, mu_best) >= 0)

    def test_internal_gradient_matches_fourth_order_oracle(self, model_5d):
        x_plus = best_point(model_5d)
        mu_best, _ = posterior(model_5d, x_plus)
        f = lambda X: ei_values(model_5d, X, mu_best)
        rng = stream(2, 71)
        checked = 0
        for _ in range(20):
            x = rng.uniform(0.1, 0.9, 5)
            g2 = fd_gradient(f, x, 1e-5)
            h = 1e-3
            g4 = np.empty(5)
            for k in range(5):
                e = np.zeros(5)
                e[k] = 1.0
                vals = f(np.vstack([x + 2 * h * e, x + h * e, x - h * e, x - 2 * h * e]))
                g4[k] = (-vals[0] + 8 * vals[1] - 8 * vals[2] + vals[3]) / (12 * h)
            if np.max(np.abs(g4)) < 1e-8:
                continue
            checked += 1
            assert np.max(np.abs(g2 - g4)) / np.max(np.abs(g4)) < 1e-4
        assert checked >= 5


class TestMaximizeEi:
    def test_beats_random_probes(self):
        model = single_point_model(amplitude=1.0)
        config = AcquisitionConfig()
        best = maximize_ei(model, config, stream(3, 72))
        x_plus = best_point(model)
        best_ei = expected_improvement(model, best, x_plus)
        rng = stream(4, 73)
        probes = rng.uniform(0, 1, (1000, 2))
        mu_best, _ = posterior(model, x_plus)
        assert best_ei >= np.max(ei_values(model, probes, mu_best)) - 1e-12

    def test_result_inside_space(self, model_5d):
        for seed in range(5):
            x = maximize_ei(model_5d, AcquisitionConfig(restarts=3), stream(seed, 74))
            assert np.all(x >= 0) and np.all(x <= 1)

    def test_deterministic_under_record_relabeling(self):
        ds1 = random_dataset(31, 2, points=6, records=4)
        ds2 = Dataset(SearchSpace(2))
        for p in ds1.points:
            ds2.add_point(p)
        for r in reversed(ds1.records):
            ds2.add_record(r.winner, r.losers)
        m1, m2 = map_fit(ds1), map_fit(ds2)
        x1 = maximize_ei(m1, AcquisitionConfig(restarts=4), stream(9, 75))
        x2 = maximize_ei(m2, AcquisitionConfig(restarts=4), stream(9, 75))
        assert np.array_equal(x1, x2)


class TestPlaneAcquisition:
    def test_degenerate_plane_equals_center_ei(self, small_model):
        c = best_point(small_model)
        plane = Plane(c, np.zeros(2), np.zeros(2))
        config = AcquisitionConfig()
        val = plane_acquisition(small_model, plane, c, config)
        assert val == pytest.approx(expected_improvement(small_model, c, c), abs=1e-15)

    def test_equals_mean_of_lattice_ei(self, model_5d):
        rng = stream(5, 76)
        c = rng.uniform(0.3, 0.7, 5)
        u = rng.uniform(-0.2, 0.2, 5)
        v = rng.uniform(-0.2, 0.2, 5)
        v -= (u @ v) / (u @ u) * u
        plane = Plane(c, u, v, neg_u_scale=0.8, neg_v_scale=0.9)
        config = AcquisitionConfig()
        x_plus = best_point(model_5d)

        total = 0.0
        count = 0
        for s, t in lattice_local_coords(config.lattice_side):
            p = plane_points(plane, np.array([[s, t]]))[0]
            p = np.clip(p, 0.0, 1.0)
            total += expected_improvement(model_5d, p, x_plus)
            count += 1
        assert count == config.lattice_side**2
        val = plane_acquisition(model_5d, plane, x_plus, config)
        assert val == pytest.approx(total / count, rel=1e-12)

    def test_plane_far_from_data_scores_higher(self):
        # two symmetric observations in a corner leave the far corner unexplored
        ds = Dataset(SearchSpace(2))
        a = ds.add_point([0.1, 0.1])
        b = ds.add_point([0.2, 0.2])
        ds.add_record(a, [b])
        model = map_fit(ds)
        x_plus = best_point(model)
        config = AcquisitionConfig()
        d = np.array([0.1, 0.0])
        e = np.array([0.0, 0.1])
        near = Plane(model.points[0], d, e)
        far = Plane(np.array([0.8, 0.8]), d, e)
        assert plane_acquisition(model, far, x_plus, config) > plane_acquisition(
            model, near, x_plus, config
        )

    def test_lattice_side_must_be_odd(self):
        with pytest.raises(ValueError):
            AcquisitionConfig(lattice_side=4)
