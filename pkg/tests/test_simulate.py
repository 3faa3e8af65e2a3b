"""Generator tests: determinism, sparsity structure, and family moments."""

import math

import numpy as np
import pytest

from countewa.simulate import (
    TrueModel,
    draw_response,
    draw_theta_star,
    gen_design,
    gen_response,
    gen_theta_star,
)


class TestTrueModel:
    def test_counts_nonzeros(self):
        model = TrueModel(np.array([1.0, 0.0, 1.0]))
        assert model.s_star == 2
        assert model.d == 3

    def test_rejects_s_star_mismatch(self):
        with pytest.raises(ValueError):
            TrueModel(np.array([1.0, 0.0]), s_star=2)

    def test_rejects_bad_family(self):
        with pytest.raises(ValueError):
            TrueModel(np.array([1.0]), family="gaussian")

    def test_negbin_needs_alpha(self):
        with pytest.raises(ValueError):
            TrueModel(np.array([1.0]), family="negbin")
        with pytest.raises(ValueError):
            TrueModel(np.array([1.0]), family="negbin", alpha=-1.0)

    def test_alpha_rejected_for_poisson(self):
        with pytest.raises(ValueError):
            TrueModel(np.array([1.0]), alpha=2.0)


class TestThetaStar:
    def test_structure(self):
        theta = gen_theta_star(50, 7, seed=3)
        assert theta.shape == (50,)
        assert np.count_nonzero(theta) == 7
        nonzero = theta[theta != 0]
        assert np.all(np.abs(nonzero) <= 0.5)

    def test_nonzero_entry_moments(self):
        # nonzero entries are iid Uniform[-0.5, 0.5]: mean 0, variance 1/12
        rng = np.random.default_rng(5)
        values = np.concatenate(
            [draw_theta_star(10, 10, rng) for _ in range(10_000)]
        )
        m = values.size
        se_mean = math.sqrt(1.0 / 12.0 / m)
        assert abs(values.mean()) <= 3.0 * se_mean
        # var of the sample variance of U(-0.5, 0.5): (mu4 - sigma^4) / m
        mu4 = 0.5**4 / 5.0
        se_var = math.sqrt((mu4 - (1.0 / 12.0) ** 2) / m)
        assert abs(values.var() - 1.0 / 12.0) <= 3.0 * se_var

    def test_deterministic(self):
        assert np.array_equal(gen_theta_star(30, 5, 11), gen_theta_star(30, 5, 11))
        assert not np.array_equal(gen_theta_star(30, 5, 11), gen_theta_star(30, 5, 12))

    def test_support_varies_with_seed(self):
        supports = {tuple(np.nonzero(gen_theta_star(40, 4, s))[0]) for s in range(20)}
        assert len(supports) > 1

    def test_edge_sparsities(self):
        assert np.count_nonzero(gen_theta_star(5, 0, 0)) == 0
        assert np.count_nonzero(gen_theta_star(5, 5, 0)) == 5

    def test_rejects_bad_sparsity(self):
        with pytest.raises(ValueError):
            gen_theta_star(5, 6, 0)
        with pytest.raises(ValueError):
            gen_theta_star(5, -1, 0)


class TestDesign:
    def test_shape_and_determinism(self):
        x = gen_design(20, 7, seed=5)
        assert x.shape == (20, 7)
        assert np.array_equal(x, gen_design(20, 7, seed=5))

    def test_moments(self):
        x = gen_design(2000, 50, seed=1)
        assert abs(x.mean()) < 0.01
        assert abs(x.std() - 1.0) < 0.01


class TestResponse:
    def test_deterministic_and_integer(self):
        model = TrueModel(gen_theta_star(10, 3, 0))
        x = gen_design(200, 10, seed=1)
        y = gen_response(x, model, seed=2)
        assert y.dtype == np.int64
        assert np.all(y >= 0)
        assert np.array_equal(y, gen_response(x, model, seed=2))

    def test_dimension_check(self):
        model = TrueModel(np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            gen_response(np.ones((5, 3)), model, seed=0)

    def test_poisson_moments(self):
        # constant design, mu = exp(log 3) = 3: mean 3, variance 3
        m = 300_000
        model = TrueModel(np.array([math.log(3.0)]))
        y = gen_response(np.ones((m, 1)), model, seed=4)
        se_mean = y.std(ddof=1) / math.sqrt(m)
        assert abs(y.mean() - 3.0) < 4 * se_mean
        assert abs(y.var(ddof=1) - 3.0) < 0.1

    def test_negbin_moments(self):
        # mu = 3, alpha = 2: mean 3, variance 3 + 9/2 = 7.5
        m = 300_000
        model = TrueModel(np.array([math.log(3.0)]), family="negbin", alpha=2.0)
        y = gen_response(np.ones((m, 1)), model, seed=4).astype(np.float64)
        se_mean = y.std(ddof=1) / math.sqrt(m)
        assert abs(y.mean() - 3.0) < 4 * se_mean
        var = y.var(ddof=1)
        centered = (y - y.mean()) ** 2
        se_var = centered.std(ddof=1) / math.sqrt(m)
        assert abs(var - 7.5) < 4 * se_var

    def test_negbin_overdisperses_poisson(self):
        m = 100_000
        x = np.ones((m, 1))
        poisson = gen_response(x, TrueModel(np.array([1.0])), seed=8)
        negbin = gen_response(
            x, TrueModel(np.array([1.0]), family="negbin", alpha=2.0), seed=8
        )
        assert negbin.var() > 1.5 * poisson.var()

    def test_noisy_lifts_the_mean(self):
        # with a lognormal mean perturbation E[Y] = exp(1/2) even when
        # x @ theta_star is identically zero
        m = 400_000
        model = TrueModel(np.array([0.0]), noisy=True)
        y = gen_response(np.zeros((m, 1)), model, seed=6)
        se = y.std(ddof=1) / math.sqrt(m)
        assert abs(y.mean() - math.exp(0.5)) < 4 * se

    def test_shared_stream_differs_from_fresh_seeds(self):
        model = TrueModel(gen_theta_star(5, 2, 0))
        rng = np.random.default_rng(9)
        x = rng.standard_normal((50, 5))
        y1 = draw_response(x, model, rng)
        y2 = draw_response(x, model, rng)
        assert not np.array_equal(y1, y2)
