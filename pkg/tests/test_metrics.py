"""Metric tests: hand values, zero conventions, and nonnegativity."""

import numpy as np
import pytest

from countewa.metrics import mde, mde_from_eta, mse, nsp, nsp_from_eta
from countewa.model import Dataset


class TestMse:
    def test_hand_value(self):
        assert mse(np.array([1.0, 0.0]), np.array([0.0, 0.0])) == 0.5

    def test_zero_at_truth(self):
        theta = np.array([0.3, -0.7, 2.0])
        assert mse(theta, theta) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mse(np.zeros(2), np.zeros(3))


class TestNsp:
    def test_hand_value(self):
        # y=2, prediction exp(0)=1: (2-1)^2 / 2^2 = 0.25
        ds = Dataset(np.zeros((1, 1)), np.array([2]))
        assert nsp(ds, np.zeros(1)) == 0.25

    def test_zero_for_perfect_prediction(self):
        x = np.array([[1.0], [1.0]])
        y = np.array([3, 3])
        theta = np.array([np.log(3.0)])
        assert nsp(Dataset(x, y), theta) < 1e-28

    def test_all_zero_response_raises(self):
        ds = Dataset(np.ones((3, 1)), np.array([0, 0, 0]))
        with pytest.raises(ValueError):
            nsp(ds, np.zeros(1))

    def test_shape_mismatch(self):
        ds = Dataset(np.ones((2, 2)), np.array([1, 1]))
        with pytest.raises(ValueError):
            nsp(ds, np.zeros(3))

    def test_nonnegative(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            n, d = int(rng.integers(2, 30)), int(rng.integers(1, 6))
            y = rng.poisson(2.0, size=n)
            if y.sum() == 0:
                continue
            ds = Dataset(rng.standard_normal((n, d)), y)
            assert nsp(ds, 0.2 * rng.standard_normal(d)) >= 0.0


class TestMde:
    def test_zero_count_convention(self):
        # y=0 contributes just mu: mean deviance = exp(0) = 1
        ds = Dataset(np.zeros((1, 1)), np.array([0]))
        assert mde(ds, np.zeros(1)) == 1.0

    def test_hand_value(self):
        # y=2 against mu=1: 2 log 2 - 2 + 1
        ds = Dataset(np.zeros((1, 1)), np.array([2]))
        assert np.isclose(mde(ds, np.zeros(1)), 2.0 * np.log(2.0) - 1.0)

    def test_zero_at_exact_fit(self):
        x = np.array([[1.0], [2.0]])
        y = np.array([2, 4])
        # mu = exp(x * log 2) = (2, 4)
        theta = np.array([np.log(2.0)])
        assert mde(Dataset(x, y), theta) < 1e-14

    def test_nonnegative(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            y = rng.poisson(1.5, size=n).astype(np.float64)
            eta = rng.normal(0.0, 2.0, size=n)
            assert mde_from_eta(y, eta) >= 0.0

    def test_matches_eta_variant(self):
        rng = np.random.default_rng(6)
        ds = Dataset(rng.standard_normal((20, 3)), rng.poisson(1.0, size=20))
        theta = np.array([0.1, -0.2, 0.3])
        assert mde(ds, theta) == mde_from_eta(ds.y, ds.x @ theta)
        assert nsp(ds, theta) == nsp_from_eta(ds.y, ds.x @ theta)

    def test_shape_mismatch(self):
        ds = Dataset(np.ones((2, 2)), np.array([1, 1]))
        with pytest.raises(ValueError):
            mde(ds, np.zeros(1))
