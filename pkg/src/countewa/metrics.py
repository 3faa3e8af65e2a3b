"""Evaluation metrics for count predictions.

All three headline metrics are reported per scenario in the benchmark
tables: coefficient mean squared error, normalized squared prediction
error, and mean Poisson deviance.
"""

from __future__ import annotations

import numpy as np

from .model import Dataset

__all__ = [
    "mse",
    "nsp",
    "mde",
    "nsp_from_eta",
    "mde_from_eta",
    "mean_poisson_deviance",
]


def mse(theta_hat: np.ndarray, theta_star: np.ndarray) -> float:
    """Average squared coefficient error ``mean((theta_hat - theta_star)^2)``."""
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    theta_star = np.asarray(theta_star, dtype=np.float64)
    if theta_hat.shape != theta_star.shape or theta_hat.ndim != 1:
        raise ValueError("theta_hat and theta_star must be 1-d arrays of equal length")
    diff = theta_hat - theta_star
    return float(np.mean(diff * diff))


def nsp_from_eta(y: np.ndarray, eta: np.ndarray) -> float:
    """Squared prediction error normalized by the squared response size.

    ``sum((y - exp(eta))^2) / sum(y^2)``; undefined (raises) when every
    response is zero.
    """
    y = np.asarray(y, dtype=np.float64)
    denom = float(np.sum(y * y))
    if denom == 0.0:
        raise ValueError("nsp undefined: all responses are zero")
    with np.errstate(over="ignore"):
        resid = y - np.exp(eta)
        return float(np.sum(resid * resid) / denom)


def mde_from_eta(y: np.ndarray, eta: np.ndarray) -> float:
    """Mean Poisson deviance ``mean(y*log(y/mu) - y + mu)`` with ``0*log(0) = 0``."""
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(over="ignore"):
        mu = np.exp(eta)
        return mean_poisson_deviance(y, mu)


def mean_poisson_deviance(y: np.ndarray, mu: np.ndarray) -> float:
    y = np.asarray(y, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    pos = y > 0
    # y*log(y/mu) evaluated only where y > 0; the y == 0 terms reduce to mu
    ylog = np.zeros_like(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        ylog[pos] = y[pos] * np.log(y[pos] / mu[pos])
        terms = ylog - y + mu
    # mu overflowing to inf on a positive count leaves inf - inf above; the
    # deviance limit as mu -> inf is +inf, same as the mu -> 0 side
    terms[pos & np.isinf(mu)] = np.inf
    return float(np.mean(terms))


def nsp(dataset: Dataset, theta_hat: np.ndarray) -> float:
    """:func:`nsp_from_eta` with ``eta = x @ theta_hat``."""
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    if theta_hat.shape != (dataset.d,):
        raise ValueError(f"theta_hat has shape {theta_hat.shape}, expected ({dataset.d},)")
    return nsp_from_eta(dataset.y, dataset.x @ theta_hat)


def mde(dataset: Dataset, theta_hat: np.ndarray) -> float:
    """:func:`mde_from_eta` with ``eta = x @ theta_hat``."""
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    if theta_hat.shape != (dataset.d,):
        raise ValueError(f"theta_hat has shape {theta_hat.shape}, expected ({dataset.d},)")
    return mde_from_eta(dataset.y, dataset.x @ theta_hat)
