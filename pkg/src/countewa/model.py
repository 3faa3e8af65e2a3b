"""Core objects for exponential-weights count regression.

A count response ``y`` is predicted by ``exp(x @ theta)``.  Fit quality is
the squared distance between the observed count and that prediction, and
the sampling target combines the empirical risk with a heavy-tailed scaled
Student prior that concentrates near sparse coefficient vectors:

    log target(theta) = -lam * risk_n(theta) + log prior(theta)

where ``risk_n(theta) = mean((y_i - exp(x_i @ theta))^2)`` and
``log prior(theta) = -2 * sum(log(varsigma^2 + theta_j^2))`` up to a
constant.  Everything here works with unnormalized log densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .simulate import TrueModel, draw_response

__all__ = [
    "Dataset",
    "GibbsConfig",
    "linear_predictor",
    "empirical_risk",
    "risk_gradient",
    "log_prior",
    "log_prior_gradient",
    "log_posterior",
    "log_posterior_gradient",
    "log_posterior_value_and_gradient",
    "population_risk_mc",
]


@dataclass
class Dataset:
    """Design matrix ``x`` of shape (n, d) and count response ``y`` of shape (n,).

    Counts must be nonnegative integers; the design must be finite.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=np.float64)
        if self.x.ndim != 2:
            raise ValueError("x must be a 2-d array of shape (n, d)")
        n, d = self.x.shape
        if n < 1 or d < 1:
            raise ValueError("x needs at least one row and one column")
        if not np.all(np.isfinite(self.x)):
            raise ValueError("x contains non-finite entries")
        y = np.asarray(self.y)
        if y.shape != (n,):
            raise ValueError(f"y has shape {y.shape}, expected ({n},)")
        yf = y.astype(np.float64)
        if not np.all(np.isfinite(yf)):
            raise ValueError("y contains non-finite entries")
        if np.any(yf < 0) or np.any(yf != np.floor(yf)):
            raise ValueError("y must contain nonnegative integers")
        self.y = yf.astype(np.int64)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class GibbsConfig:
    """Tuning of the exponential-weights target.

    Parameters
    ----------
    lam : inverse temperature multiplying the empirical risk.
    varsigma : scale of the Student-type prior.
    c1 : optional l1 budget on theta; ``inf`` disables the restriction.
        When finite, points with ``sum(|theta|) > c1`` get log prior -inf.
    eta_cap : clamp on the linear predictor before exponentiation, so the
        risk and its gradient stay finite for any finite theta.
    """

    lam: float = 1.0
    varsigma: float = 0.1
    c1: float = math.inf
    eta_cap: float = 50.0

    def __post_init__(self) -> None:
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError("lam must be positive and finite")
        if not (self.varsigma > 0 and math.isfinite(self.varsigma)):
            raise ValueError("varsigma must be positive and finite")
        if not self.c1 > 0:
            raise ValueError("c1 must be positive (inf allowed)")
        if not (self.eta_cap > 0 and math.isfinite(self.eta_cap)):
            raise ValueError("eta_cap must be positive and finite")


def _check_theta(dataset: Dataset, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (dataset.d,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({dataset.d},)")
    return theta


def linear_predictor(dataset: Dataset, theta: np.ndarray, cfg: GibbsConfig) -> np.ndarray:
    """Clamped linear predictor ``clip(x @ theta, -eta_cap, eta_cap)``."""
    theta = _check_theta(dataset, theta)
    eta = dataset.x @ theta
    return np.clip(eta, -cfg.eta_cap, cfg.eta_cap)


def empirical_risk(dataset: Dataset, theta: np.ndarray, cfg: GibbsConfig) -> float:
    """Mean squared prediction error ``mean((y - exp(eta))^2)`` with clamped eta."""
    eta = linear_predictor(dataset, theta, cfg)
    resid = dataset.y - np.exp(eta)
    return float(np.mean(resid * resid))


def risk_gradient(dataset: Dataset, theta: np.ndarray, cfg: GibbsConfig) -> np.ndarray:
    """Gradient of :func:`empirical_risk`.

    Equals ``(2/n) * sum_i (exp(eta_i) - y_i) * exp(eta_i) * x_i`` with zero
    contribution from observations whose raw predictor sits outside the clamp
    (the clamped risk is flat in theta there).
    """
    theta = _check_theta(dataset, theta)
    eta_raw = dataset.x @ theta
    inside = np.abs(eta_raw) <= cfg.eta_cap
    mu = np.exp(np.clip(eta_raw, -cfg.eta_cap, cfg.eta_cap))
    weight = (mu - dataset.y) * mu * inside
    return (2.0 / dataset.n) * (dataset.x.T @ weight)


def log_prior(theta: np.ndarray, cfg: GibbsConfig) -> float:
    """Unnormalized log density of the scaled Student prior.

    Returns ``-2 * sum(log(varsigma^2 + theta_j^2))``, or ``-inf`` when a
    finite l1 budget ``c1`` is exceeded.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if math.isfinite(cfg.c1) and np.sum(np.abs(theta)) > cfg.c1:
        return -math.inf
    return float(-2.0 * np.sum(np.log(cfg.varsigma**2 + theta**2)))


def log_prior_gradient(theta: np.ndarray, cfg: GibbsConfig) -> np.ndarray:
    """Gradient ``-4 theta_j / (varsigma^2 + theta_j^2)`` of :func:`log_prior`.

    Raises if theta lies outside a finite l1 budget, where the log prior
    is -inf and has no gradient.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if math.isfinite(cfg.c1) and np.sum(np.abs(theta)) > cfg.c1:
        raise ValueError("theta outside the l1 budget; log prior is -inf there")
    return -4.0 * theta / (cfg.varsigma**2 + theta**2)


def log_posterior(dataset: Dataset, theta: np.ndarray, cfg: GibbsConfig) -> float:
    """Unnormalized log target ``-lam * risk_n(theta) + log prior(theta)``.

    Returns ``-inf`` outside the support: beyond a finite l1 budget, and at
    points where every observation's raw predictor lies outside the clamp.
    In that second region the clamped risk is locally constant in theta, so
    the data exerts no pull at all and samplers should never linger there.
    """
    lp = log_prior(theta, cfg)
    if lp == -math.inf:
        return -math.inf
    theta = _check_theta(dataset, theta)
    eta_raw = dataset.x @ theta
    if not np.any(np.abs(eta_raw) <= cfg.eta_cap):
        return -math.inf
    mu = np.exp(np.clip(eta_raw, -cfg.eta_cap, cfg.eta_cap))
    resid = dataset.y - mu
    return -cfg.lam * float(np.mean(resid * resid)) + lp


def log_posterior_gradient(dataset: Dataset, theta: np.ndarray, cfg: GibbsConfig) -> np.ndarray:
    """Gradient of :func:`log_posterior` at an in-support theta."""
    return -cfg.lam * risk_gradient(dataset, theta, cfg) + log_prior_gradient(theta, cfg)


def log_posterior_value_and_gradient(
    dataset: Dataset, theta: np.ndarray, cfg: GibbsConfig
) -> tuple[float, np.ndarray]:
    """Log target and its gradient in one pass over the data.

    Shares the linear predictor between the two, which roughly halves the
    per-step cost of gradient-based samplers.  Outside the support (a finite
    l1 budget exceeded, or every predictor clamped as in
    :func:`log_posterior`) the value is -inf and the returned gradient is a
    zero placeholder.
    """
    theta = _check_theta(dataset, theta)
    if math.isfinite(cfg.c1) and np.sum(np.abs(theta)) > cfg.c1:
        return -math.inf, np.zeros_like(theta)
    eta_raw = dataset.x @ theta
    inside = np.abs(eta_raw) <= cfg.eta_cap
    if not np.any(inside):
        return -math.inf, np.zeros_like(theta)
    mu = np.exp(np.clip(eta_raw, -cfg.eta_cap, cfg.eta_cap))
    resid = dataset.y - mu
    risk = float(np.mean(resid * resid))
    risk_grad = (2.0 / dataset.n) * (dataset.x.T @ ((mu - dataset.y) * mu * inside))
    denom = cfg.varsigma**2 + theta**2
    value = -cfg.lam * risk + float(-2.0 * np.sum(np.log(denom)))
    grad = -cfg.lam * risk_grad - 4.0 * theta / denom
    return value, grad


def population_risk_mc(theta: np.ndarray, model: TrueModel, m: int, seed: int) -> float:
    """Monte Carlo estimate of the population risk ``E[(Y - exp(X @ theta))^2]``.

    Draws ``m`` fresh observations from ``model`` (standard normal design,
    response from the model family) and averages the squared prediction
    error.  Calling twice with the same seed reuses the identical sample,
    so risk differences between two theta values are paired.
    """
    theta = np.asarray(theta, dtype=np.float64)
    d = model.theta_star.shape[0]
    if theta.shape != (d,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({d},)")
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((m, d))
    y = draw_response(x, model, rng)
    with np.errstate(over="ignore"):
        pred = np.exp(x @ theta)
        resid = y - pred
        return float(np.mean(resid * resid))
