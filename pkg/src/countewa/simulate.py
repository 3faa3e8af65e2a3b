"""Synthetic data generators for sparse count regression benchmarks.

The generating process draws a sparse coefficient vector theta_star, a
standard normal design, and counts whose conditional mean is
``exp(x @ theta_star)`` (optionally with lognormal mean perturbation).
Two count families are supported: Poisson, and negative binomial realized
as a gamma-Poisson mixture so that the mean is ``mu`` and the variance is
``mu + mu^2 / alpha``.

Each public generator takes a seed; the ``draw_*`` variants take a live
``numpy.random.Generator`` so several draws can share one stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FAMILIES",
    "TrueModel",
    "gen_theta_star",
    "gen_design",
    "gen_response",
    "draw_theta_star",
    "draw_design",
    "draw_response",
]

FAMILIES = ("poisson", "negbin")


@dataclass(frozen=True)
class TrueModel:
    """Ground-truth generating process for one benchmark scenario.

    ``alpha`` is the negative binomial dispersion (larger alpha means closer
    to Poisson) and is required exactly when ``family == "negbin"``.  When
    ``noisy`` is set, each observation's log mean gets an independent
    standard normal perturbation.
    """

    theta_star: np.ndarray
    s_star: int | None = None
    family: str = "poisson"
    alpha: float | None = None
    noisy: bool = False

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta_star, dtype=np.float64)
        if theta.ndim != 1 or theta.shape[0] < 1:
            raise ValueError("theta_star must be a nonempty 1-d array")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta_star contains non-finite entries")
        object.__setattr__(self, "theta_star", theta)
        nnz = int(np.count_nonzero(theta))
        if self.s_star is None:
            object.__setattr__(self, "s_star", nnz)
        elif self.s_star != nnz:
            raise ValueError(f"s_star={self.s_star} but theta_star has {nnz} nonzeros")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.family == "negbin":
            if self.alpha is None or not self.alpha > 0:
                raise ValueError("negbin family needs alpha > 0")
        elif self.alpha is not None:
            raise ValueError("alpha only applies to the negbin family")

    @property
    def d(self) -> int:
        return self.theta_star.shape[0]


def draw_theta_star(d: int, s_star: int, rng: np.random.Generator) -> np.ndarray:
    """Sparse coefficient vector: s_star uniformly chosen coordinates get
    iid Uniform[-0.5, 0.5] values, the rest stay zero."""
    if d < 1:
        raise ValueError("d must be at least 1")
    if not 0 <= s_star <= d:
        raise ValueError("s_star must lie in [0, d]")
    theta = np.zeros(d)
    support = rng.choice(d, size=s_star, replace=False)
    theta[support] = rng.uniform(-0.5, 0.5, size=s_star)
    return theta


def gen_theta_star(d: int, s_star: int, seed: int) -> np.ndarray:
    return draw_theta_star(d, s_star, np.random.default_rng(seed))


def draw_design(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Design matrix with iid standard normal entries."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    return rng.standard_normal((n, d))


def gen_design(n: int, d: int, seed: int) -> np.ndarray:
    return draw_design(n, d, np.random.default_rng(seed))


def draw_response(x: np.ndarray, model: TrueModel, rng: np.random.Generator) -> np.ndarray:
    """Counts with conditional mean ``exp(x @ theta_star)`` under ``model``.

    The negbin family draws ``G ~ Gamma(shape=alpha, scale=mu/alpha)`` and
    then ``Y ~ Poisson(G)``, which gives mean ``mu`` and variance
    ``mu + mu^2/alpha``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.d:
        raise ValueError(f"x must have shape (n, {model.d})")
    eta = x @ model.theta_star
    if model.noisy:
        eta = eta + rng.standard_normal(x.shape[0])
    # cap keeps the mean inside the Poisson sampler's supported range
    mu = np.exp(np.clip(eta, -40.0, 40.0))
    if model.family == "poisson":
        y = rng.poisson(mu)
    else:
        g = rng.gamma(shape=model.alpha, scale=mu / model.alpha)
        y = rng.poisson(g)
    return y.astype(np.int64)


def gen_response(x: np.ndarray, model: TrueModel, seed: int) -> np.ndarray:
    return draw_response(x, model, np.random.default_rng(seed))
