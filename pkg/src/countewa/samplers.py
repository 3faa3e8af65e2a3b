"""Langevin samplers for unnormalized log densities.

Two gradient-based chains are provided: an unadjusted Langevin chain
(``lmc_run``) and its Metropolis-adjusted variant (``mala_run``).  Both
average the iterates after a burn-in period; the average is the point
estimate used throughout the benchmarks.

Step size handling is the fiddly part.  MALA adapts its step during
burn-in toward a target acceptance rate and then freezes it.  LMC has no
acceptance signal, so ``step_size="auto"`` runs a short MALA pilot on the
same target and reuses its adapted step.  If a chain produces a non-finite
iterate (or, for LMC, one flung beyond any plausible scale or outside the
support of the target), the attempt is abandoned, the step is halved, and
the chain restarts from the initial point; after ten retries the result is
flagged as diverged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .model import (
    Dataset,
    GibbsConfig,
    log_posterior_value_and_gradient,
)

__all__ = [
    "ChainConfig",
    "ChainResult",
    "Target",
    "lmc_run",
    "mala_run",
    "fit_ewa",
]

# multiplicative adaptation gain: h *= exp(gain * (accept - target)), so the
# per-step factors are about x1.02 on accept and x0.98 on reject and the
# stationary acceptance rate equals adapt_target
ADAPT_GAIN = 0.04

MAX_RETRIES = 10

PILOT_ITERATIONS = 1000

# sup-norm beyond which an iterate counts as numerically lost even though
# finite: a clamped linear predictor has zero risk gradient, so a chain flung
# far past the data's scale would free-run with no restoring force and its
# average would be garbage while never producing a NaN
ESCAPE_NORM = 1e8


@dataclass(frozen=True)
class ChainConfig:
    """Chain length, burn-in, step size policy, and seed.

    ``step_size`` is either a positive float or the string ``"auto"``.
    ``adapt_target`` is the acceptance rate MALA adapts toward during
    burn-in.  ``store_trajectory`` keeps the post-burn-in iterates, which
    costs memory and is off by default.
    """

    n_iter: int = 25000
    burn_in: int = 5000
    step_size: float | str = "auto"
    adapt_target: float = 0.55
    seed: int = 0
    store_trajectory: bool = False

    def __post_init__(self) -> None:
        if self.n_iter < 1:
            raise ValueError("n_iter must be at least 1")
        if not 0 <= self.burn_in < self.n_iter:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_iter")
        if isinstance(self.step_size, str):
            if self.step_size != "auto":
                raise ValueError('step_size must be a positive float or "auto"')
        elif not (self.step_size > 0 and math.isfinite(self.step_size)):
            raise ValueError("step_size must be positive and finite")
        if not 0 < self.adapt_target < 1:
            raise ValueError("adapt_target must lie in (0, 1)")


@dataclass
class Target:
    """Unnormalized log density with gradient.

    ``log_density`` may return ``-inf`` to mark points outside the support;
    proposals landing there are always rejected by MALA.  ``value_and_gradient``
    is an optional fused evaluation used to avoid recomputing shared work;
    when the value is ``-inf`` its gradient entry is ignored.  ``project``
    is an optional map applied to each LMC iterate to keep the chain inside
    a constrained support (MALA relies on rejection instead).
    """

    log_density: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    value_and_gradient: Callable[[np.ndarray], tuple[float, np.ndarray]] | None = None
    project: Callable[[np.ndarray], np.ndarray] | None = None

    def eval(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        if self.value_and_gradient is not None:
            return self.value_and_gradient(theta)
        value = self.log_density(theta)
        if value == -math.inf:
            return value, np.zeros_like(theta)
        return value, self.gradient(theta)


@dataclass
class ChainResult:
    """Outcome of one chain run.

    ``posterior_mean`` averages the iterates after burn-in.
    ``acceptance_rate`` counts post-burn-in Metropolis accepts (1.0 for LMC,
    which has no rejection step).  ``final_step_size`` is the step in effect
    after adaptation and divergence retries.  ``trajectory`` holds the
    post-burn-in iterates when requested, else None.
    """

    posterior_mean: np.ndarray
    acceptance_rate: float
    final_step_size: float
    diverged: bool
    trajectory: np.ndarray | None = None


def _check_init(init: np.ndarray) -> np.ndarray:
    init = np.asarray(init, dtype=np.float64)
    if init.ndim != 1 or init.shape[0] < 1:
        raise ValueError("init must be a nonempty 1-d array")
    if not np.all(np.isfinite(init)):
        raise ValueError("init contains non-finite entries")
    return init


def _mala_attempt(
    target: Target, init: np.ndarray, cfg: ChainConfig, h: float
) -> ChainResult | None:
    d = init.shape[0]
    rng = np.random.default_rng(cfg.seed)
    theta = init.copy()
    lp_cur, grad_cur = target.eval(theta)
    if not math.isfinite(lp_cur):
        raise ValueError("log density at init must be finite")
    if not np.all(np.isfinite(grad_cur)):
        raise ValueError("gradient at init must be finite")

    adapt = cfg.step_size == "auto"
    total = np.zeros(d)
    kept = 0
    accepted_post = 0
    traj = np.empty((cfg.n_iter - cfg.burn_in, d)) if cfg.store_trajectory else None

    for k in range(cfg.n_iter):
        xi = rng.standard_normal(d)
        u = rng.random()
        proposal = theta + h * grad_cur + math.sqrt(2.0 * h) * xi
        accepted = False
        if np.all(np.isfinite(proposal)):
            lp_prop, grad_prop = target.eval(proposal)
            if lp_prop > -math.inf and math.isfinite(lp_prop):
                # forward kernel exponent reduces to -|xi|^2 / 2
                back = (theta - proposal) - h * grad_prop
                log_ratio = (
                    lp_prop
                    - lp_cur
                    - float(back @ back) / (4.0 * h)
                    + 0.5 * float(xi @ xi)
                )
                if math.log(u) < log_ratio:
                    accepted = True
                    theta = proposal
                    lp_cur = lp_prop
                    grad_cur = grad_prop
        if math.isnan(lp_cur):
            return None
        if adapt and k < cfg.burn_in:
            h *= math.exp(ADAPT_GAIN * ((1.0 if accepted else 0.0) - cfg.adapt_target))
        if k >= cfg.burn_in:
            total += theta
            if accepted:
                accepted_post += 1
            if traj is not None:
                traj[kept] = theta
            kept += 1

    return ChainResult(
        posterior_mean=total / kept,
        acceptance_rate=accepted_post / kept,
        final_step_size=h,
        diverged=False,
        trajectory=traj,
    )


def mala_run(target: Target, init: np.ndarray, cfg: ChainConfig) -> ChainResult:
    """Metropolis-adjusted Langevin chain targeting ``target``.

    The proposal is ``theta + h * grad + sqrt(2 h) * noise`` accepted with
    the usual Metropolis-Hastings correction.  With ``step_size="auto"`` the
    step adapts multiplicatively toward ``adapt_target`` during burn-in and
    is frozen afterwards.  Non-finite or out-of-support proposals are
    rejected, which keeps the chain inside the support of the target.
    """
    init = _check_init(init)
    if cfg.step_size == "auto":
        h = min(1.0, 1.0 / init.shape[0])
    else:
        h = float(cfg.step_size)

    result = None
    for _ in range(1 + MAX_RETRIES):
        result = _mala_attempt(target, init, cfg, h)
        if result is not None:
            return result
        h *= 0.5
    return ChainResult(
        posterior_mean=init.copy(),
        acceptance_rate=0.0,
        final_step_size=h,
        diverged=True,
        trajectory=None,
    )


def _lmc_attempt(
    target: Target, init: np.ndarray, cfg: ChainConfig, h: float
) -> ChainResult | None:
    d = init.shape[0]
    rng = np.random.default_rng(cfg.seed)
    theta = init.copy()
    sqrt_2h = math.sqrt(2.0 * h)
    total = np.zeros(d)
    kept = 0
    traj = np.empty((cfg.n_iter - cfg.burn_in, d)) if cfg.store_trajectory else None

    for k in range(cfg.n_iter):
        xi = rng.standard_normal(d)
        lp, grad = target.eval(theta)
        if lp == -math.inf:
            # the chain left the support; with no rejection step the only
            # remedy is a smaller step, so treat it as a divergence
            return None
        theta = theta + h * grad + sqrt_2h * xi
        if target.project is not None:
            theta = target.project(theta)
        if not np.all(np.isfinite(theta)) or np.max(np.abs(theta)) > ESCAPE_NORM:
            return None
        if k >= cfg.burn_in:
            total += theta
            if traj is not None:
                traj[kept] = theta
            kept += 1

    return ChainResult(
        posterior_mean=total / kept,
        acceptance_rate=1.0,
        final_step_size=h,
        diverged=False,
        trajectory=traj,
    )


def lmc_run(
    target: Target,
    init: np.ndarray,
    cfg: ChainConfig,
    fallback_step: float | None = None,
) -> ChainResult:
    """Unadjusted Langevin chain targeting ``target``.

    Every proposal is accepted, so the invariant measure carries an O(h)
    discretization bias that shrinks with the step size.  With
    ``step_size="auto"`` a short MALA pilot on the same target supplies the
    step; ``fallback_step`` (default ``1/d^2``) is used if the pilot
    diverges.  An iterate with ``-inf`` log density counts as a divergence:
    without a rejection step the chain cannot recover from leaving the
    support, so the attempt restarts with a halved step.
    """
    init = _check_init(init)
    if not math.isfinite(target.log_density(init)):
        raise ValueError("log density at init must be finite")
    if cfg.step_size == "auto":
        pilot_cfg = replace(
            cfg,
            n_iter=PILOT_ITERATIONS,
            burn_in=PILOT_ITERATIONS - 1,
            store_trajectory=False,
        )
        pilot = mala_run(target, init, pilot_cfg)
        if fallback_step is None:
            fallback_step = 1.0 / init.shape[0] ** 2
        h = fallback_step if pilot.diverged else pilot.final_step_size
    else:
        h = float(cfg.step_size)

    result = None
    for _ in range(1 + MAX_RETRIES):
        result = _lmc_attempt(target, init, cfg, h)
        if result is not None:
            return result
        h *= 0.5
    return ChainResult(
        posterior_mean=init.copy(),
        acceptance_rate=1.0,
        final_step_size=h,
        diverged=True,
        trajectory=None,
    )


def fit_ewa(
    dataset: Dataset,
    gibbs: GibbsConfig,
    chain: ChainConfig,
    init: np.ndarray,
    method: str = "MALA",
) -> ChainResult:
    """Sample the exponential-weights target and return the chain average.

    Builds the log target ``-lam * risk_n + log prior`` for ``dataset`` and
    runs the requested chain from ``init`` (typically a lasso solution).
    With a finite l1 budget, LMC rescales any iterate that leaves the budget
    back onto its boundary, while MALA simply rejects such proposals.
    """
    method = method.upper()
    if method not in ("LMC", "MALA"):
        raise ValueError('method must be "LMC" or "MALA"')
    init = _check_init(init)
    if init.shape[0] != dataset.d:
        raise ValueError(f"init has length {init.shape[0]}, expected {dataset.d}")
    if math.isfinite(gibbs.c1) and np.sum(np.abs(init)) > gibbs.c1:
        raise ValueError("init violates the l1 budget")

    def value_and_gradient(theta: np.ndarray) -> tuple[float, np.ndarray]:
        return log_posterior_value_and_gradient(dataset, theta, gibbs)

    def gradient(theta: np.ndarray) -> np.ndarray:
        return value_and_gradient(theta)[1]

    def log_density(theta: np.ndarray) -> float:
        return value_and_gradient(theta)[0]

    project = None
    if math.isfinite(gibbs.c1) and method == "LMC":
        budget = gibbs.c1

        def project(theta: np.ndarray) -> np.ndarray:
            norm = float(np.sum(np.abs(theta)))
            if norm > budget:
                # rescale a hair inside the budget so rounding in the
                # elementwise product cannot leave the support
                return theta * ((1.0 - 1e-12) * budget / norm)
            return theta

    target = Target(
        log_density=log_density,
        gradient=gradient,
        value_and_gradient=value_and_gradient,
        project=project,
    )
    if method == "MALA":
        return mala_run(target, init, chain)
    return lmc_run(target, init, chain, fallback_step=1.0 / (dataset.n * dataset.d))
