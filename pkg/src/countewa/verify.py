"""Finite-grid variational checks and an empirical rate study.

Two kinds of evidence back the estimator.  First, on a finite grid of
candidate coefficient vectors the exponential-weights measure can be
computed exactly, so the variational identity

    log E_prior[exp(h)] = sup_rho { E_rho[h] - KL(rho || prior) }

and the optimality of the Gibbs measure for ``lam * E_rho[risk] + KL``
can be verified to numerical precision.  Second, ``run_rate_study``
measures how the excess population risk of the chain average decays as
the sample size grows, with the prior scale and inverse temperature tied
to ``n`` by a tuning rule.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .lasso import LassoConfig, cv_select
from .model import Dataset, GibbsConfig, population_risk_mc
from .samplers import ChainConfig, fit_ewa
from .simulate import TrueModel, draw_design, draw_response, draw_theta_star

__all__ = [
    "FiniteGrid",
    "DvIdentity",
    "dv_check",
    "gibbs_minimizer_check",
    "TUNING_RULES",
    "RateStudySpec",
    "RateRow",
    "RateStudyResult",
    "run_rate_study",
]

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FiniteGrid:
    """Finite support ``points`` (k, d) with prior weights summing to one."""

    points: np.ndarray
    prior_weights: np.ndarray

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[0] < 1:
            raise ValueError("points must be a nonempty (k, d) array")
        weights = np.asarray(self.prior_weights, dtype=np.float64)
        if weights.shape != (points.shape[0],):
            raise ValueError("prior_weights must have one entry per grid point")
        if np.any(weights < 0):
            raise ValueError("prior_weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError("prior_weights must sum to one")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "prior_weights", weights)

    @property
    def k(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class DvIdentity:
    """Both sides of the variational identity on a finite grid.

    ``lhs`` is ``log E_prior[exp(h)]``; ``rhs`` is the variational value
    ``E_rho[h] - KL(rho || prior)`` at the exponential-weights measure,
    which attains the supremum; ``gap`` is their absolute difference.
    ``gibbs_objective`` is the same quantity written as a minimization,
    ``E_rho[-h] + KL(rho || prior) = -rhs``.
    """

    lhs: float
    rhs: float
    gibbs_objective: float
    gap: float


def _masked_log_weights(grid: FiniteGrid) -> tuple[np.ndarray, np.ndarray]:
    mask = grid.prior_weights > 0
    if not np.any(mask):
        raise ValueError("prior_weights are all zero")
    return mask, np.log(grid.prior_weights[mask])


def dv_check(grid: FiniteGrid, h_values: np.ndarray) -> DvIdentity:
    """Evaluate both sides of the variational identity for ``h_values``.

    ``h_values`` holds one finite value of the function h per grid point.
    Zero-weight points carry no mass on either side and are skipped.
    """
    h = np.asarray(h_values, dtype=np.float64)
    if h.shape != (grid.k,):
        raise ValueError(f"h_values must have shape ({grid.k},)")
    if not np.all(np.isfinite(h)):
        raise ValueError("h_values must be finite")
    mask, log_w = _masked_log_weights(grid)
    hm = h[mask]
    lhs = float(logsumexp(log_w + hm))
    log_rho = log_w + hm - lhs
    rho = np.exp(log_rho)
    kl = float(np.sum(rho * (log_rho - log_w)))
    rhs = float(np.sum(rho * hm)) - kl
    return DvIdentity(lhs=lhs, rhs=rhs, gibbs_objective=-rhs, gap=abs(lhs - rhs))


def _grid_objective(
    q: np.ndarray, weights: np.ndarray, risks: np.ndarray, lam: float
) -> float:
    """``lam * E_q[risk] + KL(q || weights)``; +inf when q escapes the prior support."""
    pos = q > 0
    if np.any(weights[pos] == 0):
        return math.inf
    kl = float(np.sum(q[pos] * (np.log(q[pos]) - np.log(weights[pos]))))
    return lam * float(q @ risks) + kl


def gibbs_minimizer_check(
    grid: FiniteGrid,
    risks: np.ndarray,
    lam: float,
    n_random: int = 1000,
    seed: int = 0,
    tol: float = 1e-10,
) -> bool:
    """True iff the exponential-weights measure beats random competitors.

    Compares ``lam * E_q[risk] + KL(q || prior)`` at the exponential-weights
    measure against ``n_random`` Dirichlet-distributed probability vectors;
    the measure must come in at or below every competitor up to ``tol``.
    """
    risks = np.asarray(risks, dtype=np.float64)
    if risks.shape != (grid.k,):
        raise ValueError(f"risks must have shape ({grid.k},)")
    if not np.all(np.isfinite(risks)):
        raise ValueError("risks must be finite")
    if not lam > 0:
        raise ValueError("lam must be positive")
    mask, log_w = _masked_log_weights(grid)
    log_rho = log_w - lam * risks[mask]
    log_rho -= logsumexp(log_rho)
    rho = np.zeros(grid.k)
    rho[mask] = np.exp(log_rho)
    best = _grid_objective(rho, grid.prior_weights, risks, lam)
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        q = rng.dirichlet(np.ones(grid.k))
        if best > _grid_objective(q, grid.prior_weights, risks, lam) + tol:
            return False
    return True


def _default_dimension(n: int) -> int:
    return 2 * n


# tuning rules mapping sample size n and dimension d to (lam, varsigma)
TUNING_RULES = ("sqrt_n", "linear_n", "fixed")


@dataclass(frozen=True)
class RateStudySpec:
    """Configuration of the excess-risk decay study.

    ``tuning_rule`` ties the target's temperature to the sample size:
    ``"sqrt_n"`` sets ``lam = sqrt(n)``, ``"linear_n"`` sets ``lam = n``
    (both with ``varsigma = 1 / (n * sqrt(d))``), and ``"fixed"`` uses the
    explicit ``lam`` and ``varsigma`` fields.  ``d_rule`` maps n to the
    dimension (default ``2 * n``).  ``init_rule`` picks the chain start:
    ``"lasso"`` (a cross-validated fit on a light grid; the target sharpens
    with n under the n-scaled rules, and a chain started at the origin
    cannot cross to the mode within any reasonable budget) or ``"zeros"``.
    """

    family: str = "poisson"
    s_star: int = 3
    alpha: float | None = None
    noisy: bool = False
    n_values: tuple[int, ...] = (100, 200, 400, 800)
    d_rule: Callable[[int], int] = _default_dimension
    replications: int = 50
    mc_risk_samples: int = 4000
    tuning_rule: str = "linear_n"
    lam: float | None = None
    varsigma: float | None = None
    init_rule: str = "lasso"
    chain: ChainConfig = field(default_factory=ChainConfig)

    def __post_init__(self) -> None:
        if len(self.n_values) < 2:
            raise ValueError("n_values needs at least two sample sizes")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ValueError("n_values must be strictly increasing")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.mc_risk_samples < 1:
            raise ValueError("mc_risk_samples must be at least 1")
        if self.tuning_rule not in TUNING_RULES:
            raise ValueError(f"tuning_rule must be one of {TUNING_RULES}")
        if self.tuning_rule == "fixed":
            if self.lam is None or self.varsigma is None:
                raise ValueError('tuning_rule "fixed" needs lam and varsigma')
        if self.init_rule not in ("lasso", "zeros"):
            raise ValueError('init_rule must be "lasso" or "zeros"')

    def gibbs_for(self, n: int, d: int) -> GibbsConfig:
        if self.tuning_rule == "sqrt_n":
            return GibbsConfig(lam=math.sqrt(n), varsigma=1.0 / (n * math.sqrt(d)))
        if self.tuning_rule == "linear_n":
            return GibbsConfig(lam=float(n), varsigma=1.0 / (n * math.sqrt(d)))
        return GibbsConfig(lam=self.lam, varsigma=self.varsigma)


@dataclass
class RateRow:
    n: int
    d: int
    mean_excess: float
    sd: float
    slope_so_far: float
    n_diverged: int = 0


@dataclass
class RateStudyResult:
    rows: list[RateRow]
    slope: float

    def to_csv_text(self) -> str:
        lines = ["n,d,mean_excess,sd,slope_so_far"]
        for row in self.rows:
            lines.append(
                f"{row.n},{row.d},{float(row.mean_excess)!r},"
                f"{float(row.sd)!r},{float(row.slope_so_far)!r}"
            )
        return "\n".join(lines) + "\n"


def _fit_slope(ns: list[int], means: list[float]) -> float:
    if len(ns) < 2 or any(not m > 0 for m in means):
        return math.nan
    coeffs = np.polyfit(np.log(np.asarray(ns, dtype=np.float64)), np.log(means), 1)
    return float(coeffs[0])


def _rate_replication(args: tuple) -> tuple[int, int, float, bool]:
    (n_idx, r, n, d, family, alpha, noisy, s_star, gibbs, chain, m, base_seed,
     init_rule) = args
    data_seed = base_seed + 10_000 * n_idx + r
    rng = np.random.default_rng(data_seed)
    theta_star = draw_theta_star(d, s_star, rng)
    model = TrueModel(theta_star, family=family, alpha=alpha, noisy=noisy)
    x = draw_design(n, d, rng)
    y = draw_response(x, model, rng)
    dataset = Dataset(x, y)
    if init_rule == "lasso":
        # light grid: the fit only seeds the chain, it is not reported
        cfg = LassoConfig(n_lambda=30, lambda_min_ratio=0.05, seed=data_seed)
        init = cv_select(dataset, cfg).beta
    else:
        init = np.zeros(d)
    chain = replace(chain, seed=data_seed + 1_000_000)
    result = fit_ewa(dataset, gibbs, chain, init=init, method="MALA")
    if result.diverged:
        return n_idx, r, math.nan, True
    mc_seed = data_seed + 2_000_000
    excess = population_risk_mc(
        result.posterior_mean, model, m, mc_seed
    ) - population_risk_mc(theta_star, model, m, mc_seed)
    return n_idx, r, excess, False


def run_rate_study(
    spec: RateStudySpec, seed: int = 0, threads: int = 1
) -> RateStudyResult:
    """Measure excess-risk decay of the chain average across sample sizes.

    Each replication draws fresh data at every ``n``, runs a MALA chain
    started per ``init_rule`` with the tuning rule applied, and estimates
    the excess population risk ``R(theta_hat) - R(theta_star)`` by paired
    Monte Carlo.  Diverged replications are excluded from the row mean and
    counted in ``n_diverged``.  ``slope_so_far`` is the least squares slope
    of ``log mean_excess`` against ``log n`` over the rows seen so far.
    """
    tasks = []
    for n_idx, n in enumerate(spec.n_values):
        d = spec.d_rule(n)
        gibbs = spec.gibbs_for(n, d)
        for r in range(spec.replications):
            tasks.append(
                (
                    n_idx,
                    r,
                    n,
                    d,
                    spec.family,
                    spec.alpha,
                    spec.noisy,
                    spec.s_star,
                    gibbs,
                    spec.chain,
                    spec.mc_risk_samples,
                    seed,
                    spec.init_rule,
                )
            )
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_rate_replication, tasks, chunksize=1))
    else:
        outcomes = [_rate_replication(t) for t in tasks]

    by_n: dict[int, list[tuple[int, float, bool]]] = {}
    for n_idx, r, excess, diverged in outcomes:
        by_n.setdefault(n_idx, []).append((r, excess, diverged))

    rows: list[RateRow] = []
    ns_so_far: list[int] = []
    means_so_far: list[float] = []
    for n_idx, n in enumerate(spec.n_values):
        entries = sorted(by_n[n_idx])
        excesses = np.array([e for _, e, div in entries if not div])
        n_div = sum(1 for _, _, div in entries if div)
        mean_excess = float(excesses.mean()) if excesses.size else math.nan
        sd = float(excesses.std(ddof=1)) if excesses.size > 1 else 0.0
        ns_so_far.append(n)
        means_so_far.append(mean_excess)
        rows.append(
            RateRow(
                n=n,
                d=spec.d_rule(n),
                mean_excess=mean_excess,
                sd=sd,
                slope_so_far=_fit_slope(ns_so_far, means_so_far),
                n_diverged=n_div,
            )
        )
    return RateStudyResult(rows=rows, slope=rows[-1].slope_so_far)
