"""l1-penalized Poisson regression fitted from scratch.

The objective is the scaled Poisson negative log likelihood plus an l1
penalty:

    (1/n) * sum(mu_i - y_i * eta_i) + lam * sum(|beta_j|),   mu_i = exp(eta_i)

minimized by iteratively reweighted least squares: each outer pass builds
the usual quadratic expansion with weights ``w_i = mu_i`` and working
response ``z_i = eta_i + (y_i - mu_i) / mu_i``, then solves the penalized
weighted least squares problem by cyclic coordinate descent with
soft-thresholding.  Warm starts along a decreasing lambda path make the
whole cross-validation grid cheap.

These fits serve two roles in the benchmarks: a baseline estimator in
their own right, and the initial point handed to the Langevin chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .metrics import mean_poisson_deviance
from .model import Dataset

__all__ = [
    "LassoConfig",
    "LassoFit",
    "lambda_grid",
    "fit_poisson_lasso",
    "cv_select",
    "penalized_objective",
    "kkt_residuals",
]

# IRLS internals: linear predictor clamp while reweighting, and the floor
# applied to the working weights so zero-mean observations cannot zero out
WORK_ETA_CAP = 30.0
WEIGHT_FLOOR = 1e-5


@dataclass(frozen=True)
class LassoConfig:
    """Grid, cross-validation, and convergence settings.

    ``standardize`` rescales each column to unit standard deviation
    internally (coefficients are reported on the original scale);
    constant columns are left alone.  ``cv_rule`` picks the grid point
    with the smallest cross-validated deviance (``"min"``) or the largest
    lambda within one standard error of it (``"1se"``).
    """

    n_lambda: int = 100
    lambda_min_ratio: float = 0.01
    k_folds: int = 5
    intercept: bool = False
    standardize: bool = True
    max_irls: int = 25
    cd_tol: float = 1e-7
    seed: int = 0
    cv_rule: str = "min"

    def __post_init__(self) -> None:
        if self.n_lambda < 1:
            raise ValueError("n_lambda must be at least 1")
        if not 0 < self.lambda_min_ratio < 1:
            raise ValueError("lambda_min_ratio must lie in (0, 1)")
        if self.k_folds < 2:
            raise ValueError("k_folds must be at least 2")
        if self.max_irls < 1:
            raise ValueError("max_irls must be at least 1")
        if not self.cd_tol > 0:
            raise ValueError("cd_tol must be positive")
        if self.cv_rule not in ("min", "1se"):
            raise ValueError('cv_rule must be "min" or "1se"')


@dataclass
class LassoFit:
    """Fitted coefficients on the original scale plus selection metadata.

    ``cv_curve`` lists ``(lam, mean_deviance, sd_deviance)`` per grid point
    for cross-validated fits and is empty for single-lambda fits.
    ``converged`` is False when IRLS hit its iteration cap; the best
    iterate is still returned.
    """

    beta: np.ndarray
    intercept_value: float
    lambda_selected: float
    cv_curve: list[tuple[float, float, float]] = field(default_factory=list)
    converged: bool = True


@njit(cache=True)
def _cd_sweeps(xw, w, z, beta, b0, use_intercept, lam, tol, max_sweeps):  # pragma: no cover
    """Cyclic coordinate descent on the penalized weighted least squares
    surrogate (1/(2n)) * sum(w * (z - b0 - xw @ beta)^2) + lam * |beta|_1.

    Mutates ``beta`` in place; returns the updated intercept and the number
    of sweeps used.  Each coordinate update is an exact minimization, so the
    surrogate objective never increases between sweeps.
    """
    n, d = xw.shape
    r = z - b0
    for j in range(d):
        bj = beta[j]
        if bj != 0.0:
            for i in range(n):
                r[i] -= xw[i, j] * bj
    w_sum = 0.0
    for i in range(n):
        w_sum += w[i]
    v = np.empty(d)
    for j in range(d):
        acc = 0.0
        for i in range(n):
            acc += w[i] * xw[i, j] * xw[i, j]
        v[j] = acc / n
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        delta_max = 0.0
        if use_intercept:
            num = 0.0
            for i in range(n):
                num += w[i] * r[i]
            shift = num / w_sum
            b0 += shift
            for i in range(n):
                r[i] -= shift
            if abs(shift) > delta_max:
                delta_max = abs(shift)
        for j in range(d):
            if v[j] <= 0.0:
                continue
            bj = beta[j]
            rho = 0.0
            for i in range(n):
                rho += w[i] * xw[i, j] * r[i]
            rho = rho / n + v[j] * bj
            if rho > lam:
                new = (rho - lam) / v[j]
            elif rho < -lam:
                new = (rho + lam) / v[j]
            else:
                new = 0.0
            if new != bj:
                diff = new - bj
                for i in range(n):
                    r[i] -= xw[i, j] * diff
                beta[j] = new
                if abs(diff) > delta_max:
                    delta_max = abs(diff)
        if delta_max < tol:
            break
    return b0, sweeps


def _column_scales(x: np.ndarray, standardize: bool) -> np.ndarray:
    if not standardize:
        return np.ones(x.shape[1])
    scales = x.std(axis=0)
    scales[scales == 0.0] = 1.0
    return scales


def _working_objective(
    xw: np.ndarray, y: np.ndarray, lam: float, beta: np.ndarray, b0: float
) -> float:
    eta = np.clip(b0 + xw @ beta, -WORK_ETA_CAP, WORK_ETA_CAP)
    return float(np.mean(np.exp(eta) - y * eta) + lam * np.sum(np.abs(beta)))


def _irls_fit(
    xw: np.ndarray,
    y: np.ndarray,
    lam: float,
    cfg: LassoConfig,
    beta: np.ndarray,
    b0: float,
) -> tuple[np.ndarray, float, bool]:
    """Outer IRLS loop on the working-scale design; mutates ``beta``."""
    converged = False
    obj = _working_objective(xw, y, lam, beta, b0)
    for _ in range(cfg.max_irls):
        eta = np.clip(b0 + xw @ beta, -WORK_ETA_CAP, WORK_ETA_CAP)
        mu = np.exp(eta)
        w = np.maximum(mu, WEIGHT_FLOOR)
        z = eta + (y - mu) / w
        beta_old = beta.copy()
        b0_old = b0
        b0, _ = _cd_sweeps(
            xw, w, z, beta, b0, cfg.intercept, lam, cfg.cd_tol, 1000
        )
        # the quadratic surrogate can be a poor model far from its expansion
        # point, so damp the move until the penalized likelihood objective
        # actually decreases (it must for a small enough fraction of the step)
        step_beta = beta - beta_old
        step_b0 = b0 - b0_old
        t = 1.0
        new_obj = _working_objective(xw, y, lam, beta, b0)
        while new_obj > obj and t > 2.0**-20:
            t *= 0.5
            beta[:] = beta_old + t * step_beta
            b0 = b0_old + t * step_b0
            new_obj = _working_objective(xw, y, lam, beta, b0)
        if new_obj > obj:
            beta[:] = beta_old
            b0 = b0_old
            break
        obj = new_obj
        delta = abs(b0 - b0_old)
        if beta.size:
            delta = max(delta, float(np.max(np.abs(beta - beta_old))))
        # a damped step can be small without the solve being anywhere near
        # stationary, so only an undamped step counts as converged
        if t == 1.0 and delta < cfg.cd_tol:
            converged = True
            break
    return beta, b0, converged


def _initial_intercept(y: np.ndarray, cfg: LassoConfig) -> float:
    if not cfg.intercept:
        return 0.0
    ybar = float(np.mean(y))
    return math.log(ybar) if ybar > 0 else -WORK_ETA_CAP


def lambda_grid(dataset: Dataset, cfg: LassoConfig) -> np.ndarray:
    """Decreasing log-spaced penalty grid from the smallest all-zero lambda.

    The top of the grid is ``max_j |(1/n) sum_i x_ij (y_i - mu0_i)|`` on the
    working-scale design, with null mean ``mu0 = mean(y)`` when an intercept
    is fitted and ``mu0 = 1`` otherwise; at that penalty every coefficient
    is exactly zero.  The grid spans ``lambda_min_ratio`` down from the top
    in ``n_lambda`` log-spaced steps.
    """
    x = dataset.x
    if np.all(x == 0.0):
        raise ValueError("degenerate design: all entries are zero")
    scales = _column_scales(x, cfg.standardize)
    mu0 = float(np.mean(dataset.y)) if cfg.intercept else 1.0
    score = (x / scales).T @ (dataset.y - mu0) / dataset.n
    lam_max = float(np.max(np.abs(score)))
    if lam_max <= 0.0:
        raise ValueError("degenerate grid: the null model already has zero score")
    return np.geomspace(lam_max, lam_max * cfg.lambda_min_ratio, cfg.n_lambda)


def fit_poisson_lasso(
    dataset: Dataset,
    lam: float,
    cfg: LassoConfig = LassoConfig(),
    warm: np.ndarray | None = None,
) -> LassoFit:
    """Fit at one penalty value; ``warm`` is an original-scale start."""
    if not (lam >= 0 and math.isfinite(lam)):
        raise ValueError("lam must be nonnegative and finite")
    scales = _column_scales(dataset.x, cfg.standardize)
    xw = dataset.x / scales
    y = dataset.y.astype(np.float64)
    if warm is None:
        beta = np.zeros(dataset.d)
    else:
        warm = np.asarray(warm, dtype=np.float64)
        if warm.shape != (dataset.d,):
            raise ValueError(f"warm has shape {warm.shape}, expected ({dataset.d},)")
        beta = warm * scales
    beta, b0, converged = _irls_fit(xw, y, lam, cfg, beta, _initial_intercept(y, cfg))
    return LassoFit(
        beta=beta / scales,
        intercept_value=b0,
        lambda_selected=lam,
        cv_curve=[],
        converged=converged,
    )


def cv_select(dataset: Dataset, cfg: LassoConfig = LassoConfig()) -> LassoFit:
    """K-fold cross-validated fit along the lambda path.

    Indices are shuffled once with ``cfg.seed`` and split contiguously into
    ``k_folds`` folds.  Each fold's path is fitted with warm starts from the
    previous lambda; the held-out mean Poisson deviance is averaged across
    folds and the selected lambda follows ``cfg.cv_rule``.  The returned fit
    is refit on the full data down the path to the selected lambda.
    """
    n = dataset.n
    if cfg.k_folds > n:
        raise ValueError(f"k_folds={cfg.k_folds} exceeds n={n}")
    grid = lambda_grid(dataset, cfg)
    # fold fits reuse full-data column scales so lambda means the same thing
    # on every fold
    scales = _column_scales(dataset.x, cfg.standardize)
    xw = dataset.x / scales
    y = dataset.y.astype(np.float64)

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(n)
    folds = np.array_split(order, cfg.k_folds)

    deviance = np.empty((cfg.k_folds, grid.shape[0]))
    for f, held_out in enumerate(folds):
        mask = np.ones(n, dtype=bool)
        mask[held_out] = False
        xw_tr, y_tr = xw[mask], y[mask]
        xw_te, y_te = xw[~mask], y[~mask]
        beta = np.zeros(dataset.d)
        b0 = _initial_intercept(y_tr, cfg)
        for li, lam in enumerate(grid):
            beta, b0, _ = _irls_fit(xw_tr, y_tr, lam, cfg, beta, b0)
            eta_te = np.clip(b0 + xw_te @ beta, -WORK_ETA_CAP, WORK_ETA_CAP)
            deviance[f, li] = mean_poisson_deviance(y_te, np.exp(eta_te))

    mean_curve = deviance.mean(axis=0)
    sd_curve = deviance.std(axis=0, ddof=1)
    best = int(np.argmin(mean_curve))
    if cfg.cv_rule == "1se":
        bar = mean_curve[best] + sd_curve[best] / math.sqrt(cfg.k_folds)
        best = int(np.nonzero(mean_curve <= bar)[0][0])

    beta = np.zeros(dataset.d)
    b0 = _initial_intercept(y, cfg)
    converged = True
    for lam in grid[: best + 1]:
        beta, b0, converged = _irls_fit(xw, y, lam, cfg, beta, b0)
    curve = [
        (float(grid[i]), float(mean_curve[i]), float(sd_curve[i]))
        for i in range(grid.shape[0])
    ]
    return LassoFit(
        beta=beta / scales,
        intercept_value=b0,
        lambda_selected=float(grid[best]),
        cv_curve=curve,
        converged=converged,
    )


def penalized_objective(
    dataset: Dataset, beta: np.ndarray, intercept_value: float, lam: float
) -> float:
    """Original-scale objective ``(1/n) sum(mu - y*eta) + lam * |beta|_1``."""
    beta = np.asarray(beta, dtype=np.float64)
    eta = intercept_value + dataset.x @ beta
    with np.errstate(over="ignore"):
        nll = float(np.mean(np.exp(eta) - dataset.y * eta))
    return nll + lam * float(np.sum(np.abs(beta)))


def kkt_residuals(
    dataset: Dataset, fit: LassoFit, cfg: LassoConfig = LassoConfig()
) -> tuple[float, float]:
    """Stationarity violations of a fit at its selected penalty.

    With score ``s_j = (1/n) sum_i x_ij (y_i - mu_i)`` on the scale where
    the penalty applies, an exact solution has ``|s_j| <= lam`` wherever
    ``beta_j = 0`` and ``s_j = lam * sign(beta_j)`` elsewhere.  Returns the
    pair ``(max(0, max|s_zero| - lam), max|s_active - lam * sign|)``; both
    are zero (up to solver tolerance) at an exact solution.
    """
    scales = _column_scales(dataset.x, cfg.standardize)
    beta_w = fit.beta * scales
    xw = dataset.x / scales
    mu = np.exp(fit.intercept_value + xw @ beta_w)
    score = xw.T @ (dataset.y - mu) / dataset.n
    lam = fit.lambda_selected
    active = beta_w != 0.0
    zero_violation = 0.0
    if np.any(~active):
        zero_violation = max(0.0, float(np.max(np.abs(score[~active]))) - lam)
    sign_violation = 0.0
    if np.any(active):
        sign_violation = float(
            np.max(np.abs(score[active] - lam * np.sign(beta_w[active])))
        )
    return zero_violation, sign_violation
