"""
Posterior-mean estimation on simulated sparse count data
=========================================================

Simulates a high-dimensional Poisson regression problem, fits the
cross-validated lasso baseline, then runs both Langevin chains from the
lasso solution and compares all three estimators on coefficient error
and prediction error.
"""

import numpy as np

from countewa.lasso import cv_select
from countewa.metrics import mde, mse, nsp
from countewa.model import Dataset, GibbsConfig
from countewa.samplers import ChainConfig, fit_ewa
from countewa.simulate import TrueModel, draw_design, draw_response, draw_theta_star

rng = np.random.default_rng(0)

# a 100-dimensional problem with only 5 active coordinates and 50
# observations: more parameters than data
d, s_star, n = 100, 5, 50
theta_star = draw_theta_star(d, s_star, rng)
model = TrueModel(theta_star)
x = draw_design(n, d, rng)
y = draw_response(x, model, rng)
dataset = Dataset(x, y)
print(f"n={n}, d={d}, active coordinates: {np.nonzero(theta_star)[0]}")

# the lasso fit doubles as the starting point of both chains
lasso = cv_select(dataset)
print(f"lasso selected lambda {lasso.lambda_selected:.4f}, "
      f"{np.count_nonzero(lasso.beta)} nonzero coefficients")

gibbs = GibbsConfig()         # lam=1, varsigma=0.1
chain = ChainConfig(seed=1)   # 25000 iterations, 5000 burn-in, auto step

for method in ("LMC", "MALA"):
    result = fit_ewa(dataset, gibbs, chain, init=lasso.beta, method=method)
    theta_hat = result.posterior_mean
    print(f"{method}: mse={mse(theta_hat, theta_star):.5f}  "
          f"nsp={nsp(dataset, theta_hat):.3f}  mde={mde(dataset, theta_hat):.3f}  "
          f"(step {result.final_step_size:.2e}, accept {result.acceptance_rate:.2f})")

print(f"LASSO: mse={mse(lasso.beta, theta_star):.5f}  "
      f"nsp={nsp(dataset, lasso.beta):.3f}  mde={mde(dataset, lasso.beta):.3f}")
