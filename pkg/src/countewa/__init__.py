"""Sparse exponential-weights aggregation for high-dimensional count regression.

The package fits count-response regression models whose predictor is
``exp(x @ theta)`` by averaging Langevin chains over a Gibbs-type target
(empirical squared risk weighted by an inverse temperature, heavy-tailed
sparsity prior), with an l1-penalized Poisson baseline, synthetic data
generators, evaluation metrics, exact finite-grid checks of the underlying
variational identity, and a benchmark harness with a CLI front end.
"""

from .harness import (
    ExperimentSpec,
    RealDataSpec,
    ResultRow,
    ResultsTable,
    ScenarioSpec,
    emit_table,
    load_csv,
    run_real_data,
    run_simulation_study,
    save_csv,
)
from .lasso import (
    LassoConfig,
    LassoFit,
    cv_select,
    fit_poisson_lasso,
    kkt_residuals,
    lambda_grid,
    penalized_objective,
)
from .metrics import mde, mse, nsp
from .model import (
    Dataset,
    GibbsConfig,
    empirical_risk,
    linear_predictor,
    log_posterior,
    log_posterior_gradient,
    log_prior,
    log_prior_gradient,
    population_risk_mc,
    risk_gradient,
)
from .samplers import ChainConfig, ChainResult, Target, fit_ewa, lmc_run, mala_run
from .simulate import (
    FAMILIES,
    TrueModel,
    gen_design,
    gen_response,
    gen_theta_star,
)
from .verify import (
    DvIdentity,
    FiniteGrid,
    RateStudyResult,
    RateStudySpec,
    dv_check,
    gibbs_minimizer_check,
    run_rate_study,
)

__version__ = "0.1.0"

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
    "population_risk_mc",
    "ChainConfig",
    "ChainResult",
    "Target",
    "lmc_run",
    "mala_run",
    "fit_ewa",
    "LassoConfig",
    "LassoFit",
    "lambda_grid",
    "fit_poisson_lasso",
    "cv_select",
    "penalized_objective",
    "kkt_residuals",
    "FAMILIES",
    "TrueModel",
    "gen_theta_star",
    "gen_design",
    "gen_response",
    "mse",
    "nsp",
    "mde",
    "FiniteGrid",
    "DvIdentity",
    "dv_check",
    "gibbs_minimizer_check",
    "RateStudySpec",
    "RateStudyResult",
    "run_rate_study",
    "ScenarioSpec",
    "ExperimentSpec",
    "RealDataSpec",
    "ResultRow",
    "ResultsTable",
    "run_simulation_study",
    "run_real_data",
    "load_csv",
    "save_csv",
    "emit_table",
    "__version__",
]
