"""
A small benchmark study rendered as a markdown table
====================================================

Runs a reduced replication count of the simulation benchmark on two
scenarios (Poisson and overdispersed negative binomial) and prints the
aggregated table the way the markdown emitter renders it, scale hints and
all.  The full-protocol studies behind the acceptance tests use the same
harness with 100 replications and default chain lengths.
"""

from countewa.harness import ExperimentSpec, ScenarioSpec, run_simulation_study
from countewa.lasso import LassoConfig
from countewa.samplers import ChainConfig

# short chains and a light lasso grid keep this to about a minute
chain = ChainConfig(n_iter=4000, burn_in=1000)
lasso = LassoConfig(n_lambda=40)

spec = ExperimentSpec(
    scenarios=(
        ScenarioSpec(
            n=40, d=60, s_star=4, replications=3,
            chain=chain, lasso=lasso, scale_hints={"mse": 10},
        ),
        ScenarioSpec(
            n=40, d=60, s_star=4, family="negbin", alpha=2.0, replications=3,
            chain=chain, lasso=lasso, scale_hints={"mse": 10},
        ),
    )
)

table = run_simulation_study(spec)
print(table.to_markdown_text())
print("raw csv:")
print(table.to_csv_text())
