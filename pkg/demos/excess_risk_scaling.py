"""
Excess prediction risk as the sample grows
==========================================

A reduced-scale version of the scaling study: dimension grows with the
sample (d = 2n), the inverse temperature follows the linear rule, and the
excess population risk of the chain average is estimated by paired Monte
Carlo against the generating coefficients.  The full-protocol run (50
replications, n up to 800) lives in the slow test tier; this keeps the
chains short so it finishes in about a minute.
"""

from countewa.samplers import ChainConfig
from countewa.verify import RateStudySpec, run_rate_study

spec = RateStudySpec(
    n_values=(50, 100, 200),
    replications=3,
    mc_risk_samples=2000,
    chain=ChainConfig(n_iter=6000, burn_in=1500),
)
result = run_rate_study(spec, seed=0)

print(result.to_csv_text())
print(f"log-log slope across sizes: {result.slope:.2f}")
ratio = result.rows[-1].mean_excess / result.rows[0].mean_excess
print(f"excess at n={result.rows[-1].n} is {ratio:.2f} of its n={result.rows[0].n} value")
