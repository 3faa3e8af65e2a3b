"""Command line front end.

Subcommands:

- ``simulate``: draw one synthetic dataset and write it as CSV.
- ``bench``: run a simulation study described by a JSON config.
- ``realdata``: repeated train/test evaluation on a CSV file.
- ``rate``: excess-risk decay study across sample sizes.
- ``check``: exact finite-grid checks of the variational identity.
- ``fit``: fit one dataset and print the estimate and in-sample metrics.

Exit codes: 0 on success, 2 on validation errors (bad flags, malformed
config or CSV), 3 when the run finished but at least one chain diverged.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .harness import (
    ExperimentSpec,
    RealDataSpec,
    ResultsTable,
    ScenarioSpec,
    emit_table,
    load_csv,
    run_real_data,
    run_simulation_study,
    save_csv,
)
from .lasso import LassoConfig, cv_select
from .metrics import mde, nsp
from .model import Dataset, GibbsConfig
from .samplers import ChainConfig, fit_ewa
from .simulate import FAMILIES, TrueModel, gen_design, gen_response, gen_theta_star
from .verify import (
    FiniteGrid,
    RateStudySpec,
    dv_check,
    gibbs_minimizer_check,
    run_rate_study,
)

__all__ = ["main", "parse_experiment", "parse_real_data"]


def _reject_unknown(doc: dict, allowed: set[str], context: str) -> None:
    if not isinstance(doc, dict):
        raise ValueError(f"{context} must be a JSON object")
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ValueError(f"unknown keys in {context}: {', '.join(unknown)}")


def _parse_gibbs(doc: dict) -> GibbsConfig:
    _reject_unknown(doc, {"lam", "varsigma", "c1", "eta_cap"}, "gibbs")
    kwargs = dict(doc)
    if "c1" in kwargs:
        c1 = kwargs["c1"]
        if c1 is None or c1 == "unbounded":
            kwargs["c1"] = math.inf
    return GibbsConfig(**kwargs)


def _parse_chain(doc: dict) -> ChainConfig:
    _reject_unknown(
        doc,
        {"n_iter", "burn_in", "step_size", "adapt_target", "seed", "store_trajectory"},
        "chain",
    )
    return ChainConfig(**doc)


def _parse_lasso(doc: dict) -> LassoConfig:
    _reject_unknown(
        doc,
        {
            "n_lambda",
            "lambda_min_ratio",
            "k_folds",
            "intercept",
            "standardize",
            "max_irls",
            "cd_tol",
            "seed",
            "cv_rule",
        },
        "lasso",
    )
    return LassoConfig(**doc)


_SCENARIO_KEYS = {
    "n",
    "d",
    "s_star",
    "family",
    "alpha",
    "noisy",
    "replications",
    "methods",
    "gibbs",
    "chain",
    "lasso",
    "base_seed",
    "id",
    "scale_hints",
}


def _parse_scenario(doc: dict) -> ScenarioSpec:
    _reject_unknown(doc, _SCENARIO_KEYS, "scenario")
    kwargs = dict(doc)
    if "methods" in kwargs:
        kwargs["methods"] = tuple(kwargs["methods"])
    if "gibbs" in kwargs:
        kwargs["gibbs"] = _parse_gibbs(kwargs["gibbs"])
    if "chain" in kwargs:
        kwargs["chain"] = _parse_chain(kwargs["chain"])
    if "lasso" in kwargs:
        kwargs["lasso"] = _parse_lasso(kwargs["lasso"])
    return ScenarioSpec(**kwargs)


def parse_experiment(doc: dict) -> ExperimentSpec:
    """Build an :class:`ExperimentSpec` from a JSON document, rejecting
    unknown keys at every level."""
    _reject_unknown(doc, {"scenarios"}, "experiment config")
    scenarios = doc.get("scenarios")
    if not isinstance(scenarios, list) or not scenarios:
        raise ValueError('experiment config needs a nonempty "scenarios" list')
    return ExperimentSpec(scenarios=tuple(_parse_scenario(s) for s in scenarios))


_REAL_DATA_KEYS = {
    "response_column",
    "test_fraction",
    "repeats",
    "methods",
    "gibbs",
    "chain",
    "lasso",
    "base_seed",
    "add_intercept",
    "scale_hints",
}


def parse_real_data(doc: dict) -> RealDataSpec:
    """Build a :class:`RealDataSpec` from a JSON document."""
    _reject_unknown(doc, _REAL_DATA_KEYS, "real-data config")
    kwargs = dict(doc)
    if "methods" in kwargs:
        kwargs["methods"] = tuple(kwargs["methods"])
    if "gibbs" in kwargs:
        kwargs["gibbs"] = _parse_gibbs(kwargs["gibbs"])
    if "chain" in kwargs:
        kwargs["chain"] = _parse_chain(kwargs["chain"])
    if "lasso" in kwargs:
        kwargs["lasso"] = _parse_lasso(kwargs["lasso"])
    return RealDataSpec(**kwargs)


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None


class _Multiplier:
    """Picklable d = round(mult * n) rule for the rate study."""

    def __init__(self, mult: float):
        if not mult > 0:
            raise ValueError("dimension multiplier must be positive")
        self.mult = float(mult)

    def __call__(self, n: int) -> int:
        return max(1, int(round(self.mult * n)))


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="override the base seed")
    parser.add_argument("--out", help="output file path")
    parser.add_argument(
        "--format", choices=("csv", "markdown"), default="csv", help="output format"
    )
    parser.add_argument(
        "--threads", type=int, default=1, help="worker processes for replications"
    )


def _emit(table: ResultsTable, args: argparse.Namespace) -> None:
    text = emit_table(table, fmt=args.format, path=args.out)
    if args.out:
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    excluded = table.total_exclusions()
    if excluded:
        print(f"warning: {excluded} diverged replications excluded", file=sys.stderr)


def _cmd_simulate(args: argparse.Namespace) -> int:
    seed = 0 if args.seed is None else args.seed
    alpha = args.alpha if args.family == "negbin" else None
    theta_star = gen_theta_star(args.d, args.s_star, seed)
    model = TrueModel(theta_star, family=args.family, alpha=alpha, noisy=args.noisy)
    x = gen_design(args.n, args.d, seed + 1)
    y = gen_response(x, model, seed + 2)
    dataset = Dataset(x, y)
    out = args.out or "dataset.csv"
    save_csv(dataset, out, response_column=args.response)
    print(f"wrote {out} ({dataset.n} rows, {dataset.d} features)")
    if args.theta_out:
        Path(args.theta_out).write_text(
            "theta_star\n" + "\n".join(repr(float(v)) for v in theta_star) + "\n"
        )
        print(f"wrote {args.theta_out}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    if not args.config:
        raise ValueError("bench requires --config")
    spec = parse_experiment(_load_config(args.config))
    if args.seed is not None:
        spec = ExperimentSpec(
            scenarios=tuple(
                replace(s, base_seed=args.seed) for s in spec.scenarios
            )
        )
    table = run_simulation_study(spec, threads=args.threads)
    _emit(table, args)
    return 3 if table.total_exclusions() else 0


def _cmd_realdata(args: argparse.Namespace) -> int:
    doc = _load_config(args.config) if args.config else {}
    spec = parse_real_data(doc)
    if args.response is not None:
        spec = replace(spec, response_column=args.response)
    if args.repeats is not None:
        spec = replace(spec, repeats=args.repeats)
    if args.seed is not None:
        spec = replace(spec, base_seed=args.seed)
    table = run_real_data(args.csv, spec, threads=args.threads)
    _emit(table, args)
    return 3 if table.total_exclusions() else 0


def _cmd_rate(args: argparse.Namespace) -> int:
    seed = 0 if args.seed is None else args.seed
    spec = RateStudySpec(
        family=args.family,
        s_star=args.s_star,
        alpha=args.alpha if args.family == "negbin" else None,
        n_values=tuple(args.n_values),
        d_rule=_Multiplier(args.d_mult),
        replications=args.replications,
        mc_risk_samples=args.mc_samples,
        tuning_rule=args.tuning,
        lam=args.lam,
        varsigma=args.varsigma,
        init_rule=args.init,
    )
    result = run_rate_study(spec, seed=seed, threads=args.threads)
    text = result.to_csv_text()
    if args.format == "markdown":
        lines = ["| n | d | mean_excess | sd | slope_so_far |", "|---|---|---|---|---|"]
        for row in result.rows:
            lines.append(
                f"| {row.n} | {row.d} | {row.mean_excess:.6g} | {row.sd:.6g} "
                f"| {row.slope_so_far:.4g} |"
            )
        text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    print(f"overall slope: {result.slope:.4f}")
    diverged = sum(row.n_diverged for row in result.rows)
    if diverged:
        print(f"warning: {diverged} diverged replications excluded", file=sys.stderr)
        return 3
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    seed = 0 if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    worst_gap = 0.0
    for _ in range(args.grids):
        k = int(rng.integers(2, args.max_points + 1))
        d = int(rng.integers(1, 6))
        points = rng.standard_normal((k, d))
        weights = rng.dirichlet(np.ones(k))
        h = rng.standard_normal(k) * 10.0
        worst_gap = max(worst_gap, dv_check(FiniteGrid(points, weights), h).gap)
    print(f"variational identity: max gap {worst_gap:.3e} over {args.grids} grids")
    failures = 0
    for i in range(args.instances):
        k = int(rng.integers(2, args.max_points + 1))
        d = int(rng.integers(1, 6))
        grid = FiniteGrid(rng.standard_normal((k, d)), rng.dirichlet(np.ones(k)))
        risks = rng.random(k) * 5.0
        lam = float(rng.random() * 10.0 + 0.1)
        if not gibbs_minimizer_check(grid, risks, lam, seed=seed + i):
            failures += 1
    print(
        f"exponential-weights optimality: {args.instances - failures}/"
        f"{args.instances} instances beat all random competitors"
    )
    if worst_gap > 1e-10 or failures:
        print("check failed", file=sys.stderr)
        return 2
    print("all checks passed")
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    seed = 0 if args.seed is None else args.seed
    dataset = load_csv(args.csv, args.response, add_intercept=args.add_intercept)
    lasso_cfg = LassoConfig(intercept=args.add_intercept, seed=seed)
    lasso_fit = cv_select(dataset, lasso_cfg)
    const_idx = dataset.d - 1 if args.add_intercept else None
    if args.method == "LASSO":
        theta_hat = lasso_fit.beta.copy()
        if const_idx is not None:
            theta_hat[const_idx] += lasso_fit.intercept_value
        diverged = False
    else:
        init = lasso_fit.beta.copy()
        if const_idx is not None:
            init[const_idx] += lasso_fit.intercept_value
        gibbs = GibbsConfig(lam=args.lam, varsigma=args.varsigma)
        chain = ChainConfig(n_iter=args.n_iter, burn_in=args.burn_in, seed=seed)
        result = fit_ewa(dataset, gibbs, chain, init=init, method=args.method)
        theta_hat = result.posterior_mean
        diverged = result.diverged
    active = np.nonzero(theta_hat)[0]
    print(f"method: {args.method}")
    print(f"nonzero coefficients: {active.size}/{dataset.d}")
    for j in active[:50]:
        print(f"  theta[{j}] = {theta_hat[j]:+.6f}")
    if active.size > 50:
        print(f"  ... {active.size - 50} more")
    print(f"in-sample nsp: {nsp(dataset, theta_hat):.6f}")
    print(f"in-sample mde: {mde(dataset, theta_hat):.6f}")
    if diverged:
        print("warning: chain diverged; estimate is the initial point", file=sys.stderr)
        return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="countewa",
        description="Sparse exponential-weights aggregation for count regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw one synthetic dataset and write CSV")
    _common_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--s-star", type=int, required=True)
    p.add_argument("--family", choices=FAMILIES, default="poisson")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--noisy", action="store_true")
    p.add_argument("--response", default="y", help="response column name")
    p.add_argument("--theta-out", help="optional CSV path for theta_star")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("bench", help="run a simulation study from a JSON config")
    _common_flags(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("realdata", help="repeated train/test evaluation on a CSV")
    _common_flags(p)
    p.add_argument("--csv", required=True, help="input CSV file")
    p.add_argument("--response", default=None, help="response column name")
    p.add_argument("--repeats", type=int, default=None)
    p.set_defaults(func=_cmd_realdata)

    p = sub.add_parser("rate", help="excess-risk decay study across sample sizes")
    _common_flags(p)
    p.add_argument("--family", choices=FAMILIES, default="poisson")
    p.add_argument("--s-star", type=int, default=3)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument(
        "--n-values", type=int, nargs="+", default=[100, 200, 400, 800]
    )
    p.add_argument("--d-mult", type=float, default=2.0, help="dimension = d_mult * n")
    p.add_argument("--replications", type=int, default=50)
    p.add_argument("--mc-samples", type=int, default=4000)
    p.add_argument(
        "--tuning", choices=("sqrt_n", "linear_n", "fixed"), default="linear_n"
    )
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--varsigma", type=float, default=None)
    p.add_argument(
        "--init", choices=("lasso", "zeros"), default="lasso",
        help="chain start: cross-validated lasso fit or the zero vector",
    )
    p.set_defaults(func=_cmd_rate)

    p = sub.add_parser("check", help="finite-grid variational identity checks")
    _common_flags(p)
    p.add_argument("--grids", type=int, default=200)
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--max-points", type=int, default=40)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("fit", help="fit one dataset and print the estimate")
    _common_flags(p)
    p.add_argument("--csv", required=True, help="input CSV file")
    p.add_argument("--response", default="y")
    p.add_argument("--method", choices=("LMC", "MALA", "LASSO"), default="MALA")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--varsigma", type=float, default=0.1)
    p.add_argument("--n-iter", type=int, default=25000)
    p.add_argument("--burn-in", type=int, default=5000)
    p.add_argument(
        "--no-intercept",
        dest="add_intercept",
        action="store_false",
        help="do not append a constant column",
    )
    p.set_defaults(func=_cmd_fit, add_intercept=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
