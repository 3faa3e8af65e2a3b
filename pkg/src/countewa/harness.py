"""Benchmark harness: scenario specs, replication loops, and result tables.

A simulation study is a list of scenarios, each pinning the generating
process, the number of replications, the estimators to run, and their
configurations.  Replication ``r`` of a scenario draws its data with seed
``base_seed + r`` and runs its chains with seed ``base_seed + 1_000_000 + r``,
so studies are reproducible down to the bit and replications can run in
parallel without sharing a stream.  Real-data runs repeat random
train/test splits of a CSV file instead.

Results land in a flat table of (scenario, method, metric, mean, sd) rows
that can be emitted as CSV (raw values) or markdown (display-scaled
"mean (sd)" cells).
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .lasso import LassoConfig, cv_select
from .metrics import mde, mde_from_eta, mse, nsp, nsp_from_eta
from .model import Dataset, GibbsConfig
from .samplers import ChainConfig, fit_ewa
from .simulate import TrueModel, draw_design, draw_response, draw_theta_star

__all__ = [
    "METHODS",
    "SIMULATION_METRICS",
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
]

METHODS = ("LMC", "MALA", "LASSO")
SIMULATION_METRICS = ("mse", "nsp", "mde")
REAL_DATA_METRICS = ("nsp", "mde")

CHAIN_SEED_OFFSET = 1_000_000


def _check_methods(methods: tuple[str, ...]) -> tuple[str, ...]:
    methods = tuple(str(m).upper() for m in methods)
    if not methods:
        raise ValueError("methods must not be empty")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    if len(set(methods)) != len(methods):
        raise ValueError("methods must not repeat")
    return methods


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation scenario: generating process plus estimator settings.

    ``scale_hints`` maps metric names to display multipliers used only by
    the markdown emitter (e.g. ``{"mse": 10}`` shows mse values times ten).
    """

    n: int
    d: int
    s_star: int
    family: str = "poisson"
    alpha: float | None = None
    noisy: bool = False
    replications: int = 100
    methods: tuple[str, ...] = METHODS
    gibbs: GibbsConfig = field(default_factory=GibbsConfig)
    chain: ChainConfig = field(default_factory=ChainConfig)
    lasso: LassoConfig = field(default_factory=LassoConfig)
    base_seed: int = 0
    id: str = ""
    scale_hints: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be at least 1")
        if not 0 <= self.s_star <= self.d:
            raise ValueError("s_star must lie in [0, d]")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        object.__setattr__(self, "methods", _check_methods(tuple(self.methods)))
        if not self.id:
            label = f"{self.family}_n{self.n}_d{self.d}_s{self.s_star}"
            if self.family == "negbin":
                label += f"_a{self.alpha:g}"
            if self.noisy:
                label += "_noisy"
            object.__setattr__(self, "id", label)
        if any(ch in self.id for ch in ",\n\r"):
            raise ValueError("scenario id must not contain commas or newlines")
        for key, value in self.scale_hints.items():
            if key not in SIMULATION_METRICS:
                raise ValueError(f"scale hint for unknown metric {key!r}")
            if not (float(value) > 0 and math.isfinite(float(value))):
                raise ValueError("scale hints must be positive and finite")


@dataclass(frozen=True)
class ExperimentSpec:
    scenarios: tuple[ScenarioSpec, ...]

    def __post_init__(self) -> None:
        scenarios = tuple(self.scenarios)
        if not scenarios:
            raise ValueError("an experiment needs at least one scenario")
        ids = [s.id for s in scenarios]
        if len(set(ids)) != len(ids):
            raise ValueError("scenario ids must be unique")
        object.__setattr__(self, "scenarios", scenarios)


@dataclass(frozen=True)
class RealDataSpec:
    """Repeated random train/test evaluation on one CSV dataset."""

    response_column: str = "y"
    test_fraction: float = 180.0 / 601.0
    repeats: int = 100
    methods: tuple[str, ...] = METHODS
    gibbs: GibbsConfig = field(default_factory=GibbsConfig)
    chain: ChainConfig = field(default_factory=ChainConfig)
    lasso: LassoConfig = field(default_factory=lambda: LassoConfig(intercept=True))
    base_seed: int = 0
    add_intercept: bool = True
    scale_hints: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must lie in (0, 1)")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        object.__setattr__(self, "methods", _check_methods(tuple(self.methods)))
        for key, value in self.scale_hints.items():
            if key not in REAL_DATA_METRICS:
                raise ValueError(f"scale hint for unknown metric {key!r}")
            if not (float(value) > 0 and math.isfinite(float(value))):
                raise ValueError("scale hints must be positive and finite")


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    method: str
    metric: str
    mean: float
    sd: float
    scale_hint: float = 1.0


@dataclass
class ResultsTable:
    """Aggregated benchmark results plus divergence bookkeeping.

    ``exclusions`` counts replications dropped from the aggregates because
    a chain diverged, keyed by (scenario id, method).
    """

    rows: list[ResultRow] = field(default_factory=list)
    exclusions: dict[tuple[str, str], int] = field(default_factory=dict)

    def total_exclusions(self) -> int:
        return sum(self.exclusions.values())

    def to_csv_text(self) -> str:
        lines = ["scenario,method,metric,mean,sd"]
        for row in self.rows:
            lines.append(
                f"{row.scenario},{row.method},{row.metric},"
                f"{float(row.mean)!r},{float(row.sd)!r}"
            )
        return "\n".join(lines) + "\n"

    def to_markdown_text(self) -> str:
        scenarios: list[str] = []
        methods: list[str] = []
        metrics: list[str] = []
        cells: dict[tuple[str, str, str], tuple[float, float, float]] = {}
        for row in self.rows:
            if row.scenario not in scenarios:
                scenarios.append(row.scenario)
            if row.method not in methods:
                methods.append(row.method)
            if row.metric not in metrics:
                metrics.append(row.metric)
            cells[(row.scenario, row.method, row.metric)] = (
                row.mean,
                row.sd,
                row.scale_hint,
            )
        chunks: list[str] = []
        for scenario in scenarios:
            chunks.append(f"## {scenario}\n")
            header = "| metric | " + " | ".join(methods) + " |"
            rule = "|---" * (len(methods) + 1) + "|"
            lines = [header, rule]
            for metric in metrics:
                entries = []
                scale = 1.0
                for method in methods:
                    cell = cells.get((scenario, method, metric))
                    if cell is None:
                        entries.append("n/a")
                        continue
                    mean, sd, scale = cell
                    if math.isnan(mean):
                        entries.append("diverged")
                    else:
                        entries.append(f"{mean * scale:.3f} ({sd * scale:.3f})")
                label = metric if scale == 1.0 else f"{metric} (x{scale:g})"
                lines.append("| " + label + " | " + " | ".join(entries) + " |")
            chunks.append("\n".join(lines) + "\n")
        text = "\n".join(chunks)
        excluded = self.total_exclusions()
        if excluded:
            details = ", ".join(
                f"{scenario}/{method}: {count}"
                for (scenario, method), count in sorted(self.exclusions.items())
            )
            text += f"\nExcluded diverged replications: {details}\n"
        return text


def _simulation_replication(args: tuple) -> tuple[int, dict, dict]:
    scenario, r = args
    data_seed = scenario.base_seed + r
    chain_seed = scenario.base_seed + CHAIN_SEED_OFFSET + r
    rng = np.random.default_rng(data_seed)
    theta_star = draw_theta_star(scenario.d, scenario.s_star, rng)
    model = TrueModel(
        theta_star, family=scenario.family, alpha=scenario.alpha, noisy=scenario.noisy
    )
    x = draw_design(scenario.n, scenario.d, rng)
    y = draw_response(x, model, rng)
    dataset = Dataset(x, y)

    # the lasso solution doubles as the chain initializer, so it is fitted
    # even when LASSO is not among the reported methods
    lasso_fit = cv_select(dataset, replace(scenario.lasso, seed=data_seed))

    values: dict[tuple[str, str], float] = {}
    diverged: dict[str, bool] = {}
    for method in scenario.methods:
        if method == "LASSO":
            theta_hat = lasso_fit.beta
            diverged[method] = False
        else:
            result = fit_ewa(
                dataset,
                scenario.gibbs,
                replace(scenario.chain, seed=chain_seed),
                init=lasso_fit.beta,
                method=method,
            )
            diverged[method] = result.diverged
            if result.diverged:
                continue
            theta_hat = result.posterior_mean
        values[(method, "mse")] = mse(theta_hat, theta_star)
        values[(method, "nsp")] = nsp(dataset, theta_hat)
        values[(method, "mde")] = mde(dataset, theta_hat)
    return r, values, diverged


def _aggregate(
    per_rep: list[tuple[int, dict, dict]],
    scenario_id: str,
    methods: tuple[str, ...],
    metrics: tuple[str, ...],
    scale_hints: dict,
    table: ResultsTable,
) -> None:
    per_rep = sorted(per_rep)
    for method in methods:
        excluded = sum(1 for _, _, div in per_rep if div.get(method, False))
        if excluded:
            table.exclusions[(scenario_id, method)] = excluded
        for metric in metrics:
            samples = np.array(
                [
                    vals[(method, metric)]
                    for _, vals, _ in per_rep
                    if (method, metric) in vals
                ]
            )
            if samples.size:
                mean = float(samples.mean())
                sd = float(samples.std(ddof=1)) if samples.size > 1 else 0.0
            else:
                mean = math.nan
                sd = math.nan
            table.rows.append(
                ResultRow(
                    scenario=scenario_id,
                    method=method,
                    metric=metric,
                    mean=mean,
                    sd=sd,
                    scale_hint=float(scale_hints.get(metric, 1.0)),
                )
            )


def run_simulation_study(spec: ExperimentSpec, threads: int = 1) -> ResultsTable:
    """Run every scenario and aggregate metrics across replications.

    Replications are independent and may run in ``threads`` worker
    processes; results are identical to the sequential order because
    aggregation sorts by replication index.
    """
    table = ResultsTable()
    for scenario in spec.scenarios:
        tasks = [(scenario, r) for r in range(scenario.replications)]
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                per_rep = list(pool.map(_simulation_replication, tasks, chunksize=1))
        else:
            per_rep = [_simulation_replication(t) for t in tasks]
        _aggregate(
            per_rep,
            scenario.id,
            scenario.methods,
            SIMULATION_METRICS,
            scenario.scale_hints,
            table,
        )
    return table


def _real_replication(args: tuple) -> tuple[int, dict, dict]:
    x, y, spec, repeat, const_idx = args
    n = x.shape[0]
    rng = np.random.default_rng(spec.base_seed + repeat)
    order = rng.permutation(n)
    n_train = round(n * (1.0 - spec.test_fraction))
    if not 1 <= n_train < n:
        raise ValueError("test_fraction leaves an empty train or test set")
    train, test = order[:n_train], order[n_train:]
    ds_train = Dataset(x[train], y[train])
    x_test, y_test = x[test], y[test]

    lasso_fit = cv_select(ds_train, replace(spec.lasso, seed=spec.base_seed + repeat))
    init = lasso_fit.beta.copy()
    if const_idx is not None:
        # fold the unpenalized intercept into the constant column so the
        # chains start from the lasso predictor
        init[const_idx] += lasso_fit.intercept_value

    values: dict[tuple[str, str], float] = {}
    diverged: dict[str, bool] = {}
    for method in spec.methods:
        if method == "LASSO":
            eta_test = lasso_fit.intercept_value + x_test @ lasso_fit.beta
            diverged[method] = False
        else:
            result = fit_ewa(
                ds_train,
                spec.gibbs,
                replace(spec.chain, seed=spec.base_seed + CHAIN_SEED_OFFSET + repeat),
                init=init,
                method=method,
            )
            diverged[method] = result.diverged
            if result.diverged:
                continue
            eta_test = x_test @ result.posterior_mean
        values[(method, "nsp")] = nsp_from_eta(y_test, eta_test)
        values[(method, "mde")] = mde_from_eta(y_test, eta_test)
    return repeat, values, diverged


def run_real_data(
    path: str | Path, spec: RealDataSpec, threads: int = 1
) -> ResultsTable:
    """Repeated random train/test evaluation of all methods on a CSV file.

    The file is loaded once (appending a constant column when
    ``spec.add_intercept`` is set); each repeat shuffles the rows with seed
    ``base_seed + repeat``, trains on ``round(n * (1 - test_fraction))``
    observations, and scores held-out squared error and deviance.
    """
    path = Path(path)
    dataset = load_csv(path, spec.response_column, add_intercept=spec.add_intercept)
    const_idx = dataset.d - 1 if spec.add_intercept else None
    tasks = [
        (dataset.x, dataset.y, spec, repeat, const_idx)
        for repeat in range(spec.repeats)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            per_rep = list(pool.map(_real_replication, tasks, chunksize=1))
    else:
        per_rep = [_real_replication(t) for t in tasks]
    table = ResultsTable()
    _aggregate(
        per_rep,
        path.stem,
        spec.methods,
        REAL_DATA_METRICS,
        spec.scale_hints,
        table,
    )
    return table


def load_csv(
    path: str | Path, response_column: str = "y", add_intercept: bool = False
) -> Dataset:
    """Read a numeric CSV with a header row into a :class:`Dataset`.

    All columns except ``response_column`` become features in header order;
    ``add_intercept`` appends a constant-one column after them.  Raises
    with row and column coordinates on non-numeric cells and rejects
    duplicate or missing column names.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [name.strip() for name in header]
        if len(set(header)) != len(header):
            raise ValueError(f"{path}: duplicate column names in header")
        if response_column not in header:
            raise ValueError(
                f"{path}: response column {response_column!r} not found in header"
            )
        y_idx = header.index(response_column)
        rows: list[list[float]] = []
        for line_no, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise ValueError(
                    f"{path}: line {line_no} has {len(record)} fields, "
                    f"expected {len(header)}"
                )
            parsed = []
            for name, cell in zip(header, record):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at line {line_no}, "
                        f"column {name!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=np.float64)
    y = data[:, y_idx]
    x = np.delete(data, y_idx, axis=1)
    if x.shape[1] == 0 and not add_intercept:
        raise ValueError(f"{path}: no feature columns")
    if add_intercept:
        x = np.hstack([x, np.ones((x.shape[0], 1))])
    return Dataset(x, y)


def save_csv(dataset: Dataset, path: str | Path, response_column: str = "y") -> None:
    """Write a dataset as CSV with columns ``x1..xd`` plus the response."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(dataset.d)] + [response_column])
        for i in range(dataset.n):
            writer.writerow([repr(float(v)) for v in dataset.x[i]] + [int(dataset.y[i])])


def emit_table(
    table: ResultsTable, fmt: str = "csv", path: str | Path | None = None
) -> str:
    """Render a results table as ``"csv"`` or ``"markdown"`` text.

    Returns the text and also writes it to ``path`` when given.  The CSV
    schema is exactly ``scenario,method,metric,mean,sd`` with raw
    (unscaled) values; markdown applies the display scale hints.
    """
    if not table.rows:
        raise ValueError("results table has no rows")
    if fmt == "csv":
        text = table.to_csv_text()
    elif fmt == "markdown":
        text = table.to_markdown_text()
    else:
        raise ValueError(f'format must be "csv" or "markdown", got {fmt!r}')
    if path is not None:
        Path(path).write_text(text)
    return text
