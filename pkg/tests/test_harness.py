"""Harness tests: seeding scheme, aggregation, table emission, CSV I/O,
and real-data evaluation on a synthetic file."""

import math

import numpy as np
import pytest

from countewa.harness import (
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
from countewa.lasso import LassoConfig
from countewa.model import Dataset, GibbsConfig
from countewa.samplers import ChainConfig
from countewa.simulate import TrueModel, gen_design, gen_response, gen_theta_star


def tiny_scenario(**overrides):
    defaults = dict(
        n=30,
        d=6,
        s_star=2,
        replications=2,
        chain=ChainConfig(n_iter=300, burn_in=100),
        lasso=LassoConfig(n_lambda=20),
        base_seed=0,
    )
    defaults.update(overrides)
    return ScenarioSpec(**defaults)


class TestScenarioSpec:
    def test_id_derivation(self):
        assert tiny_scenario().id == "poisson_n30_d6_s2"
        negbin = tiny_scenario(family="negbin", alpha=2.0)
        assert negbin.id == "negbin_n30_d6_s2_a2"
        noisy = tiny_scenario(noisy=True)
        assert noisy.id.endswith("_noisy")

    def test_validation(self):
        with pytest.raises(ValueError):
            tiny_scenario(s_star=7)
        with pytest.raises(ValueError):
            tiny_scenario(replications=0)
        with pytest.raises(ValueError):
            tiny_scenario(methods=("LMC", "SGD"))
        with pytest.raises(ValueError):
            tiny_scenario(methods=())
        with pytest.raises(ValueError):
            tiny_scenario(methods=("LMC", "LMC"))
        with pytest.raises(ValueError):
            tiny_scenario(id="has,comma")
        with pytest.raises(ValueError):
            tiny_scenario(scale_hints={"rmse": 10})
        with pytest.raises(ValueError):
            tiny_scenario(scale_hints={"mse": -1.0})

    def test_experiment_requires_unique_ids(self):
        s = tiny_scenario()
        with pytest.raises(ValueError):
            ExperimentSpec(scenarios=(s, s))
        with pytest.raises(ValueError):
            ExperimentSpec(scenarios=())


class TestResultsTable:
    def build(self):
        return ResultsTable(
            rows=[
                ResultRow("scn", "LMC", "mse", 0.00352, 0.00161, 10.0),
                ResultRow("scn", "LMC", "nsp", 0.318, 0.191, 1.0),
            ]
        )

    def test_csv_schema_and_values(self):
        text = self.build().to_csv_text()
        lines = text.strip().splitlines()
        assert lines[0] == "scenario,method,metric,mean,sd"
        assert lines[1] == "scn,LMC,mse,0.00352,0.00161"

    def test_markdown_applies_scale_hints(self):
        text = self.build().to_markdown_text()
        # raw 0.00352 (0.00161) at display scale x10 renders as 0.035 (0.016)
        assert "0.035 (0.016)" in text
        assert "mse (x10)" in text
        assert "0.318 (0.191)" in text

    def test_markdown_reports_exclusions(self):
        table = self.build()
        table.exclusions[("scn", "LMC")] = 3
        assert "3" in table.to_markdown_text().splitlines()[-1]

    def test_emit_validates(self):
        with pytest.raises(ValueError):
            emit_table(ResultsTable(), fmt="csv")
        with pytest.raises(ValueError):
            emit_table(self.build(), fmt="tsv")
        with pytest.raises(OSError):
            emit_table(self.build(), fmt="csv", path="/no/such/dir/out.csv")

    def test_emit_writes_file(self, tmp_path):
        out = tmp_path / "table.csv"
        text = emit_table(self.build(), fmt="csv", path=out)
        assert out.read_text() == text


class TestSimulationStudy:
    def test_row_layout_and_determinism(self):
        spec = ExperimentSpec(scenarios=(tiny_scenario(),))
        table = run_simulation_study(spec)
        # 3 methods x 3 metrics
        assert len(table.rows) == 9
        methods = [row.method for row in table.rows]
        assert methods == ["LMC"] * 3 + ["MALA"] * 3 + ["LASSO"] * 3
        assert all(math.isfinite(row.mean) for row in table.rows)
        assert all(row.sd >= 0 for row in table.rows)
        assert table.total_exclusions() == 0
        rerun = run_simulation_study(spec)
        assert rerun.to_csv_text() == table.to_csv_text()

    def test_threads_match_sequential(self):
        spec = ExperimentSpec(scenarios=(tiny_scenario(replications=3),))
        sequential = run_simulation_study(spec, threads=1)
        parallel = run_simulation_study(spec, threads=3)
        assert parallel.to_csv_text() == sequential.to_csv_text()

    def test_base_seed_changes_results(self):
        a = run_simulation_study(ExperimentSpec(scenarios=(tiny_scenario(),)))
        b = run_simulation_study(
            ExperimentSpec(scenarios=(tiny_scenario(base_seed=1000),))
        )
        assert a.to_csv_text() != b.to_csv_text()

    def test_method_subset(self):
        spec = ExperimentSpec(scenarios=(tiny_scenario(methods=("LASSO",)),))
        table = run_simulation_study(spec)
        assert {row.method for row in table.rows} == {"LASSO"}
        assert len(table.rows) == 3


class TestCsvRoundTrip:
    def test_save_and_load(self, tmp_path):
        theta = gen_theta_star(4, 2, 0)
        x = gen_design(12, 4, 1)
        y = gen_response(x, TrueModel(theta), 2)
        ds = Dataset(x, y)
        path = tmp_path / "data.csv"
        save_csv(ds, path)
        loaded = load_csv(path, "y")
        assert np.array_equal(loaded.x, ds.x)
        assert np.array_equal(loaded.y, ds.y)

    def test_add_intercept_appends_ones(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,y\n1.5,2\n2.5,0\n")
        ds = load_csv(path, "y", add_intercept=True)
        assert ds.d == 2
        assert np.all(ds.x[:, 1] == 1.0)
        assert list(ds.x[:, 0]) == [1.5, 2.5]

    def test_response_anywhere_in_header(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("y,a,b\n3,1.0,2.0\n1,0.5,0.5\n")
        ds = load_csv(path, "y")
        assert ds.d == 2
        assert list(ds.y) == [3, 1]
        assert list(ds.x[0]) == [1.0, 2.0]

    def test_missing_response_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="naffairs"):
            load_csv(path, "naffairs")

    def test_non_numeric_cell_coordinates(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,y\n1.0,2\noops,3\n")
        with pytest.raises(ValueError, match="line 3.*column 'a'"):
            load_csv(path, "y")

    def test_duplicate_header(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,a,y\n1,2,3\n")
        with pytest.raises(ValueError, match="duplicate"):
            load_csv(path, "y")

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,y\n1,2\n3\n")
        with pytest.raises(ValueError, match="line 3"):
            load_csv(path, "y")

    def test_negative_or_fractional_response(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,y\n1.0,-2\n")
        with pytest.raises(ValueError):
            load_csv(path, "y")
        path.write_text("a,y\n1.0,2.5\n")
        with pytest.raises(ValueError):
            load_csv(path, "y")

    def test_empty_file_and_no_rows(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            load_csv(path, "y")
        path.write_text("a,y\n")
        with pytest.raises(ValueError, match="no data rows"):
            load_csv(path, "y")


def write_synthetic_csv(path, n=90, d=5, seed=0):
    theta = gen_theta_star(d, 2, seed)
    x = gen_design(n, d, seed + 1)
    y = gen_response(x, TrueModel(theta), seed + 2)
    save_csv(Dataset(x, y), path)


class TestRealData:
    def spec(self, **overrides):
        defaults = dict(
            repeats=3,
            test_fraction=0.3,
            chain=ChainConfig(n_iter=400, burn_in=100),
            lasso=LassoConfig(n_lambda=20, intercept=True),
        )
        defaults.update(overrides)
        return RealDataSpec(**defaults)

    def test_runs_and_is_deterministic(self, tmp_path):
        path = tmp_path / "counts.csv"
        write_synthetic_csv(path)
        table = run_real_data(path, self.spec())
        # 3 methods x 2 metrics (no coefficient truth on real data)
        assert len(table.rows) == 6
        assert {row.metric for row in table.rows} == {"nsp", "mde"}
        assert all(math.isfinite(row.mean) for row in table.rows)
        assert table.rows[0].scenario == "counts"
        rerun = run_real_data(path, self.spec())
        assert rerun.to_csv_text() == table.to_csv_text()

    def test_threads_match_sequential(self, tmp_path):
        path = tmp_path / "counts.csv"
        write_synthetic_csv(path, seed=5)
        sequential = run_real_data(path, self.spec())
        parallel = run_real_data(path, self.spec(), threads=2)
        assert parallel.to_csv_text() == sequential.to_csv_text()

    def test_split_sizes_validated(self, tmp_path):
        path = tmp_path / "counts.csv"
        write_synthetic_csv(path, n=10)
        with pytest.raises(ValueError):
            run_real_data(path, self.spec(test_fraction=0.999))

    def test_validation(self):
        with pytest.raises(ValueError):
            RealDataSpec(test_fraction=0.0)
        with pytest.raises(ValueError):
            RealDataSpec(repeats=0)
        with pytest.raises(ValueError):
            RealDataSpec(methods=("XYZ",))
