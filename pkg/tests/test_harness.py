import json
import math

import numpy as np
import pytest

from enselect.copula import EquicorrelatedSpec, equicorrelated_model
from enselect.data import loads_dataset
from enselect.errors import ConfigError
from enselect.harness import (
    DatasetSource,
    ExperimentConfig,
    SampleConfig,
    SaturationConfig,
    ValidationConfig,
    derive_seed,
    error_curve_artifacts,
    fit_copula_artifacts,
    run_copula_validation,
    run_error_curve,
    run_saturation,
    sample_artifacts,
)
from enselect.theory import saturation_floor


def synthetic_config(**overrides):
    base = {
        "dataset": {"equicorrelated": {"m": 4, "rho": 0.3, "alpha": 0.75}, "n": 2000},
        "methods": ["top_k", "greedy_mi_direct"],
        "aggregators": ["map", "mv"],
        "k_range": [1, 2, 3],
        "split": {"train_fraction": 0.8, "seed": 11, "num_splits": 3},
        "seed": 99,
    }
    base.update(overrides)
    return ExperimentConfig.from_dict(base)


class TestDeriveSeed:
    def test_stable_and_distinct(self):
        a = derive_seed(7, "dataset")
        assert a == derive_seed(7, "dataset")
        assert a != derive_seed(7, "mv_tie")
        assert a != derive_seed(8, "dataset")
        assert 0 <= a < 2**64


class TestConfigParsing:
    def test_round_trip(self):
        config = synthetic_config()
        again = ExperimentConfig.from_dict(config.to_dict())
        assert again == config

    def test_k_range_object_form(self):
        config = synthetic_config(k_range={"min": 2, "max": 4})
        assert config.k_values == (2, 3, 4)

    def test_missing_key_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"methods": ["top_k"]})

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            synthetic_config(methods=["top_k", "oracle"])

    def test_unknown_aggregator_rejected(self):
        with pytest.raises(ConfigError):
            synthetic_config(aggregators=["map", "mean"])

    def test_source_must_be_unique(self):
        with pytest.raises(ConfigError):
            DatasetSource.from_dict(
                {"path": "x.csv", "equicorrelated": {"m": 2, "rho": 0.1, "alpha": 0.8}, "n": 5}
            )

    def test_synthetic_needs_n(self):
        with pytest.raises(ConfigError):
            DatasetSource.from_dict({"equicorrelated": {"m": 2, "rho": 0.1, "alpha": 0.8}})

    def test_inline_csv_source(self):
        src = DatasetSource.from_dict({"csv": "label,a\n+1,+1\n-1,+1\n"})
        d = src.resolve(0)
        assert d.n_rows == 2

    def test_copula_model_source(self):
        model = equicorrelated_model(EquicorrelatedSpec(m=3, rho=0.2, alpha=0.8))
        src = DatasetSource.from_dict({"copula_model": model.to_dict(), "n": 50})
        assert src.resolve(3).n_models == 3


class TestRunErrorCurve:
    def test_row_count_and_ranges(self):
        config = synthetic_config()
        report = run_error_curve(config)
        assert len(report.rows) == 2 * 2 * 3 * 3  # methods x aggregators x k x splits
        assert all(0.0 <= r.test_error <= 1.0 for r in report.rows)

    def test_full_budget_methods_agree(self):
        config = synthetic_config(k_range=[4])
        report = run_error_curve(config)
        # At k == M every method feeds the same model set to the aggregator.
        by_cell = {}
        for r in report.rows:
            by_cell.setdefault((r.aggregator, r.split_index), set()).add(r.test_error)
        for cell, errors in by_cell.items():
            assert len(errors) == 1, cell

    def test_summary_consistent_with_rows(self):
        config = synthetic_config()
        report = run_error_curve(config)
        for s in report.summary:
            cell = [
                r.test_error
                for r in report.rows
                if (r.method, r.aggregator, r.k) == (s["method"], s["aggregator"], s["k"])
            ]
            assert s["mean_error"] == pytest.approx(float(np.mean(cell)), abs=1e-12)
            expected_std = float(np.std(cell, ddof=1)) if len(cell) > 1 else 0.0
            assert s["std_error"] == pytest.approx(expected_std, abs=1e-12)

    def test_k_above_pool_rejected(self):
        config = synthetic_config(k_range=[9])
        with pytest.raises(ConfigError):
            run_error_curve(config)

    def test_exhaustive_skip_over_cap(self):
        config = synthetic_config(
            methods=["exhaustive"], k_range=[2], exhaustive_cap=1
        )
        with pytest.warns(UserWarning):
            report = run_error_curve(config)
        assert not report.rows
        assert len(report.skipped) == 3  # one per split

    def test_independent_pool_methods_statistically_close(self):
        # With no correlation, greedy MI and top-k land within Monte-Carlo
        # noise of each other at every budget.
        config = ExperimentConfig.from_dict(
            {
                "dataset": {
                    "equicorrelated": {"m": 5, "rho": 0.0, "alpha": 0.8},
                    "n": 20_000,
                },
                "methods": ["top_k", "greedy_mi_direct"],
                "aggregators": ["map"],
                "k_range": [1, 3, 5],
                "split": {"train_fraction": 0.8, "seed": 5, "num_splits": 3},
                "seed": 1234,
            }
        )
        report = run_error_curve(config)
        for k in (1, 3, 5):
            means = {}
            for s in report.summary:
                if s["k"] == k:
                    means[s["method"]] = (s["mean_error"], s["std_error"])
            gap = abs(means["top_k"][0] - means["greedy_mi_direct"][0])
            # 2 standard errors of the difference, floored by counting noise
            se = math.hypot(means["top_k"][1], means["greedy_mi_direct"][1]) / math.sqrt(3)
            assert gap <= max(2 * se, 2 * math.sqrt(0.2 * 0.8 / 4000))


class TestArtifacts:
    def test_error_curve_artifacts_deterministic(self):
        config = synthetic_config()
        a = error_curve_artifacts(config)
        b = error_curve_artifacts(config)
        assert a == b
        assert set(a) == {"report.csv", "summary.csv", "manifest.json"}
        manifest = json.loads(a["manifest.json"])
        assert manifest["kind"] == "curve"
        assert manifest["config"]["seed"] == 99

    def test_report_csv_shape(self):
        config = synthetic_config()
        lines = error_curve_artifacts(config)["report.csv"].strip().split("\n")
        assert lines[0] == "method,aggregator,k,split_index,test_error"
        assert len(lines) == 1 + 2 * 2 * 3 * 3

    def test_validation_artifacts(self):
        config = ValidationConfig.from_dict(
            {
                "dataset": {
                    "equicorrelated": {"m": 4, "rho": 0.4, "alpha": 0.8},
                    "n": 5000,
                },
                "n_synth": 20_000,
                "seed": 3,
            }
        )
        artifacts = run_copula_validation(config)
        pairwise = artifacts["pairwise.csv"].strip().split("\n")
        assert len(pairwise) == 1 + 6  # header + M(M-1)/2
        hist = artifacts["histogram.csv"].strip().split("\n")[1:]
        for column in (1, 2):
            total = sum(float(line.split(",")[column]) for line in hist)
            assert total == pytest.approx(1.0, abs=1e-9)
        model = json.loads(artifacts["model.json"])
        assert model["format"] == 1

    def test_validation_agreement_most_pairs(self):
        config = ValidationConfig.from_dict(
            {
                "dataset": {
                    "equicorrelated": {"m": 5, "rho": 0.5, "alpha": 0.75},
                    "n": 30_000,
                },
                "n_synth": 150_000,
                "seed": 7,
            }
        )
        artifacts = run_copula_validation(config)
        rows = artifacts["pairwise.csv"].strip().split("\n")[1:]
        close = 0
        for line in rows:
            _, _, emp, mod = line.split(",")
            emp, mod = float(emp), float(mod)
            sigma3 = 3 * math.sqrt(max(emp * (1 - emp), 1e-9) / 30_000)
            close += abs(emp - mod) <= sigma3
        assert close >= 0.95 * len(rows)

    def test_fit_and_sample_round_trip(self):
        spec = {"equicorrelated": {"m": 3, "rho": 0.3, "alpha": 0.8}, "n": 4000}
        sample_cfg = SampleConfig.from_dict({"dataset": spec, "seed": 21})
        artifacts = sample_artifacts(sample_cfg)
        d = loads_dataset(artifacts["sample.csv"])
        assert (d.n_rows, d.n_models) == (4000, 3)
        fit = fit_copula_artifacts(DatasetSource(csv_text=artifacts["sample.csv"]))
        model = json.loads(fit["model.json"])
        assert len(model["model_names"]) == 3

    def test_sample_requires_synthetic_source(self):
        with pytest.raises(ConfigError):
            SampleConfig.from_dict({"dataset": {"csv": "label,a\n+1,+1\n"}})


class TestSaturation:
    def test_single_model_matches_marginal(self):
        config = SaturationConfig.from_dict(
            {"rho": 0.5, "alpha": 0.8, "m_schedule": [1], "n": 100_000, "seed": 13}
        )
        artifacts = run_saturation(config)
        line = artifacts["saturation.csv"].strip().split("\n")[1]
        _, err, _ = line.split(",")
        assert float(err) == pytest.approx(0.2, abs=3 * math.sqrt(0.2 * 0.8 / 100_000))

    def test_converges_to_floor(self):
        config = SaturationConfig.from_dict(
            {
                "rho": 0.5,
                "alpha": 0.8,
                "m_schedule": [1, 5, 25, 125],
                "n": 60_000,
                "seed": 17,
            }
        )
        artifacts = run_saturation(config)
        lines = artifacts["saturation.csv"].strip().split("\n")[1:]
        floor = saturation_floor(0.8, 0.5)
        last_err = float(lines[-1].split(",")[1])
        assert float(lines[-1].split(",")[2]) == pytest.approx(floor, abs=1e-12)
        assert last_err == pytest.approx(floor, abs=0.015)

    def test_near_zero_rho_heads_to_zero(self):
        config = SaturationConfig.from_dict(
            {
                "rho": 1e-4,
                "alpha": 0.8,
                "m_schedule": [1, 15, 61],
                "n": 40_000,
                "seed": 19,
            }
        )
        artifacts = run_saturation(config)
        lines = artifacts["saturation.csv"].strip().split("\n")[1:]
        errors = [float(line.split(",")[1]) for line in lines]
        assert errors[-1] < 0.02 < 0.2

    def test_schedule_must_increase(self):
        with pytest.raises(ConfigError):
            SaturationConfig.from_dict(
                {"rho": 0.5, "alpha": 0.8, "m_schedule": [5, 5]}
            )

    def test_deterministic(self):
        config = SaturationConfig.from_dict(
            {"rho": 0.3, "alpha": 0.75, "m_schedule": [1, 7], "n": 10_000, "seed": 23}
        )
        assert run_saturation(config) == run_saturation(config)
