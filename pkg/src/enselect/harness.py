"""Experiment orchestration: error-vs-budget curves over methods,
aggregators and seeded splits; copula validation; saturation sweeps.

Every run is reproducible from one root seed. Sub-seeds are derived by
hashing the root seed with component labels and indices (SHA-256, first 8
bytes little-endian), so re-running a config yields byte-identical CSV
artifacts. Artifacts are returned as {filename: text} and written by the
caller; manifests echo the config and library version but never include
timing, which would break byte determinism.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .aggregation import (
    WeightVector,
    fit_map,
    majority_vote_batch,
    predict_map_batch,
    weighted_majority_vote_batch,
)
from .copula import (
    CopulaModel,
    EquicorrelatedSpec,
    copula_diagnostics,
    fit_copula,
    sample,
    sample_equicorrelated,
)
from .data import Dataset, SplitSpec, dumps_dataset, load_dataset, loads_dataset, split_train_test
from .errors import ConfigError
from .numerics import std_normal_quantile
from .selection import (
    exhaustive_select,
    greedy_mi_select,
    mrmr_select,
    term1_select,
    top_k_select,
)
from .theory import saturation_floor

__all__ = [
    "METHODS",
    "AGGREGATORS",
    "DatasetSource",
    "ExperimentConfig",
    "ValidationConfig",
    "SaturationConfig",
    "SampleConfig",
    "ReportRow",
    "ExperimentReport",
    "derive_seed",
    "run_error_curve",
    "error_curve_artifacts",
    "run_copula_validation",
    "run_saturation",
    "fit_copula_artifacts",
    "sample_artifacts",
]

METHODS = (
    "greedy_mi_direct",
    "greedy_mi_three_term",
    "top_k",
    "term1",
    "mrmr",
    "exhaustive",
)
AGGREGATORS = ("map", "mv", "wmv")

_SATURATION_CHUNK = 16_384  # fixed row block so chunking never affects results


def derive_seed(root: int, *parts) -> int:
    """64-bit sub-seed from the root seed and a component path."""
    digest = hashlib.sha256()
    digest.update(str(int(root)).encode())
    for part in parts:
        digest.update(b"\x1f" + str(part).encode())
    return int.from_bytes(digest.digest()[:8], "little")


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigError(message)


@dataclass(frozen=True)
class DatasetSource:
    """Where the prediction matrix comes from.

    Exactly one of: a CSV path, inline CSV text, an equicorrelated spec,
    or a serialized copula model. Synthetic sources carry ``n`` rows and
    draw with a sub-seed of the experiment seed.
    """

    path: str | None = None
    csv_text: str | None = None
    equicorrelated: EquicorrelatedSpec | None = None
    copula_model: CopulaModel | None = None
    n: int | None = None

    def __post_init__(self):
        provided = sum(
            x is not None
            for x in (self.path, self.csv_text, self.equicorrelated, self.copula_model)
        )
        _require(provided == 1, "dataset source needs exactly one of path/csv/synthetic")
        if self.equicorrelated is not None or self.copula_model is not None:
            _require(self.n is not None and self.n >= 1, "synthetic source needs n >= 1")

    @classmethod
    def from_dict(cls, payload: dict) -> "DatasetSource":
        _require(isinstance(payload, dict), "dataset source must be an object")
        known = {"path", "csv", "equicorrelated", "copula_model", "n"}
        unknown = set(payload) - known
        _require(not unknown, f"unknown dataset source keys: {sorted(unknown)}")
        equi = None
        if "equicorrelated" in payload:
            spec = payload["equicorrelated"]
            try:
                equi = EquicorrelatedSpec(
                    m=int(spec["m"]), rho=float(spec["rho"]), alpha=float(spec["alpha"])
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad equicorrelated spec: {exc}") from exc
        model = None
        if "copula_model" in payload:
            try:
                model = CopulaModel.from_dict(payload["copula_model"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad copula model: {exc}") from exc
        return cls(
            path=payload.get("path"),
            csv_text=payload.get("csv"),
            equicorrelated=equi,
            copula_model=model,
            n=int(payload["n"]) if "n" in payload else None,
        )

    def resolve(self, root_seed: int) -> Dataset:
        if self.path is not None:
            return load_dataset(self.path)
        if self.csv_text is not None:
            return loads_dataset(self.csv_text)
        seed = derive_seed(root_seed, "dataset")
        if self.equicorrelated is not None:
            return sample_equicorrelated(self.equicorrelated, self.n, seed)
        return sample(self.copula_model, self.n, seed)


def _source_to_dict(source: DatasetSource) -> dict:
    payload: dict = {}
    if source.path is not None:
        payload["path"] = source.path
    if source.csv_text is not None:
        payload["csv"] = source.csv_text
    if source.equicorrelated is not None:
        spec = source.equicorrelated
        payload["equicorrelated"] = {"m": spec.m, "rho": spec.rho, "alpha": spec.alpha}
    if source.copula_model is not None:
        payload["copula_model"] = source.copula_model.to_dict()
    if source.n is not None:
        payload["n"] = source.n
    return payload


def _parse_k_values(payload) -> tuple[int, ...]:
    if isinstance(payload, dict):
        _require({"min", "max"} <= set(payload), "k_range object needs min and max")
        lo, hi = int(payload["min"]), int(payload["max"])
        _require(1 <= lo <= hi, "k_range bounds must satisfy 1 <= min <= max")
        return tuple(range(lo, hi + 1))
    _require(isinstance(payload, (list, tuple)) and payload, "k_range must be nonempty")
    ks = tuple(int(k) for k in payload)
    _require(all(k >= 1 for k in ks), "every k must be >= 1")
    _require(len(set(ks)) == len(ks), "k values must be distinct")
    return tuple(sorted(ks))


@dataclass(frozen=True)
class ExperimentConfig:
    """Error-curve experiment: dataset, methods, aggregators, budgets, splits."""

    source: DatasetSource
    methods: tuple[str, ...]
    aggregators: tuple[str, ...]
    k_values: tuple[int, ...]
    split: SplitSpec
    alpha: float = 1.0
    seed: int = 0
    exhaustive_cap: int = 10_000

    def __post_init__(self):
        _require(bool(self.methods), "at least one method required")
        _require(bool(self.aggregators), "at least one aggregator required")
        bad = [m for m in self.methods if m not in METHODS]
        _require(not bad, f"unknown methods {bad}; valid: {list(METHODS)}")
        bad = [a for a in self.aggregators if a not in AGGREGATORS]
        _require(not bad, f"unknown aggregators {bad}; valid: {list(AGGREGATORS)}")
        _require(self.alpha >= 0.0, "alpha must be nonnegative")

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        _require(isinstance(payload, dict), "config must be a JSON object")
        for key in ("dataset", "methods", "aggregators", "k_range", "split"):
            _require(key in payload, f"config missing required key '{key}'")
        split = payload["split"]
        try:
            split_spec = SplitSpec(
                train_fraction=float(split["train_fraction"]),
                seed=int(split.get("seed", payload.get("seed", 0))),
                num_splits=int(split.get("num_splits", 1)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad split spec: {exc}") from exc
        return cls(
            source=DatasetSource.from_dict(payload["dataset"]),
            methods=tuple(payload["methods"]),
            aggregators=tuple(payload["aggregators"]),
            k_values=_parse_k_values(payload["k_range"]),
            split=split_spec,
            alpha=float(payload.get("alpha", 1.0)),
            seed=int(payload.get("seed", 0)),
            exhaustive_cap=int(payload.get("exhaustive_cap", 10_000)),
        )

    def to_dict(self) -> dict:
        return {
            "dataset": _source_to_dict(self.source),
            "methods": list(self.methods),
            "aggregators": list(self.aggregators),
            "k_range": list(self.k_values),
            "split": {
                "train_fraction": self.split.train_fraction,
                "seed": self.split.seed,
                "num_splits": self.split.num_splits,
            },
            "alpha": self.alpha,
            "seed": self.seed,
            "exhaustive_cap": self.exhaustive_cap,
        }


@dataclass(frozen=True)
class ReportRow:
    method: str
    aggregator: str
    k: int
    split_index: int
    test_error: float


@dataclass(frozen=True)
class ExperimentReport:
    """Raw per-cell test errors plus per-(method, aggregator, k) summaries."""

    rows: tuple[ReportRow, ...]
    summary: tuple[dict, ...]
    skipped: tuple[dict, ...] = field(default_factory=tuple)


def _prefix_order(train: Dataset, method: str, k_max: int, alpha: float):
    if method == "greedy_mi_direct":
        return greedy_mi_select(train, k_max, mode="direct_cmi", alpha=alpha).order
    if method == "greedy_mi_three_term":
        return greedy_mi_select(train, k_max, mode="three_term", alpha=alpha).order
    if method == "top_k":
        return top_k_select(train, k_max).order
    if method == "term1":
        return term1_select(train, k_max, alpha=alpha).order
    if method == "mrmr":
        return mrmr_select(train, k_max, alpha=alpha).order
    raise ValueError(f"unexpected method {method}")


def _training_accuracies(train: Dataset, subset) -> np.ndarray:
    errors = (train.predictions[:, list(subset)] != train.labels[:, None]).mean(axis=0)
    return 1.0 - errors


def _score_cell(train, test, subset, aggregator, tie_seed) -> float:
    subset = list(subset)
    test_preds = test.predictions[:, subset]
    if aggregator == "map":
        table = fit_map(train, subset)
        predicted = predict_map_batch(table, test_preds)
    elif aggregator == "mv":
        predicted = majority_vote_batch(test_preds, tie_seed)
    else:
        weights = WeightVector.from_accuracies(_training_accuracies(train, subset))
        predicted = weighted_majority_vote_batch(test_preds, weights)
    return float(np.mean(predicted != test.labels))


def run_error_curve(config: ExperimentConfig) -> ExperimentReport:
    """Select on train, fit the aggregator on train, score on test, per cell.

    Greedy-style methods are selected once per split at the largest budget
    and sliced into prefixes; exhaustive search runs per budget and is
    skipped (with a warning and a manifest record) when the subset count
    exceeds the configured cap.
    """
    dataset = config.source.resolve(config.seed)
    k_values = config.k_values
    _require(max(k_values) <= dataset.n_models,
             f"k={max(k_values)} exceeds the {dataset.n_models}-model pool")
    k_max = max(k_values)
    rows: list[ReportRow] = []
    skipped: list[dict] = []
    for split_index in range(config.split.num_splits):
        train, test = split_train_test(dataset, config.split, split_index)
        for method in config.methods:
            subsets: dict[int, tuple[int, ...]] = {}
            if method == "exhaustive":
                for k in k_values:
                    if math.comb(dataset.n_models, k) > config.exhaustive_cap:
                        warnings.warn(
                            f"skipping exhaustive at k={k}: subset count over cap",
                            stacklevel=2,
                        )
                        skipped.append({"method": method, "k": k, "split_index": split_index})
                        continue
                    subsets[k] = exhaustive_select(
                        train, k, objective="min_map_error",
                        alpha=config.alpha, cap=config.exhaustive_cap,
                    ).order
            else:
                order = _prefix_order(train, method, k_max, config.alpha)
                subsets = {k: order[:k] for k in k_values}
            for k in k_values:
                if k not in subsets:
                    continue
                for aggregator in config.aggregators:
                    # Tie seed depends on the chosen model set, not the method,
                    # so methods that select the same models score identically.
                    tie_seed = derive_seed(
                        config.seed, "mv_tie", aggregator, split_index,
                        tuple(sorted(subsets[k])),
                    )
                    err = _score_cell(train, test, subsets[k], aggregator, tie_seed)
                    rows.append(ReportRow(method, aggregator, k, split_index, err))
    rows.sort(key=lambda r: (r.method, r.aggregator, r.k, r.split_index))
    summary = []
    for method in sorted(set(r.method for r in rows)):
        for aggregator in sorted(set(r.aggregator for r in rows)):
            for k in k_values:
                cell = [
                    r.test_error
                    for r in rows
                    if (r.method, r.aggregator, r.k) == (method, aggregator, k)
                ]
                if not cell:
                    continue
                mean = float(np.mean(cell))
                std = float(np.std(cell, ddof=1)) if len(cell) > 1 else 0.0
                summary.append(
                    {
                        "method": method,
                        "aggregator": aggregator,
                        "k": k,
                        "mean_error": mean,
                        "std_error": std,
                        "num_splits": len(cell),
                    }
                )
    return ExperimentReport(tuple(rows), tuple(summary), tuple(skipped))


def _fmt(value: float) -> str:
    return repr(float(value))


def _manifest(kind: str, config_echo: dict, outputs: list[str], extra: dict | None = None) -> str:
    payload = {
        "kind": kind,
        "config": config_echo,
        "library_version": __version__,
        "outputs": sorted(outputs),
    }
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def error_curve_artifacts(config: ExperimentConfig) -> dict[str, str]:
    """Canonical CSV/JSON artifacts for an error-curve run."""
    report = run_error_curve(config)
    lines = ["method,aggregator,k,split_index,test_error"]
    for r in report.rows:
        lines.append(f"{r.method},{r.aggregator},{r.k},{r.split_index},{_fmt(r.test_error)}")
    report_csv = "\n".join(lines) + "\n"
    lines = ["method,aggregator,k,mean_error,std_error,num_splits"]
    for s in report.summary:
        lines.append(
            f"{s['method']},{s['aggregator']},{s['k']},"
            f"{_fmt(s['mean_error'])},{_fmt(s['std_error'])},{s['num_splits']}"
        )
    summary_csv = "\n".join(lines) + "\n"
    artifacts = {"report.csv": report_csv, "summary.csv": summary_csv}
    artifacts["manifest.json"] = _manifest(
        "curve", config.to_dict(), list(artifacts) + ["manifest.json"],
        {"skipped": list(report.skipped)},
    )
    return artifacts


@dataclass(frozen=True)
class ValidationConfig:
    """Copula validation: fit on the full dataset, compare synthetic stats."""

    source: DatasetSource
    n_synth: int = 200_000
    seed: int = 0

    def __post_init__(self):
        _require(self.n_synth >= 1, "n_synth must be positive")

    @classmethod
    def from_dict(cls, payload: dict) -> "ValidationConfig":
        _require(isinstance(payload, dict), "config must be a JSON object")
        _require("dataset" in payload, "config missing required key 'dataset'")
        return cls(
            source=DatasetSource.from_dict(payload["dataset"]),
            n_synth=int(payload.get("n_synth", 200_000)),
            seed=int(payload.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "dataset": _source_to_dict(self.source),
            "n_synth": self.n_synth,
            "seed": self.seed,
        }


def run_copula_validation(config: ValidationConfig) -> dict[str, str]:
    """Fitted-model JSON plus pairwise and simultaneous-error CSVs."""
    dataset = config.source.resolve(config.seed)
    model = fit_copula(dataset)
    diag = copula_diagnostics(
        dataset, model, config.n_synth, derive_seed(config.seed, "diagnostics")
    )
    lines = ["pair_i,pair_j,empirical,model"]
    for (i, j), emp, mod in zip(
        diag.pair_indices, diag.pairwise_joint_empirical, diag.pairwise_joint_model
    ):
        lines.append(f"{i},{j},{_fmt(emp)},{_fmt(mod)}")
    pairwise_csv = "\n".join(lines) + "\n"
    lines = ["k,empirical,model"]
    for k, (emp, mod) in enumerate(
        zip(diag.simultaneous_error_hist_empirical, diag.simultaneous_error_hist_model)
    ):
        lines.append(f"{k},{_fmt(emp)},{_fmt(mod)}")
    histogram_csv = "\n".join(lines) + "\n"
    artifacts = {
        "model.json": model.to_json(indent=2) + "\n",
        "pairwise.csv": pairwise_csv,
        "histogram.csv": histogram_csv,
    }
    artifacts["manifest.json"] = _manifest(
        "validate-copula", config.to_dict(), list(artifacts) + ["manifest.json"],
        {"mean_offdiag_rho": diag.mean_offdiag_rho},
    )
    return artifacts


@dataclass(frozen=True)
class SaturationConfig:
    """Majority-vote error of growing equicorrelated pools vs the closed form."""

    rho: float
    accuracy: float
    m_schedule: tuple[int, ...]
    n: int = 200_000
    seed: int = 0

    def __post_init__(self):
        _require(bool(self.m_schedule), "m_schedule must be nonempty")
        _require(
            all(a < b for a, b in zip(self.m_schedule, self.m_schedule[1:])),
            "m_schedule must be strictly increasing",
        )
        _require(all(m >= 1 for m in self.m_schedule), "pool sizes must be positive")
        _require(self.n >= 1, "n must be positive")
        _require(0.0 < self.rho < 1.0, "rho must lie in (0, 1)")
        _require(0.5 < self.accuracy < 1.0, "accuracy must lie in (1/2, 1)")

    @classmethod
    def from_dict(cls, payload: dict) -> "SaturationConfig":
        _require(isinstance(payload, dict), "config must be a JSON object")
        for key in ("rho", "alpha", "m_schedule"):
            _require(key in payload, f"config missing required key '{key}'")
        return cls(
            rho=float(payload["rho"]),
            accuracy=float(payload["alpha"]),
            m_schedule=tuple(int(m) for m in payload["m_schedule"]),
            n=int(payload.get("n", 200_000)),
            seed=int(payload.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "alpha": self.accuracy,
            "m_schedule": list(self.m_schedule),
            "n": self.n,
            "seed": self.seed,
        }


def _majority_error_rate(config: SaturationConfig, m: int) -> float:
    """Monte-Carlo majority-vote error for an m-model equicorrelated pool.

    Correctness depends only on the per-row error count, so labels and
    predictions need not be materialized. Rows are drawn in fixed-size
    blocks with per-block sub-seeds, making the estimate independent of
    how blocks might be scheduled.
    """
    tau = std_normal_quantile(1.0 - config.accuracy)
    wrong = 0.0
    remaining = config.n
    block_index = 0
    while remaining > 0:
        block = min(_SATURATION_CHUNK, remaining)
        rng = np.random.default_rng(
            derive_seed(config.seed, "saturation", m, block_index)
        )
        shared = rng.standard_normal((block, 1))
        own = rng.standard_normal((block, m))
        latent = math.sqrt(config.rho) * shared + math.sqrt(1.0 - config.rho) * own
        error_counts = (latent < tau).sum(axis=1)
        wrong += float((error_counts * 2 > m).sum())
        if m % 2 == 0:
            ties = int((error_counts * 2 == m).sum())
            if ties:
                wrong += float(rng.integers(0, 2, size=ties).sum())
        remaining -= block
        block_index += 1
    return wrong / config.n


def run_saturation(config: SaturationConfig) -> dict[str, str]:
    """Convergence table: empirical majority error per pool size plus the floor."""
    floor = saturation_floor(config.accuracy, config.rho)
    lines = ["m,empirical_error,floor"]
    for m in config.m_schedule:
        err = _majority_error_rate(config, m)
        lines.append(f"{m},{_fmt(err)},{_fmt(floor)}")
    table_csv = "\n".join(lines) + "\n"
    artifacts = {"saturation.csv": table_csv}
    artifacts["manifest.json"] = _manifest(
        "saturate", config.to_dict(), list(artifacts) + ["manifest.json"]
    )
    return artifacts


def fit_copula_artifacts(source: DatasetSource, seed: int = 0) -> dict[str, str]:
    """Fit a copula to a dataset and serialize it."""
    dataset = source.resolve(seed)
    model = fit_copula(dataset)
    artifacts = {"model.json": model.to_json(indent=2) + "\n"}
    artifacts["manifest.json"] = _manifest(
        "fit-copula", {"n_rows": dataset.n_rows, "n_models": dataset.n_models, "seed": seed},
        list(artifacts) + ["manifest.json"],
    )
    return artifacts


@dataclass(frozen=True)
class SampleConfig:
    """Synthetic dataset generation from a model or equicorrelated spec."""

    source: DatasetSource
    seed: int = 0

    @classmethod
    def from_dict(cls, payload: dict) -> "SampleConfig":
        _require(isinstance(payload, dict), "config must be a JSON object")
        _require("dataset" in payload, "config missing required key 'dataset'")
        source = DatasetSource.from_dict(payload["dataset"])
        _require(
            source.equicorrelated is not None or source.copula_model is not None,
            "sample requires a synthetic dataset source",
        )
        return cls(source=source, seed=int(payload.get("seed", 0)))

    def to_dict(self) -> dict:
        return {"dataset": _source_to_dict(self.source), "seed": self.seed}


def sample_artifacts(config: SampleConfig) -> dict[str, str]:
    dataset = config.source.resolve(config.seed)
    artifacts = {"sample.csv": dumps_dataset(dataset)}
    artifacts["manifest.json"] = _manifest(
        "sample", config.to_dict(), list(artifacts) + ["manifest.json"]
    )
    return artifacts
