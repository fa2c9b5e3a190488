"""Budgeted subset-selection strategies.

All strategies are deterministic: every tie is broken toward the lowest
model index, and exhaustive search scans subsets in lexicographic order so
the first optimum wins.

Strategies accept either a sampled Dataset or a WeightedDataset carrying
an enumerated distribution; weights flow through every counting estimator,
and exhaustive search switches to exact objectives (plug-in MI, Bayes MAP
error) when the data is weighted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .aggregation import exact_map_error, fit_map, predict_map_batch
from .data import Dataset, WeightedDataset, error_matrix
from .errors import ResourceLimitError
from .information import (
    DiscreteSequence,
    joint_encode,
    labels_to_bits,
    signs_to_bits,
    smoothed_conditional_mi,
    smoothed_mi,
)

__all__ = [
    "GREEDY_MODES",
    "EXHAUSTIVE_OBJECTIVES",
    "SelectionResult",
    "greedy_mi_select",
    "top_k_select",
    "term1_select",
    "mrmr_select",
    "exhaustive_select",
]

GREEDY_MODES = ("direct_cmi", "three_term")
EXHAUSTIVE_OBJECTIVES = ("min_map_error", "max_mi")
DEFAULT_COMBINATION_CAP = 10_000


@dataclass(frozen=True)
class SelectionResult:
    """Ordered model choices with the score that won each step."""

    method: str
    order: tuple[int, ...]
    step_scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.order) != len(self.step_scores):
            raise ValueError("order and step_scores must have equal length")
        if len(set(self.order)) != len(self.order):
            raise ValueError("selected indices must be distinct")
        if not all(math.isfinite(v) for v in self.step_scores):
            raise ValueError("step scores must be finite")

    def to_dict(self, model_names: Sequence[str]) -> dict:
        return {
            "method": self.method,
            "order": [model_names[j] for j in self.order],
            "step_scores": list(self.step_scores),
        }

    def to_json(self, model_names: Sequence[str]) -> str:
        return json.dumps(self.to_dict(model_names))


class _Columns:
    """Per-dataset encodings shared by the scoring loops."""

    def __init__(self, d: Dataset):
        self.y = labels_to_bits(d)
        bits = signs_to_bits(d.predictions)
        errors = error_matrix(d).astype(np.int64)
        self.x = [DiscreteSequence(bits[:, j], 2) for j in range(d.n_models)]
        self.e = [DiscreteSequence(errors[:, j], 2) for j in range(d.n_models)]
        self.weights = d.weights
        self.m = d.n_models


def _check_budget(k: int, m: int):
    if not 1 <= k <= m:
        raise ValueError(f"budget k={k} outside [1, {m}]")


def _argmax_lowest_index(scores: dict[int, float]) -> tuple[int, float]:
    best_j, best = None, -math.inf
    for j in sorted(scores):
        if scores[j] > best:
            best_j, best = j, scores[j]
    return best_j, best


def greedy_mi_select(
    train: Dataset, k: int, mode: str = "direct_cmi", alpha: float = 1.0
) -> SelectionResult:
    """Greedy marginal-information-gain selection.

    direct_cmi scores candidates by the conditional mutual information
    between the label and the candidate given the already-selected
    predictions; three_term scores by relevance - redundancy +
    error-correlation (no label-dependence correction).
    """
    if mode not in GREEDY_MODES:
        raise ValueError(f"mode must be one of {GREEDY_MODES}")
    _check_budget(k, train.n_models)
    cols = _Columns(train)
    chosen: list[int] = []
    scores: list[float] = []
    for _ in range(k):
        x_s = joint_encode([cols.x[i] for i in chosen])
        e_s = joint_encode([cols.e[i] for i in chosen])
        candidate_scores = {}
        for j in range(cols.m):
            if j in chosen:
                continue
            if mode == "direct_cmi":
                gain = smoothed_conditional_mi(
                    cols.y, cols.x[j], x_s, alpha, cols.weights
                )
            else:
                gain = smoothed_mi(cols.y, cols.x[j], alpha, cols.weights)
                if chosen:
                    gain -= smoothed_mi(cols.x[j], x_s, alpha, cols.weights)
                    gain += smoothed_mi(cols.e[j], e_s, alpha, cols.weights)
            candidate_scores[j] = gain
        j_star, best = _argmax_lowest_index(candidate_scores)
        chosen.append(j_star)
        scores.append(best)
    method = "greedy_mi_direct" if mode == "direct_cmi" else "greedy_mi_three_term"
    return SelectionResult(method, tuple(chosen), tuple(scores))


def _training_error_rates(train: Dataset) -> np.ndarray:
    e = error_matrix(train).astype(np.float64)
    if train.weights is None:
        return e.mean(axis=0)
    w = train.weights
    return (e * w[:, None]).sum(axis=0) / w.sum()


def top_k_select(train: Dataset, k: int) -> SelectionResult:
    """The k models with the smallest training error, lowest index first on ties."""
    _check_budget(k, train.n_models)
    rates = _training_error_rates(train)
    order = sorted(range(train.n_models), key=lambda j: (rates[j], j))[:k]
    accuracies = tuple(1.0 - rates[j] for j in order)
    return SelectionResult("top_k", tuple(order), accuracies)


def term1_select(train: Dataset, k: int, alpha: float = 1.0) -> SelectionResult:
    """Rank once by estimated label relevance and take the top k."""
    _check_budget(k, train.n_models)
    cols = _Columns(train)
    relevance = [
        smoothed_mi(cols.y, cols.x[j], alpha, cols.weights) for j in range(cols.m)
    ]
    order = sorted(range(cols.m), key=lambda j: (-relevance[j], j))[:k]
    return SelectionResult("term1", tuple(order), tuple(relevance[j] for j in order))


def mrmr_select(train: Dataset, k: int, alpha: float = 1.0) -> SelectionResult:
    """Greedy relevance-minus-redundancy selection."""
    _check_budget(k, train.n_models)
    cols = _Columns(train)
    relevance = [
        smoothed_mi(cols.y, cols.x[j], alpha, cols.weights) for j in range(cols.m)
    ]
    chosen: list[int] = []
    scores: list[float] = []
    for _ in range(k):
        x_s = joint_encode([cols.x[i] for i in chosen])
        candidate_scores = {}
        for j in range(cols.m):
            if j in chosen:
                continue
            score = relevance[j]
            if chosen:
                score -= smoothed_mi(cols.x[j], x_s, alpha, cols.weights)
            candidate_scores[j] = score
        j_star, best = _argmax_lowest_index(candidate_scores)
        chosen.append(j_star)
        scores.append(best)
    return SelectionResult("mrmr", tuple(chosen), tuple(scores))


def _subset_mi(cols: _Columns, s: Sequence[int], alpha: float) -> float:
    x_s = joint_encode([cols.x[i] for i in s])
    return smoothed_mi(cols.y, x_s, alpha, cols.weights)


def _empirical_map_error(train: Dataset, test: Dataset, s: Sequence[int]) -> float:
    table = fit_map(train, s)
    predicted = predict_map_batch(table, test.predictions[:, list(s)])
    wrong = (predicted != test.labels).astype(np.float64)
    if test.weights is None:
        return float(wrong.mean())
    return float((wrong * test.weights).sum() / test.weights.sum())


def exhaustive_select(
    train: Dataset,
    k: int,
    objective: str = "min_map_error",
    test: Dataset | None = None,
    alpha: float = 1.0,
    cap: int = DEFAULT_COMBINATION_CAP,
) -> SelectionResult:
    """Scan all size-k subsets for the best objective value.

    On a WeightedDataset the objectives are exact: plug-in mutual
    information (alpha is ignored, no smoothing) and Bayes MAP error of
    the enumerated distribution. On sampled data max_mi uses the smoothed
    estimator on train, and min_map_error fits the empirical MAP on train
    and scores it on ``test`` (train itself when omitted).

    Ties keep the lexicographically smallest subset; step_scores repeat
    the winning objective value, since exhaustive search has no per-step
    gains.
    """
    if objective not in EXHAUSTIVE_OBJECTIVES:
        raise ValueError(f"objective must be one of {EXHAUSTIVE_OBJECTIVES}")
    _check_budget(k, train.n_models)
    n_combos = math.comb(train.n_models, k)
    if n_combos > cap:
        raise ResourceLimitError(
            f"{n_combos} subsets of size {k} exceed the cap of {cap}"
        )
    exact = isinstance(train, WeightedDataset)
    cols = _Columns(train) if objective == "max_mi" else None
    eval_data = train if test is None else test

    best_subset, best_value = None, None
    for subset in combinations(range(train.n_models), k):
        if objective == "max_mi":
            value = _subset_mi(cols, subset, 0.0 if exact else alpha)
            better = best_value is None or value > best_value
        else:
            if exact and test is None:
                value = exact_map_error(train, subset)
            else:
                value = _empirical_map_error(train, eval_data, subset)
            better = best_value is None or value < best_value
        if better:
            best_subset, best_value = subset, value
    return SelectionResult(
        f"exhaustive_{objective}", best_subset, (best_value,) * k
    )
