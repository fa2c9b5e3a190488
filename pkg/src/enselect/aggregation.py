"""Aggregation rules: empirical MAP over prediction patterns, majority vote,
and log-odds weighted majority vote.

Tie conventions: MAP ties and exact-zero weighted votes resolve to +1;
plain majority-vote ties are broken by a seeded fair coin (the seed is part
of the call contract).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset
from .errors import ResourceLimitError

__all__ = [
    "MAX_MAP_SUBSET",
    "ACCURACY_CLAMP",
    "MapTable",
    "WeightVector",
    "pattern_index",
    "fit_map",
    "predict_map",
    "predict_map_batch",
    "majority_vote",
    "majority_vote_batch",
    "weighted_majority_vote",
    "weighted_majority_vote_batch",
    "exact_map_error",
]

MAX_MAP_SUBSET = 24       # dense 2^k tables; larger subsets are refused
ACCURACY_CLAMP = 1e-6     # keeps log-odds weights finite


def _pattern_codes(x: np.ndarray) -> np.ndarray:
    """0-based pattern codes for rows of a {-1,+1} matrix (column j weighs 2^j)."""
    bits = (x + 1) // 2
    powers = 1 << np.arange(x.shape[-1], dtype=np.int64)
    return bits.astype(np.int64) @ powers


def pattern_index(x: Sequence[int]) -> int:
    """1-based index of a {-1,+1} pattern: 1 + sum_j (x_j+1)/2 * 2^(j-1)."""
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size < 1 or not np.all(np.isin(arr, (-1, 1))):
        raise ValueError("pattern entries must be -1 or +1")
    return int(_pattern_codes(arr)) + 1


@dataclass(frozen=True)
class MapTable:
    """Smoothed per-pattern label counts for a k-model subset.

    c_plus[i] / c_minus[i] hold the add-one smoothed number of training
    rows with pattern index i+1 and label +1 / -1.
    """

    k: int
    c_plus: np.ndarray
    c_minus: np.ndarray

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("subset size must be positive")
        size = 1 << self.k
        c_plus = np.asarray(self.c_plus, dtype=np.float64)
        c_minus = np.asarray(self.c_minus, dtype=np.float64)
        if c_plus.shape != (size,) or c_minus.shape != (size,):
            raise ValueError("count tables must have 2^k entries")
        if np.any(c_plus < 1) or np.any(c_minus < 1):
            raise ValueError("smoothed counts must be at least 1")
        object.__setattr__(self, "c_plus", c_plus)
        object.__setattr__(self, "c_minus", c_minus)


def fit_map(train: Dataset, s: Sequence[int]) -> MapTable:
    """Empirical MAP table for subset s with Laplace add-one smoothing."""
    s = list(s)
    if not s:
        raise ValueError("subset must be nonempty")
    if any(not 0 <= j < train.n_models for j in s):
        raise ValueError("model index out of range")
    k = len(s)
    if k > MAX_MAP_SUBSET:
        raise ResourceLimitError(
            f"MAP table for k={k} needs 2^{k} cells; cap is k={MAX_MAP_SUBSET}"
        )
    codes = _pattern_codes(train.predictions[:, s])
    size = 1 << k
    weights = train.weights
    pos = train.labels == 1
    if weights is None:
        c_plus = np.bincount(codes[pos], minlength=size).astype(np.float64)
        c_minus = np.bincount(codes[~pos], minlength=size).astype(np.float64)
    else:
        c_plus = np.bincount(codes[pos], weights=weights[pos], minlength=size)
        c_minus = np.bincount(codes[~pos], weights=weights[~pos], minlength=size)
    return MapTable(k, c_plus + 1.0, c_minus + 1.0)


def predict_map(table: MapTable, x: Sequence[int]) -> int:
    """MAP label for one pattern: +1 if C+ > C-, -1 if C+ < C-, +1 on tie."""
    if len(np.asarray(x)) != table.k:
        raise ValueError("pattern length must equal the table's subset size")
    idx = pattern_index(x) - 1
    return 1 if table.c_plus[idx] >= table.c_minus[idx] else -1


def predict_map_batch(table: MapTable, x: np.ndarray) -> np.ndarray:
    codes = _pattern_codes(np.asarray(x))
    return np.where(table.c_plus[codes] >= table.c_minus[codes], 1, -1).astype(np.int8)


def majority_vote(x: Sequence[int], seed: int) -> int:
    """Sign of the vote sum; a zero sum is resolved by a seeded fair coin."""
    arr = np.asarray(x)
    if not np.all(np.isin(arr, (-1, 1))):
        raise ValueError("vote entries must be -1 or +1")
    total = int(arr.sum())
    if total > 0:
        return 1
    if total < 0:
        return -1
    return int(np.random.default_rng(seed).integers(0, 2)) * 2 - 1


def majority_vote_batch(x: np.ndarray, seed: int) -> np.ndarray:
    """Row-wise majority votes with one generator resolving ties in row order."""
    totals = np.asarray(x).sum(axis=1)
    out = np.sign(totals).astype(np.int8)
    ties = out == 0
    if np.any(ties):
        rng = np.random.default_rng(seed)
        out[ties] = rng.integers(0, 2, size=int(ties.sum())) * 2 - 1
    return out


@dataclass(frozen=True)
class WeightVector:
    """Log-odds vote weights, one per subset member."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a finite 1-D vector")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_accuracies(cls, accuracies) -> "WeightVector":
        p = np.clip(np.asarray(accuracies, dtype=np.float64),
                    ACCURACY_CLAMP, 1.0 - ACCURACY_CLAMP)
        return cls(np.log(p / (1.0 - p)))


def weighted_majority_vote(x: Sequence[int], w: WeightVector) -> int:
    """sign(sum w_j x_j); an exact zero resolves to +1."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != w.weights.shape:
        raise ValueError("pattern and weight dimensions must match")
    return 1 if float(arr @ w.weights) >= 0.0 else -1


def weighted_majority_vote_batch(x: np.ndarray, w: WeightVector) -> np.ndarray:
    scores = np.asarray(x, dtype=np.float64) @ w.weights
    return np.where(scores >= 0.0, 1, -1).astype(np.int8)


def exact_map_error(weighted_train: Dataset, s: Sequence[int]) -> float:
    """Exact MAP error of subset s under an enumerated weighted distribution.

    Sums min(mass(+1, pattern), mass(-1, pattern)) over patterns; no
    smoothing, so this equals the Bayes error of the injected joint.
    """
    weights = weighted_train.weights
    if weights is None:
        weights = np.ones(weighted_train.n_rows)
    s = list(s)
    if not s:
        raise ValueError("subset must be nonempty")
    codes = _pattern_codes(weighted_train.predictions[:, s])
    size = 1 << len(s)
    pos = weighted_train.labels == 1
    mass_plus = np.bincount(codes[pos], weights=weights[pos], minlength=size)
    mass_minus = np.bincount(codes[~pos], weights=weights[~pos], minlength=size)
    return float(np.minimum(mass_plus, mass_minus).sum() / weights.sum())
