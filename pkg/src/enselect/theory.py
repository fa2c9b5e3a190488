"""Executable closed-form results and brute-force oracles.

Covers the saturation floor of equicorrelated pools, binary-symmetric-
channel degradation, exact error/MI of independent channel subsets, and
the difficulty-conditioned information decomposition with its
submodularity check.

Channel conventions: a pool member is a BSC with crossover probability
eps in (0, 1/2); the label prior is balanced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .data import WeightedDataset
from .errors import ResourceLimitError
from .information import grouped_cmi, grouped_mi
from .numerics import std_normal_cdf, std_normal_quantile

__all__ = [
    "MAX_EXACT_SUBSET",
    "BscPool",
    "DifficultyJoint",
    "saturation_floor",
    "conditional_error_rate",
    "degradation_parameter",
    "exact_bsc_error",
    "exact_bsc_mi",
    "bsc_joint_table",
    "bsc_weighted_dataset",
    "build_difficulty_joint",
    "difficulty_aware_mi",
    "difficulty_decomposition",
    "greedy_difficulty_aware",
    "submodularity_check",
]

MAX_EXACT_SUBSET = 20          # 2^k pattern enumeration cap
MAX_DIFFICULTY_MODELS = 4      # submodularity scans all subset pairs


@dataclass(frozen=True)
class BscPool:
    """Independent binary symmetric channels with error rates in (0, 1/2)."""

    epsilons: tuple[float, ...]

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps:
            raise ValueError("pool must contain at least one channel")
        if any(not 0.0 < e < 0.5 for e in eps):
            raise ValueError("error rates must lie strictly inside (0, 1/2)")
        object.__setattr__(self, "epsilons", eps)

    @property
    def m(self) -> int:
        return len(self.epsilons)

    def top_k(self, k: int) -> tuple[int, ...]:
        """Indices of the k most accurate channels (ties to lowest index)."""
        order = sorted(range(self.m), key=lambda j: (self.epsilons[j], j))
        return tuple(sorted(order[:k]))


def saturation_floor(alpha: float, rho: float) -> float:
    """Limiting ensemble error of an infinite equicorrelated pool.

    Phi(Phi^-1(1 - alpha) / sqrt(rho)); requires alpha in (1/2, 1) and
    rho in (0, 1).
    """
    if not 0.5 < alpha < 1.0:
        raise ValueError("alpha must lie in (1/2, 1)")
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    return std_normal_cdf(std_normal_quantile(1.0 - alpha) / math.sqrt(rho))


def conditional_error_rate(u: float, tau: float, rho: float) -> float:
    """Per-model error probability conditioned on the shared factor value u."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    if not (math.isfinite(u) and math.isfinite(tau)):
        raise ValueError("u and tau must be finite")
    return std_normal_cdf((tau - math.sqrt(rho) * u) / math.sqrt(1.0 - rho))


def degradation_parameter(eps1: float, eps2: float) -> float:
    """Crossover probability of the cascade stage turning BSC(eps1) into BSC(eps2).

    delta = (eps2 - eps1) / (1 - 2 eps1); cascading BSC(eps1) with an
    independent BSC(delta) has error eps1 + delta (1 - 2 eps1) = eps2.
    """
    if not 0.0 <= eps1 <= eps2 < 0.5:
        raise ValueError("need 0 <= eps1 <= eps2 < 1/2")
    return (eps2 - eps1) / (1.0 - 2.0 * eps1)


def _check_subset(pool: BscPool, s: Sequence[int]) -> list[int]:
    s = list(s)
    if not s or len(set(s)) != len(s):
        raise ValueError("subset must be nonempty with distinct indices")
    if any(not 0 <= j < pool.m for j in s):
        raise ValueError("channel index out of range")
    if len(s) > MAX_EXACT_SUBSET:
        raise ResourceLimitError(
            f"exact enumeration capped at {MAX_EXACT_SUBSET} channels"
        )
    return s


def _log_pattern_probs_given_plus(pool: BscPool, s: Sequence[int]) -> np.ndarray:
    """log P(pattern | Y=+1) for all 2^k patterns, bit j of the index being
    channel s[j]'s output mapped by (x+1)/2."""
    logp = np.zeros(1)
    for j in s:
        eps = pool.epsilons[j]
        # bit 0 (x=-1) is an error under Y=+1, bit 1 (x=+1) is correct
        logp = np.concatenate([logp + math.log(eps), logp + math.log(1.0 - eps)])
    return logp


def exact_bsc_error(pool: BscPool, s: Sequence[int]) -> float:
    """Exact MAP error of subset s: half the summed min of the two likelihoods."""
    s = _check_subset(pool, s)
    p_plus = np.exp(_log_pattern_probs_given_plus(pool, s))
    p_minus = p_plus[::-1]  # sign symmetry: flipping all bits swaps the label
    return float(0.5 * np.minimum(p_plus, p_minus).sum())


def exact_bsc_mi(pool: BscPool, s: Sequence[int]) -> float:
    """Exact I(Y; X_S) in bits under a balanced prior."""
    s = _check_subset(pool, s)
    p_plus = np.exp(_log_pattern_probs_given_plus(pool, s))
    p_x = 0.5 * (p_plus + p_plus[::-1])
    h_x = float(-(p_x[p_x > 0] * np.log2(p_x[p_x > 0])).sum())
    h_x_given_y = sum(
        -(e * math.log2(e) + (1 - e) * math.log2(1 - e))
        for e in (pool.epsilons[j] for j in s)
    )
    return h_x - h_x_given_y


def bsc_joint_table(pool: BscPool, s: Sequence[int] | None = None) -> np.ndarray:
    """Enumerated p(y, x_s1, ..., x_sk) table with binary axes (0 -> -1)."""
    s = _check_subset(pool, list(s) if s is not None else list(range(pool.m)))
    p_plus = np.exp(_log_pattern_probs_given_plus(pool, s))
    k = len(s)
    table = np.zeros((2,) + (2,) * k)
    # index bit order matches _log_pattern_probs_given_plus: axis 1 is s[0].
    shape = (2,) * k
    table[1] = 0.5 * p_plus.reshape(shape, order="F")
    table[0] = 0.5 * p_plus[::-1].reshape(shape, order="F")
    return table


def bsc_weighted_dataset(pool: BscPool, names: Sequence[str] | None = None) -> WeightedDataset:
    """The pool's full joint as weighted rows, one per (label, pattern)."""
    m = pool.m
    table = bsc_joint_table(pool)
    labels, rows, weights = [], [], []
    for y_idx in (0, 1):
        for code in range(1 << m):
            bits = [(code >> j) & 1 for j in range(m)]
            labels.append(2 * y_idx - 1)
            rows.append([2 * b - 1 for b in bits])
            weights.append(table[(y_idx, *bits)])
    names = tuple(names) if names else tuple(f"bsc_{j}" for j in range(m))
    return WeightedDataset(np.array(labels), np.array(rows), names, np.array(weights))


@dataclass(frozen=True)
class DifficultyJoint:
    """Explicit joint p(y, d, x_1..x_m) over a label, a latent difficulty
    level, and m binary model outputs.

    Axis 0 is the label (index 1 -> +1), axis 1 the difficulty level,
    axes 2..m+1 the model outputs. Only normalization is enforced here;
    use build_difficulty_joint for instances that additionally satisfy
    d-independence of the label and conditional independence of outputs.
    """

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=np.float64)
        if t.ndim < 3 or t.shape[0] != 2 or any(sz != 2 for sz in t.shape[2:]):
            raise ValueError("table axes must be (label=2, difficulty, 2, ..., 2)")
        if np.any(t < 0) or abs(t.sum() - 1.0) > 1e-12:
            raise ValueError("table must be a normalized probability table")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def m(self) -> int:
        return self.table.ndim - 2

    @property
    def difficulty_levels(self) -> int:
        return self.table.shape[1]


def build_difficulty_joint(rng: np.random.Generator, m: int, d_levels: int) -> DifficultyJoint:
    """Random instance with D independent of Y and outputs conditionally
    independent given (Y, D): p = p(y) p(d) prod_j p(x_j | y, d).

    The label prior is balanced; difficulty weights come from a Dirichlet
    draw and the per-model conditionals from uniform draws.
    """
    if m < 1 or d_levels < 1:
        raise ValueError("need at least one model and one difficulty level")
    p_d = rng.dirichlet(np.ones(d_levels))
    cond = rng.uniform(0.05, 0.95, size=(m, 2, d_levels))  # P(X_j=+1 | y, d)
    table = np.zeros((2, d_levels) + (2,) * m)
    for y in (0, 1):
        for d in range(d_levels):
            block = np.array(0.5 * p_d[d])
            for j in range(m):
                p1 = cond[j, y, d]
                block = np.multiply.outer(block, np.array([1.0 - p1, p1]))
            table[y, d] = block
    return DifficultyJoint(table)


def _model_axes(joint: DifficultyJoint, s: Sequence[int]) -> list[int]:
    s = list(s)
    if len(set(s)) != len(s) or any(not 0 <= j < joint.m for j in s):
        raise ValueError("invalid model subset")
    return [j + 2 for j in s]


def difficulty_aware_mi(joint: DifficultyJoint, s: Sequence[int]) -> float:
    """F(S) = I(Y; X_S | D), the information available to a difficulty-aware decoder."""
    return grouped_cmi(joint.table, [0], _model_axes(joint, s), [1])


def difficulty_decomposition(
    joint: DifficultyJoint, s: Sequence[int]
) -> tuple[float, float, float]:
    """(I(Y;X_S), I(Y;X_S|D), I(Y;D|X_S)): the observable information, its
    difficulty-aware counterpart, and the price paid for not observing D.

    For instances built with build_difficulty_joint the three satisfy
    lhs == oracle_term - price.
    """
    axes = _model_axes(joint, s)
    lhs = grouped_mi(joint.table, [0], axes)
    oracle_term = grouped_cmi(joint.table, [0], axes, [1])
    price = grouped_cmi(joint.table, [0], [1], axes)
    return lhs, oracle_term, price


def greedy_difficulty_aware(joint: DifficultyJoint, k: int) -> tuple[int, ...]:
    """Greedy maximization of F(S) = I(Y; X_S | D) under |S| <= k."""
    if not 1 <= k <= joint.m:
        raise ValueError("budget out of range")
    chosen: list[int] = []
    for _ in range(k):
        best_j, best_gain = None, -math.inf
        base = difficulty_aware_mi(joint, chosen)
        for j in range(joint.m):
            if j in chosen:
                continue
            gain = difficulty_aware_mi(joint, chosen + [j]) - base
            if gain > best_gain:
                best_j, best_gain = j, gain
        chosen.append(best_j)
    return tuple(chosen)


@dataclass(frozen=True)
class SubmodularityReport:
    """Violations found while scanning F(S) = I(Y; X_S | D).

    Each submodularity entry is (S, T, j, deficit) with deficit > 0 meaning
    F(S+j) - F(S) fell short of F(T+j) - F(T) by that amount; monotonicity
    entries are (S, j, deficit).
    """

    submodularity_violations: tuple
    monotonicity_violations: tuple

    @property
    def clean(self) -> bool:
        return not self.submodularity_violations and not self.monotonicity_violations


def submodularity_check(joint: DifficultyJoint, tol: float = 1e-9) -> SubmodularityReport:
    """Scan all S subset-of T and j outside T for violations of diminishing
    returns and monotonicity of the difficulty-aware information."""
    m = joint.m
    if m > MAX_DIFFICULTY_MODELS:
        raise ResourceLimitError(
            f"submodularity scan capped at {MAX_DIFFICULTY_MODELS} models"
        )
    subsets = []
    for size in range(m + 1):
        subsets.extend(combinations(range(m), size))
    f_value = {s: difficulty_aware_mi(joint, s) for s in subsets}

    sub_violations = []
    mono_violations = []
    for t in subsets:
        t_set = set(t)
        for j in range(m):
            if j in t_set:
                continue
            t_plus = tuple(sorted(t_set | {j}))
            gain_t = f_value[t_plus] - f_value[t]
            if gain_t < -tol:
                mono_violations.append((t, j, -gain_t))
            # every S contained in T
            for s in subsets:
                if set(s) <= t_set:
                    s_plus = tuple(sorted(set(s) | {j}))
                    gain_s = f_value[s_plus] - f_value[s]
                    if gain_s < gain_t - tol:
                        sub_violations.append((s, t, j, gain_t - gain_s))
    return SubmodularityReport(tuple(sub_violations), tuple(mono_violations))
