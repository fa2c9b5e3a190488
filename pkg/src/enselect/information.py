"""Entropy and mutual-information estimation for discrete sequences.

Estimated quantities use add-alpha (Laplace) smoothing: every entropy term
is computed from counts smoothed over its variable's *full* alphabet, with
joint variables smoothed over the full product alphabet even when cells
are unobserved. Logarithms are base 2 throughout, so results are in bits.

Exact counterparts operate on explicitly enumerated probability tables and
serve as oracles for the estimators and for closed-form checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .data import Dataset, error_matrix

__all__ = [
    "DiscreteSequence",
    "GainBreakdown",
    "joint_encode",
    "smoothed_mi",
    "smoothed_conditional_mi",
    "exact_mi",
    "exact_entropy",
    "grouped_mi",
    "grouped_cmi",
    "gain_breakdown",
    "exact_gain_breakdown",
    "labels_to_bits",
    "signs_to_bits",
]


class DiscreteSequence(NamedTuple):
    """Length-N integer sequence over the alphabet {0, ..., alphabet_size-1}."""

    values: np.ndarray
    alphabet_size: int


def _checked(seq: DiscreteSequence) -> DiscreteSequence:
    values = np.asarray(seq.values)
    k = int(seq.alphabet_size)
    if values.ndim != 1:
        raise ValueError("sequence values must be 1-D")
    if k < 1:
        raise ValueError("alphabet_size must be positive")
    if values.size and (values.min() < 0 or values.max() >= k):
        raise ValueError("sequence values outside declared alphabet")
    return DiscreteSequence(values, k)


def signs_to_bits(values: np.ndarray) -> np.ndarray:
    """{-1, +1} -> {0, 1}."""
    return ((np.asarray(values) + 1) // 2).astype(np.int64)


def labels_to_bits(d: Dataset) -> DiscreteSequence:
    return DiscreteSequence(signs_to_bits(d.labels), 2)


def joint_encode(sequences: Sequence[DiscreteSequence]) -> DiscreteSequence:
    """Mixed-radix encoding of several sequences into one joint sequence.

    The joint alphabet is the full product of the declared alphabets. An
    empty collection encodes to the constant sequence over a 1-letter
    alphabet, so conditioning on "nothing" is the unconditional case.
    """
    sequences = [_checked(s) for s in sequences]
    if not sequences:
        return DiscreteSequence(None, 1)
    codes = np.zeros_like(sequences[0].values, dtype=np.int64)
    size = 1
    for seq in sequences:
        if seq.values.shape != sequences[0].values.shape:
            raise ValueError("sequences must share length")
        codes += size * seq.values
        size *= seq.alphabet_size
    return DiscreteSequence(codes, size)


def _resolve_constant(seq: DiscreteSequence, n: int) -> DiscreteSequence:
    # joint_encode([]) carries values=None; materialize at the needed length.
    if seq.values is None:
        return DiscreteSequence(np.zeros(n, dtype=np.int64), seq.alphabet_size)
    return seq


def _smoothed_entropy(codes: np.ndarray, k: int, alpha: float, weights) -> float:
    counts = np.bincount(codes, weights=weights, minlength=k).astype(np.float64)
    total = counts.sum()
    denom = total + alpha * k
    probs = (counts + alpha) / denom
    nz = probs > 0
    return float(-(probs[nz] * np.log2(probs[nz])).sum())


def _validate_alpha_weights(alpha: float, weights, n: int):
    if not alpha >= 0.0:
        raise ValueError("smoothing alpha must be nonnegative")
    if weights is not None:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (n,):
            raise ValueError("weights must match sequence length")
    return weights


def smoothed_mi(
    a: DiscreteSequence,
    b: DiscreteSequence,
    alpha: float = 1.0,
    weights=None,
) -> float:
    """Smoothed mutual-information estimate, clipped at zero.

    I = max(H(A) + H(B) - H(A, B), 0) with each entropy computed from
    add-alpha smoothed frequencies over K_A, K_B, and K_A*K_B cells.
    alpha = 0 is permitted and gives the plug-in estimate, which is exact
    when weighted enumerated frequencies are injected.
    """
    a, b = _checked(a), _checked(b)
    if a.values.shape != b.values.shape:
        raise ValueError("sequences must share length")
    weights = _validate_alpha_weights(alpha, weights, a.values.shape[0])
    joint = joint_encode([a, b])
    h_a = _smoothed_entropy(a.values, a.alphabet_size, alpha, weights)
    h_b = _smoothed_entropy(b.values, b.alphabet_size, alpha, weights)
    h_ab = _smoothed_entropy(joint.values, joint.alphabet_size, alpha, weights)
    return max(h_a + h_b - h_ab, 0.0)


def smoothed_conditional_mi(
    y: DiscreteSequence,
    x: DiscreteSequence,
    given: DiscreteSequence,
    alpha: float = 1.0,
    weights=None,
) -> float:
    """Smoothed I(Y; X | Z), clipped at zero.

    I = H(Y,Z) + H(X,Z) - H(Z) - H(Y,X,Z), every term smoothed over its
    own full product alphabet. ``given`` is typically a joint_encode of
    the conditioning columns; the empty encoding reduces this to
    smoothed_mi(y, x).
    """
    y, x = _checked(y), _checked(x)
    if y.values.shape != x.values.shape:
        raise ValueError("sequences must share length")
    n = y.values.shape[0]
    given = _resolve_constant(given, n)
    given = _checked(given)
    if given.values.shape != y.values.shape:
        raise ValueError("conditioning sequence must share length")
    weights = _validate_alpha_weights(alpha, weights, n)
    yz = joint_encode([y, given])
    xz = joint_encode([x, given])
    yxz = joint_encode([y, x, given])
    h_yz = _smoothed_entropy(yz.values, yz.alphabet_size, alpha, weights)
    h_xz = _smoothed_entropy(xz.values, xz.alphabet_size, alpha, weights)
    h_z = _smoothed_entropy(given.values, given.alphabet_size, alpha, weights)
    h_yxz = _smoothed_entropy(yxz.values, yxz.alphabet_size, alpha, weights)
    return max(h_yz + h_xz - h_z - h_yxz, 0.0)


def _check_table(table: np.ndarray) -> np.ndarray:
    table = np.asarray(table, dtype=np.float64)
    if np.any(table < 0) or not np.all(np.isfinite(table)):
        raise ValueError("probability table entries must be finite and nonnegative")
    if abs(table.sum() - 1.0) > 1e-12:
        raise ValueError("probability table must sum to 1 within 1e-12")
    return table


def exact_entropy(table: np.ndarray) -> float:
    """Shannon entropy in bits of an explicit joint table (0 log 0 = 0)."""
    table = _check_table(table)
    nz = table > 0
    return float(-(table[nz] * np.log2(table[nz])).sum())


def exact_mi(table: np.ndarray) -> float:
    """Exact I(A; B) in bits from a 2-D joint probability table."""
    table = _check_table(table)
    if table.ndim != 2:
        raise ValueError("expected a 2-D joint table")
    pa = table.sum(axis=1, keepdims=True)
    pb = table.sum(axis=0, keepdims=True)
    nz = table > 0
    ratio = table[nz] / (pa @ pb)[nz]
    return float((table[nz] * np.log2(ratio)).sum())


def _grouped_marginal(table: np.ndarray, groups: Sequence[Sequence[int]]) -> np.ndarray:
    """Marginalize onto the union of axis groups, one flattened axis per group."""
    axes = [axis for group in groups for axis in group]
    if len(set(axes)) != len(axes):
        raise ValueError("axis groups must be disjoint")
    drop = tuple(ax for ax in range(table.ndim) if ax not in axes)
    kept = table.sum(axis=drop) if drop else table
    # kept's axes follow the original order; bring them to group order.
    order = sorted(axes)
    perm = [order.index(ax) for ax in axes]
    kept = np.transpose(kept, perm)
    shape = []
    pos = 0
    for group in groups:
        block = 1
        for _ in group:
            block *= kept.shape[pos]
            pos += 1
        shape.append(block)
    return kept.reshape(shape)


def grouped_mi(table: np.ndarray, axes_a: Sequence[int], axes_b: Sequence[int]) -> float:
    """Exact MI between two groups of axes of a joint table.

    Either group may be empty, in which case the MI is 0.
    """
    table = _check_table(table)
    if not axes_a or not axes_b:
        return 0.0
    return exact_mi(_grouped_marginal(table, [axes_a, axes_b]))


def grouped_cmi(
    table: np.ndarray,
    axes_a: Sequence[int],
    axes_b: Sequence[int],
    axes_c: Sequence[int],
) -> float:
    """Exact I(A; B | C) between groups of axes; empty C reduces to MI."""
    table = _check_table(table)
    if not axes_a or not axes_b:
        return 0.0
    if not axes_c:
        return grouped_mi(table, axes_a, axes_b)
    p = _grouped_marginal(table, [axes_a, axes_b, axes_c])
    p_ac = p.sum(axis=1)
    p_bc = p.sum(axis=0)
    p_c = p.sum(axis=(0, 1))
    nz = p > 0
    # I = sum p(a,b,c) log2 [ p(a,b,c) p(c) / (p(a,c) p(b,c)) ]
    num = p * p_c[None, None, :]
    den = p_ac[:, None, :] * p_bc[None, :, :]
    return float((p[nz] * np.log2(num[nz] / den[nz])).sum())


@dataclass(frozen=True)
class GainBreakdown:
    """Additive structure of one model's marginal information gain, in bits.

    total_cmi is the direct conditional-MI estimate; the other four terms
    are its decomposition: relevance - redundancy + error_correlation
    + correction.
    """

    relevance: float
    redundancy: float
    error_correlation: float
    correction: float
    total_cmi: float


def gain_breakdown(
    d: Dataset,
    j: int,
    s: Sequence[int],
    alpha: float = 1.0,
) -> GainBreakdown:
    """Estimated gain decomposition for adding model j to subset s."""
    s = list(s)
    if j in s:
        raise ValueError("candidate model already belongs to the subset")
    if not 0 <= j < d.n_models or any(not 0 <= i < d.n_models for i in s):
        raise ValueError("model index out of range")
    weights = d.weights
    y = labels_to_bits(d)
    bits = signs_to_bits(d.predictions)
    errors = error_matrix(d).astype(np.int64)
    x_j = DiscreteSequence(bits[:, j], 2)
    e_j = DiscreteSequence(errors[:, j], 2)
    x_s = joint_encode([DiscreteSequence(bits[:, i], 2) for i in s])
    e_s = joint_encode([DiscreteSequence(errors[:, i], 2) for i in s])
    n = d.n_rows
    x_s, e_s = _resolve_constant(x_s, n), _resolve_constant(e_s, n)

    relevance = smoothed_mi(y, x_j, alpha, weights)
    redundancy = smoothed_mi(x_j, x_s, alpha, weights) if s else 0.0
    error_corr = smoothed_mi(e_j, e_s, alpha, weights) if s else 0.0
    correction = (
        smoothed_conditional_mi(e_j, y, e_s, alpha, weights)
        - smoothed_mi(e_j, y, alpha, weights)
    ) if s else 0.0
    total = smoothed_conditional_mi(y, x_j, x_s, alpha, weights)
    return GainBreakdown(relevance, redundancy, error_corr, correction, total)


def _error_coordinates(joint_yx: np.ndarray) -> np.ndarray:
    """Reindex p(y, x_1..x_m) into p(y, e_1..e_m) with e_j = x_j XOR y.

    Axis 0 is the label with index 1 meaning +1; each x axis is binary
    with the same convention. Flipping every x axis on the y=1 slice
    turns prediction coordinates into error coordinates.
    """
    out = joint_yx.copy()
    flip_axes = tuple(range(1, joint_yx.ndim))
    out[1] = np.flip(joint_yx[1], axis=tuple(ax - 1 for ax in flip_axes))
    return out


def exact_gain_breakdown(joint_yx: np.ndarray, j: int, s: Sequence[int]) -> GainBreakdown:
    """Exact gain decomposition from an enumerated joint p(y, x_1..x_m).

    Axis 0 indexes the label (0 -> -1, 1 -> +1) and axis j+1 indexes
    model j's prediction with the same 0/1 coding.
    """
    joint_yx = _check_table(joint_yx)
    s = list(s)
    if j in s:
        raise ValueError("candidate model already belongs to the subset")
    m = joint_yx.ndim - 1
    if not 0 <= j < m or any(not 0 <= i < m for i in s):
        raise ValueError("model index out of range")
    joint_ye = _error_coordinates(joint_yx)
    ax_j = [j + 1]
    ax_s = [i + 1 for i in s]
    relevance = grouped_mi(joint_yx, [0], ax_j)
    redundancy = grouped_mi(joint_yx, ax_j, ax_s)
    error_corr = grouped_mi(joint_ye, ax_j, ax_s)
    correction = grouped_cmi(joint_ye, ax_j, [0], ax_s) - grouped_mi(joint_ye, ax_j, [0])
    total = grouped_cmi(joint_yx, [0], ax_j, ax_s)
    return GainBreakdown(relevance, redundancy, error_corr, correction, total)
