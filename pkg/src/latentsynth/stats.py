"""Statistical kernels for the fidelity protocol.

Mean absolute deviation, Pearson correlation, the unequal-variance
two-sample t-test (Satterthwaite degrees of freedom, two-sided p through
the regularized incomplete beta function), per-feature differential
tests, and the correlation of differential statistics between a real and
a synthetic group pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import betainc, gammaln

from ._validation import as_float_matrix, as_float_vector

__all__ = [
    "mad",
    "pearson",
    "welch_t_test",
    "TTestResult",
    "log10_p_two_sided",
    "diff_feature_test",
    "DiffTestResult",
    "difftest_similarity",
]


def mad(predicted, actual) -> float:
    """Mean absolute deviation between two equal-length vectors."""
    predicted = as_float_vector(predicted, "predicted")
    actual = as_float_vector(actual, "actual")
    if predicted.shape[0] != actual.shape[0]:
        raise ValueError(
            f"length mismatch: {predicted.shape[0]} vs {actual.shape[0]}"
        )
    if predicted.shape[0] == 0:
        raise ValueError("vectors must have at least one entry")
    return float(np.mean(np.abs(predicted - actual)))


def pearson(x, y) -> float:
    """Sample Pearson correlation.

    Raises when both inputs are constant; when exactly one side is
    constant the association is not measurable and 0.0 is returned.
    """
    x = as_float_vector(x, "x")
    y = as_float_vector(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 2:
        raise ValueError("pearson needs at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 and sy == 0.0:
        raise ValueError("pearson is undefined when both inputs are constant")
    if sx == 0.0 or sy == 0.0:
        return 0.0
    r = float(dx @ dy) / (sx * sy)
    return float(min(1.0, max(-1.0, r)))


class TTestResult(NamedTuple):
    statistic: float
    df: float
    p_value: float


def welch_t_test(a, b) -> TTestResult:
    """Unequal-variance two-sample t-test with Satterthwaite df.

    Degenerate inputs with zero variance on both sides give t=0, p=1 for
    equal means and +/-inf, p=0 otherwise (df falls back to n_a+n_b-2).
    """
    a = as_float_vector(a, "a")
    b = as_float_vector(b, "b")
    na, nb = a.shape[0], b.shape[0]
    if na < 2 or nb < 2:
        raise ValueError("each sample needs at least two observations")
    mean_diff = float(a.mean() - b.mean())
    sea = float(a.var(ddof=1)) / na
    seb = float(b.var(ddof=1)) / nb
    se2 = sea + seb
    if se2 == 0.0:
        df = float(na + nb - 2)
        if mean_diff == 0.0:
            return TTestResult(0.0, df, 1.0)
        return TTestResult(math.copysign(math.inf, mean_diff), df, 0.0)
    t = mean_diff / math.sqrt(se2)
    df = se2 * se2 / (sea * sea / (na - 1) + seb * seb / (nb - 1))
    p = float(betainc(df / 2.0, 0.5, df / (t * t + df)))
    return TTestResult(t, df, min(1.0, p))


def _log_reg_inc_beta_small_x(a: float, b: float, x: float) -> float:
    # I_x(a, b) = x^a (1-x)^b / (a B(a, b)) * sum_n ((a+b)_n / (a+1)_n) x^n,
    # evaluated in log space; converges quickly for the small x that
    # underflow the direct computation.
    log_prefix = (
        a * math.log(x)
        + b * math.log1p(-x)
        - math.log(a)
        - (gammaln(a) + gammaln(b) - gammaln(a + b))
    )
    term = 1.0
    total = 1.0
    for n in range(1, 1000):
        term *= (a + b + n - 1.0) / (a + n) * x
        total += term
        if term < 1e-17 * total:
            break
    return log_prefix + math.log(total)


def log10_p_two_sided(t: float, df: float) -> float:
    """log10 of the two-sided t-tail probability, safe for extreme t.

    Falls back to a log-space series for tails too small for float64.
    """
    if not math.isfinite(t):
        return -math.inf
    if t == 0.0:
        return 0.0
    x = df / (t * t + df)
    p = float(betainc(df / 2.0, 0.5, x))
    if p > 1e-290:
        return math.log10(min(1.0, p))
    return _log_reg_inc_beta_small_x(df / 2.0, 0.5, x) / math.log(10.0)


@dataclass(frozen=True, eq=False)
class DiffTestResult:
    """Per-feature two-group t statistics for one pair of groups.

    Features with zero variance in both groups carry NaN and are excluded
    pairwise from downstream correlations.
    """

    per_feature_statistic: np.ndarray
    group_pair: tuple

    @property
    def n_features(self) -> int:
        return self.per_feature_statistic.shape[0]


def diff_feature_test(group_a, group_b, pair=("a", "b")) -> DiffTestResult:
    """Columnwise unequal-variance t statistics between two row groups."""
    A = as_float_matrix(group_a, "group_a")
    B = as_float_matrix(group_b, "group_b")
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"feature count mismatch: {A.shape[1]} vs {B.shape[1]}"
        )
    if A.shape[0] < 2 or B.shape[0] < 2:
        raise ValueError("each group needs at least two rows")
    na, nb = A.shape[0], B.shape[0]
    va = A.var(axis=0, ddof=1)
    vb = B.var(axis=0, ddof=1)
    se2 = va / na + vb / nb
    stats = np.full(A.shape[1], np.nan)
    defined = ~((va == 0.0) & (vb == 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = A.mean(axis=0) - B.mean(axis=0)
        stats[defined] = diff[defined] / np.sqrt(se2[defined])
    return DiffTestResult(stats, (str(pair[0]), str(pair[1])))


def difftest_similarity(real_result: DiffTestResult, synth_result: DiffTestResult) -> float:
    """Pearson correlation of two per-feature statistic vectors.

    NaN features are dropped pairwise; the two results must describe the
    same group pair over the same number of features.
    """
    if real_result.n_features != synth_result.n_features:
        raise ValueError(
            f"feature count mismatch: {real_result.n_features} vs "
            f"{synth_result.n_features}"
        )
    if real_result.group_pair != synth_result.group_pair:
        raise ValueError(
            f"group pair mismatch: {real_result.group_pair} vs "
            f"{synth_result.group_pair}"
        )
    a = real_result.per_feature_statistic
    b = synth_result.per_feature_statistic
    keep = np.isfinite(a) & np.isfinite(b)
    if keep.sum() < 2:
        raise ValueError("fewer than 2 features are comparable (non-NaN in both)")
    return pearson(a[keep], b[keep])
