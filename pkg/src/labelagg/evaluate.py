"""Scoring and significance testing: weighted F1, one-way ANOVA, exact F tails.

The F-distribution tail is computed from scratch via the regularized
incomplete beta function (continued fraction), so p-values carry no
table-lookup rounding; target absolute error 1e-12.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TruthAssignment, TruthEstimate, ValidationError, _frozen


@dataclass(frozen=True)
class ScoreReport:
    """Weighted F1 with its per-class breakdown over retained items."""

    weighted_f1: float
    per_class_f1: np.ndarray
    support: np.ndarray
    retained_fraction: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.weighted_f1 <= 1.0):
            raise ValidationError(f"weighted_f1 must lie in [0, 1], got {self.weighted_f1}")
        if not (0.0 < self.retained_fraction <= 1.0):
            raise ValidationError(f"retained_fraction must lie in (0, 1], got {self.retained_fraction}")
        object.__setattr__(self, "per_class_f1", _frozen(np.asarray(self.per_class_f1, dtype=np.float64).copy()))
        object.__setattr__(self, "support", _frozen(np.asarray(self.support, dtype=np.int64).copy()))


@dataclass(frozen=True)
class AnovaResult:
    """F statistic, its degrees of freedom, and the exact tail probability."""

    f_statistic: float
    df_between: int
    df_within: int
    p_value: float

    def __post_init__(self) -> None:
        if self.f_statistic < 0:
            raise ValidationError(f"F statistic must be non-negative, got {self.f_statistic}")
        if not (0.0 <= self.p_value <= 1.0):
            raise ValidationError(f"p-value must lie in [0, 1], got {self.p_value}")


def weighted_f1(predicted: TruthEstimate, truth: TruthAssignment) -> ScoreReport:
    """Support-weighted mean of per-class F1 scores.

    Items with hard label -1 (dropped by a tie policy) are excluded from
    both supports and scores. A class with no predicted or no true
    instances contributes precision/recall of 0 rather than dividing by
    zero. Weights are the per-class true counts over retained items.
    """
    if predicted.num_items != len(truth):
        raise ValidationError(
            f"predicted covers {predicted.num_items} items but truth covers {len(truth)}"
        )
    if predicted.num_labels != truth.num_labels:
        raise ValidationError(
            f"predicted uses {predicted.num_labels} labels but truth uses {truth.num_labels}"
        )
    g = truth.num_labels
    keep = predicted.hard_labels >= 0
    if not keep.any():
        raise ValidationError("every item was dropped; nothing to score")
    pred = predicted.hard_labels[keep]
    true = truth.labels[keep]

    confusion = np.zeros((g, g), dtype=np.int64)
    np.add.at(confusion, (true, pred), 1)
    tp = np.diag(confusion).astype(np.float64)
    support = confusion.sum(axis=1)
    predicted_count = confusion.sum(axis=0)

    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted_count > 0, tp / predicted_count, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2.0 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)

    weighted = float((support * f1).sum() / support.sum())
    return ScoreReport(
        weighted_f1=weighted,
        per_class_f1=f1,
        support=support,
        retained_fraction=float(keep.sum() / keep.size),
    )


def one_way_anova(groups) -> AnovaResult:
    """Classic between/within sum-of-squares F test over two or more groups.

    Degenerate data where both sums of squares vanish (every observation
    identical) reports F = 0, p = 1; zero within-group variance with real
    between-group separation reports an infinite F and p = 0.
    """
    arrays = [np.asarray(grp, dtype=np.float64) for grp in groups]
    if len(arrays) < 2:
        raise ValidationError(f"ANOVA needs at least two groups, got {len(arrays)}")
    for i, arr in enumerate(arrays):
        if arr.ndim != 1 or arr.size < 2:
            raise ValidationError(f"group {i} needs at least two observations, got shape {arr.shape}")

    total = np.concatenate(arrays)
    grand = total.mean()
    ssb = sum(arr.size * (arr.mean() - grand) ** 2 for arr in arrays)
    ssw = sum(((arr - arr.mean()) ** 2).sum() for arr in arrays)
    df_between = len(arrays) - 1
    df_within = total.size - len(arrays)

    if ssw <= 0.0:
        if ssb <= 0.0:
            return AnovaResult(0.0, df_between, df_within, 1.0)
        return AnovaResult(math.inf, df_between, df_within, 0.0)
    f_stat = (ssb / df_between) / (ssw / df_within)
    return AnovaResult(float(f_stat), df_between, df_within, f_distribution_sf(float(f_stat), df_between, df_within))


_CF_MAX_ITERS = 300
_CF_TINY = 1e-300
_CF_EPS = 1e-16


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITERS + 1):
        m2 = 2 * m
        # even step
        coeff = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coeff * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + coeff / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        coeff = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coeff * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + coeff / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _CF_EPS:
            return h
    raise ValidationError(f"incomplete beta continued fraction failed to converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function.

    Continued-fraction evaluation with the usual symmetry switch at
    x > (a+1)/(a+b+2) so the fraction always converges fast; absolute
    error is at the 1e-12 level or better across moderate parameters.
    """
    if a <= 0 or b <= 0:
        raise ValidationError(f"shape parameters must be positive, got a={a}, b={b}")
    if not (0.0 <= x <= 1.0):
        raise ValidationError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def f_distribution_sf(f: float, d1: int, d2: int) -> float:
    """P(F > f) for an F distribution with (d1, d2) degrees of freedom.

    Uses the identity with the regularized incomplete beta evaluated at
    d2 / (d2 + d1 f).
    """
    if f < 0:
        raise ValidationError(f"F statistic must be non-negative, got {f}")
    if d1 < 1 or d2 < 1:
        raise ValidationError(f"degrees of freedom must be >= 1, got ({d1}, {d2})")
    if f == 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    x = d2 / (d2 + d1 * f)
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, x)
