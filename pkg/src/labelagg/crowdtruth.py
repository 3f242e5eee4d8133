"""Agreement-based aggregation: a fixed point over worker and unit quality.

For closed single-choice tasks every worker vector is one-hot, so cosine
similarity between worker answers degenerates to 0/1 agreement; the
quality scores below are the agreement measures specialised accordingly.
Scores are mutually recursive (workers are judged on quality-weighted
units and vice versa), hence the fixed-point iteration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AnnotationMatrix, TruthEstimate, ValidationError, _frozen

EPS = 1e-9
METRIC_TOL = 1e-9


@dataclass(frozen=True)
class CtConfig:
    """Fixed-point stopping rule plus the optional unit-score threshold."""

    tol: float = 1e-6
    max_iters: int = 50
    threshold: float | None = None

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.threshold is not None and not (0.0 <= self.threshold <= 1.0):
            raise ValidationError(f"threshold must lie in [0, 1], got {self.threshold}")


@dataclass(frozen=True)
class CtMetrics:
    """Converged quality scores plus the unit-annotation table."""

    worker_quality: np.ndarray
    worker_unit_agreement: np.ndarray
    worker_worker_agreement: np.ndarray
    unit_quality: np.ndarray
    unit_annotation: np.ndarray
    iterations: int
    converged: bool

    def __post_init__(self) -> None:
        for name in ("worker_quality", "worker_unit_agreement", "worker_worker_agreement",
                     "unit_quality", "unit_annotation"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if (arr < 0).any() or (arr > 1).any():
                raise ValidationError(f"{name} values must lie in [0, 1]")
            object.__setattr__(self, name, _frozen(arr.copy()))
        q = self.worker_unit_agreement * self.worker_worker_agreement
        if np.abs(self.worker_quality - q).max() > METRIC_TOL:
            raise ValidationError("worker_quality must be the product of the two agreement scores")
        if np.abs(self.unit_annotation.sum(axis=1) - 1.0).max() > METRIC_TOL:
            raise ValidationError("unit annotation rows must sum to 1")


def unit_annotation_scores(matrix: AnnotationMatrix, worker_quality: np.ndarray) -> np.ndarray:
    """Quality-weighted vote share of each label on each item, shape (S, G).

    U(s, g) is the sum of the qualities of workers answering g on s,
    divided by the total quality mass.
    """
    q = np.asarray(worker_quality, dtype=np.float64)
    if q.shape != (matrix.num_workers,):
        raise ValidationError(f"worker_quality shape {q.shape} does not match {matrix.num_workers} workers")
    if (q < 0).any():
        raise ValidationError("worker qualities must be non-negative")
    total = q.sum()
    if total <= 0:
        raise ValidationError("degenerate weights: every worker has zero quality")
    # summation-order noise can put a unanimous item at 1 + 2 ulp
    return np.clip(np.einsum("swg,w->sg", matrix.one_hot(), q) / total, 0.0, 1.0)


def ct_fixed_point(matrix: AnnotationMatrix, config: CtConfig = CtConfig()) -> CtMetrics:
    """Iterate unit quality and worker quality to a fixed point.

    Starting from unit quality out of all-equal worker qualities, each
    sweep recomputes: unit quality (pairwise worker agreement per item,
    quality-weighted), worker-unit agreement (cosine of a worker's answer
    against the quality-weighted rest of the unit), worker-worker
    agreement (quality-weighted pairwise agreement over unit-weighted
    items), and worker quality as the product of the two. Denominators
    are floored at 1e-9, so total disagreement yields zero scores rather
    than a division error; if every quality collapses to zero the unit
    annotation table falls back to plain vote fractions.
    """
    if matrix.num_workers < 2:
        raise ValidationError("pairwise agreement needs at least two workers")
    n = matrix.one_hot()  # (S, W, G)
    answers = matrix.answers
    w_idx = np.arange(matrix.num_workers)
    q = np.ones(matrix.num_workers)
    uq = np.zeros(matrix.num_items)
    wua = np.zeros(matrix.num_workers)
    wwa = np.zeros(matrix.num_workers)
    converged = False
    iterations = 0

    for _ in range(config.max_iters):
        # unit quality: sum over worker pairs of Q_i Q_j agree(i,j), normalised.
        # sum_g C(s,g)^2 expands to the full i,j double sum including i == j.
        C = np.einsum("swg,w->sg", n, q)
        sq_sum = float((q * q).sum())
        pair_mass = max((q.sum() ** 2 - sq_sum) / 2.0, EPS)
        uq_new = np.clip(((C * C).sum(axis=1) - sq_sum) / 2.0 / pair_mass, 0.0, 1.0)

        # worker-unit agreement: cosine of the one-hot answer against the
        # quality-weighted unit vector with the worker's own mass removed
        C_at = np.take_along_axis(C, answers, axis=1)  # (S, W): C[s, answer_sw]
        dot = C_at - q[None, :]
        rest_norm = np.sqrt(np.maximum((C * C).sum(axis=1)[:, None] - 2.0 * q[None, :] * C_at + q[None, :] ** 2, 0.0))
        cos = np.clip(dot / np.maximum(rest_norm, EPS), 0.0, 1.0)
        uq_mass = max(uq_new.sum(), EPS)
        wua_new = np.clip((uq_new[:, None] * cos).sum(axis=0) / uq_mass, 0.0, 1.0)

        # worker-worker agreement: unit-weighted pairwise agreement, then
        # quality-weighted average over the other workers
        pair = np.tensordot(n * uq_new[:, None, None], n, axes=([0, 2], [0, 2])) / uq_mass  # (W, W)
        wwa_new = (pair @ q - q * pair[w_idx, w_idx]) / np.maximum(q.sum() - q, EPS)
        wwa_new = np.clip(wwa_new, 0.0, 1.0)

        q_new = wua_new * wwa_new
        delta = max(
            float(np.abs(q_new - q).max()),
            float(np.abs(uq_new - uq).max()),
            float(np.abs(wua_new - wua).max()),
            float(np.abs(wwa_new - wwa).max()),
        )
        q, uq, wua, wwa = q_new, uq_new, wua_new, wwa_new
        iterations += 1
        if delta < config.tol:
            converged = True
            break

    if q.sum() > 0:
        U = unit_annotation_scores(matrix, q)
    else:
        U = matrix.one_hot().sum(axis=1) / matrix.num_workers
    return CtMetrics(
        worker_quality=q,
        worker_unit_agreement=wua,
        worker_worker_agreement=wwa,
        unit_quality=uq,
        unit_annotation=U,
        iterations=iterations,
        converged=converged,
    )


def estimate_from_unit_scores(unit_annotation: np.ndarray, threshold: float | None = None) -> TruthEstimate:
    """Turn a U table into a TruthEstimate: argmax rows, lowest index on ties.

    With a threshold, items whose top score falls below it are dropped
    (hard label -1).
    """
    U = np.asarray(unit_annotation, dtype=np.float64)
    top = U.max(axis=1)
    hard = U.argmax(axis=1).astype(np.int64)
    tie_flags = (U == top[:, None]).sum(axis=1) > 1
    if threshold is not None:
        hard = np.where(top < threshold, -1, hard)
    return TruthEstimate(U, hard, tie_flags)


def run_crowdtruth(matrix: AnnotationMatrix, config: CtConfig = CtConfig()) -> TruthEstimate:
    """Aggregate by the unit-annotation score: posterior rows are U rows."""
    return estimate_from_unit_scores(ct_fixed_point(matrix, config).unit_annotation, config.threshold)
