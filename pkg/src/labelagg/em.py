"""Dawid-Skene EM aggregation.

Alternates a maximisation step (per-worker error-rate matrices and label
marginals from the current soft labels) with an expectation step (Bayes
update of the soft labels) until the soft labels stop moving.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AnnotationMatrix, TruthEstimate, ValidationError, _frozen

ROW_TOL = 1e-9


@dataclass(frozen=True)
class EmConfig:
    """Stopping rule and smoothing strength for run_em."""

    tol: float = 1e-6
    max_iters: int = 100
    smoothing: float = 1e-9

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.smoothing <= 0:
            raise ValidationError(f"smoothing must be positive, got {self.smoothing}")


@dataclass(frozen=True)
class ErrorRateMatrix:
    """One worker's G x G confusion: rows true label, columns given label.

    The diagonal is how often the worker answers correctly.
    """

    rates: np.ndarray

    def __post_init__(self) -> None:
        r = np.asarray(self.rates, dtype=np.float64)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ValidationError(f"rates must be a square G x G table, got shape {r.shape}")
        if (r < 0).any() or (r > 1).any():
            raise ValidationError("error rates must lie in [0, 1]")
        if np.abs(r.sum(axis=1) - 1.0).max() > ROW_TOL:
            raise ValidationError("every error-rate row must sum to 1")
        object.__setattr__(self, "rates", _frozen(r.copy()))


@dataclass(frozen=True)
class LabelMarginals:
    """Prior probability of each label, summing to 1."""

    priors: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.priors, dtype=np.float64)
        if p.ndim != 1:
            raise ValidationError(f"priors must be 1-D, got shape {p.shape}")
        if (p < 0).any() or abs(p.sum() - 1.0) > ROW_TOL:
            raise ValidationError("priors must be non-negative and sum to 1")
        object.__setattr__(self, "priors", _frozen(p.copy()))


@dataclass(frozen=True)
class EmState:
    """Everything run_em produces, including the likelihood history."""

    posterior: TruthEstimate
    error_rates: tuple[ErrorRateMatrix, ...]
    marginals: LabelMarginals
    iterations: int
    converged: bool
    log_likelihood_trace: tuple[float, ...]

    def __post_init__(self) -> None:
        trace = np.asarray(self.log_likelihood_trace, dtype=np.float64)
        if trace.size > 1 and (np.diff(trace) < -ROW_TOL).any():
            step = int(np.argmax(np.diff(trace) < -ROW_TOL))
            raise ValidationError(
                f"log likelihood decreased at iteration {step + 1}: "
                f"{trace[step]!r} -> {trace[step + 1]!r}"
            )


def em_initialize(matrix: AnnotationMatrix) -> np.ndarray:
    """Soft majority-vote start: T[s, j] is label j's vote fraction on item s."""
    counts = matrix.one_hot().sum(axis=1)
    return counts / counts.sum(axis=1, keepdims=True)


def em_m_step(
    T: np.ndarray, matrix: AnnotationMatrix, smoothing: float = 1e-9
) -> tuple[np.ndarray, np.ndarray]:
    """Re-estimate (error_rates, marginals) from soft labels T.

    error_rates[w, j, g] is worker w's probability of answering g when the
    truth is j: the T-weighted count of such answers, row-normalised.
    ``smoothing`` is added to every count so labels absent from T still get
    a valid (near-uniform) row instead of 0/0.
    """
    n = matrix.one_hot()
    counts = np.einsum("sj,swg->wjg", T, n) + smoothing
    rates = counts / counts.sum(axis=2, keepdims=True)
    marginals = T.sum(axis=0) / T.shape[0]
    marginals = np.maximum(marginals, smoothing)
    marginals = marginals / marginals.sum()
    return rates, marginals


def _log_numerators(
    error_rates: np.ndarray, marginals: np.ndarray, matrix: AnnotationMatrix
) -> np.ndarray:
    """log(P_j * prod_w rates[w, j, answer_sw]) per item and label, shape (S, G)."""
    with np.errstate(divide="ignore"):
        log_rates = np.log(error_rates)
        log_priors = np.log(marginals)
    # gather log rates[w, :, answers[s, w]] without materialising one-hots
    by_given = np.transpose(log_rates, (0, 2, 1))  # (W, given g, true j)
    per_worker = by_given[np.arange(matrix.num_workers)[None, :], matrix.answers]  # (S, W, G)
    return log_priors[None, :] + per_worker.sum(axis=1)


def em_e_step(
    error_rates: np.ndarray, marginals: np.ndarray, matrix: AnnotationMatrix
) -> np.ndarray:
    """Bayes-update soft labels from the current model, in log space.

    Rows are shifted by their maximum before exponentiation so a product
    over many workers cannot underflow to an all-zero row.
    """
    log_num = _log_numerators(error_rates, marginals, matrix)
    row_max = log_num.max(axis=1)
    if not np.isfinite(row_max).all():
        bad = int(np.argmin(np.isfinite(row_max)))
        raise ValidationError(
            f"item {bad} has zero likelihood under every label (unsmoothed zero rates?)"
        )
    T = np.exp(log_num - row_max[:, None])
    return T / T.sum(axis=1, keepdims=True)


def _log_likelihood(log_num: np.ndarray) -> float:
    """Observed-data log likelihood: sum over items of log sum_j numerator."""
    row_max = log_num.max(axis=1)
    return float((row_max + np.log(np.exp(log_num - row_max[:, None]).sum(axis=1))).sum())


def run_em(matrix: AnnotationMatrix, config: EmConfig = EmConfig()) -> EmState:
    """Full EM loop from a soft-MV start.

    Stops once the largest per-entry change in T falls below config.tol,
    or after config.max_iters M+E cycles; non-convergence is reported via
    the flag, never raised. Hard labels are per-row argmax with the lowest
    index winning exact ties.
    """
    T = em_initialize(matrix)
    trace: list[float] = []
    rates = marginals = None
    converged = False
    iterations = 0
    for _ in range(config.max_iters):
        rates, marginals = em_m_step(T, matrix, config.smoothing)
        log_num = _log_numerators(rates, marginals, matrix)
        trace.append(_log_likelihood(log_num))
        row_max = log_num.max(axis=1)
        T_new = np.exp(log_num - row_max[:, None])
        T_new /= T_new.sum(axis=1, keepdims=True)
        delta = float(np.abs(T_new - T).max())
        T = T_new
        iterations += 1
        if delta < config.tol:
            converged = True
            break

    row_top = T.max(axis=1)
    hard = T.argmax(axis=1).astype(np.int64)
    tie_flags = (T == row_top[:, None]).sum(axis=1) > 1
    estimate = TruthEstimate(T, hard, tie_flags)
    return EmState(
        posterior=estimate,
        error_rates=tuple(ErrorRateMatrix(r) for r in rates),
        marginals=LabelMarginals(marginals),
        iterations=iterations,
        converged=converged,
        log_likelihood_trace=tuple(trace),
    )
