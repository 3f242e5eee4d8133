"""Synthetic crowd generation: ground-truth samples, worker expertise, noisy answers.

All operations are pure functions of their inputs and an explicit RNG
seed, so repetitions are reproducible and can run concurrently.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import Taxonomy, TruthAssignment, ValidationError

# Per-label proportions of the reference corpora, keyed by taxonomy size.
# The G=20 column as published sums to 0.999 (rounding); it is renormalised
# on construction so every distribution sums to 1 exactly.
BUILTIN_PROPORTIONS: dict[int, tuple[float, ...]] = {
    2: (0.373, 0.627),
    3: (0.289, 0.353, 0.358),
    5: (0.17, 0.207, 0.21, 0.209, 0.204),
    7: (0.12, 0.146, 0.148, 0.147, 0.145, 0.148, 0.146),
    10: (0.083, 0.101, 0.102, 0.102, 0.1, 0.102, 0.101, 0.103, 0.103, 0.103),
    15: (0.055, 0.067, 0.068, 0.067, 0.066, 0.068, 0.067, 0.068, 0.068, 0.068,
         0.068, 0.068, 0.067, 0.068, 0.067),
    20: (0.042, 0.052, 0.052, 0.052, 0.051, 0.052, 0.051, 0.053, 0.053, 0.053,
         0.053, 0.053, 0.052, 0.053, 0.052, 0.053, 0.048, 0.05, 0.041, 0.033),
}

# Empirically determined lowest useful worker accuracy per taxonomy size:
# a worker slightly better than chance-level guessing.
LOWER_BOUNDS: dict[int, float] = {
    2: 0.483,
    3: 0.327,
    5: 0.189,
    7: 0.139,
    10: 0.094,
    15: 0.063,
    20: 0.049,
}

HIGH_BAND_BOUNDS = (0.51, 0.99)
LOW_BAND_UPPER = 0.8

_PROPORTION_TOL = 1e-9


@dataclass(frozen=True)
class LabelDistribution:
    """Per-label proportions used to lay out a ground-truth sample."""

    proportions: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.proportions, dtype=np.float64)
        if p.ndim != 1 or p.size < 2:
            raise ValidationError(f"proportions must be 1-D with >= 2 entries, got shape {p.shape}")
        if (p < 0).any():
            raise ValidationError("proportions must be non-negative")
        if abs(p.sum() - 1.0) > _PROPORTION_TOL:
            raise ValidationError(f"proportions sum to {p.sum()!r}, not 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "proportions", p)

    @property
    def num_labels(self) -> int:
        return self.proportions.shape[0]


@dataclass(frozen=True)
class ExpertiseBand:
    """Open interval (lower, upper) worker accuracies are drawn from."""

    lower: float
    upper: float
    band_kind: str = "high"

    def __post_init__(self) -> None:
        if not (0.0 <= self.lower < self.upper <= 1.0):
            raise ValidationError(
                f"expertise band must satisfy 0 <= lower < upper <= 1, got ({self.lower}, {self.upper})"
            )
        if self.band_kind not in ("high", "low"):
            raise ValidationError(f"band_kind must be 'high' or 'low', got {self.band_kind!r}")


@dataclass(frozen=True)
class WorkerProfile:
    """A simulated worker, fully described by accuracy ``expertise``."""

    expertise: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.expertise <= 1.0):
            raise ValidationError(f"expertise must lie in [0, 1], got {self.expertise}")


def builtin_distribution(num_labels: int) -> LabelDistribution:
    """The shipped label distribution for a tabulated taxonomy size.

    Raises for sizes without a shipped column; callers with other
    taxonomies should supply a custom distribution (see load_distribution).
    """
    try:
        raw = np.asarray(BUILTIN_PROPORTIONS[num_labels], dtype=np.float64)
    except KeyError:
        raise ValidationError(
            f"no built-in label distribution for {num_labels} labels "
            f"(available: {sorted(BUILTIN_PROPORTIONS)}); supply a custom distribution"
        ) from None
    return LabelDistribution(raw / raw.sum())


def load_distribution(source) -> LabelDistribution:
    """Load a custom distribution from a JSON file path or parsed document.

    Expected shape: {"num_labels": int, "proportions": [float, ...]}.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "read"):
        if hasattr(source, "read"):
            doc = json.load(source)
        else:
            with open(source, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
    else:
        doc = source
    try:
        num_labels = int(doc["num_labels"])
        proportions = doc["proportions"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"distribution document needs num_labels and proportions: {exc}") from None
    dist = LabelDistribution(np.asarray(proportions, dtype=np.float64))
    if dist.num_labels != num_labels:
        raise ValidationError(
            f"distribution declares {num_labels} labels but lists {dist.num_labels} proportions"
        )
    return dist


def _apportion(proportions: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder apportionment of ``total`` into integer per-label counts.

    Quotas are rounded to 9 decimal places first so that remainder ordering
    follows the decimal values the proportions were stated with rather than
    binary float noise; remainder ties go to the lowest label index.
    """
    quotas = np.round(proportions * float(total), 9)
    base = np.floor(quotas).astype(np.int64)
    remainders = quotas - base
    missing = int(total - base.sum())
    if missing > 0:
        # stable order: largest remainder first, lowest index among equals
        order = np.lexsort((np.arange(quotas.size), -remainders))
        base[order[:missing]] += 1
    return base


def sample_ground_truth(dist: LabelDistribution, target_size: int, rng_seed: int) -> TruthAssignment:
    """Lay out ``target_size`` reference labels matching ``dist`` as closely as possible.

    Counts are apportioned deterministically (largest remainder), so each
    label's count is within one item of ``target_size * proportion``; only
    the order of items is random.
    """
    if target_size < 1:
        raise ValidationError(f"target_size must be >= 1, got {target_size}")
    counts = _apportion(dist.proportions, target_size)
    labels = np.repeat(np.arange(dist.num_labels, dtype=np.int64), counts)
    rng = np.random.default_rng(rng_seed)
    rng.shuffle(labels)
    return TruthAssignment(labels, dist.num_labels)


def sample_expertise(band: ExpertiseBand, num_workers: int, rng_seed: int) -> list[WorkerProfile]:
    """Draw ``num_workers`` accuracies uniformly from the open band interval."""
    if num_workers < 1:
        raise ValidationError(f"num_workers must be >= 1, got {num_workers}")
    rng = np.random.default_rng(rng_seed)
    values = rng.uniform(band.lower, band.upper, size=num_workers)
    # endpoint hits have probability zero but would violate the open interval
    while True:
        onto_edge = (values <= band.lower) | (values >= band.upper)
        if not onto_edge.any():
            break
        values[onto_edge] = rng.uniform(band.lower, band.upper, size=int(onto_edge.sum()))
    return [WorkerProfile(float(v)) for v in values]


def corrupt_answers(
    truth: TruthAssignment,
    profile: WorkerProfile,
    taxonomy: Taxonomy,
    rng_seed: int,
) -> np.ndarray:
    """One worker's answer vector: truth with round((1-expertise)*S) entries flipped.

    Flip positions are chosen uniformly without replacement; each flipped
    entry is replaced by a label drawn uniformly from the wrong labels, so
    every corrupted entry differs from the reference label. Rounding of the
    flip count is ties-to-even.
    """
    n = len(truth)
    num_labels = taxonomy.num_labels
    rng = np.random.default_rng(rng_seed)
    flips = int(round((1.0 - profile.expertise) * n))
    answers = truth.labels.copy()
    if flips == 0:
        return answers
    positions = rng.choice(n, size=flips, replace=False)
    # offset draw over G-1 skips the true label, i.e. uniform over wrong labels
    offsets = rng.integers(0, num_labels - 1, size=flips)
    current = answers[positions]
    answers[positions] = np.where(offsets >= current, offsets + 1, offsets)
    return answers


def lower_bound_for(num_labels: int) -> float:
    """Low-band lower bound for a taxonomy size.

    Tabulated sizes return their shipped constant; other sizes are
    piecewise-linearly interpolated against 1/G between the nearest
    tabulated neighbours, clamped at the table ends.
    """
    if num_labels < 2:
        raise ValidationError(f"num_labels must be >= 2, got {num_labels}")
    if num_labels in LOWER_BOUNDS:
        return LOWER_BOUNDS[num_labels]
    sizes = sorted(LOWER_BOUNDS)  # ascending G, so descending 1/G
    xs = np.array([1.0 / g for g in reversed(sizes)])
    ys = np.array([LOWER_BOUNDS[g] for g in reversed(sizes)])
    return float(np.interp(1.0 / num_labels, xs, ys))


def high_band() -> ExpertiseBand:
    """The high-expertise band: every worker beats a coin flip."""
    return ExpertiseBand(*HIGH_BAND_BOUNDS, band_kind="high")


def low_band_for(num_labels: int) -> ExpertiseBand:
    """The low-expertise band for a taxonomy size: (lower bound, 0.8)."""
    return ExpertiseBand(lower_bound_for(num_labels), LOW_BAND_UPPER, band_kind="low")


def band_for(kind: str, num_labels: int) -> ExpertiseBand:
    """Resolve a band kind name ('high' or 'low') for a taxonomy size."""
    if kind == "high":
        return high_band()
    if kind == "low":
        return low_band_for(num_labels)
    raise ValidationError(f"unknown expertise band kind {kind!r}")
