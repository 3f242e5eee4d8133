"""Majority vote aggregation with explicit tie handling."""
from __future__ import annotations

from enum import Enum

import numpy as np

from .core import AnnotationMatrix, TruthEstimate, ValidationError


class TiePolicy(Enum):
    """What to do when two or more labels share the top vote count."""

    WEIGHTED_RANDOM = "weighted_random"
    LOWEST_INDEX = "lowest_index"
    DROP = "drop"


def vote_counts(matrix: AnnotationMatrix) -> np.ndarray:
    """Per-item vote tallies, shape (num_items, num_labels)."""
    return matrix.one_hot().sum(axis=1)


def majority_vote(
    matrix: AnnotationMatrix,
    tie_policy: TiePolicy = TiePolicy.WEIGHTED_RANDOM,
    rng_seed: int | None = None,
) -> TruthEstimate:
    """Aggregate by plurality of votes.

    The posterior row for each item is its vote-fraction vector. Items
    whose top vote count is shared get tie_flags set and are resolved per
    ``tie_policy``:

    - weighted_random: draw uniformly among the tied labels (seeded rng)
    - lowest_index: deterministic smallest tied label
    - drop: keep hard label -1; downstream scoring must mask these items

    weighted_random requires rng_seed so the draw is reproducible.
    """
    counts = vote_counts(matrix)
    posterior = counts / counts.sum(axis=1, keepdims=True)
    top = counts.max(axis=1)
    is_top = counts == top[:, None]
    tie_flags = is_top.sum(axis=1) > 1
    hard = counts.argmax(axis=1).astype(np.int64)

    if tie_flags.any():
        tied_rows = np.flatnonzero(tie_flags)
        if tie_policy is TiePolicy.WEIGHTED_RANDOM:
            if rng_seed is None:
                raise ValidationError("weighted_random tie policy needs rng_seed")
            rng = np.random.default_rng(rng_seed)
            for s in tied_rows:
                hard[s] = rng.choice(np.flatnonzero(is_top[s]))
        elif tie_policy is TiePolicy.LOWEST_INDEX:
            pass  # argmax already returns the smallest index among equals
        elif tie_policy is TiePolicy.DROP:
            hard[tied_rows] = -1

    return TruthEstimate(posterior, hard, tie_flags)
