"""Domain types shared by the aggregators, the simulator and the runner.

Everything downstream works on dense integer label indices ``0..G-1``;
mapping external label names onto indices is an I/O concern. All types
are immutable after construction (backing arrays are frozen), so they
can be shared freely across threads.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


class ValidationError(ValueError):
    """Raised when a domain object is built from inconsistent data."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Taxonomy:
    """The set of label choices for a task, sized ``num_labels``."""

    num_labels: int

    def __post_init__(self) -> None:
        if int(self.num_labels) != self.num_labels:
            raise ValidationError(f"num_labels must be an integer, got {self.num_labels!r}")
        object.__setattr__(self, "num_labels", int(self.num_labels))
        if self.num_labels < 2:
            raise ValidationError(
                f"a labelling task needs at least two label choices, got {self.num_labels}"
            )


@dataclass(frozen=True)
class AnnotationMatrix:
    """Dense per-item, per-worker chosen label indices.

    ``answers[s, w]`` is the label index worker ``w`` gave item ``s``;
    every worker answers every item exactly once.
    """

    taxonomy: Taxonomy
    answers: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.answers)
        if arr.ndim != 2:
            raise ValidationError(f"answers must be a 2-D item x worker table, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"answers needs at least one item and one worker, got shape {arr.shape}")
        if arr.dtype.kind not in "iu":
            if not np.all(arr == np.floor(arr)):
                raise ValidationError("answers must contain integer label indices")
            arr = arr.astype(np.int64)
        else:
            arr = arr.astype(np.int64, copy=True)
        bad = (arr < 0) | (arr >= self.taxonomy.num_labels)
        if bad.any():
            s, w = np.argwhere(bad)[0]
            raise ValidationError(
                f"label index {arr[s, w]} at (item {s}, worker {w}) is outside "
                f"[0, {self.taxonomy.num_labels})"
            )
        object.__setattr__(self, "answers", _frozen(arr))

    @property
    def num_items(self) -> int:
        return self.answers.shape[0]

    @property
    def num_workers(self) -> int:
        return self.answers.shape[1]

    @property
    def num_labels(self) -> int:
        return self.taxonomy.num_labels

    def one_hot(self) -> np.ndarray:
        """(S, W, G) float indicator: 1.0 where worker w chose label g on item s.

        Each (s, w) slice has exactly one nonzero entry.
        """
        eye = np.eye(self.num_labels)
        return eye[self.answers]

    def content_hash(self) -> str:
        """Stable 16-hex-digit digest of the shape, label count and entries."""
        h = hashlib.sha256()
        h.update(np.asarray([self.num_items, self.num_workers, self.num_labels], dtype="<i8").tobytes())
        h.update(np.ascontiguousarray(self.answers, dtype="<i8").tobytes())
        return h.hexdigest()[:16]


def build_annotation_matrix(taxonomy: Taxonomy, answers) -> AnnotationMatrix:
    """Validate a rectangular table of label indices into an AnnotationMatrix."""
    rows = list(answers) if not isinstance(answers, np.ndarray) else answers
    if not isinstance(rows, np.ndarray):
        lengths = {len(r) for r in rows}
        if len(lengths) > 1:
            raise ValidationError(f"ragged answer table: row lengths {sorted(lengths)}")
        rows = np.asarray(rows)
    return AnnotationMatrix(taxonomy, rows)


@dataclass(frozen=True)
class TruthAssignment:
    """Hard per-item reference labels, one index per item."""

    labels: np.ndarray
    num_labels: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.labels, dtype=np.int64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError(f"labels must be a non-empty 1-D sequence, got shape {arr.shape}")
        if (arr < 0).any() or (arr >= self.num_labels).any():
            raise ValidationError(f"labels contain indices outside [0, {self.num_labels})")
        object.__setattr__(self, "labels", _frozen(arr))

    def __len__(self) -> int:
        return self.labels.shape[0]


ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class TruthEstimate:
    """Aggregator output: a per-item distribution over labels plus hard labels.

    ``tie_flags[s]`` marks items whose top score was shared by several
    labels and resolved (or dropped) by the tie policy in force. A hard
    label of -1 means the item was dropped and carries no decision;
    scoring must mask such items out.
    """

    posterior: np.ndarray
    hard_labels: np.ndarray
    tie_flags: np.ndarray | None = None

    def __post_init__(self) -> None:
        post = np.asarray(self.posterior, dtype=np.float64)
        hard = np.asarray(self.hard_labels, dtype=np.int64)
        if post.ndim != 2:
            raise ValidationError(f"posterior must be S x G, got shape {post.shape}")
        s, g = post.shape
        if hard.shape != (s,):
            raise ValidationError(f"hard_labels shape {hard.shape} does not match {s} items")
        if (post < 0).any():
            raise ValidationError("posterior entries must be non-negative")
        sums = post.sum(axis=1)
        if np.abs(sums - 1.0).max() > ROW_SUM_TOL:
            worst = int(np.abs(sums - 1.0).argmax())
            raise ValidationError(f"posterior row {worst} sums to {sums[worst]!r}, not 1")
        if (hard < -1).any() or (hard >= g).any():
            raise ValidationError(f"hard labels contain indices outside [0, {g}) or the -1 sentinel")
        kept = hard >= 0
        idx = np.flatnonzero(kept)
        short = post[idx, hard[idx]] < post[idx].max(axis=1) if idx.size else np.zeros(0, bool)
        if short.any():
            worst = int(idx[np.argmax(short)])
            raise ValidationError(f"hard label of item {worst} does not attain its row maximum")
        flags = self.tie_flags
        if flags is None:
            flags = np.zeros(s, dtype=bool)
        flags = np.asarray(flags, dtype=bool)
        if flags.shape != (s,):
            raise ValidationError(f"tie_flags shape {flags.shape} does not match {s} items")
        object.__setattr__(self, "posterior", _frozen(post))
        object.__setattr__(self, "hard_labels", _frozen(hard))
        object.__setattr__(self, "tie_flags", _frozen(flags))

    @property
    def num_items(self) -> int:
        return self.posterior.shape[0]

    @property
    def num_labels(self) -> int:
        return self.posterior.shape[1]

    @property
    def tie_count(self) -> int:
        return int(self.tie_flags.sum())


def new_taxonomy(num_labels: int) -> Taxonomy:
    """Validated Taxonomy constructor (rejects fewer than two choices)."""
    return Taxonomy(num_labels)
