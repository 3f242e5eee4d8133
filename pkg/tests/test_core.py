"""Domain type construction and validation tests."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labelagg.core import (
    AnnotationMatrix,
    Taxonomy,
    TruthAssignment,
    TruthEstimate,
    ValidationError,
    build_annotation_matrix,
    new_taxonomy,
)


class TestTaxonomy:
    def test_accepts_two_or_more_labels(self):
        assert new_taxonomy(2).num_labels == 2
        assert new_taxonomy(20).num_labels == 20

    @pytest.mark.parametrize("bad", [1, 0, -3])
    def test_rejects_fewer_than_two(self, bad):
        with pytest.raises(ValidationError):
            new_taxonomy(bad)

    def test_rejects_fractional_counts(self):
        with pytest.raises(ValidationError):
            Taxonomy(2.5)

    def test_is_immutable(self):
        t = new_taxonomy(3)
        with pytest.raises(Exception):
            t.num_labels = 4


class TestAnnotationMatrix:
    def test_shape_accessors(self):
        m = AnnotationMatrix(Taxonomy(4), np.zeros((5, 3), dtype=np.int64))
        assert (m.num_items, m.num_workers, m.num_labels) == (5, 3, 4)

    def test_rejects_out_of_range_labels(self):
        with pytest.raises(ValidationError, match=r"outside"):
            AnnotationMatrix(Taxonomy(2), np.asarray([[0, 2]]))
        with pytest.raises(ValidationError, match=r"outside"):
            AnnotationMatrix(Taxonomy(2), np.asarray([[0, -1]]))

    def test_rejects_non_integer_entries(self):
        with pytest.raises(ValidationError, match="integer"):
            AnnotationMatrix(Taxonomy(2), np.asarray([[0.5, 1.0]]))

    def test_accepts_whole_valued_floats(self):
        m = AnnotationMatrix(Taxonomy(2), np.asarray([[0.0, 1.0]]))
        assert m.answers.dtype == np.int64

    def test_rejects_wrong_rank_and_empty(self):
        with pytest.raises(ValidationError):
            AnnotationMatrix(Taxonomy(2), np.asarray([0, 1]))
        with pytest.raises(ValidationError):
            AnnotationMatrix(Taxonomy(2), np.zeros((0, 3), dtype=np.int64))
        with pytest.raises(ValidationError):
            AnnotationMatrix(Taxonomy(2), np.zeros((3, 0), dtype=np.int64))

    def test_answers_are_defensively_copied_and_frozen(self):
        src = np.asarray([[0, 1], [1, 0]])
        m = AnnotationMatrix(Taxonomy(2), src)
        src[0, 0] = 1
        assert m.answers[0, 0] == 0
        with pytest.raises(ValueError):
            m.answers[0, 0] = 1

    def test_one_hot_places_single_indicator_per_vote(self):
        m = AnnotationMatrix(Taxonomy(3), np.asarray([[0, 2], [1, 1]]))
        n = m.one_hot()
        assert n.shape == (2, 2, 3)
        assert n.sum(axis=2) == pytest.approx(np.ones((2, 2)))
        assert n[0, 1].tolist() == [0.0, 0.0, 1.0]
        assert n[1, 0].tolist() == [0.0, 1.0, 0.0]

    def test_content_hash_is_stable_and_content_sensitive(self):
        a = AnnotationMatrix(Taxonomy(3), np.asarray([[0, 1], [2, 0]]))
        b = AnnotationMatrix(Taxonomy(3), np.asarray([[0, 1], [2, 0]]))
        c = AnnotationMatrix(Taxonomy(3), np.asarray([[0, 1], [2, 1]]))
        assert a.content_hash() == b.content_hash()
        assert a.content_hash() != c.content_hash()
        assert len(a.content_hash()) == 16
        int(a.content_hash(), 16)  # all hex digits

    def test_content_hash_sees_label_count_and_shape(self):
        flat = np.asarray([[0, 1, 0, 1]])
        tall = np.asarray([[0, 1], [0, 1]])
        assert (
            AnnotationMatrix(Taxonomy(2), flat).content_hash()
            != AnnotationMatrix(Taxonomy(2), tall).content_hash()
        )
        same = np.asarray([[0, 1]])
        assert (
            AnnotationMatrix(Taxonomy(2), same).content_hash()
            != AnnotationMatrix(Taxonomy(3), same).content_hash()
        )


class TestBuildAnnotationMatrix:
    def test_accepts_nested_lists(self):
        m = build_annotation_matrix(Taxonomy(2), [[0, 1], [1, 1]])
        assert m.answers.tolist() == [[0, 1], [1, 1]]

    def test_rejects_ragged_rows(self):
        with pytest.raises(ValidationError, match="ragged"):
            build_annotation_matrix(Taxonomy(2), [[0, 1], [1]])


class TestTruthAssignment:
    def test_round_trip(self):
        t = TruthAssignment(np.asarray([0, 2, 1]), num_labels=3)
        assert len(t) == 3
        assert t.labels.tolist() == [0, 2, 1]

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            TruthAssignment(np.asarray([0, 3]), num_labels=3)
        with pytest.raises(ValidationError):
            TruthAssignment(np.asarray([-1]), num_labels=3)

    def test_rejects_empty_or_matrix_input(self):
        with pytest.raises(ValidationError):
            TruthAssignment(np.zeros(0, dtype=np.int64), num_labels=2)
        with pytest.raises(ValidationError):
            TruthAssignment(np.zeros((2, 2), dtype=np.int64), num_labels=2)


class TestTruthEstimate:
    def test_accepts_consistent_estimate(self):
        e = TruthEstimate(np.asarray([[0.7, 0.3], [0.5, 0.5]]), np.asarray([0, 1]))
        assert e.num_items == 2
        assert e.num_labels == 2
        assert e.tie_count == 0

    def test_default_tie_flags_are_all_false(self):
        e = TruthEstimate(np.asarray([[1.0, 0.0]]), np.asarray([0]))
        assert e.tie_flags.tolist() == [False]

    def test_rejects_row_that_does_not_sum_to_one(self):
        with pytest.raises(ValidationError, match="sums to"):
            TruthEstimate(np.asarray([[0.6, 0.3]]), np.asarray([0]))

    def test_rejects_negative_mass(self):
        with pytest.raises(ValidationError, match="non-negative"):
            TruthEstimate(np.asarray([[1.2, -0.2]]), np.asarray([0]))

    def test_rejects_hard_label_not_at_row_maximum(self):
        with pytest.raises(ValidationError, match="row maximum"):
            TruthEstimate(np.asarray([[0.7, 0.3]]), np.asarray([1]))

    def test_tied_rows_accept_either_maximum(self):
        post = np.asarray([[0.5, 0.5]])
        for hard in (0, 1):
            e = TruthEstimate(post, np.asarray([hard]), np.asarray([True]))
            assert e.tie_count == 1

    def test_minus_one_marks_dropped_items(self):
        e = TruthEstimate(
            np.asarray([[0.5, 0.5], [1.0, 0.0]]),
            np.asarray([-1, 0]),
            np.asarray([True, False]),
        )
        assert e.hard_labels.tolist() == [-1, 0]

    def test_rejects_labels_below_minus_one_or_past_range(self):
        post = np.asarray([[0.5, 0.5]])
        with pytest.raises(ValidationError):
            TruthEstimate(post, np.asarray([-2]))
        with pytest.raises(ValidationError):
            TruthEstimate(post, np.asarray([2]))

    def test_rejects_mismatched_shapes(self):
        with pytest.raises(ValidationError):
            TruthEstimate(np.asarray([[1.0, 0.0]]), np.asarray([0, 0]))
        with pytest.raises(ValidationError):
            TruthEstimate(np.asarray([[1.0, 0.0]]), np.asarray([0]), np.asarray([True, False]))

    @given(st.integers(1, 20), st.integers(2, 6), st.integers(0, 2 ** 31))
    @settings(max_examples=40, deadline=None)
    def test_argmax_rows_always_validate(self, s, g, seed):
        rng = np.random.default_rng(seed)
        post = rng.random((s, g))
        post /= post.sum(axis=1, keepdims=True)
        e = TruthEstimate(post, post.argmax(axis=1))
        assert e.num_items == s
