"""Label aggregation toolkit.

Aggregates crowd-sourced single-choice annotations by majority vote,
Dawid-Skene EM, or agreement-based worker-quality weighting, simulates
synthetic crowds with controlled expertise, and runs seeded parameter
grids with weighted-F1 scoring and pairwise ANOVA significance tables.
"""
from .core import (
    AnnotationMatrix,
    Taxonomy,
    TruthAssignment,
    TruthEstimate,
    ValidationError,
    build_annotation_matrix,
    new_taxonomy,
)
from .crowdtruth import CtConfig, CtMetrics, ct_fixed_point, run_crowdtruth, unit_annotation_scores
from .em import EmConfig, EmState, ErrorRateMatrix, LabelMarginals, run_em
from .evaluate import (
    AnovaResult,
    ScoreReport,
    f_distribution_sf,
    one_way_anova,
    regularized_incomplete_beta,
    weighted_f1,
)
from .majority import TiePolicy, majority_vote, vote_counts
from .runner import (
    ExperimentConfig,
    RepetitionRecord,
    SignificanceRecord,
    default_high_band_config,
    mix_seed,
    read_annotations_csv,
    read_results_csv,
    read_significance_csv,
    run_cell,
    run_grid,
    significance_table,
    write_annotations_csv,
    write_results_csv,
    write_significance_csv,
)
from .simulate import (
    ExpertiseBand,
    LabelDistribution,
    WorkerProfile,
    band_for,
    builtin_distribution,
    corrupt_answers,
    high_band,
    load_distribution,
    low_band_for,
    lower_bound_for,
    sample_expertise,
    sample_ground_truth,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationMatrix",
    "AnovaResult",
    "CtConfig",
    "CtMetrics",
    "EmConfig",
    "EmState",
    "ErrorRateMatrix",
    "ExperimentConfig",
    "ExpertiseBand",
    "LabelDistribution",
    "LabelMarginals",
    "RepetitionRecord",
    "ScoreReport",
    "SignificanceRecord",
    "Taxonomy",
    "TiePolicy",
    "TruthAssignment",
    "TruthEstimate",
    "ValidationError",
    "WorkerProfile",
    "band_for",
    "build_annotation_matrix",
    "builtin_distribution",
    "corrupt_answers",
    "ct_fixed_point",
    "default_high_band_config",
    "f_distribution_sf",
    "high_band",
    "load_distribution",
    "low_band_for",
    "lower_bound_for",
    "majority_vote",
    "mix_seed",
    "new_taxonomy",
    "one_way_anova",
    "read_annotations_csv",
    "read_results_csv",
    "read_significance_csv",
    "regularized_incomplete_beta",
    "run_cell",
    "run_crowdtruth",
    "run_em",
    "run_grid",
    "sample_expertise",
    "sample_ground_truth",
    "significance_table",
    "unit_annotation_scores",
    "vote_counts",
    "weighted_f1",
    "write_annotations_csv",
    "write_results_csv",
    "write_significance_csv",
]
