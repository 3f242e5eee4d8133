"""Experiment grid execution with deterministic seeding and CSV persistence.

Every repetition's randomness comes from a seed mixed out of
(master_seed, G, S, W, rep), so cells are independent: re-running any
sub-grid reproduces exactly the rows the full grid would have produced,
regardless of execution order.
"""
from __future__ import annotations

import csv
import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .core import AnnotationMatrix, Taxonomy, TruthAssignment, ValidationError
from .crowdtruth import CtConfig, ct_fixed_point, estimate_from_unit_scores
from .em import EmConfig, run_em
from .evaluate import one_way_anova, weighted_f1
from .majority import TiePolicy, majority_vote
from .simulate import band_for, builtin_distribution, corrupt_answers, sample_expertise, sample_ground_truth

DEFAULT_LABEL_SETS = (2, 3, 5, 7, 10, 15, 20)
DEFAULT_SAMPLE_SIZES = (50, 125, 250, 500, 1000, 2000)
DEFAULT_WORKER_SETS = (3, 5, 8, 10, 13, 15, 18, 20, 30, 40)
DEFAULT_MASTER_SEED = 42
ALL_METHODS = ("ct", "em", "mv")
METHOD_PAIRS = (("em", "mv"), ("ct", "mv"), ("ct", "em"))

RESULTS_HEADER = (
    "expertise_band,G,S_target,S_actual,W,rep,method,weighted_f1,tie_count,"
    "iterations,converged,runtime_ms,cell_seed,matrix_hash"
)
SIGNIFICANCE_HEADER = (
    "G,S,W,method_a,method_b,mean_f1_a,mean_f1_b,f_statistic,p_value,"
    "significant_05,significant_005"
)

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix_seed(*fields: int) -> int:
    """Stable 64-bit hash of an integer tuple; order-sensitive.

    Used for all seed derivation so that adding grid cells never perturbs
    the seeds of existing ones.
    """
    acc = 0x5851F42D4C957F2D
    for f in fields:
        acc = _splitmix64(acc ^ (int(f) & _MASK64))
    return acc


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a grid run; everything the CSVs depend on."""

    expertise_band_kind: str = "low"
    label_sets: tuple[int, ...] = DEFAULT_LABEL_SETS
    sample_sizes: tuple[int, ...] = DEFAULT_SAMPLE_SIZES
    worker_sets: tuple[int, ...] = DEFAULT_WORKER_SETS
    repetitions: int = 10
    master_seed: int = DEFAULT_MASTER_SEED
    methods: tuple[str, ...] = ALL_METHODS
    tie_policy: TiePolicy = TiePolicy.WEIGHTED_RANDOM
    em: EmConfig = field(default_factory=EmConfig)
    ct: CtConfig = field(default_factory=CtConfig)
    # per-G sample-size overrides, e.g. ((2, (569,)),) for the default
    # high-expertise grid where the binary task uses its full corpus size
    sample_overrides: tuple[tuple[int, tuple[int, ...]], ...] = ()
    measure_runtime: bool = False

    def __post_init__(self) -> None:
        if self.expertise_band_kind not in ("high", "low"):
            raise ValidationError(f"expertise_band_kind must be 'high' or 'low', got {self.expertise_band_kind!r}")
        for name in ("label_sets", "sample_sizes", "worker_sets"):
            vals = getattr(self, name)
            if not vals:
                raise ValidationError(f"{name} must be non-empty")
            object.__setattr__(self, name, tuple(int(v) for v in vals))
        if any(g < 2 for g in self.label_sets):
            raise ValidationError("label_sets entries must be >= 2")
        if any(s < 1 for s in self.sample_sizes) or any(w < 1 for w in self.worker_sets):
            raise ValidationError("sample_sizes and worker_sets entries must be >= 1")
        if self.repetitions < 2:
            raise ValidationError(f"repetitions must be >= 2 for significance testing, got {self.repetitions}")
        if self.master_seed < 0:
            raise ValidationError(f"master_seed must be non-negative, got {self.master_seed}")
        methods = tuple(self.methods)
        unknown = set(methods) - set(ALL_METHODS)
        if unknown or not methods:
            raise ValidationError(f"methods must be a non-empty subset of {ALL_METHODS}, got {methods}")
        object.__setattr__(self, "methods", methods)

    def samples_for(self, num_labels: int) -> tuple[int, ...]:
        for g, sizes in self.sample_overrides:
            if g == num_labels:
                return tuple(sizes)
        return self.sample_sizes


def default_high_band_config(**overrides) -> ExperimentConfig:
    """The default high-expertise grid: S pinned to 500, except the binary
    task which uses its full 569-item corpus size."""
    base = dict(
        expertise_band_kind="high",
        sample_sizes=(500,),
        sample_overrides=((2, (569,)),),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@dataclass(frozen=True)
class RepetitionRecord:
    """One method's scored run on one repetition of one grid cell."""

    expertise_band: str
    G: int
    S_target: int
    S_actual: int
    W: int
    rep: int
    method: str
    weighted_f1: float
    tie_count: int
    iterations: int
    converged: bool
    runtime_ms: float
    cell_seed: int
    matrix_hash: str


@dataclass(frozen=True)
class SignificanceRecord:
    """Pairwise ANOVA verdict for one method pair in one grid cell."""

    G: int
    S: int
    W: int
    method_a: str
    method_b: str
    mean_f1_a: float
    mean_f1_b: float
    f_statistic: float
    p_value: float
    significant_05: bool
    significant_005: bool


ResultTable = list[RepetitionRecord]

_SORT_KEY = lambda r: (r.G, r.S_target, r.W, r.rep, r.method)  # noqa: E731


def _run_method(
    method: str,
    matrix: AnnotationMatrix,
    truth: TruthAssignment,
    config: ExperimentConfig,
    tie_seed: int,
) -> tuple[float, int, int, bool, float]:
    """Execute one aggregator and score it; returns
    (weighted_f1, tie_count, iterations, converged, runtime_ms)."""
    start = time.perf_counter() if config.measure_runtime else 0.0
    if method == "mv":
        estimate = majority_vote(matrix, config.tie_policy, rng_seed=tie_seed)
        iterations, converged = 0, True
    elif method == "em":
        state = run_em(matrix, config.em)
        estimate, iterations, converged = state.posterior, state.iterations, state.converged
    elif method == "ct":
        metrics = ct_fixed_point(matrix, config.ct)
        estimate = estimate_from_unit_scores(metrics.unit_annotation, config.ct.threshold)
        iterations, converged = metrics.iterations, metrics.converged
    else:
        raise ValidationError(f"unknown method {method!r}")
    runtime_ms = (time.perf_counter() - start) * 1000.0 if config.measure_runtime else 0.0
    score = weighted_f1(estimate, truth)
    return score.weighted_f1, estimate.tie_count, iterations, converged, runtime_ms


def run_cell(
    num_labels: int,
    sample_size: int,
    num_workers: int,
    band_kind: str,
    config: ExperimentConfig,
) -> ResultTable:
    """All repetitions of one (G, S, W) cell.

    Ground truth is sampled once per (G, S) family; expertise and answers
    are redrawn each repetition. Every configured method consumes the
    identical answer matrix within a repetition.
    """
    dist = builtin_distribution(num_labels)
    truth = sample_ground_truth(dist, sample_size, mix_seed(config.master_seed, num_labels, sample_size))
    band = band_for(band_kind, num_labels)
    taxonomy = Taxonomy(num_labels)
    records: ResultTable = []
    for rep in range(config.repetitions):
        cell_seed = mix_seed(config.master_seed, num_labels, sample_size, num_workers, rep)
        profiles = sample_expertise(band, num_workers, mix_seed(cell_seed, 1))
        answers = np.column_stack([
            corrupt_answers(truth, profile, taxonomy, mix_seed(cell_seed, 2, w))
            for w, profile in enumerate(profiles)
        ])
        matrix = AnnotationMatrix(taxonomy, answers)
        matrix_hash = matrix.content_hash()
        for method in sorted(config.methods):
            f1, tie_count, iterations, converged, runtime_ms = _run_method(
                method, matrix, truth, config, mix_seed(cell_seed, 3)
            )
            records.append(RepetitionRecord(
                expertise_band=band_kind,
                G=num_labels,
                S_target=sample_size,
                S_actual=len(truth),
                W=num_workers,
                rep=rep,
                method=method,
                weighted_f1=f1,
                tie_count=tie_count,
                iterations=iterations,
                converged=converged,
                runtime_ms=runtime_ms,
                cell_seed=cell_seed,
                matrix_hash=matrix_hash,
            ))
    return records


def run_grid(config: ExperimentConfig) -> ResultTable:
    """The full Cartesian product of the configured cells, sorted."""
    records: ResultTable = []
    for g in config.label_sets:
        for s in config.samples_for(g):
            for w in config.worker_sets:
                records.extend(run_cell(g, s, w, config.expertise_band_kind, config))
    records.sort(key=_SORT_KEY)
    return records


def significance_table(results: ResultTable) -> list[SignificanceRecord]:
    """Pairwise ANOVA over the repetition F1 scores of every grid cell.

    Pairs with a missing method or fewer than two repetitions are skipped
    with a warning rather than failing the whole table.
    """
    cells: dict[tuple[int, int, int], dict[str, list[tuple[int, float]]]] = {}
    for rec in results:
        key = (rec.G, rec.S_target, rec.W)
        cells.setdefault(key, {}).setdefault(rec.method, []).append((rec.rep, rec.weighted_f1))

    out: list[SignificanceRecord] = []
    for key in sorted(cells):
        by_method = cells[key]
        for method_a, method_b in METHOD_PAIRS:
            if method_a not in by_method or method_b not in by_method:
                missing = [m for m in (method_a, method_b) if m not in by_method]
                warnings.warn(f"cell G={key[0]} S={key[1]} W={key[2]}: no {missing} rows, skipping ({method_a},{method_b})")
                continue
            group_a = [f1 for _, f1 in sorted(by_method[method_a])]
            group_b = [f1 for _, f1 in sorted(by_method[method_b])]
            if len(group_a) < 2 or len(group_b) < 2:
                warnings.warn(f"cell G={key[0]} S={key[1]} W={key[2]}: fewer than two repetitions, skipping ({method_a},{method_b})")
                continue
            anova = one_way_anova([group_a, group_b])
            out.append(SignificanceRecord(
                G=key[0],
                S=key[1],
                W=key[2],
                method_a=method_a,
                method_b=method_b,
                mean_f1_a=float(np.mean(group_a)),
                mean_f1_b=float(np.mean(group_b)),
                f_statistic=anova.f_statistic,
                p_value=anova.p_value,
                significant_05=anova.p_value < 0.05,
                significant_005=anova.p_value < 0.005,
            ))
    return out


def _fmt_float(x: float) -> str:
    return format(x, ".17g")


def _fmt_bool(x: bool) -> str:
    return "true" if x else "false"


def _parse_bool(text: str, line_no: int) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValidationError(f"line {line_no}: expected 'true' or 'false', got {text!r}")


def write_results_csv(results: ResultTable, path) -> None:
    """Persist repetition records; floats carry 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER.split(","))
        for r in sorted(results, key=_SORT_KEY):
            writer.writerow([
                r.expertise_band, r.G, r.S_target, r.S_actual, r.W, r.rep, r.method,
                _fmt_float(r.weighted_f1), r.tie_count, r.iterations,
                _fmt_bool(r.converged), _fmt_float(r.runtime_ms), r.cell_seed, r.matrix_hash,
            ])


def read_results_csv(path) -> ResultTable:
    """Inverse of write_results_csv; rejects unknown headers, reports bad lines."""
    records: ResultTable = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULTS_HEADER.split(","):
            raise ValidationError(f"unexpected results header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 14:
                raise ValidationError(f"line {line_no}: expected 14 fields, got {len(row)}")
            try:
                records.append(RepetitionRecord(
                    expertise_band=row[0],
                    G=int(row[1]),
                    S_target=int(row[2]),
                    S_actual=int(row[3]),
                    W=int(row[4]),
                    rep=int(row[5]),
                    method=row[6],
                    weighted_f1=float(row[7]),
                    tie_count=int(row[8]),
                    iterations=int(row[9]),
                    converged=_parse_bool(row[10], line_no),
                    runtime_ms=float(row[11]),
                    cell_seed=int(row[12]),
                    matrix_hash=row[13],
                ))
            except ValueError as exc:
                raise ValidationError(f"line {line_no}: {exc}") from None
    return records


def write_significance_csv(table: list[SignificanceRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SIGNIFICANCE_HEADER.split(","))
        for r in table:
            writer.writerow([
                r.G, r.S, r.W, r.method_a, r.method_b,
                _fmt_float(r.mean_f1_a), _fmt_float(r.mean_f1_b),
                _fmt_float(r.f_statistic), _fmt_float(r.p_value),
                _fmt_bool(r.significant_05), _fmt_bool(r.significant_005),
            ])


def read_significance_csv(path) -> list[SignificanceRecord]:
    records: list[SignificanceRecord] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SIGNIFICANCE_HEADER.split(","):
            raise ValidationError(f"unexpected significance header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 11:
                raise ValidationError(f"line {line_no}: expected 11 fields, got {len(row)}")
            try:
                records.append(SignificanceRecord(
                    G=int(row[0]), S=int(row[1]), W=int(row[2]),
                    method_a=row[3], method_b=row[4],
                    mean_f1_a=float(row[5]), mean_f1_b=float(row[6]),
                    f_statistic=float(row[7]), p_value=float(row[8]),
                    significant_05=_parse_bool(row[9], line_no),
                    significant_005=_parse_bool(row[10], line_no),
                ))
            except ValueError as exc:
                raise ValidationError(f"line {line_no}: {exc}") from None
    return records


def write_annotations_csv(matrix: AnnotationMatrix, path) -> None:
    """item_id plus one integer label column per worker."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_id"] + [f"worker_{w}" for w in range(matrix.num_workers)])
        for s in range(matrix.num_items):
            writer.writerow([s] + [int(v) for v in matrix.answers[s]])


def read_annotations_csv(path, num_labels: int) -> AnnotationMatrix:
    """Inverse of write_annotations_csv for a known label count."""
    rows: list[list[int]] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "item_id" or any(
            name != f"worker_{w}" for w, name in enumerate(header[1:])
        ):
            raise ValidationError(f"unexpected annotations header {header!r}")
        if len(header) < 2:
            raise ValidationError("annotations file lists no workers")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValidationError(f"line {line_no}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([int(v) for v in row[1:]])
            except ValueError as exc:
                raise ValidationError(f"line {line_no}: {exc}") from None
    if not rows:
        raise ValidationError("annotations file contains no items")
    return AnnotationMatrix(Taxonomy(num_labels), np.asarray(rows, dtype=np.int64))


def sub_config(config: ExperimentConfig, **fields) -> ExperimentConfig:
    """A copy of ``config`` with some fields replaced (validated anew)."""
    return replace(config, **fields)
