"""Command-line entry points: experiment, significance, aggregate, simulate."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace

import numpy as np

from .core import AnnotationMatrix, Taxonomy, ValidationError
from .crowdtruth import CtConfig, run_crowdtruth
from .em import EmConfig, run_em
from .majority import TiePolicy, majority_vote
from .runner import (
    ExperimentConfig,
    default_high_band_config,
    mix_seed,
    read_annotations_csv,
    read_results_csv,
    run_grid,
    significance_table,
    write_annotations_csv,
    write_results_csv,
    write_significance_csv,
)
from .simulate import (
    band_for,
    builtin_distribution,
    corrupt_answers,
    load_distribution,
    sample_expertise,
    sample_ground_truth,
)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _method_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(","))


# both hyphenated and underscored spellings are accepted on the CLI
_TIE_CHOICES = sorted({p.value for p in TiePolicy} | {p.value.replace("_", "-") for p in TiePolicy})


def _tie_policy(text: str) -> TiePolicy:
    return TiePolicy(text.replace("-", "_"))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labelagg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    exp = sub.add_parser("experiment", help="run a seeded grid of simulated crowds and score all methods")
    exp.add_argument("--band", choices=("high", "low"), required=True)
    exp.add_argument("--labels", type=_int_list, default=None, help="comma-separated label counts")
    exp.add_argument("--samples", type=_int_list, default=None, help="comma-separated sample sizes")
    exp.add_argument("--workers", type=_int_list, default=None, help="comma-separated worker counts")
    exp.add_argument("--reps", type=int, default=None)
    exp.add_argument("--seed", type=int, default=None, help="master seed for all derivations")
    exp.add_argument("--methods", type=_method_list, default=None, help="subset of mv,em,ct")
    exp.add_argument("--tie-policy", type=_tie_policy, choices=list(TiePolicy), default=None, metavar="{" + ",".join(_TIE_CHOICES) + "}")
    exp.add_argument("--em-tol", type=float, default=None)
    exp.add_argument("--em-max-iters", type=int, default=None)
    exp.add_argument("--ct-tol", type=float, default=None)
    exp.add_argument("--ct-max-iters", type=int, default=None)
    exp.add_argument("--ct-threshold", type=float, default=None)
    exp.add_argument("--measure-runtime", action="store_true", default=None,
                     help="record wall-clock runtimes (breaks byte-identical reruns)")
    exp.add_argument("--config", default=None, help="JSON file mirroring ExperimentConfig fields")
    exp.add_argument("--out", default="results.csv")

    sig = sub.add_parser("significance", help="pairwise ANOVA table from a results CSV")
    sig.add_argument("--in", dest="in_path", required=True)
    sig.add_argument("--out", default="significance.csv")

    agg = sub.add_parser("aggregate", help="aggregate a user-provided annotations CSV")
    agg.add_argument("--method", choices=("mv", "em", "ct"), required=True)
    agg.add_argument("--in", dest="in_path", required=True)
    agg.add_argument("--labels", type=int, required=True, help="number of label choices")
    agg.add_argument("--out", default="estimate.csv")
    agg.add_argument("--tie-policy", type=_tie_policy, choices=list(TiePolicy), default=TiePolicy.WEIGHTED_RANDOM, metavar="{" + ",".join(_TIE_CHOICES) + "}")
    agg.add_argument("--seed", type=int, default=0, help="seed for random tie resolution")
    agg.add_argument("--em-tol", type=float, default=1e-6)
    agg.add_argument("--em-max-iters", type=int, default=100)
    agg.add_argument("--ct-tol", type=float, default=1e-6)
    agg.add_argument("--ct-max-iters", type=int, default=50)
    agg.add_argument("--ct-threshold", type=float, default=None)

    sim = sub.add_parser("simulate", help="write one synthetic annotation matrix")
    sim.add_argument("--labels", type=int, required=True)
    sim.add_argument("--sample", type=int, required=True)
    sim.add_argument("--workers", type=int, required=True)
    sim.add_argument("--band", choices=("high", "low"), required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--distribution", default=None, help="custom label-distribution JSON")
    sim.add_argument("--out", default="annotations.csv")
    sim.add_argument("--truth-out", default=None, help="also write the reference labels")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    fields: dict = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        for key in ("expertise_band_kind", "label_sets", "sample_sizes", "worker_sets",
                    "repetitions", "master_seed", "methods", "measure_runtime"):
            if key in doc:
                fields[key] = tuple(doc[key]) if isinstance(doc[key], list) else doc[key]
        if "tie_policy" in doc:
            fields["tie_policy"] = TiePolicy(doc["tie_policy"])
        if "em" in doc:
            fields["em"] = EmConfig(**doc["em"])
        if "ct" in doc:
            fields["ct"] = CtConfig(**doc["ct"])
        if "sample_overrides" in doc:
            fields["sample_overrides"] = tuple((int(g), tuple(sizes)) for g, sizes in doc["sample_overrides"])

    fields["expertise_band_kind"] = args.band
    if args.labels is not None:
        fields["label_sets"] = args.labels
    if args.samples is not None:
        fields["sample_sizes"] = args.samples
        fields["sample_overrides"] = ()
    if args.workers is not None:
        fields["worker_sets"] = args.workers
    if args.reps is not None:
        fields["repetitions"] = args.reps
    if args.seed is not None:
        fields["master_seed"] = args.seed
    if args.methods is not None:
        fields["methods"] = args.methods
    if args.tie_policy is not None:
        fields["tie_policy"] = args.tie_policy
    if args.measure_runtime is not None:
        fields["measure_runtime"] = args.measure_runtime

    em_fields = {}
    if args.em_tol is not None:
        em_fields["tol"] = args.em_tol
    if args.em_max_iters is not None:
        em_fields["max_iters"] = args.em_max_iters
    if em_fields:
        fields["em"] = replace(fields.get("em", EmConfig()), **em_fields)
    ct_fields = {}
    if args.ct_tol is not None:
        ct_fields["tol"] = args.ct_tol
    if args.ct_max_iters is not None:
        ct_fields["max_iters"] = args.ct_max_iters
    if args.ct_threshold is not None:
        ct_fields["threshold"] = args.ct_threshold
    if ct_fields:
        fields["ct"] = replace(fields.get("ct", CtConfig()), **ct_fields)

    if args.band == "high" and "sample_sizes" not in fields:
        return default_high_band_config(**{k: v for k, v in fields.items() if k != "expertise_band_kind"})
    return ExperimentConfig(**fields)


def _cmd_experiment(args) -> int:
    config = _config_from_args(args)
    records = run_grid(config)
    write_results_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_significance(args) -> int:
    results = read_results_csv(args.in_path)
    table = significance_table(results)
    write_significance_csv(table, args.out)
    print(f"wrote {len(table)} comparisons to {args.out}")
    return 0


def _cmd_aggregate(args) -> int:
    matrix = read_annotations_csv(args.in_path, args.labels)
    if args.method == "mv":
        estimate = majority_vote(matrix, args.tie_policy, rng_seed=args.seed)
    elif args.method == "em":
        estimate = run_em(matrix, EmConfig(tol=args.em_tol, max_iters=args.em_max_iters)).posterior
    else:
        estimate = run_crowdtruth(matrix, CtConfig(
            tol=args.ct_tol, max_iters=args.ct_max_iters, threshold=args.ct_threshold))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_id", "hard_label", "tie"]
                        + [f"posterior_{g}" for g in range(estimate.num_labels)])
        for s in range(estimate.num_items):
            writer.writerow([s, int(estimate.hard_labels[s]),
                             "true" if estimate.tie_flags[s] else "false"]
                            + [format(p, ".17g") for p in estimate.posterior[s]])
    print(f"wrote {estimate.num_items} estimates to {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    if args.distribution is not None:
        dist = load_distribution(args.distribution)
        if dist.num_labels != args.labels:
            raise ValidationError(
                f"--labels {args.labels} does not match the distribution's {dist.num_labels}")
    else:
        dist = builtin_distribution(args.labels)
    truth = sample_ground_truth(dist, args.sample, mix_seed(args.seed, args.labels, args.sample))
    band = band_for(args.band, args.labels)
    taxonomy = Taxonomy(args.labels)
    profiles = sample_expertise(band, args.workers, mix_seed(args.seed, 1))
    answers = np.column_stack([
        corrupt_answers(truth, profile, taxonomy, mix_seed(args.seed, 2, w))
        for w, profile in enumerate(profiles)
    ])
    write_annotations_csv(AnnotationMatrix(taxonomy, answers), args.out)
    print(f"wrote {args.sample} x {args.workers} annotations to {args.out}")
    if args.truth_out is not None:
        with open(args.truth_out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["item_id", "label"])
            for s, label in enumerate(truth.labels):
                writer.writerow([s, int(label)])
        print(f"wrote reference labels to {args.truth_out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "experiment": _cmd_experiment,
        "significance": _cmd_significance,
        "aggregate": _cmd_aggregate,
        "simulate": _cmd_simulate,
    }
    try:
        return handlers[args.command](args)
    except (ValidationError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
