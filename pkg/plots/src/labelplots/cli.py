"""Command-line figure rendering: boxplot, heatmap, counts."""
from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render_figure
from .io import PlotError


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(","))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    box = sub.add_parser("boxplot", help="per-method F1 boxplots across worker counts")
    box.add_argument("--in", dest="in_path", required=True, help="results CSV")
    box.add_argument("--band", choices=("high", "low"), default=None)
    box.add_argument("--labels", type=int, default=None, help="label count G")
    box.add_argument("--samples", type=int, default=None, help="sample size S")
    box.add_argument("--workers", type=_int_list, default=None, help="comma-separated worker counts")
    box.add_argument("--methods", type=_str_list, default=None, help="subset of mv,em,ct")
    box.add_argument("--out", default="boxplot.png")

    heat = sub.add_parser("heatmap", help="G x W significance grid for one method pair")
    heat.add_argument("--in", dest="in_path", required=True, help="significance CSV")
    heat.add_argument("--pair", type=_str_list, required=True, help="method pair, e.g. em,mv")
    heat.add_argument("--samples", type=int, default=None, help="sample size S to show")
    heat.add_argument("--out", default="heatmap.png")

    cnt = sub.add_parser("counts", help="significant-cell counts per group value")
    cnt.add_argument("--in", dest="in_path", required=True, help="significance CSV")
    cnt.add_argument("--group-by", choices=("G", "S", "W"), required=True)
    cnt.add_argument("--out", default="counts.png")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "boxplot":
            spec = FigureSpec(
                kind="boxplot",
                output_path=args.out,
                band=args.band,
                num_labels=args.labels,
                sample_size=args.samples,
                workers=args.workers,
                methods=args.methods,
            )
        elif args.command == "heatmap":
            spec = FigureSpec(
                kind="heatmap",
                output_path=args.out,
                sample_size=args.samples,
                methods=args.pair,
            )
        else:
            spec = FigureSpec(kind="counts", output_path=args.out, group_by=args.group_by)
        render_figure(spec, args.in_path)
    except (PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
