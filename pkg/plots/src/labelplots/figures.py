"""Figure builders over experiment CSVs: boxplots, heatmaps, count charts.

Each builder saves the figure to a path and returns the Figure object so
callers (and tests) can inspect the drawn artists. Rendering avoids all
global pyplot state; output bytes depend only on the CSV content and the
installed renderer version.
"""
from __future__ import annotations

from dataclasses import dataclass

import matplotlib
import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap
from matplotlib.figure import Figure
from matplotlib.patches import Patch
from matplotlib.ticker import MaxNLocator

from .io import PlotError, ResultRow, SignificanceRow, read_results, read_significance

# fixed hash salt keeps SVG element ids stable across renders
matplotlib.rcParams["svg.hashsalt"] = "labelplots"

KNOWN_PAIRS = (("em", "mv"), ("ct", "mv"), ("ct", "em"))
GROUP_FIELDS = ("G", "S", "W")

_METHOD_COLORS = {"mv": "#4c72b0", "em": "#dd8452", "ct": "#55a868"}
_PAIR_COLORS = {
    ("em", "mv"): "#dd8452",
    ("ct", "mv"): "#55a868",
    ("ct", "em"): "#4c72b0",
}
_FALLBACK_COLOR = "#8c8c8c"
_TIER_COLORS = ("#e8e8e8", "#7fc97f", "#1b7837")
_GROUP_LABELS = {"G": "label choices (G)", "S": "sample size (S)", "W": "workers (W)"}


@dataclass(frozen=True)
class ResultFilters:
    """Row selectors for a results CSV; None fields match everything."""

    band: str | None = None
    num_labels: int | None = None
    sample_size: int | None = None
    workers: tuple[int, ...] | None = None
    methods: tuple[str, ...] | None = None

    def matches(self, row: ResultRow) -> bool:
        return (
            (self.band is None or row.expertise_band == self.band)
            and (self.num_labels is None or row.G == self.num_labels)
            and (self.sample_size is None or row.S_target == self.sample_size)
            and (self.workers is None or row.W in self.workers)
            and (self.methods is None or row.method in self.methods)
        )


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: what to draw, from which rows, to which file."""

    kind: str
    output_path: str
    band: str | None = None
    num_labels: int | None = None
    sample_size: int | None = None
    workers: tuple[int, ...] | None = None
    methods: tuple[str, ...] | None = None
    group_by: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("boxplot", "heatmap", "counts"):
            raise PlotError(f"kind must be boxplot, heatmap or counts, got {self.kind!r}")
        if self.kind == "heatmap" and (self.methods is None or len(self.methods) != 2):
            raise PlotError("heatmap needs a method pair, e.g. methods=('em', 'mv')")
        if self.kind == "counts" and self.group_by not in GROUP_FIELDS:
            raise PlotError(f"counts needs group_by in {GROUP_FIELDS}, got {self.group_by!r}")


def _save(fig: Figure, path) -> None:
    path = str(path)
    if path.endswith(".svg"):
        # the default SVG metadata embeds the render date; drop it so
        # re-renders of the same data are byte-identical
        fig.savefig(path, metadata={"Date": None})
    else:
        fig.savefig(path, dpi=150)


def plot_boxplots(results_csv, filters: ResultFilters, output_path) -> Figure:
    """Grouped per-method F1 boxplots across worker counts.

    The filtered selection must pin down a single (band, G, S) cell
    family; the repetition scores of each (method, W) pair form one box.
    """
    rows = read_results(results_csv)
    selected = [r for r in rows if filters.matches(r)]
    if not selected:
        available = sorted({(r.expertise_band, r.G, r.S_target) for r in rows})
        listing = ", ".join(f"({b}, G={g}, S={s})" for b, g, s in available[:50])
        if len(available) > 50:
            listing += f", ... ({len(available) - 50} more)"
        raise PlotError(f"selection matched no rows; available cells: {listing}")
    combos = sorted({(r.expertise_band, r.G, r.S_target) for r in selected})
    if len(combos) > 1:
        raise PlotError(
            "selection spans several (band, G, S) cell families; narrow the "
            f"filters to one of: {combos}"
        )
    band, g, s = combos[0]

    methods = list(filters.methods) if filters.methods else sorted({r.method for r in selected})
    w_values = sorted({r.W for r in selected})
    scores: dict[tuple[str, int], list[float]] = {}
    for r in selected:
        scores.setdefault((r.method, r.W), []).append(r.weighted_f1)

    fig = Figure(figsize=(max(6.0, 1.2 * len(w_values)), 4.5))
    ax = fig.add_subplot()
    width = 0.8 / len(methods)
    for i, method in enumerate(methods):
        positions = [
            idx + (i - (len(methods) - 1) / 2) * width
            for idx in range(len(w_values))
        ]
        data = [scores.get((method, w), []) for w in w_values]
        color = _METHOD_COLORS.get(method, _FALLBACK_COLOR)
        artist = ax.boxplot(
            data,
            positions=positions,
            widths=width * 0.9,
            patch_artist=True,
            manage_ticks=False,
        )
        for box in artist["boxes"]:
            box.set_facecolor(color)
            box.set_alpha(0.7)
        for median in artist["medians"]:
            median.set_color("black")
    ax.set_xticks(range(len(w_values)))
    ax.set_xticklabels([str(w) for w in w_values])
    ax.set_xlabel("workers (W)")
    ax.set_ylabel("weighted F1")
    ax.set_title(f"{band} expertise, G={g}, S={s}")
    ax.legend(
        handles=[
            Patch(facecolor=_METHOD_COLORS.get(m, _FALLBACK_COLOR), alpha=0.7, label=m)
            for m in methods
        ],
        loc="lower right",
    )
    ax.grid(axis="y", alpha=0.3)
    _save(fig, output_path)
    return fig


def compute_heatmap_grid(
    rows: list[SignificanceRow],
    pair: tuple[str, str],
    sample_size: int | None = None,
) -> tuple[list[int], list[int], np.ndarray]:
    """(G values, W values, tier grid) for one method pair at one S.

    Tiers: 0 = not significant, 1 = p < 0.05, 2 = p < 0.005; cells the CSV
    does not cover are NaN.
    """
    pair = tuple(pair)
    if pair not in KNOWN_PAIRS:
        raise PlotError(f"unknown method pair {pair!r}; known pairs: {list(KNOWN_PAIRS)}")
    selected = [r for r in rows if (r.method_a, r.method_b) == pair]
    if not selected:
        raise PlotError(f"no rows for method pair {pair!r}")
    sizes = sorted({r.S for r in selected})
    if sample_size is None:
        if len(sizes) > 1:
            raise PlotError(f"several sample sizes present {sizes}; pick one")
        sample_size = sizes[0]
    selected = [r for r in selected if r.S == sample_size]
    if not selected:
        raise PlotError(f"no rows for S={sample_size}; available: {sizes}")

    g_values = sorted({r.G for r in selected})
    w_values = sorted({r.W for r in selected})
    grid = np.full((len(g_values), len(w_values)), np.nan)
    for r in selected:
        tier = 2 if r.significant_005 else 1 if r.significant_05 else 0
        grid[g_values.index(r.G), w_values.index(r.W)] = tier
    return g_values, w_values, grid


def plot_significance_heatmap(
    significance_csv,
    pair: tuple[str, str],
    output_path,
    sample_size: int | None = None,
) -> Figure:
    """G x W significance-tier grid for one method pair at a fixed S."""
    rows = read_significance(significance_csv)
    g_values, w_values, grid = compute_heatmap_grid(rows, tuple(pair), sample_size)
    shown_s = sorted({r.S for r in rows if (r.method_a, r.method_b) == tuple(pair)})
    s_label = sample_size if sample_size is not None else shown_s[0]

    fig = Figure(figsize=(max(6.0, 0.6 * len(w_values) + 2), max(4.0, 0.5 * len(g_values) + 2)))
    ax = fig.add_subplot()
    cmap = ListedColormap(_TIER_COLORS)
    cmap.set_bad("white")
    norm = BoundaryNorm([-0.5, 0.5, 1.5, 2.5], cmap.N)
    image = ax.imshow(grid, cmap=cmap, norm=norm, aspect="auto", origin="lower")
    ax.set_xticks(range(len(w_values)))
    ax.set_xticklabels([str(w) for w in w_values])
    ax.set_yticks(range(len(g_values)))
    ax.set_yticklabels([str(g) for g in g_values])
    ax.set_xlabel("workers (W)")
    ax.set_ylabel("label choices (G)")
    ax.set_title(f"{pair[0]} vs {pair[1]}, S={s_label}")
    # thin white borders between cells
    ax.set_xticks([x - 0.5 for x in range(1, len(w_values))], minor=True)
    ax.set_yticks([y - 0.5 for y in range(1, len(g_values))], minor=True)
    ax.grid(which="minor", color="white", linewidth=1.5)
    ax.tick_params(which="minor", length=0)
    colorbar = fig.colorbar(image, ax=ax, ticks=[0, 1, 2])
    colorbar.ax.set_yticklabels(["not significant", "p < 0.05", "p < 0.005"])
    _save(fig, output_path)
    return fig


def significance_counts(
    rows: list[SignificanceRow], group_by: str
) -> tuple[list[int], dict[tuple[str, str], dict[int, int]]]:
    """Significant-cell (p < 0.05) tallies per group value, per method pair."""
    if group_by not in GROUP_FIELDS:
        raise PlotError(f"group_by must be one of {GROUP_FIELDS}, got {group_by!r}")
    values = sorted({getattr(r, group_by) for r in rows})
    present = {(r.method_a, r.method_b) for r in rows}
    pairs = [p for p in KNOWN_PAIRS if p in present]
    pairs += sorted(present - set(pairs))
    counts = {pair: {v: 0 for v in values} for pair in pairs}
    for r in rows:
        if r.significant_05:
            counts[(r.method_a, r.method_b)][getattr(r, group_by)] += 1
    return values, counts


def plot_significance_counts(significance_csv, group_by: str, output_path) -> Figure:
    """Bar chart of significant-cell counts, one series per method pair."""
    rows = read_significance(significance_csv)
    values, counts = significance_counts(rows, group_by)
    pairs = list(counts)

    fig = Figure(figsize=(max(6.0, 1.0 * len(values) + 2), 4.5))
    ax = fig.add_subplot()
    width = 0.8 / len(pairs)
    for i, pair in enumerate(pairs):
        offsets = [
            idx + (i - (len(pairs) - 1) / 2) * width for idx in range(len(values))
        ]
        heights = [counts[pair][v] for v in values]
        ax.bar(
            offsets,
            heights,
            width=width * 0.95,
            label=f"{pair[0]} vs {pair[1]}",
            color=_PAIR_COLORS.get(pair, _FALLBACK_COLOR),
            edgecolor="black",
            linewidth=0.5,
        )
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels([str(v) for v in values])
    ax.set_ylim(bottom=0)
    ax.yaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_xlabel(_GROUP_LABELS[group_by])
    ax.set_ylabel("significant cells (p < 0.05)")
    ax.set_title(f"significant comparisons by {_GROUP_LABELS[group_by]}")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    _save(fig, output_path)
    return fig


def render_figure(spec: FigureSpec, csv_path) -> Figure:
    """Dispatch a FigureSpec to the matching builder."""
    if spec.kind == "boxplot":
        filters = ResultFilters(
            band=spec.band,
            num_labels=spec.num_labels,
            sample_size=spec.sample_size,
            workers=spec.workers,
            methods=spec.methods,
        )
        return plot_boxplots(csv_path, filters, spec.output_path)
    if spec.kind == "heatmap":
        return plot_significance_heatmap(
            csv_path, tuple(spec.methods), spec.output_path, sample_size=spec.sample_size
        )
    return plot_significance_counts(csv_path, spec.group_by, spec.output_path)
