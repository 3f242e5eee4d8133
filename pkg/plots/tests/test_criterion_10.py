"""Acceptance gate: every figure kind renders from a real experiment grid,
and the counts chart's bars match tallies taken straight off the CSV."""
import csv
from collections import defaultdict

from labelplots.figures import FigureSpec, render_figure


def report(ok, detail):
    line = f"criterion 10: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    return line


def test_criterion_10_figures_render_and_counts_match_tallies(grid_csvs, tmp_path):
    results_csv, significance_csv = grid_csvs

    with open(results_csv, newline="", encoding="utf-8") as fh:
        res_rows = list(csv.DictReader(fh))
    with open(significance_csv, newline="", encoding="utf-8") as fh:
        sig_rows = list(csv.DictReader(fh))
    band = sorted({r["expertise_band"] for r in res_rows})[0]
    g_choice = min(int(r["G"]) for r in res_rows)
    s_choice = max(int(r["S"]) for r in sig_rows)

    outputs = {
        "boxplot": tmp_path / "f1_by_workers.png",
        "heatmap": tmp_path / "significance_grid.png",
        "counts": tmp_path / "significant_counts.png",
    }
    render_figure(
        FigureSpec(
            kind="boxplot",
            output_path=str(outputs["boxplot"]),
            band=band,
            num_labels=g_choice,
            sample_size=s_choice,
        ),
        results_csv,
    )
    render_figure(
        FigureSpec(
            kind="heatmap",
            output_path=str(outputs["heatmap"]),
            methods=("em", "mv"),
            sample_size=s_choice,
        ),
        significance_csv,
    )
    counts_fig = render_figure(
        FigureSpec(kind="counts", output_path=str(outputs["counts"]), group_by="G"),
        significance_csv,
    )
    rendered = all(p.is_file() and p.stat().st_size > 0 for p in outputs.values())

    # tally significant cells per (pair, G) straight off the file
    tallies = defaultdict(lambda: defaultdict(int))
    for r in sig_rows:
        if r["significant_05"] == "true":
            tallies[(r["method_a"], r["method_b"])][int(r["G"])] += 1
    g_values = sorted({int(r["G"]) for r in sig_rows})

    charted = {}
    for container in counts_fig.axes[0].containers:
        a, _, b = container.get_label().partition(" vs ")
        charted[(a, b)] = [int(rect.get_height()) for rect in container]
    expected = {pair: [tallies[pair][g] for g in g_values] for pair in charted}

    counts_match = len(charted) == 3 and charted == expected
    ok = rendered and counts_match
    em_mv = charted.get(("em", "mv"))
    line = report(ok, (
        f"three figures rendered from the grid CSVs (band={band}, G={g_choice}, "
        f"S={s_choice}); counts bars {'equal' if counts_match else 'differ from'} "
        f"independent per-G tallies, em-vs-mv row {em_mv}"
    ))
    assert ok, line
