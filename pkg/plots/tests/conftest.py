"""Shared fixtures: synthetic CSVs in the runner's published formats.

Most fixtures write CSV text directly so this suite exercises the file
contract itself and never imports the aggregation package. The grid
fixture prefers the full-grid artifacts a prior acceptance run left
behind and otherwise generates a small grid through the labelagg CLI.
"""
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

RESULTS_HEADER = (
    "expertise_band,G,S_target,S_actual,W,rep,method,weighted_f1,tie_count,"
    "iterations,converged,runtime_ms,cell_seed,matrix_hash"
)
SIGNIFICANCE_HEADER = (
    "G,S,W,method_a,method_b,mean_f1_a,mean_f1_b,f_statistic,p_value,"
    "significant_05,significant_005"
)


def result_line(band="low", g=2, s=50, w=3, rep=0, method="mv", f1=0.9):
    return (
        f"{band},{g},{s},{s},{w},{rep},{method},{f1},0,0,true,0.0,"
        f"123456789,abcdef0123456789"
    )


def significance_line(g=2, s=50, w=3, pair=("em", "mv"), p=0.5):
    sig05 = "true" if p < 0.05 else "false"
    sig005 = "true" if p < 0.005 else "false"
    return (
        f"{g},{s},{w},{pair[0]},{pair[1]},0.9,0.8,1.0,{p},{sig05},{sig005}"
    )


@pytest.fixture()
def results_csv(tmp_path):
    """Two cell families (low band: G=2 and G=3 at S=50), W in {3, 5}, 3 reps."""
    lines = [RESULTS_HEADER]
    for g in (2, 3):
        for w in (3, 5):
            for rep in range(3):
                for method in ("ct", "em", "mv"):
                    f1 = 0.5 + 0.1 * w / 5 + 0.01 * rep + (0.05 if method == "em" else 0.0)
                    lines.append(result_line(g=g, w=w, rep=rep, method=method, f1=round(f1, 6)))
    path = tmp_path / "results.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture()
def significance_csv(tmp_path):
    """All three pairs over G in {2,3}, W in {3,5}, at S=50 only."""
    lines = [SIGNIFICANCE_HEADER]
    p_by_cell = {
        (2, 3): 0.001,
        (2, 5): 0.03,
        (3, 3): 0.2,
        (3, 5): 0.04,
    }
    for (g, w), p in sorted(p_by_cell.items()):
        for pair in (("em", "mv"), ("ct", "mv"), ("ct", "em")):
            adjusted = p if pair == ("em", "mv") else min(1.0, p * 10)
            lines.append(significance_line(g=g, w=w, pair=pair, p=adjusted))
    path = tmp_path / "significance.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def _labelagg_command():
    exe = shutil.which("labelagg")
    if exe:
        return [exe]
    return [sys.executable, "-m", "labelagg.cli"]


@pytest.fixture(scope="session")
def grid_csvs(tmp_path_factory):
    """(results_csv, significance_csv) from a real experiment grid.

    Uses the full 420-cell artifacts when present, else runs a small grid
    through the aggregation CLI (the only coupling is the command line
    and the file formats).
    """
    artifacts = Path(__file__).resolve().parents[2] / "artifacts"
    results = artifacts / "results_low_full.csv"
    significance = artifacts / "significance_low_full.csv"
    if results.is_file() and significance.is_file():
        return results, significance

    out_dir = tmp_path_factory.mktemp("grid")
    results = out_dir / "results.csv"
    significance = out_dir / "significance.csv"
    base = _labelagg_command()
    subprocess.run(
        base + [
            "experiment", "--band", "low", "--labels", "2,3,5",
            "--samples", "50,125", "--workers", "3,10,20", "--reps", "4",
            "--seed", "42", "--out", str(results),
        ],
        check=True, capture_output=True, text=True,
    )
    subprocess.run(
        base + ["significance", "--in", str(results), "--out", str(significance)],
        check=True, capture_output=True, text=True,
    )
    return results, significance


@pytest.fixture()
def multi_s_significance_csv(tmp_path):
    """(em,mv) rows at two different sample sizes."""
    lines = [SIGNIFICANCE_HEADER]
    for s in (50, 500):
        lines.append(significance_line(g=2, s=s, w=3, pair=("em", "mv"), p=0.01))
        lines.append(significance_line(g=3, s=s, w=3, pair=("em", "mv"), p=0.5))
    path = tmp_path / "significance_multi.csv"
    path.write_text("\n".join(lines) + "\n")
    return path
