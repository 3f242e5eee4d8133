"""Readers for the experiment runner's CSV outputs.

This package talks to the aggregation toolkit only through its published
CSV formats; the two header strings below restate that contract and are
the complete coupling surface.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

RESULTS_HEADER = (
    "expertise_band,G,S_target,S_actual,W,rep,method,weighted_f1,tie_count,"
    "iterations,converged,runtime_ms,cell_seed,matrix_hash"
)
SIGNIFICANCE_HEADER = (
    "G,S,W,method_a,method_b,mean_f1_a,mean_f1_b,f_statistic,p_value,"
    "significant_05,significant_005"
)


class PlotError(ValueError):
    """Raised for malformed input files or selections that make no figure."""


@dataclass(frozen=True)
class ResultRow:
    """One scored repetition of one method in one grid cell."""

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
class SignificanceRow:
    """One pairwise comparison verdict for one grid cell."""

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


def _parse_bool(text: str, line_no: int) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise PlotError(f"line {line_no}: expected 'true' or 'false', got {text!r}")


def read_results(path) -> list[ResultRow]:
    """Load a results CSV, validating the exact header."""
    rows: list[ResultRow] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULTS_HEADER.split(","):
            raise PlotError(f"{path}: unexpected results header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 14:
                raise PlotError(f"{path} line {line_no}: expected 14 fields, got {len(row)}")
            try:
                rows.append(ResultRow(
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
                raise PlotError(f"{path} line {line_no}: {exc}") from None
    if not rows:
        raise PlotError(f"{path}: no data rows")
    return rows


def read_significance(path) -> list[SignificanceRow]:
    """Load a significance CSV, validating the exact header."""
    rows: list[SignificanceRow] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SIGNIFICANCE_HEADER.split(","):
            raise PlotError(f"{path}: unexpected significance header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 11:
                raise PlotError(f"{path} line {line_no}: expected 11 fields, got {len(row)}")
            try:
                rows.append(SignificanceRow(
                    G=int(row[0]), S=int(row[1]), W=int(row[2]),
                    method_a=row[3], method_b=row[4],
                    mean_f1_a=float(row[5]), mean_f1_b=float(row[6]),
                    f_statistic=float(row[7]), p_value=float(row[8]),
                    significant_05=_parse_bool(row[9], line_no),
                    significant_005=_parse_bool(row[10], line_no),
                ))
            except ValueError as exc:
                raise PlotError(f"{path} line {line_no}: {exc}") from None
    if not rows:
        raise PlotError(f"{path}: no data rows")
    return rows
