"""Report emission: human-readable text, JSON, and CSV tables."""

from __future__ import annotations

import csv
from collections.abc import Iterable
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel

from sflab.config import settings
from sflab.dirac import DiracFamily, spectrum
from sflab.exterior import GradedMatrixForm
from sflab.harness.verify import VerificationReport


def format_report(report: VerificationReport) -> str:
    lines = [f"σ = {report.sigma:+d}", ""]
    width = max((len(e.scenario) for e in report.entries), default=10)
    lines.append(f"{'scenario':<{width}}  {'sf':>4}  {'oracle':>6}  {'σ·geom':>12}  {'Δξ':>8}  {'residual':>10}  result")
    for e in report.entries:
        lines.append(
            f"{e.scenario:<{width}}  {e.sf:>4d}  {e.oracle_sf:>6d}  {e.sigma * e.geometric:>12.8f}  "
            f"{e.xi_b - e.xi_a:>8.4f}  {e.residual:>10.2e}  {'ok' if e.passed else 'FAIL'}"
        )
    failed = len(report.failures)
    lines += ["", f"{len(report.entries) - failed}/{len(report.entries)} scenarios verified"]
    return "\n".join(lines)


def write_json(model: BaseModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
    return path


def spectrum_rows(fam: DiracFamily, s_values: Iterable[float], window: float) -> list[list[float]]:
    """One row per s: the sorted eigenvalues inside [−window, window]."""
    slices = Parallel(n_jobs=settings.n_jobs, prefer="threads")(
        delayed(spectrum)(fam, float(s), window) for s in s_values
    )
    return [[sl.s, *sl.eigenvalues.tolist()] for sl in slices]


def write_spectrum_csv(rows: list[list[float]], path: Path) -> Path:
    """Header ``s,lambda_1,...``; shorter rows are padded with empty cells."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    width = max((len(r) - 1 for r in rows), default=0)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", *(f"lambda_{i + 1}" for i in range(width))])
        for row in rows:
            writer.writerow([f"{v:.12g}" for v in row] + [""] * (width + 1 - len(row)))
    return path


def write_form_csv(form: GradedMatrixForm, path: Path) -> Path:
    """Top-degree coefficient of a scalar form per node: coordinates then the real value."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    chart = form.chart
    points = chart.points().reshape(-1, chart.dim)
    values = form.values(tuple(range(chart.dim))).real.reshape(-1)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*(f"x{j + 1}" for j in range(chart.dim)), "value"])
        for point, value in zip(points, values):
            writer.writerow([*(f"{x:.12g}" for x in point), f"{value:.12g}"])
    return path


def s_grid(fam: DiracFamily, samples: int) -> np.ndarray:
    a, b = fam.interval
    return np.linspace(a, b, samples)
