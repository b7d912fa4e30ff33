"""
Curve emission: CSV tables and standalone SVG plots with error bands.

SVG output is rendered by matplotlib's SVG backend with a fixed hash salt
and no date metadata, so identical curves give identical files. Legend
entries carry ids ``legend-entry-<i>``.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from guidance_lab.application.services.analysis_service import CurveSeries  # noqa: E402
from guidance_lab.domain.exceptions import EmptySeriesError, GuidanceLabError, SchemaError  # noqa: E402
from guidance_lab.shared.helpers import get_logger  # noqa: E402

logger = get_logger(__name__)

CurveFormat = Literal["csv", "svg"]
CURVE_COLUMNS = ("label", "x", "mean", "stderr", "count")


def _check_series(series: Sequence[CurveSeries]) -> None:
    if not series:
        raise EmptySeriesError("no series to emit")
    for s in series:
        if len(s) == 0:
            raise EmptySeriesError(f"series {s.label!r} has no points")


def write_curves_csv(series: Sequence[CurveSeries], out_path: Path) -> Path:
    with open(out_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for s in series:
            for x, mean, se, n in zip(s.x, s.mean, s.stderr, s.count):
                writer.writerow([s.label, repr(float(x)), repr(float(mean)), repr(float(se)), int(n)])
    return out_path


def read_curves_csv(path: Union[str, Path]) -> List[CurveSeries]:
    """Parse a file written by ``write_curves_csv`` back into series, in order."""
    rows: dict = {}
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != CURVE_COLUMNS:
            raise SchemaError("curve file header does not match", details={"path": str(path), "header": header})
        for row in reader:
            label, x, mean, se, n = row
            rows.setdefault(label, []).append((float(x), float(mean), float(se), int(n)))
    series = []
    for label, points in rows.items():
        values = np.asarray(points, dtype=np.float64)
        series.append(CurveSeries(label, values[:, 0], values[:, 1], values[:, 2], values[:, 3].astype(np.int64)))
    return series


def write_curves_svg(
    series: Sequence[CurveSeries],
    out_path: Path,
    title: str = "",
    xlabel: str = "step",
    ylabel: str = "dissimilarity",
) -> Path:
    with plt.rc_context({"svg.hashsalt": "guidance-lab", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4))
        try:
            for s in series:
                (line,) = ax.plot(s.x, s.mean, label=s.label, linewidth=1.5)
                ax.fill_between(s.x, s.mean - s.stderr, s.mean + s.stderr, color=line.get_color(), alpha=0.25,
                                linewidth=0)
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            if title:
                ax.set_title(title)
            ax.grid(True, alpha=0.3)
            legend = ax.legend(loc="best", fontsize=8)
            for index, text in enumerate(legend.get_texts()):
                text.set_gid(f"legend-entry-{index}")
            fig.tight_layout()
            fig.savefig(out_path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return out_path


def emit_curves(
    series: Sequence[CurveSeries],
    fmt: CurveFormat,
    out_path: Union[str, Path],
    title: str = "",
    xlabel: str = "step",
    ylabel: str = "dissimilarity",
) -> Path:
    """Write ``series`` as CSV or SVG; nothing is created for an empty set."""
    _check_series(series)
    out_path = Path(out_path)
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            written = write_curves_csv(series, out_path)
        elif fmt == "svg":
            written = write_curves_svg(series, out_path, title, xlabel, ylabel)
        else:
            raise GuidanceLabError(f"unknown curve format: {fmt}")
    except OSError as e:
        raise GuidanceLabError(f"cannot write curves to {out_path}", details={"error": str(e)}) from e
    logger.info(f"Wrote {len(series)} curve(s) to {written}")
    return written
