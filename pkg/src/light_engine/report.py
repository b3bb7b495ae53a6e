"""Report files: metrics.tsv / metrics.json plus rendered figures.

Every eval run writes the delimited tables and, alongside them, matplotlib
renderings (a metric bar chart, co-occurrence heatmaps) so a run's directory
is self-describing.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import CooccurrenceMatrix, MetricReport

METRICS_COLUMNS = ("split", "task", "metric", "value", "n", "seed")


def write_metrics(reports: list[MetricReport], out_dir: Path) -> list[Path]:
    """metrics.tsv (one row per report), metrics.json, and metrics.png."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tsv_path = out_dir / "metrics.tsv"
    with open(tsv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for r in reports:
            writer.writerow([r.split, r.task, r.metric, f"{r.value:.6f}", r.n, r.seed])
    json_path = out_dir / "metrics.json"
    json_path.write_text(
        json.dumps(
            [
                {"split": r.split, "task": r.task, "metric": r.metric,
                 "value": r.value, "n": r.n, "seed": r.seed}
                for r in reports
            ],
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    fig_path = out_dir / "metrics.png"
    _render_metrics_figure(reports, fig_path)
    return [tsv_path, json_path, fig_path]


def _render_metrics_figure(reports: list[MetricReport], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(max(4, 1.6 * len(reports)), 3.2))
    labels = [f"{r.task}\n{r.metric}\n({r.split})" for r in reports]
    values = [r.value for r in reports]
    ax.bar(range(len(reports)), values, color="#4878a8")
    ax.set_xticks(range(len(reports)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylim(0, 1)
    ax.set_ylabel("score")
    for i, v in enumerate(values):
        ax.text(i, v + 0.02, f"{v:.3f}", ha="center", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_cooccurrence(
    matrices: dict[tuple[str, str], CooccurrenceMatrix], out_dir: Path
) -> list[Path]:
    """One labeled CSV and one heatmap PNG per matrix."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for (a, b), mat in sorted(matrices.items()):
        stem = f"cooccurrence_{a}_to_{b}"
        csv_path = out_dir / f"{stem}.csv"
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([f"{a}\\{b}", *mat.axis_b])
            for i, label in enumerate(mat.axis_a):
                writer.writerow([label, *mat.counts[i].tolist()])
        png_path = out_dir / f"{stem}.png"
        _render_heatmap(mat, f"{a} → {b}", png_path)
        written.extend([csv_path, png_path])
    return written


def _render_heatmap(mat: CooccurrenceMatrix, title: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(0.32 * len(mat.axis_b) + 2, 0.3 * len(mat.axis_a) + 2))
    counts = mat.counts.astype(float)
    ax.imshow(counts, cmap="viridis", aspect="auto")
    ax.set_xticks(np.arange(len(mat.axis_b)))
    ax.set_xticklabels(mat.axis_b, rotation=90, fontsize=6)
    ax.set_yticks(np.arange(len(mat.axis_a)))
    ax.set_yticklabels(mat.axis_a, fontsize=6)
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_stats(stats: dict, out_dir: Path) -> list[Path]:
    """dataset_stats as stats.tsv + stats.json (rows: split, column: measure)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tsv_path = out_dir / "stats.tsv"
    first = next(iter(stats.values()))
    columns = list(first.to_dict().keys())
    with open(tsv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["split", *columns])
        for split, row in sorted(stats.items()):
            values = row.to_dict()
            writer.writerow([split, *[values[c] for c in columns]])
    json_path = out_dir / "stats.json"
    json_path.write_text(
        json.dumps({split: row.to_dict() for split, row in sorted(stats.items())}, indent=2) + "\n",
        encoding="utf-8",
    )
    return [tsv_path, json_path]
