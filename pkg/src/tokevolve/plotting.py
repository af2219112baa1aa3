"""Figures written next to the TSV/JSON reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evolve import DiffReport  # noqa: E402
from .pppl import PPPLReport  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_diff_report(report: DiffReport, path: str | Path, top: int = 30) -> Path:
    """Horizontal bars for the most frequent new tokens; duplicates are hatched."""
    entries = sorted(report.entries, key=lambda e: (-e.frequency, e.token))[:top]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 0.22 * max(len(entries), 4) + 0.8))
        labels = [e.token for e in entries][::-1]
        values = [e.frequency for e in entries][::-1]
        hatches = ["//" if (e.has_boundary_variant or e.capitalization_duplicate) else "" for e in entries][::-1]
        bars = ax.barh(range(len(entries)), values, color="#4c72b0")
        for bar, hatch in zip(bars, hatches):
            bar.set_hatch(hatch)
        ax.set_yticks(range(len(entries)), labels)
        ax.set_xlabel("frequency in new corpus")
        ax.set_title(f"{len(report)} added tokens (top {len(entries)})")
        return _save(fig, path)


def plot_pppl_report(report: PPPLReport, path: str | Path) -> Path:
    values = [d["pppl"] for d in report.per_doc]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        ax.hist(values, bins=min(30, max(len(values), 1)), color="#55a868")
        ax.axvline(report.pppl, color="k", linestyle="--", linewidth=1, label=f"corpus {report.pppl:.2f}")
        ax.set_xlabel("per-document pseudo-perplexity")
        ax.set_ylabel("documents")
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_chunk_lengths(lengths: Sequence[int], budget: int, path: str | Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        ax.hist(lengths, bins=min(40, max(len(set(lengths)), 1)), color="#c44e52")
        ax.axvline(budget, color="k", linestyle="--", linewidth=1, label=f"budget {budget}")
        ax.set_xlabel("tokens per chunk")
        ax.set_ylabel("chunks")
        ax.legend(frameon=False)
        return _save(fig, path)
