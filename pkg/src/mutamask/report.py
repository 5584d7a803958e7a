"""Figure rendering for the report paths: every delimited output gets a
matplotlib rendering saved next to it."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .analysis import KillMatrix
from .mutagen import MutantSetReport
from .simulate import SimulationResult

_STATUS_COLORS = {
    "viable": "#2a9d8f",
    "identical-discarded": "#bdbdbd",
    "duplicate-discarded": "#8d99ae",
    "non-compiling-discarded": "#e76f51",
}


def render_mutant_report(report: MutantSetReport, path: str | Path) -> None:
    """Per-family candidate counts, split viable vs discarded."""
    families = sorted(report.by_family)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    viable = [report.by_family[f]["viable"] for f in families]
    discarded = [report.by_family[f]["candidates"] - report.by_family[f]["viable"] for f in families]
    ax.bar(families, viable, label="viable", color=_STATUS_COLORS["viable"])
    ax.bar(families, discarded, bottom=viable, label="discarded", color="#bdbdbd")
    ax.set_ylabel("candidates")
    ax.set_title("mutant candidates per operator family")
    ax.legend()
    plt.setp(ax.get_xticklabels(), rotation=30, ha="right")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_kill_matrix(matrix: KillMatrix, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(matrix.mutant_ids) + 2), max(3, 0.4 * len(matrix.tests) + 2)))
    grid = [[1 if cell else 0 for cell in row] for row in matrix.kills] or [[0]]
    ax.imshow(grid, cmap="Greys", aspect="auto", vmin=0, vmax=1)
    ax.set_xticks(range(len(matrix.mutant_ids)))
    ax.set_xticklabels([str(m) for m in matrix.mutant_ids], rotation=90, fontsize=7)
    ax.set_yticks(range(len(matrix.tests)))
    ax.set_yticklabels(matrix.tests, fontsize=7)
    ax.set_xlabel("mutant id")
    ax.set_title("kill matrix (dark = killed)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_curve(result: SimulationResult, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    if result.curve:
        xs = [0] + [x for x, _ in result.curve]
        ys = [0.0] + [y for _, y in result.curve]
        ax.step(xs, ys, where="post", color="#2a9d8f")
    ax.set_xlabel("effort (mutants analysed)")
    ax.set_ylabel("fault detection ratio")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(f"effort vs effectiveness ({result.config.repetitions} sessions, seed {result.config.seed})")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
