"""Figure definitions and rendering from the spinnet CSV schema.

Each figure id plots one observable column against time, one curve per
input CSV.  Standard-error columns, when filled, become shaded bands of
plus/minus one standard error.  An optional inset repeats the curves over
a short time window, which is how the strongly connected, purely
oscillatory runs are usually shown.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FIGURES", "FigureDef", "SchemaError", "load_series", "render"]

EXPECTED_HEADER = [
    "k", "t",
    "fbar", "fbar_se",
    "s1", "s1_se",
    "c12", "c12_se",
    "c13", "c13_se",
    "c34", "c34_se",
    "s12", "s12_se",
]


@dataclass(frozen=True)
class FigureDef:
    column: str
    ylabel: str
    legend_title: str


FIGURES = {
    1: FigureDef("fbar", "average fidelity", "edge probability"),
    2: FigureDef("fbar", "average fidelity", "network size"),
    3: FigureDef("s1", "single-qubit linear entropy", "edge probability"),
    4: FigureDef("c12", "concurrence", "edge probability"),
    5: FigureDef("s12", "two-qubit linear entropy", "edge probability"),
}


class SchemaError(ValueError):
    """A CSV does not conform to the expected schema; names the column."""

    def __init__(self, path, column, detail):
        super().__init__(f"{path}: column {column!r} {detail}")
        self.column = column


def load_series(path) -> dict[str, np.ndarray | None]:
    """Read one CSV into arrays; empty columns load as ``None``."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(path, "k", "missing (empty file)") from None
        rows = list(reader)
    for column in EXPECTED_HEADER:
        if column not in header:
            raise SchemaError(path, column, "missing from header")
    out: dict[str, np.ndarray | None] = {}
    for column in EXPECTED_HEADER:
        idx = header.index(column)
        cells = [row[idx] if idx < len(row) else "" for row in rows]
        filled = [c for c in cells if c != ""]
        if not filled:
            out[column] = None
            continue
        if len(filled) != len(cells):
            raise SchemaError(path, column, "is only partially filled")
        try:
            out[column] = np.array([float(c) for c in cells])
        except ValueError as exc:
            raise SchemaError(path, column, f"has a non-numeric cell ({exc})") from None
    return out


def _plot_curves(ax, figure_def, curves, with_labels=True):
    for label, data in curves:
        t = data["t"]
        y = data[figure_def.column]
        se = data[figure_def.column + "_se"]
        line, = ax.plot(t, y, linewidth=1.2, label=label if with_labels else None)
        if se is not None:
            ax.fill_between(t, y - se, y + se, alpha=0.25, color=line.get_color(), linewidth=0)


def render(figure_id: int, csv_inputs, out_path, inset=None):
    """Render one figure to ``out_path``.

    ``csv_inputs`` is a sequence of (path, label) pairs; ``inset`` is an
    optional (t0, t1) window drawn as a zoomed inset panel.
    Returns the matplotlib figure.
    """
    if figure_id not in FIGURES:
        raise ValueError(f"figure id must be 1..5, got {figure_id}")
    curves = []
    for path, label in csv_inputs:
        data = load_series(path)
        if data[FIGURES[figure_id].column] is None:
            raise SchemaError(path, FIGURES[figure_id].column, "is empty in this file")
        curves.append((label, data))
    if not curves:
        raise ValueError("at least one CSV input is required")

    figure_def = FIGURES[figure_id]
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    _plot_curves(ax, figure_def, curves)
    ax.set_xlabel("time")
    ax.set_ylabel(figure_def.ylabel)
    ax.legend(title=figure_def.legend_title, fontsize=8, title_fontsize=8)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)

    if inset is not None:
        t0, t1 = inset
        if not t1 > t0:
            raise ValueError(f"inset window must satisfy t0 < t1, got {inset}")
        panel = fig.add_axes([0.58, 0.6, 0.3, 0.27])
        _plot_curves(panel, figure_def, curves, with_labels=False)
        panel.set_xlim(t0, t1)
        panel.tick_params(labelsize=7)

    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return fig
