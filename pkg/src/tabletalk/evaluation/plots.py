"""Training-curve and benchmark plots (PNG)."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ..worldsim import RELATIONS


def write_curves_csv(curves, path, columns=None) -> None:
    if not curves:
        Path(path).write_text("")
        return
    columns = columns or list(curves[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in curves:
            writer.writerow(row)


def plot_curves(curves, path, keys=("L1", "L_attr", "val_accuracy")) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = [c["epoch"] for c in curves]
    for k in keys:
        if curves and k in curves[0] and curves[0][k] is not None:
            ax.plot(xs, [c[k] for c in curves], label=k)
    ax.set_xlabel("epoch")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_relation_bars(table: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    rels = list(RELATIONS)
    vals = [table[r]["satisfaction"] or 0.0 for r in rels]
    ax.bar(rels, vals)
    ax.axhline(0.9, color="gray", linestyle="--", linewidth=1)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("oracle satisfaction")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
