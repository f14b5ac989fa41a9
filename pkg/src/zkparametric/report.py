"""CSV tables and matplotlib figures for bench and gas reports."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .insurance import GasReport  # noqa: E402


def write_csv(path: str | Path, rows: Sequence[Mapping], columns: Sequence[str] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = list(columns or (rows[0].keys() if rows else []))
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    return path


def gas_rows(reports: Mapping[str, GasReport]) -> list[dict]:
    rows = []
    for label, rep in reports.items():
        for category, gas in rep.rows:
            rows.append({"verifier": label, "category": category, "gas": gas})
        rows.append({"verifier": label, "category": "Total", "gas": rep.total})
    return rows


def plot_gas(reports: Mapping[str, GasReport], path: str | Path) -> Path:
    """Stacked bars, one per verifier, split by cost category."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = list(reports)
    categories: list[str] = []
    for rep in reports.values():
        for name, _ in rep.rows:
            if name not in categories:
                categories.append(name)
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    bottoms = [0.0] * len(labels)
    for cat in categories:
        heights = [reports[lab].category(cat) / 1000 for lab in labels]
        ax.bar(labels, heights, bottom=bottoms, label=cat)
        bottoms = [b + h for b, h in zip(bottoms, heights)]
    for x, total in enumerate(bottoms):
        ax.annotate(f"{total:.0f}K", (x, total), ha="center", va="bottom", fontsize=9)
    ax.set_ylabel("gas (thousands)")
    ax.set_title("Verification gas by category")
    ax.legend(fontsize=7, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_bench(rows: Sequence[Mapping], path: str | Path) -> Path:
    """Proving time, constraint counts and proof size against pixel count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = [r["n_pixels"] for r in rows]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.8))
    axes[0].plot(n, [r["prove_seconds"] for r in rows], "o-")
    axes[0].set_ylabel("proving time (s)")
    axes[1].plot(n, [r["linear_constraints"] for r in rows], "o-", label="linear")
    axes[1].plot(n, [r["multiplicative_constraints"] for r in rows], "s-", label="multiplicative")
    axes[1].set_ylabel("constraints")
    axes[1].legend(fontsize=8)
    axes[2].plot(n, [r["proof_bytes"] for r in rows], "o-")
    axes[2].set_ylabel("proof size (bytes)")
    axes[2].set_ylim(bottom=0)
    for ax in axes:
        ax.set_xlabel("pixels")
        ax.set_xscale("log", base=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
