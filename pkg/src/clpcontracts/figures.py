"""Figure rendering for the CLI report commands.

Each report command writes its delimited data first; these helpers render the
companion PNG next to it.  Rendering is headless (Agg backend).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_SWEEP_METRICS = [
    ("effort", "effort"),
    ("salary", "salary"),
    ("bonus", "bonus"),
    ("reward", "total reward"),
    ("client_utility", "client utility"),
    ("cloud_utility", "cloud utility"),
]


def render_sweep_figure(rows: list[dict], param: str, path: str | Path) -> None:
    """One panel per per-type metric, one line per (parameter value, case)."""
    fig, axes = plt.subplots(2, 3, figsize=(15, 8), sharex=True)
    series: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        series.setdefault((row["value"], row["info_case"]), []).append(row)
    for ax, (key, label) in zip(axes.flat, _SWEEP_METRICS):
        for (value, case), entries in sorted(series.items()):
            entries = sorted(entries, key=lambda r: r["type_index"])
            xs = [r["type_index"] for r in entries]
            ys = [r[key] for r in entries]
            style = "-o" if case == "cic" else "--s"
            ax.plot(xs, ys, style, markersize=3, label=f"{case} {param}={value:g}")
        ax.set_title(label)
        ax.set_xlabel("contract item (type index)")
        ax.grid(True, alpha=0.3)
    axes.flat[0].legend(fontsize=7)
    fig.suptitle(f"Menu outcomes while sweeping {param}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_efficiency_figure(rows: list[dict], path: str | Path) -> None:
    """Per-round and cumulative cloud utility plus per-round spend."""
    fig, axes = plt.subplots(1, 3, figsize=(16, 4.5))
    by_mech: dict[str, list[dict]] = {}
    for row in rows:
        by_mech.setdefault(row["mechanism"], []).append(row)
    panels = [
        ("cloud_utility", "cloud utility per round"),
        ("cum_cloud_utility", "cumulative cloud utility"),
        ("spend", "reward spend per round"),
    ]
    for ax, (key, label) in zip(axes, panels):
        for mech, entries in sorted(by_mech.items()):
            entries = sorted(entries, key=lambda r: r["round"])
            ax.plot([r["round"] for r in entries], [r[key] for r in entries], label=mech)
        ax.set_title(label)
        ax.set_xlabel("training round")
        ax.grid(True, alpha=0.3)
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_mismatch_figure(matrix: list[list[float]], path: str | Path) -> None:
    """Every type's utility across all items; the diagonal should dominate."""
    fig, ax = plt.subplots(figsize=(7, 5))
    k_total = len(matrix)
    items = list(range(1, k_total + 1))
    for k, row in enumerate(matrix, start=1):
        ax.plot(items, row, "-o", markersize=3, label=f"type {k}")
    ax.set_xlabel("selected contract item")
    ax.set_ylabel("client utility")
    ax.set_title("Utility when signing another type's item")
    if k_total <= 12:
        ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
