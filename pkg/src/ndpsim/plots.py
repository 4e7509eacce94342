"""Optional matplotlib figures rendered next to the CSV outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_speedups(rows: list[dict], path: str):
    """Bar chart of speedup over radix, one bar per mechanism."""
    names = [r["mechanism"] for r in rows]
    speedups = [r["speedup"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    bars = ax.bar(names, speedups, color="#4878a8")
    ax.axhline(1.0, color="grey", linewidth=0.8, linestyle="--")
    ax.bar_label(bars, fmt="%.2f", padding=2, fontsize=8)
    ax.set_ylabel("speedup over radix")
    ax.set_xlabel("mechanism")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_occupancy(occupancy: dict, path: str):
    """Bar chart of per-level page table occupancy."""
    levels = list(occupancy.keys())
    ratios = [occupancy[lvl]["occupancy"] for lvl in levels]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    bars = ax.bar(levels, ratios, color="#a85448")
    ax.bar_label(bars, fmt="%.3f", padding=2, fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("occupancy")
    ax.set_xlabel("page table level")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
