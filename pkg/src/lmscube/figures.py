"""Matplotlib rendering of campus usage panels for the report path."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .synth import UsageStats


def render_usage_figure(stats: UsageStats, path: Path) -> None:
    """Four daily-usage panels (visits, visitors, pages, mobile) in one file."""
    days = [d.day for d in stats.days]
    panels = [
        ("Daily visits", [d.visits for d in stats.days], "#2563eb"),
        ("Visitors per day", [d.visitors for d in stats.days], "#059669"),
        ("Pages seen per day", [d.pages for d in stats.days], "#d97706"),
        ("Mobile hits per day", [d.mobile_hits for d in stats.days], "#7c3aed"),
    ]
    fig, axes = plt.subplots(2, 2, figsize=(11, 7), sharex=True)
    for ax, (title, values, color) in zip(axes.flat, panels):
        ax.plot(days, values, color=color, linewidth=1.4)
        ax.fill_between(days, values, color=color, alpha=0.15)
        ax.set_title(title, fontsize=10)
        ax.grid(True, linewidth=0.3, alpha=0.5)
        ax.tick_params(labelsize=8)
    fig.suptitle(f"Campus usage {stats.window.label}", fontsize=12)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
