"""Markdown rendering of suite reports, with a deviation-vs-tolerance figure."""

from __future__ import annotations

import os

import numpy as np


def render_markdown(report: dict) -> str:
    lines = ["# weightlab report", ""]
    counts = report.get("counts", {})
    lines.append(f"seed: {report.get('seed', '?')}  |  "
                 f"passed {counts.get('passed', 0)}/{counts.get('total', 0)}")
    lines.append("")
    lines.append("| check | anchor | deviation | tolerance | result | s |")
    lines.append("|---|---|---|---|---|---|")
    for rec in report.get("checks", []):
        flag = "pass" if rec["passed"] else "**FAIL**"
        lines.append(
            f"| {rec['id']} | {rec['anchor']} | {rec['deviation']:.3e} "
            f"| {rec['tolerance']:.1e} | {flag} | {rec.get('seconds', 0):.2f} |")
    lines.append("")
    return "\n".join(lines)


def render_figure(report: dict, path: str) -> str:
    """Deviation against tolerance per check, log scale; writes a PNG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    checks = report.get("checks", [])
    if not checks:
        fig, ax = plt.subplots(figsize=(6, 2))
        ax.set_title("no checks")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        return path

    ids = [c["id"] for c in checks]
    devs = np.array([max(c["deviation"], 1e-18) for c in checks])
    tols = np.array([c["tolerance"] for c in checks])
    colors = ["tab:green" if c["passed"] else "tab:red" for c in checks]

    fig, ax = plt.subplots(figsize=(max(7, 0.32 * len(ids)), 4.2))
    xs = np.arange(len(ids))
    ax.bar(xs, devs, color=colors, width=0.6, label="deviation")
    ax.plot(xs, tols, "k_", markersize=10, label="tolerance")
    ax.set_yscale("log")
    ax.set_xticks(xs)
    ax.set_xticklabels(ids, rotation=80, fontsize=7)
    ax.set_ylabel("max deviation")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"weightlab checks, seed {report.get('seed', '?')}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def figure_path_for(md_path: str) -> str:
    base, _ = os.path.splitext(md_path)
    return base + ".png"
