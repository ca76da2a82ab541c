"""Report rendering: aligned text tables, CSV, JSON, and matplotlib figures.

Every report path that produces a figure also produces a delimited file
next to it, so downstream tooling never has to scrape a plot.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .attacks import AttackSpec, CrackReport
from .stats import SuiteReport


def aligned_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    cells = [list(map(str, headers))] + [list(map(str, r)) for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for idx, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_csv(path: str | Path, headers: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# Crack tables
# ---------------------------------------------------------------------------

def crack_table_rows(reports: Sequence[CrackReport], specs: Sequence[AttackSpec]):
    headers = ["group", "n"] + [s.label() for s in specs]
    rows = []
    for report in reports:
        row = [report.group_label, report.entries[0].corpus_size if report.entries else 0]
        for spec in specs:
            entry = report.entry_for(spec)
            row.append(f"{entry.cracked_percent * 100:.2f}%")
        rows.append(row)
    return headers, rows


def crack_table_notes(specs: Sequence[AttackSpec]) -> list[str]:
    notes = ["one password per participant (latest after any resets)"]
    lod = sorted({(s.lod_base, s.lod_metric.value) for s in specs if s.family.value == "LOD"})
    for base, metric in lod:
        notes.append(f"LOD base distance: {base}px ({metric})")
    return notes


def render_crack_text(reports: Sequence[CrackReport], specs: Sequence[AttackSpec]) -> str:
    headers, rows = crack_table_rows(reports, specs)
    body = aligned_table(headers, rows)
    notes = "".join(f"# {n}\n" for n in crack_table_notes(specs))
    return body + notes


def write_crack_csv(path: str | Path, reports: Sequence[CrackReport], specs: Sequence[AttackSpec]) -> None:
    headers = ["group", "corpus_size"]
    for s in specs:
        headers += [f"{s.label()}_count", f"{s.label()}_percent"]
    rows = []
    for report in reports:
        row = [report.group_label, report.entries[0].corpus_size if report.entries else 0]
        for spec in specs:
            entry = report.entry_for(spec)
            row += [entry.cracked_count, f"{entry.cracked_percent:.6f}"]
        rows.append(row)
    write_csv(path, headers, rows)


def write_crack_figure(path: str | Path, reports: Sequence[CrackReport], specs: Sequence[AttackSpec]) -> None:
    """Grouped bar chart of crack percentages per attack spec."""
    labels = [s.label() for s in specs]
    x = np.arange(len(labels))
    width = 0.8 / max(1, len(reports))
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(labels)), 4))
    for i, report in enumerate(reports):
        values = [report.entry_for(s).cracked_percent * 100 for s in specs]
        ax.bar(x + i * width, values, width, label=report.group_label)
    ax.set_xticks(x + width * (len(reports) - 1) / 2)
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel("passwords cracked (%)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Hypothesis-suite reports
# ---------------------------------------------------------------------------

def suite_to_json(report: SuiteReport) -> dict:
    return {
        "treatment": report.treatment_label,
        "control": report.control_label,
        "image_width": report.image_width,
        "mwu_alternative": report.alternative,
        "effect_sizes": {"mwu": "rank-biserial r", "fisher": "odds ratio"},
        "rows": [
            {
                "click_index": row.click_index,
                "mwu_u": row.mwu.statistic,
                "mwu_p": row.mwu.p_value,
                "mwu_p_bonferroni": row.mwu_adjusted_p,
                "mwu_effect": row.mwu.effect_size,
                "fisher_p": row.fisher.p_value,
                "fisher_p_bonferroni": row.fisher_adjusted_p,
                "fisher_odds_ratio": _json_num(row.fisher.effect_size),
                "bins_treatment": list(row.bins_treatment),
                "bins_control": list(row.bins_control),
            }
            for row in report.rows
        ],
    }


def _json_num(v: float):
    if v != v:  # nan
        return None
    if v in (float("inf"), float("-inf")):
        return "inf" if v > 0 else "-inf"
    return v


def render_suite_text(report: SuiteReport) -> str:
    headers = [
        "click", "MWU U", "MWU p", "MWU p(adj)", "rank-biserial",
        "Fisher p", "Fisher p(adj)", "odds ratio",
    ]
    rows = []
    for row in report.rows:
        rows.append(
            [
                row.click_index,
                f"{row.mwu.statistic:.1f}",
                f"{row.mwu.p_value:.4f}",
                f"{row.mwu_adjusted_p:.4f}",
                f"{row.mwu.effect_size:+.3f}",
                f"{row.fisher.p_value:.4f}",
                f"{row.fisher_adjusted_p:.4f}",
                f"{row.fisher.effect_size:.3f}",
            ]
        )
    head = (
        f"{report.treatment_label} vs {report.control_label}"
        f"  (MWU alternative: {report.alternative}; Bonferroni m=5;"
        f" midline pixel x=width/2 counts as right bin)\n"
    )
    return head + aligned_table(headers, rows)


# ---------------------------------------------------------------------------
# Cluster and heatmap figures
# ---------------------------------------------------------------------------

def write_elbow_figure(path: str | Path, curve: dict[int, float], chosen_k: int) -> None:
    ks = sorted(curve)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, [curve[k] for k in ks], "o-")
    ax.axvline(chosen_k, color="tab:red", linestyle="--", label=f"knee k={chosen_k}")
    ax.set_xlabel("k")
    ax.set_ylabel("inertia")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_heatmap_figure(path: str | Path, grid: np.ndarray, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.imshow(grid, cmap="hot", origin="upper")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def dump_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")
