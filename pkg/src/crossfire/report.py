"""Report serialization: delimited output, a JSON mirror, and summary figures
rendered to files next to the data they plot."""

from __future__ import annotations

import json
import os

from .evaluation import ReportRow, SweepReport

CSV_HEADER = "dataset,variant,alpha,defense,asr_embed,mean_alignment,n"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_csv(report: SweepReport, path: str) -> None:
    lines = [CSV_HEADER]
    for r in report.rows:
        lines.append(
            f"{r.dataset},{r.variant},{_fmt(r.alpha)},{r.defense},"
            f"{_fmt(r.asr_embed)},{_fmt(r.mean_alignment)},{r.n}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(report: SweepReport, path: str) -> None:
    rows = [
        {
            "dataset": r.dataset,
            "variant": r.variant,
            "alpha": r.alpha,
            "defense": r.defense,
            "asr_embed": r.asr_embed,
            "mean_alignment": r.mean_alignment,
            "n": r.n,
        }
        for r in report.rows
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"rows": rows}, fh, indent=2)
        fh.write("\n")


def read_csv(path: str) -> SweepReport:
    """Parse a report written by write_csv (used by regression checks)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: not a sweep report")
    rows = []
    for ln in lines[1:]:
        dataset, variant, alpha, defense, asr_embed, mean_alignment, n = ln.split(",")
        rows.append(
            ReportRow(
                dataset=dataset,
                variant=variant,
                alpha=float(alpha),
                defense=defense,
                asr_embed=float(asr_embed),
                mean_alignment=float(mean_alignment),
                n=int(n),
            )
        )
    return SweepReport(rows=tuple(rows))


def render_figures(report: SweepReport, out_dir: str) -> list[str]:
    """Render sweep summary plots as PNG files alongside the reports.

    One line chart per metric over the budget grid (undefended rows), plus a
    per-defense bar chart at the largest budget when defenses were run.
    Returns the written paths.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    base = [r for r in report.rows if r.defense == "none"]
    variants = sorted({r.variant for r in base})
    datasets = sorted({r.dataset for r in base})

    for metric, fname, label in (
        ("mean_alignment", "alignment_vs_alpha.png", "mean alignment"),
        ("asr_embed", "asr_vs_alpha.png", "asr_embed"),
    ):
        fig, ax = plt.subplots(figsize=(6, 4))
        for dataset in datasets:
            for variant in variants:
                rows = sorted(
                    (r for r in base if r.variant == variant and r.dataset == dataset),
                    key=lambda r: r.alpha,
                )
                name = variant if len(datasets) == 1 else f"{dataset}/{variant}"
                ax.plot([r.alpha for r in rows], [getattr(r, metric) for r in rows],
                        marker="o", label=name)
        ax.set_xlabel("perturbation budget (L-inf)")
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, fname)
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    defense_names = sorted({r.defense for r in report.rows})
    if len(defense_names) > 1:
        top_alpha = max(r.alpha for r in report.rows)
        fig, ax = plt.subplots(figsize=(7, 4))
        width = 0.8 / max(len(variants), 1)
        for vi, variant in enumerate(variants):
            vals = []
            for d in defense_names:
                cell = [
                    r for r in report.rows
                    if r.variant == variant and r.defense == d and r.alpha == top_alpha
                ]
                vals.append(cell[0].asr_embed if cell else 0.0)
            xs = [i + vi * width for i in range(len(defense_names))]
            ax.bar(xs, vals, width=width, label=variant)
        ax.set_xticks([i + width * (len(variants) - 1) / 2 for i in range(len(defense_names))])
        ax.set_xticklabels(defense_names, rotation=20, ha="right", fontsize=7)
        ax.set_ylabel(f"asr_embed at alpha={top_alpha:.4g}")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, "asr_by_defense.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
