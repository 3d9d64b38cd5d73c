"""Figures for ratio reports (needs the ``plot`` extra)."""
from __future__ import annotations

from pathlib import Path

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "font.family": "serif",
}


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        raise RuntimeError("plotting needs matplotlib: pip install 'ktaxi[plot]'") from None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_report(report, csv_path, bound: float | None = None) -> list[Path]:
    """Write ``<stem>_ratios.png`` and ``<stem>_costs.png`` next to the CSV."""
    plt = _pyplot()
    csv_path = Path(csv_path)
    out = []
    rows = [r for r in report.rows if r.ratio is not None]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot([r.trial for r in rows], [r.ratio for r in rows], "o", ms=3, color="0.25")
        if rows:
            ax.axhline(report.mean, color="tab:blue", lw=1, label=f"mean {report.mean:.3g}")
        if bound is not None:
            ax.axhline(bound, color="tab:red", lw=1, ls="--", label=f"bound {bound:g}")
        ax.set_xlabel("trial")
        ax.set_ylabel("cost ratio")
        if rows or bound is not None:
            ax.legend()
        fig.tight_layout()
        p = csv_path.with_name(csv_path.stem + "_ratios.png")
        fig.savefig(p)
        plt.close(fig)
        out.append(p)

        fig, ax = plt.subplots()
        ref = [r.ref_cost for r in rows]
        ax.plot(ref, [r.alg_cost for r in rows], "o", ms=3, color="0.25")
        if rows:
            top = max(ref)
            ax.plot([0, top], [0, top], color="0.6", lw=0.8, label="equal cost")
            if bound is not None:
                ax.plot([0, top], [0, bound * top], color="tab:red", lw=1, ls="--", label=f"{bound:g} x ref")
            ax.legend()
        ax.set_xlabel("reference cost")
        ax.set_ylabel("algorithm cost")
        fig.tight_layout()
        p = csv_path.with_name(csv_path.stem + "_costs.png")
        fig.savefig(p)
        plt.close(fig)
        out.append(p)
    return out
