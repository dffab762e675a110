"""Figure builders: one image per figure id, deterministic output.

Rendering is read-only over the CSV inputs. The same CSV bytes produce the
same image bytes: the backend is Agg, figure geometry is fixed, and SVG
output gets a pinned hash salt and no date metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .csvdata import Artifact, load_artifact

matplotlib.rcParams.update({
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "carequeue-figures",
})

FIGURE_IDS = ("threshold", "priority-sweep", "assignment-sweep", "tradeoff")

_EXPECTED_SCHEMA = {
    "threshold": "threshold-v1",
    "priority-sweep": "sweep-v1",
    "assignment-sweep": "sweep-v1",
    "tradeoff": "tradeoff-v1",
}


@dataclass(frozen=True)
class FigureSpec:
    figure: str                      # one of FIGURE_IDS
    csv_path: str
    out_path: str

    def __post_init__(self):
        if self.figure not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure!r}; "
                             f"choose from {FIGURE_IDS}")


@dataclass
class RenderResult:
    out_path: str
    rows: int
    warnings: List[str] = field(default_factory=list)
    crossing: Optional[float] = None  # threshold figure only


def render(spec: FigureSpec) -> RenderResult:
    """Render one figure id from its CSV artifact to an image file."""
    art = load_artifact(spec.csv_path, _EXPECTED_SCHEMA[spec.figure])
    result = RenderResult(out_path=spec.out_path, rows=len(art))
    fig, ax = plt.subplots()
    try:
        if not art.rows:
            result.warnings.append(
                f"{spec.csv_path}: no data rows, rendering empty axes")
            ax.set_title(f"{spec.figure} (no data)")
        elif spec.figure == "threshold":
            result.crossing = _threshold(ax, art, result)
        elif spec.figure in ("priority-sweep", "assignment-sweep"):
            _sweep(ax, art, result)
        else:
            _tradeoff(fig, ax, art)
        _save(fig, spec.out_path)
    finally:
        plt.close(fig)
    return result


def _save(fig, out_path: str) -> None:
    if out_path.endswith(".svg"):
        fig.savefig(out_path, metadata={"Date": None})
    else:
        fig.savefig(out_path)


def _threshold(ax, art: Artifact, result: RenderResult) -> Optional[float]:
    a = art.floats("a")
    j_short = art.floats("J_short")
    j_long = art.floats("J_long")
    ax.plot(a, j_short, marker="o", ms=3, label="shortest-first")
    ax.plot(a, j_long, marker="s", ms=3, label="longest-first")
    ax.set_xlabel("holding-cost exponent a")
    ax.set_ylabel("accumulated holding cost")
    ax.set_title("Priority-rule costs against the holding-cost exponent")

    crossing = _first_crossing(a, [s - l for s, l in zip(j_short, j_long)])
    if crossing is None:
        result.warnings.append("cost curves do not cross on the grid")
    else:
        ax.axvline(crossing, color="0.3", ls="--", lw=1)
        ax.annotate(f"crossing a = {crossing:.2f}", (crossing, max(j_long)),
                    textcoords="offset points", xytext=(6, -12))
    ax.legend()
    return crossing


def _first_crossing(xs, diffs) -> Optional[float]:
    if not any(d != 0.0 for d in diffs):
        return None
    for k in range(len(xs)):
        if diffs[k] == 0.0:
            return xs[k]
        if k + 1 < len(xs) and (diffs[k] < 0.0 < diffs[k + 1]
                                or diffs[k] > 0.0 > diffs[k + 1]):
            frac = diffs[k] / (diffs[k] - diffs[k + 1])
            return xs[k] + frac * (xs[k + 1] - xs[k])
    return None


def _sweep(ax, art: Artifact, result: RenderResult) -> None:
    param = art.rows[0]["param"]
    series = {}
    for row in art.rows:
        if row["improvement_pct"] == "":
            continue  # baseline policy rows carry no improvement
        series.setdefault(row["policy"], []).append(
            (float(row["value"]), float(row["improvement_pct"])))
    if not series:
        result.warnings.append("no improvement values to plot")
    for policy in sorted(series):
        pts = sorted(series[policy])
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="o", ms=3, label=policy)
    ax.axhline(0.0, color="0.5", lw=0.8)
    ax.set_xlabel(param)
    ax.set_ylabel("cost reduction over baseline (%)")
    ax.set_title(f"Policy improvement along {param}")
    if series:
        ax.legend()


def _tradeoff(fig, ax, art: Artifact) -> None:
    x = art.floats("avg_queue_all")
    y = art.floats("avg_queue_hi")
    a = art.floats("a")
    sc = ax.scatter(x, y, c=a, s=12, cmap="viridis")
    fig.colorbar(sc, ax=ax, label="holding-cost exponent a")
    ax.set_xlabel("average queue length, all stages")
    ax.set_ylabel("average queue length, two highest stages")
    ax.set_title("Queue-length tradeoff across parameter sets")
