"""File-based figure rendering for the sweep and the simulation study.

Figures are drawn straight onto matplotlib Figure objects (no pyplot, no
global backend state), so rendering works headless and leaves the host
process untouched. The output format follows the file extension.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from matplotlib.figure import Figure
from matplotlib.patches import Patch

from .errors import ValidationError
from .experiments import MECHANISM_TAGS, BoxStats, SweepPoint

_MECHANISM_LABELS = {
    "universal": "universal",
    "identical_interest": "identical interest",
    "equal_shares": "equal shares",
}
_MECHANISM_COLORS = {
    "universal": "#1f77b4",
    "identical_interest": "#ff7f0e",
    "equal_shares": "#2ca02c",
}


def render_figure2(points: Sequence[SweepPoint], path: str) -> None:
    """Line chart of the two price-of-anarchy curves over the 1 - 1/e floor."""
    if not points:
        raise ValidationError("nothing to plot: empty sweep")
    fig = Figure(figsize=(6.4, 4.2))
    ax = fig.subplots()
    ps = [pt.p for pt in points]
    ax.plot(ps, [pt.optimal for pt in points], marker="o", label="optimal mechanism")
    ax.plot(
        ps, [pt.universal for pt in points], marker="s", label="universal mechanism"
    )
    ax.plot(
        ps,
        [pt.bound for pt in points],
        linestyle="--",
        color="0.45",
        label="1 - 1/e",
    )
    ax.set_xlabel("detection probability p")
    ax.set_ylabel("price of anarchy")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")


def render_figure3(
    stats: Mapping[float, Mapping[str, BoxStats]], path: str
) -> None:
    """Grouped box plot of efficiency ratios, one group per p, one box per
    mechanism, whiskers at the exact min and max."""
    if not stats:
        raise ValidationError("nothing to plot: no box statistics")
    fig = Figure(figsize=(7.2, 4.2))
    ax = fig.subplots()
    group_width = len(MECHANISM_TAGS) + 1
    centers = []
    for gi, p in enumerate(sorted(stats)):
        per_mechanism = stats[p]
        for mi, tag in enumerate(MECHANISM_TAGS):
            if tag not in per_mechanism:
                continue
            box = per_mechanism[tag]
            ax.bxp(
                [
                    {
                        "med": box.median,
                        "q1": box.q25,
                        "q3": box.q75,
                        "whislo": box.min,
                        "whishi": box.max,
                    }
                ],
                positions=[gi * group_width + mi],
                widths=0.7,
                showfliers=False,
                patch_artist=True,
                boxprops={"facecolor": _MECHANISM_COLORS[tag], "alpha": 0.6},
                medianprops={"color": "black"},
            )
        centers.append(gi * group_width + (len(MECHANISM_TAGS) - 1) / 2)
    ax.set_xticks(centers)
    ax.set_xticklabels([f"p = {p:g}" for p in sorted(stats)])
    ax.set_ylabel("equilibrium efficiency")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(
        handles=[
            Patch(
                facecolor=_MECHANISM_COLORS[tag],
                alpha=0.6,
                label=_MECHANISM_LABELS[tag],
            )
            for tag in MECHANISM_TAGS
        ],
        loc="lower right",
    )
    fig.savefig(path, dpi=150, bbox_inches="tight")
