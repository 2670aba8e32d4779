"""Optional PNG figures written next to the CSV tables.

Rendering uses the Agg backend with PNG metadata stripped, so repeated runs
produce identical bytes.
"""
from __future__ import annotations

from collections import OrderedDict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_curves"]

_STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "lifespan",
}


def _label(keys, values):
    return ", ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                     for k, v in zip(keys, values))


def plot_curves(path, columns, rows, x, y, group_by=(), *, title=None, ylabel=None,
                band=None, logy=False):
    """Draw ``y`` against ``x`` for each distinct combination of ``group_by`` values.

    Args:
        path: output PNG file.
        columns: column names matching the entries of each row.
        rows: table rows, as written to the CSV.
        band: optional (low, high) column names drawn as a shaded interval.
    """
    index = {name: j for j, name in enumerate(columns)}
    groups = OrderedDict()
    for row in rows:
        key = tuple(row[index[g]] for g in group_by)
        groups.setdefault(key, []).append(row)

    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.4), dpi=120)
        for key, members in groups.items():
            members = sorted(members, key=lambda r: r[index[x]])
            xs = [r[index[x]] for r in members]
            ys = [r[index[y]] for r in members]
            line, = ax.plot(xs, ys, label=_label(group_by, key) if group_by else None)
            if band is not None:
                lo = [r[index[band[0]]] for r in members]
                hi = [r[index[band[1]]] for r in members]
                ax.fill_between(xs, lo, hi, color=line.get_color(), alpha=0.2, linewidth=0)
        ax.set_xlabel(x)
        ax.set_ylabel(ylabel or y)
        if logy:
            ax.set_yscale("log")
        if title:
            ax.set_title(title)
        if group_by and 1 < len(groups) <= 12:
            ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="png", metadata={"Software": None})
        plt.close(fig)
