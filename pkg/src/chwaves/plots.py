"""SVG line plots (Agg backend, fixed hash salt and no date stamp, so files are reproducible)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "chwaves", "svg.fonttype": "none", "path.simplify": False}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def line_plot(curves, path, xlabel="x", ylabel="u", title=None, styles=None):
    """``curves``: list of ``(label, x, y)``."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for k, (label, x, y) in enumerate(curves):
            kw = (styles or {}).get(label, {})
            ax.plot(np.asarray(x), np.asarray(y), label=label, lw=kw.pop("lw", 1.4), **kw)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(curves) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def characteristics_fan(times, Y, path, title=None, every=1):
    """Characteristics as curves ``t -> y`` (``Y[k, j]``: label j at ``times[k]``), time upward."""
    times, Y = np.asarray(times), np.asarray(Y)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for j in range(0, Y.shape[1], every):
            ax.plot(Y[:, j], times, color="k", lw=0.6)
        ax.set_xlabel("x")
        ax.set_ylabel("t")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)
