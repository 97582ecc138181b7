"""Matplotlib figures written next to the CSV output."""
from __future__ import annotations

import os
from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import AggregateCurve  # noqa: E402

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _figure(width: float = 6.0):
    fig, axes = plt.subplots(1, 2, figsize=(2 * width, width * GOLDEN))
    return fig, axes


def render_curves(curves: Sequence[AggregateCurve], destination: Union[str, os.PathLike],
                  optimum: float | None = None) -> Path:
    """Cumulative reward (left) and suboptimal plays (right) against number of plays."""
    fig, (ax_r, ax_n) = _figure()
    for c in curves:
        plays = np.arange(1, c.plays + 1)
        ax_r.plot(plays, c.mean_cumulative_reward, label=c.label or None, lw=1.2)
        ax_n.plot(plays, c.mean_n_b, label=c.label or None, lw=1.2)
    if optimum is not None and curves:
        plays = np.arange(1, curves[0].plays + 1)
        ax_r.plot(plays, optimum * plays, "k:", lw=0.8, label="best machine only")
    ax_r.set_xlabel("number of plays")
    ax_r.set_ylabel("sum of acquired rewards")
    ax_n.set_xlabel("number of plays")
    ax_n.set_ylabel("mean suboptimal plays")
    for ax in (ax_r, ax_n):
        ax.legend(loc="best", frameon=False)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(destination)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_sweep(results: Sequence[tuple[float, AggregateCurve]], param: str,
                 destination: Union[str, os.PathLike]) -> Path:
    values = [v for v, _ in results]
    fig, (ax_r, ax_n) = _figure()
    ax_r.plot(values, [c.mean_cumulative_reward[-1] for _, c in results], "o-")
    ax_n.plot(values, [c.mean_n_b[-1] for _, c in results], "o-")
    ax_r.set_ylabel("final mean cumulative reward")
    ax_n.set_ylabel("final mean suboptimal plays")
    for ax in (ax_r, ax_n):
        ax.set_xlabel(param)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(destination)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
