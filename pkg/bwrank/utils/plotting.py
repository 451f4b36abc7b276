"""
SVG line plots of trajectory entries.

The Agg backend and a fixed hash salt keep the SVG text stable across runs.
"""

import os
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from bwrank.utils.geodesics import Trajectory  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "bwrank"
matplotlib.rcParams["svg.fonttype"] = "none"

PLOT_BLOCKS = ("Q", "D", "B", "S")


def changing_entries(traj: Trajectory, block: str, atol: float = 1e-12) -> List[List[int]]:
    """Entries of a block whose value moves by more than atol over the run."""
    stacked = traj.block(block)
    spread = stacked.max(axis=0) - stacked.min(axis=0)
    return [[int(i), int(j)] for i, j in zip(*np.nonzero(spread > atol))]


def plot_trajectory(path: str, traj: Trajectory, entries: Optional[Dict[str, Sequence]] = None,
                    title: Optional[str] = None) -> str:
    """One panel per block; by default only entries that change are drawn."""
    selection = {}
    for block in PLOT_BLOCKS:
        if entries is not None and block in entries:
            chosen = [list(e) for e in entries[block]]
        elif entries is not None:
            chosen = []
        else:
            chosen = changing_entries(traj, block)
        if chosen:
            selection[block] = chosen

    panels = max(len(selection), 1)
    fig, axes = plt.subplots(panels, 1, figsize=(7, 2.6 * panels), sharex=True, squeeze=False)
    t = traj.times
    for ax, (block, chosen) in zip(axes[:, 0], selection.items()):
        stacked = traj.block(block)
        for i, j in chosen:
            ax.plot(t, stacked[:, i, j], label=f"{block}[{i}][{j}]")
        ax.set_ylabel(block)
        ax.grid(True)
        ax.legend(loc="best", fontsize="small")
    if not selection:
        axes[0, 0].text(0.5, 0.5, "all entries constant", ha="center", va="center")
    axes[-1, 0].set_xlabel("t")
    if title:
        fig.suptitle(title)
    fig.tight_layout()

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
