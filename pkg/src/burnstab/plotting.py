"""SVG figures: phase projections, time series and streamline slices.

Figures are built on ``matplotlib.figure.Figure`` directly (no pyplot state)
and only read the arrays they are given.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from matplotlib.figure import Figure

from .simulate import MODEL_COLUMNS, StreamlineGrid

PLANES = (("a", "f"), ("a", "b"), ("f", "b"))
_IDX = {name: i for i, name in enumerate(MODEL_COLUMNS)}


def trajectory_figure(
    series: Sequence[tuple[np.ndarray, np.ndarray]],
    equilibrium: Optional[Sequence[float]] = None,
    title: str = "",
) -> Figure:
    """Top row: a-f, a-b and f-b projections.  Bottom row: a, f, b against t.

    ``series`` holds ``(times, states)`` pairs with ``states`` of shape
    ``(n, 3)`` in (a, f, b) order.
    """
    fig = Figure(figsize=(12, 7), layout="constrained")
    axes = fig.subplots(2, 3)
    lw = 0.8 if len(series) < 10 else 0.4
    for times, states in series:
        states = np.real(np.asarray(states))
        for ax, (u, v) in zip(axes[0], PLANES):
            ax.plot(states[:, _IDX[u]], states[:, _IDX[v]], lw=lw)
        for ax, name in zip(axes[1], MODEL_COLUMNS):
            ax.plot(times, states[:, _IDX[name]], lw=lw)
    for ax, (u, v) in zip(axes[0], PLANES):
        ax.set_xlabel(u)
        ax.set_ylabel(v)
        if equilibrium is not None:
            ax.plot(equilibrium[_IDX[u]], equilibrium[_IDX[v]], "k+", ms=10)
    for ax, name in zip(axes[1], MODEL_COLUMNS):
        ax.set_xlabel("t")
        ax.set_ylabel(name)
        if equilibrium is not None:
            ax.axhline(equilibrium[_IDX[name]], color="k", lw=0.5, ls="--")
    if title:
        fig.suptitle(title)
    return fig


def streamline_figure(grid: StreamlineGrid, equilibrium: Optional[Sequence[float]] = None, title: str = "") -> Figure:
    fig = Figure(figsize=(6, 5.5), layout="constrained")
    ax = fig.subplots()
    u, v = grid.plane
    if grid.X.shape[0] > 1 and grid.X.shape[1] > 1:
        ax.streamplot(grid.X, grid.Y, grid.U, grid.V, density=1.2, linewidth=0.6, color="0.4")
    ax.quiver(grid.X, grid.Y, grid.U, grid.V, angles="xy", color="tab:blue", width=0.003)
    for tr in grid.traces:
        ax.plot(tr[:, 0], tr[:, 1], lw=0.6, color="tab:red")
    if equilibrium is not None:
        ax.plot(equilibrium[_IDX[u]], equilibrium[_IDX[v]], "k+", ms=12)
    (k, val), = grid.fixed.items()
    ax.set_xlabel(u)
    ax.set_ylabel(v)
    ax.set_title(title or f"{u}-{v} slice at {k} = {val:.4g}")
    return fig


def save_svg(fig: Figure, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg")
    return path
