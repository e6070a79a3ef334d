"""Heat-map figure rendering for power maps; file output only, no interactive backend."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fieldmap import PowerMap
from .geometry import Vec3


def render_powermap(
    pmap: PowerMap,
    path: Union[str, Path],
    value_range: Optional[tuple[float, float]] = None,
    rx_marker: Optional[Vec3] = None,
    title: Optional[str] = None,
) -> None:
    """Render a power map to a PNG heat map.

    Axes are labeled in meters along the grid axes relative to the grid origin;
    sentinel cells are masked out. rx_marker, when given, is drawn at the
    receiver's in-plane offset from the grid origin.
    """
    grid = pmap.grid
    data = np.ma.masked_where(pmap.sentinel_mask.T, pmap.values.T)
    half = grid.spacing_m / 2.0
    extent = (
        -half,
        grid.extent_u_m + half,
        -half,
        grid.extent_v_m + half,
    )

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    image = ax.imshow(
        data,
        origin="lower",
        extent=extent,
        aspect="equal",
        cmap="inferno",
        vmin=None if value_range is None else value_range[0],
        vmax=None if value_range is None else value_range[1],
        interpolation="nearest",
    )
    fig.colorbar(image, ax=ax, label="received power (dBm)")

    if rx_marker is not None:
        offset = rx_marker - grid.origin
        u = offset.dot(grid.axis_u)
        v = offset.dot(grid.axis_v)
        ax.plot(u, v, marker="x", markersize=10, color="cyan", markeredgewidth=2.5)

    ax.set_xlabel(f"u [m] ({pmap.axis_roles[0]})")
    ax.set_ylabel(f"v [m] ({pmap.axis_roles[1]})")
    ax.set_title(title if title is not None else f"{pmap.mode} map ({pmap.scenario_digest})")
    fig.tight_layout()
    # empty metadata keeps the PNG byte-stable across matplotlib environments
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)
