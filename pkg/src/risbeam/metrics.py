"""Spatial-selectivity statistics of power maps: peak, drop-off, half-power extents."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fieldmap import AXIS_ELEVATION, PowerMap
from .geometry import Vec3, distances_to_point, generate_grid

DEFAULT_DROP_RADII_M = (0.25, 0.5, 1.0, 2.0)
DEFAULT_AREA_THRESHOLDS_DB = (3.0, 6.0, 10.0, 20.0)
HALF_POWER_DB = 3.0


class MetricsError(ValueError):
    """Map unsuitable for analysis (empty, or every cell at the sentinel floor)."""


@dataclass(frozen=True)
class RadialDrop:
    """Power deficit relative to the peak over cells at least radius_m from the receiver."""

    radius_m: float
    cell_count: int
    max_drop_db: float
    mean_drop_db: float


@dataclass(frozen=True)
class AreaAbove:
    """Number of cells within threshold_db of the peak."""

    threshold_db: float
    cell_count: int


@dataclass(frozen=True)
class SelectivityReport:
    mode: str
    scenario_digest: str
    spacing_m: float
    axis_roles: tuple[str, str]
    peak_dbm: float
    peak_cell: tuple[int, int]
    peak_offset_from_rx_m: float
    drop_at_radii: tuple[RadialDrop, ...]
    halfpower_extent_u_m: float
    halfpower_extent_v_m: float
    area_above: tuple[AreaAbove, ...]


@dataclass(frozen=True)
class BroadeningVerdict:
    """Half-power extent ratios of a far-receiver map relative to a near-receiver map."""

    extent_ratio_u: float
    extent_ratio_v: float
    broadening_u: bool
    broadening_v: bool
    depth_axis: str
    depth_ratio: float
    lateral_ratio: float
    depth_broader_than_lateral: bool


def _contiguous_run_extent(line: np.ndarray, usable: np.ndarray, center: int, spacing: float) -> float:
    """Length of the maximal contiguous run of True cells through `center`."""
    lo = center
    while lo - 1 >= 0 and usable[lo - 1] and line[lo - 1]:
        lo -= 1
    hi = center
    while hi + 1 < line.shape[0] and usable[hi + 1] and line[hi + 1]:
        hi += 1
    return (hi - lo + 1) * spacing


def analyze(
    pmap: PowerMap,
    rx_projection: Vec3,
    radii_m: tuple[float, ...] = DEFAULT_DROP_RADII_M,
    area_thresholds_db: tuple[float, ...] = DEFAULT_AREA_THRESHOLDS_DB,
) -> SelectivityReport:
    """Deterministic selectivity report for one map.

    Sentinel-floor cells are excluded from every statistic. Peak ties break
    toward the lowest (i, j) in lexicographic order. Half-power extents are the
    maximal contiguous runs through the peak cell, per grid axis, where the
    value stays within 3 dB of the peak.
    """
    usable = ~pmap.sentinel_mask
    if not np.any(usable):
        raise MetricsError("map has no usable cells: every value is at the sentinel floor")

    values = pmap.values
    grid = pmap.grid
    masked = np.where(usable, values, -np.inf)
    flat_peak = int(np.argmax(masked))  # C-order = (i, j) lexicographic
    pi, pj = divmod(flat_peak, grid.count_v)
    peak = float(values[pi, pj])

    points = generate_grid(grid)
    dist_flat = distances_to_point(points, rx_projection)
    dist = dist_flat.reshape(grid.count_v, grid.count_u).T
    peak_point = Vec3.from_array(points[pj * grid.count_u + pi])
    peak_offset = (peak_point - rx_projection).norm()

    drops = []
    for radius in radii_m:
        sel = usable & (dist >= radius)
        count = int(np.count_nonzero(sel))
        if count == 0:
            drops.append(RadialDrop(radius, 0, math.nan, math.nan))
            continue
        deficit = peak - values[sel]
        drops.append(
            RadialDrop(radius, count, float(np.max(deficit)), float(np.mean(deficit)))
        )

    threshold = peak - HALF_POWER_DB
    extent_u = _contiguous_run_extent(
        values[:, pj] >= threshold, usable[:, pj], pi, grid.spacing_m
    )
    extent_v = _contiguous_run_extent(
        values[pi, :] >= threshold, usable[pi, :], pj, grid.spacing_m
    )

    areas = []
    for level in area_thresholds_db:
        areas.append(
            AreaAbove(level, int(np.count_nonzero(usable & (values >= peak - level))))
        )

    return SelectivityReport(
        mode=pmap.mode,
        scenario_digest=pmap.scenario_digest,
        spacing_m=grid.spacing_m,
        axis_roles=pmap.axis_roles,
        peak_dbm=peak,
        peak_cell=(pi, pj),
        peak_offset_from_rx_m=peak_offset,
        drop_at_radii=tuple(drops),
        halfpower_extent_u_m=extent_u,
        halfpower_extent_v_m=extent_v,
        area_above=tuple(areas),
    )


def compare_near_far(near: SelectivityReport, far: SelectivityReport) -> BroadeningVerdict:
    """Half-power broadening of the far-receiver map relative to the near one.

    Both reports must come from the same area geometry (same spacing and axis
    roles). The grid axis linked to elevation is the depth axis; its extent
    ratio is the headline broadening figure.
    """
    if near.axis_roles != far.axis_roles:
        raise MetricsError(
            f"reports disagree on axis roles: {near.axis_roles} vs {far.axis_roles}"
        )
    if not math.isclose(near.spacing_m, far.spacing_m, rel_tol=1e-12):
        raise MetricsError("reports come from grids with different spacing")

    ratio_u = far.halfpower_extent_u_m / near.halfpower_extent_u_m
    ratio_v = far.halfpower_extent_v_m / near.halfpower_extent_v_m
    depth_axis = "u" if near.axis_roles[0] == AXIS_ELEVATION else "v"
    depth_ratio = ratio_u if depth_axis == "u" else ratio_v
    lateral_ratio = ratio_v if depth_axis == "u" else ratio_u
    return BroadeningVerdict(
        extent_ratio_u=ratio_u,
        extent_ratio_v=ratio_v,
        broadening_u=ratio_u > 1.0,
        broadening_v=ratio_v > 1.0,
        depth_axis=depth_axis,
        depth_ratio=depth_ratio,
        lateral_ratio=lateral_ratio,
        depth_broader_than_lateral=depth_ratio > lateral_ratio,
    )
