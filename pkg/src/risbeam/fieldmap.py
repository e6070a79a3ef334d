"""Spatial power maps reproducing the measurement protocol.

Target-sweep semantics, easy to misread: the value stored at grid point p is
NOT the power at p. For each p the surface is re-optimized to steer at p, and
the map records the resulting received power at the one FIXED receiver. The
complementary rx-sweep holds one configuration fixed and maps power over
receiver positions (the beam footprint).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .channel import RisConfig, evaluate_states, freespace_coeff, received_power_dbm
from .geometry import GridSpec, Vec3, distances_to_point
from .optimizer import optimize_config
from .scenario import Scenario

AXIS_AZIMUTH = "azimuth"
AXIS_ELEVATION = "elevation"


class FieldmapError(RuntimeError):
    """Sweep failure; carries the offending grid index when one exists."""


@dataclass(frozen=True, eq=False)
class PowerMap:
    """Grid of received-power values (dBm) plus provenance metadata.

    values is indexed [i, j] with i along axis_u and j along axis_v;
    sentinel_mask marks cells that hit the documented floor value.
    axis_roles names the angular coordinate each grid axis predominantly
    controls, inferred from the scene geometry.
    """

    grid: GridSpec
    values: np.ndarray
    mode: str
    scenario_digest: str
    sentinel_mask: np.ndarray
    axis_roles: tuple[str, str] = (AXIS_AZIMUTH, AXIS_ELEVATION)

    def __post_init__(self) -> None:
        expected = (self.grid.count_u, self.grid.count_v)
        if self.values.shape != expected:
            raise FieldmapError(f"values shape {self.values.shape} != grid dims {expected}")
        if self.sentinel_mask.shape != expected:
            raise FieldmapError(f"sentinel_mask shape {self.sentinel_mask.shape} != grid dims {expected}")
        if not np.all(np.isfinite(self.values[~self.sentinel_mask])):
            raise FieldmapError("non-sentinel map values must be finite")


def axis_roles(scenario: Scenario) -> tuple[str, str]:
    """Label grid axes by the angle they predominantly steer.

    The in-plane direction from the panel toward the grid center is the
    depth direction; the grid axis most aligned with it controls elevation,
    the other azimuth. An exactly ambiguous geometry defaults axis_v to
    elevation.
    """
    grid = scenario.grid
    center = (
        grid.origin.as_array()
        + (grid.extent_u_m / 2.0) * grid.axis_u.as_array()
        + (grid.extent_v_m / 2.0) * grid.axis_v.as_array()
    )
    away = center - scenario.pose.origin.as_array()
    along_u = abs(float(np.dot(away, grid.axis_u.as_array())))
    along_v = abs(float(np.dot(away, grid.axis_v.as_array())))
    if along_u > along_v:
        return (AXIS_ELEVATION, AXIS_AZIMUTH)
    return (AXIS_AZIMUTH, AXIS_ELEVATION)


def _sweep_chunk(
    scenario: Scenario,
    mode: str,
    states: Optional[np.ndarray],
    start: int,
    stop: int,
) -> list[tuple[int, float, bool]]:
    """Evaluate grid cells [start, stop); self-contained so chunking cannot change values."""
    grid = scenario.grid
    rf = scenario.rf
    amp = scenario.pi_state_amplitude
    points = scenario.grid_points()
    elements = scenario.element_array()
    d_h = distances_to_point(elements, scenario.tx_position)

    casc_rx = None
    if mode == "target-sweep":
        d_rx = distances_to_point(elements, scenario.rx_position)
        casc_rx = freespace_coeff(d_h, rf) * freespace_coeff(d_rx, rf)

    out = []
    for flat in range(start, stop):
        i = flat % grid.count_u
        j = flat // grid.count_u
        point = Vec3.from_array(points[flat])
        try:
            if mode == "target-sweep":
                config = optimize_config(point, scenario)
                h_eff = evaluate_states(casc_rx, config.states, rf, amp)
            else:
                d_g = distances_to_point(elements, point)
                casc = freespace_coeff(d_h, rf) * freespace_coeff(d_g, rf)
                h_eff = evaluate_states(casc, states, rf, amp)
        except Exception as exc:
            raise FieldmapError(f"{mode} failed at grid cell (i={i}, j={j}): {exc}") from exc
        sentinel = abs(h_eff) == 0.0
        out.append((flat, received_power_dbm(h_eff, rf), sentinel))
    return out


def _run_sweep(
    scenario: Scenario,
    mode: str,
    states: Optional[np.ndarray],
    workers: int,
    progress: Optional[Callable[[int, int], None]],
) -> PowerMap:
    grid = scenario.grid
    total = grid.num_points
    values_flat = np.empty(total, dtype=float)
    mask_flat = np.zeros(total, dtype=bool)

    workers = max(1, int(workers))
    chunk_count = min(total, workers * 4) if workers > 1 else 1
    edges = np.linspace(0, total, chunk_count + 1, dtype=int)
    spans = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if a < b]

    done = 0

    def consume(results: list[tuple[int, float, bool]]) -> None:
        nonlocal done
        for flat, value, sentinel in results:
            values_flat[flat] = value
            mask_flat[flat] = sentinel
        done += len(results)
        if progress is not None:
            progress(done, total)

    if workers == 1:
        for a, b in spans:
            consume(_sweep_chunk(scenario, mode, states, a, b))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_chunk, scenario, mode, states, a, b) for a, b in spans]
            for future in futures:
                consume(future.result())

    # flat order is j-outer, i-inner; store as [i, j]
    values = values_flat.reshape(grid.count_v, grid.count_u).T.copy()
    mask = mask_flat.reshape(grid.count_v, grid.count_u).T.copy()
    return PowerMap(
        grid=grid,
        values=values,
        mode=mode,
        scenario_digest=scenario.digest(),
        sentinel_mask=mask,
        axis_roles=axis_roles(scenario),
    )


def sweep_targets(
    scenario: Scenario,
    workers: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> PowerMap:
    """Per-grid-point optimization with a fixed receiver.

    Each grid point is taken as the steering target, the surface is
    re-optimized for it, and the map stores the received power at the
    scenario's fixed rx position under that configuration. Deterministic
    across runs and worker counts.
    """
    return _run_sweep(scenario, "target-sweep", None, workers, progress)


def sweep_receivers(
    scenario: Scenario,
    config: RisConfig,
    workers: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> PowerMap:
    """Beam footprint of one fixed configuration: received power versus receiver position."""
    if len(config) != scenario.num_elements:
        raise FieldmapError(
            f"config has {len(config)} states but the panel has {scenario.num_elements} elements"
        )
    return _run_sweep(scenario, "rx-sweep", config.states, workers, progress)
