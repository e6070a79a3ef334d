"""Shared scene builders for the test suite."""

from __future__ import annotations

import math

import numpy as np

from risbeam.channel import RfParams
from risbeam.geometry import GridSpec, Pose, RisLayout, Vec3
from risbeam.optimizer import DEFAULT_HYPOTHESES
from risbeam.scenario import Scenario

X = Vec3(1.0, 0.0, 0.0)
Y = Vec3(0.0, 1.0, 0.0)
Z = Vec3(0.0, 0.0, 1.0)
NEG_X = Vec3(-1.0, 0.0, 0.0)


def flat_pose(origin: Vec3 = Vec3(0.0, 0.0, 0.0)) -> Pose:
    """Panel in the xy-plane, facing +z."""
    return Pose(origin=origin, right=X, up=Y, normal=Z)


def upright_pose(origin: Vec3) -> Pose:
    """Panel standing in the xz-plane, facing +y (the bundled-preset convention)."""
    return Pose(origin=origin, right=NEG_X, up=Z, normal=Y)


def make_scenario(
    modules_across: int = 1,
    modules_down: int = 1,
    cells: int = 4,
    module_size_m: float = 0.09,
    panel_height_m: float = 2.0,
    tx_offset_m: float = 0.5,
    rx: Vec3 = Vec3(0.1, 2.0, 1.0),
    grid_origin: Vec3 = Vec3(-0.5, 1.5, 1.0),
    count_u: int = 11,
    count_v: int = 11,
    spacing_m: float = 0.1,
    tx_gain_dbi: float = 3.0,
    rx_gain_dbi: float = 5.0,
    tx_power_dbm: float = 10.0,
    name: str = "test-scene",
) -> Scenario:
    """Small upright-panel scenario with the grid on a horizontal plane in front."""
    pose = upright_pose(Vec3(0.0, 0.0, panel_height_m))
    return Scenario(
        name=name,
        rf=RfParams(
            carrier_freq_hz=5.375e9,
            tx_gain_dbi=tx_gain_dbi,
            rx_gain_dbi=rx_gain_dbi,
            tx_power_dbm=tx_power_dbm,
        ),
        layout=RisLayout(
            modules_across=modules_across,
            modules_down=modules_down,
            cells_per_module_side=cells,
            module_width_m=module_size_m,
            module_height_m=module_size_m,
        ),
        pose=pose,
        tx_position=pose.origin + pose.normal.scaled(tx_offset_m),
        rx_position=rx,
        grid=GridSpec(
            origin=grid_origin,
            axis_u=X,
            axis_v=Y,
            count_u=count_u,
            count_v=count_v,
            spacing_m=spacing_m,
        ),
        hypotheses=DEFAULT_HYPOTHESES,
    )


def rodrigues(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix about a unit axis."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def circle_distance(a: float, b: float) -> float:
    """Angular distance between two phases on the circle."""
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)
