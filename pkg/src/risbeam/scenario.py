"""Full experiment description: RF constants, panel placement, feed, receiver, and grid."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import PI_STATE_AMPLITUDE, RfParams
from .geometry import GridSpec, Pose, RisLayout, Vec3, element_positions, generate_grid
from .optimizer import DEFAULT_HYPOTHESES, HypothesisSet, OptimizerError

RUN_MODES = ("target-sweep", "rx-sweep", "optimize-single", "compare-near-far", "brute-check")

# How the pi-state reflection loss figure is interpreted: "amplitude" applies it
# directly as a field-amplitude factor, "power" treats it as a power ratio and
# applies its square root to the field.
AMPLITUDE_INTERPRETATIONS = ("amplitude", "power")


class ScenarioValidationError(ValueError):
    """Scenario-level constraint violation."""


@dataclass(frozen=True)
class RunSettings:
    """Default execution settings carried by a scenario file; CLI flags override them."""

    mode: str = "target-sweep"
    workers: int = 1
    out_dir: str = "out"

    def __post_init__(self) -> None:
        if self.mode not in RUN_MODES:
            raise ScenarioValidationError(f"run mode must be one of {RUN_MODES}, got {self.mode!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ScenarioValidationError(f"workers must be a positive integer, got {self.workers!r}")
        if not isinstance(self.out_dir, str) or not self.out_dir:
            raise ScenarioValidationError(f"out_dir must be a non-empty string, got {self.out_dir!r}")


@dataclass(frozen=True)
class Scenario:
    """One complete, self-contained experiment setup."""

    name: str
    rf: RfParams
    layout: RisLayout
    pose: Pose
    tx_position: Vec3
    rx_position: Vec3
    grid: GridSpec
    hypotheses: HypothesisSet = DEFAULT_HYPOTHESES
    amplitude_interpretation: str = "amplitude"
    run: RunSettings = field(default_factory=RunSettings)

    def __post_init__(self) -> None:
        if self.amplitude_interpretation not in AMPLITUDE_INTERPRETATIONS:
            raise ScenarioValidationError(
                f"amplitude_interpretation must be one of {AMPLITUDE_INTERPRETATIONS}, "
                f"got {self.amplitude_interpretation!r}"
            )

    @property
    def num_elements(self) -> int:
        return self.layout.num_elements

    @property
    def pi_state_amplitude(self) -> float:
        """Field-amplitude factor for the pi switch state under the configured interpretation."""
        if self.amplitude_interpretation == "power":
            return math.sqrt(PI_STATE_AMPLITUDE)
        return PI_STATE_AMPLITUDE

    def element_array(self) -> np.ndarray:
        return element_positions(self.layout, self.pose)

    def grid_points(self) -> np.ndarray:
        return generate_grid(self.grid)

    def to_mapping(self) -> dict:
        """Canonical nested-dict form; the basis for serialization and the content digest."""
        return {
            "name": self.name,
            "rf": {
                "freq_hz": self.rf.carrier_freq_hz,
                "tx_gain_dbi": self.rf.tx_gain_dbi,
                "rx_gain_dbi": self.rf.rx_gain_dbi,
                "tx_power_dbm": self.rf.tx_power_dbm,
            },
            "ris": {
                "modules_across": self.layout.modules_across,
                "modules_down": self.layout.modules_down,
                "cells_per_module_side": self.layout.cells_per_module_side,
                "module_width_m": self.layout.module_width_m,
                "module_height_m": self.layout.module_height_m,
                "center_m": _vec_list(self.pose.origin),
                "right": _vec_list(self.pose.right),
                "up": _vec_list(self.pose.up),
                "normal": _vec_list(self.pose.normal),
            },
            "tx": {"position_m": _vec_list(self.tx_position)},
            "rx": {"position_m": _vec_list(self.rx_position)},
            "grid": {
                "origin_m": _vec_list(self.grid.origin),
                "axis_u": _vec_list(self.grid.axis_u),
                "axis_v": _vec_list(self.grid.axis_v),
                "count_u": self.grid.count_u,
                "count_v": self.grid.count_v,
                "spacing_m": self.grid.spacing_m,
            },
            "optimizer": {
                "hypotheses_rad": list(self.hypotheses.values),
                "amplitude_interpretation": self.amplitude_interpretation,
            },
            "run": {"mode": self.run.mode, "workers": self.run.workers, "out_dir": self.run.out_dir},
        }

    def digest(self) -> str:
        """Content hash of the scenario, stamped into every derived artifact."""
        canonical = json.dumps(self.to_mapping(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("ascii")).hexdigest()[:12]


def _vec_list(v: Vec3) -> list[float]:
    return [v.x, v.y, v.z]


def _orthonormal_triad(rng: np.random.Generator) -> tuple[Vec3, Vec3, Vec3]:
    basis, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(basis) < 0:
        basis[:, 2] = -basis[:, 2]
    right = basis[:, 0] / np.linalg.norm(basis[:, 0])
    up = basis[:, 1] - np.dot(basis[:, 1], right) * right
    up = up / np.linalg.norm(up)
    normal = np.cross(right, up)
    return Vec3.from_array(right), Vec3.from_array(up), Vec3.from_array(normal)


def random_scene(rng: np.random.Generator, num_elements: int, freq_hz: float = 5.375e9) -> Scenario:
    """Randomized validation scene: a line array with random pose, feed, and receiver.

    Used by oracle-style checks (hypothesis enumeration, exhaustive search) and
    by the CLI brute-check trials; not a physical-deployment template.
    """
    if num_elements < 1:
        raise OptimizerError("num_elements must be >= 1")
    wavelength = 2.99792458e8 / freq_hz
    pitch = float(rng.uniform(0.4, 2.0)) * wavelength
    right, up, normal = _orthonormal_triad(rng)
    origin = Vec3.from_array(rng.uniform(-1.0, 1.0, size=3))

    def offset_point(along_normal: float, lateral: float) -> Vec3:
        lat = rng.uniform(-lateral, lateral, size=2)
        return Vec3.from_array(
            origin.as_array()
            + along_normal * normal.as_array()
            + lat[0] * right.as_array()
            + lat[1] * up.as_array()
        )

    tx = offset_point(float(rng.uniform(0.3, 1.2)), 0.3)
    rx = offset_point(float(rng.uniform(1.0, 6.0)), 2.0)

    rf = RfParams(
        carrier_freq_hz=freq_hz,
        tx_gain_dbi=float(rng.uniform(0.0, 10.0)),
        rx_gain_dbi=float(rng.uniform(0.0, 15.0)),
        tx_power_dbm=float(rng.uniform(-10.0, 20.0)),
    )
    layout = RisLayout(
        modules_across=num_elements,
        modules_down=1,
        cells_per_module_side=1,
        module_width_m=pitch,
        module_height_m=pitch,
    )
    pose = Pose(origin=origin, right=right, up=up, normal=normal)
    grid = GridSpec(origin=rx, axis_u=right, axis_v=up, count_u=1, count_v=1, spacing_m=0.1)
    return Scenario(
        name=f"random-{num_elements}",
        rf=rf,
        layout=layout,
        pose=pose,
        tx_position=tx,
        rx_position=rx,
        grid=grid,
    )
