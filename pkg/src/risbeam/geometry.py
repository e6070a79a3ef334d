"""3D scene construction: panel element lattice, equivalent feed position, measurement grid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

ORTHO_TOL = 1e-9


class GeometryError(ValueError):
    """Invalid geometric input (degenerate layout, bad pose, coincident points)."""


@dataclass(frozen=True)
class Vec3:
    """A point or direction in 3D space, in meters."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise GeometryError(f"Vec3.{name} must be finite, got {value!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @staticmethod
    def from_array(arr: Sequence[float]) -> "Vec3":
        if len(arr) != 3:
            raise GeometryError(f"Vec3 needs 3 components, got {len(arr)}")
        return Vec3(float(arr[0]), float(arr[1]), float(arr[2]))

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, factor: float) -> "Vec3":
        return Vec3(self.x * factor, self.y * factor, self.z * factor)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))


@dataclass(frozen=True)
class RisLayout:
    """Modular panel layout: a rectangle of identical modules, each a square grid of cells."""

    modules_across: int
    modules_down: int
    cells_per_module_side: int
    module_width_m: float
    module_height_m: float

    def __post_init__(self) -> None:
        for name in ("modules_across", "modules_down", "cells_per_module_side"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise GeometryError(f"RisLayout.{name} must be a positive integer, got {value!r}")
        for name in ("module_width_m", "module_height_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise GeometryError(f"RisLayout.{name} must be > 0, got {value!r}")

    @property
    def num_elements(self) -> int:
        return self.modules_across * self.modules_down * self.cells_per_module_side**2

    @property
    def cell_pitch_u_m(self) -> float:
        return self.module_width_m / self.cells_per_module_side

    @property
    def cell_pitch_v_m(self) -> float:
        return self.module_height_m / self.cells_per_module_side


def _check_unit(v: Vec3, name: str) -> None:
    if abs(v.norm() - 1.0) > ORTHO_TOL:
        raise GeometryError(f"{name} must be a unit vector, |{name}| = {v.norm()!r}")


@dataclass(frozen=True)
class Pose:
    """Panel placement: center origin plus a right-handed orthonormal (right, up, normal) triad."""

    origin: Vec3
    right: Vec3
    up: Vec3
    normal: Vec3

    def __post_init__(self) -> None:
        _check_unit(self.right, "right")
        _check_unit(self.up, "up")
        _check_unit(self.normal, "normal")
        if abs(self.right.dot(self.up)) > ORTHO_TOL:
            raise GeometryError("right and up are not orthogonal")
        if abs(self.right.dot(self.normal)) > ORTHO_TOL:
            raise GeometryError("right and normal are not orthogonal")
        if abs(self.up.dot(self.normal)) > ORTHO_TOL:
            raise GeometryError("up and normal are not orthogonal")
        handed = self.right.cross(self.up) - self.normal
        if handed.norm() > ORTHO_TOL:
            raise GeometryError("triad is not right-handed: right x up != normal")


@dataclass(frozen=True)
class GridSpec:
    """Regular planar measurement grid spanned by two orthogonal unit axes."""

    origin: Vec3
    axis_u: Vec3
    axis_v: Vec3
    count_u: int
    count_v: int
    spacing_m: float

    def __post_init__(self) -> None:
        _check_unit(self.axis_u, "axis_u")
        _check_unit(self.axis_v, "axis_v")
        if abs(self.axis_u.dot(self.axis_v)) > ORTHO_TOL:
            raise GeometryError("grid axes are not orthogonal")
        for name in ("count_u", "count_v"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise GeometryError(f"GridSpec.{name} must be a positive integer, got {value!r}")
        if not (math.isfinite(self.spacing_m) and self.spacing_m > 0):
            raise GeometryError(f"GridSpec.spacing_m must be > 0, got {self.spacing_m!r}")

    @property
    def num_points(self) -> int:
        return self.count_u * self.count_v

    @property
    def extent_u_m(self) -> float:
        return (self.count_u - 1) * self.spacing_m

    @property
    def extent_v_m(self) -> float:
        return (self.count_v - 1) * self.spacing_m


def element_positions(layout: RisLayout, pose: Pose) -> np.ndarray:
    """Element-center positions of the full panel, shape (NM, 3).

    Cells tile each module at pitch (module dimension / cells per side); modules tile
    flush with no gaps. Ordering is row-major by (module row, module column, cell row,
    cell column), with rows running downward from the top of the panel. The centroid
    of all positions coincides with pose.origin.
    """
    cells = layout.cells_per_module_side
    mr, mc, cr, cc = np.meshgrid(
        np.arange(layout.modules_down),
        np.arange(layout.modules_across),
        np.arange(cells),
        np.arange(cells),
        indexing="ij",
    )
    rows = (mr * cells + cr).ravel()
    cols = (mc * cells + cc).ravel()

    pitch_u = layout.cell_pitch_u_m
    pitch_v = layout.cell_pitch_v_m
    width = layout.modules_across * layout.module_width_m
    height = layout.modules_down * layout.module_height_m
    u = (cols + 0.5) * pitch_u - width / 2.0
    v = height / 2.0 - (rows + 0.5) * pitch_v

    return (
        pose.origin.as_array()[None, :]
        + u[:, None] * pose.right.as_array()[None, :]
        + v[:, None] * pose.up.as_array()[None, :]
    )


def equivalent_tx_position(patch_positions: Sequence[Vec3]) -> Vec3:
    """Geometric center of the four feed patches, used as the single equivalent antenna."""
    if len(patch_positions) != 4:
        raise GeometryError(f"expected exactly 4 patch positions, got {len(patch_positions)}")
    arr = np.array([p.as_array() for p in patch_positions])
    return Vec3.from_array(arr.mean(axis=0))


def generate_grid(spec: GridSpec) -> np.ndarray:
    """Grid points, shape (count_u * count_v, 3).

    point(i, j) = origin + i * spacing * axis_u + j * spacing * axis_v, flattened
    with j as the outer (row) index and i as the inner index.
    """
    i = np.arange(spec.count_u)
    j = np.arange(spec.count_v)
    jj, ii = np.meshgrid(j, i, indexing="ij")
    return (
        spec.origin.as_array()[None, :]
        + (ii.ravel() * spec.spacing_m)[:, None] * spec.axis_u.as_array()[None, :]
        + (jj.ravel() * spec.spacing_m)[:, None] * spec.axis_v.as_array()[None, :]
    )


def grid_point(spec: GridSpec, i: int, j: int) -> Vec3:
    """Single grid point at integer indices (i, j)."""
    if not (0 <= i < spec.count_u and 0 <= j < spec.count_v):
        raise GeometryError(f"grid index ({i}, {j}) outside {spec.count_u} x {spec.count_v}")
    return Vec3.from_array(
        spec.origin.as_array()
        + i * spec.spacing_m * spec.axis_u.as_array()
        + j * spec.spacing_m * spec.axis_v.as_array()
    )


def project_to_grid_plane(spec: GridSpec, point: Vec3) -> Vec3:
    """Orthogonal projection of a point onto the grid's plane."""
    rel = point - spec.origin
    return (
        spec.origin
        + spec.axis_u.scaled(rel.dot(spec.axis_u))
        + spec.axis_v.scaled(rel.dot(spec.axis_v))
    )


def distance(a: Vec3, b: Vec3) -> float:
    """Euclidean distance between two points."""
    return (a - b).norm()


def distances_to_point(points: np.ndarray, target: Vec3) -> np.ndarray:
    """Euclidean distances from each row of `points` (N, 3) to `target`."""
    dx = points[:, 0] - target.x
    dy = points[:, 1] - target.y
    dz = points[:, 2] - target.z
    return np.sqrt(dx * dx + dy * dy + dz * dz)
