"""Scenario file parsing and artifact serialization.

Scenario files are YAML with explicit units in key names (freq_hz, spacing_m).
Power maps serialize to a one-header-line CSV and a 16-bit binary PGM; both
encode the same values at 4-decimal dBm precision, so reading the CSV back and
regenerating the PGM reproduces it byte for byte.
"""

from __future__ import annotations

import importlib.resources
import math
import re
from pathlib import Path
from typing import Union

import numpy as np
import yaml

from .channel import RfParams, RisConfig, SENTINEL_FLOOR_DBM
from .fieldmap import PowerMap
from .geometry import GeometryError, GridSpec, Pose, RisLayout, Vec3, equivalent_tx_position
from .metrics import BroadeningVerdict, SelectivityReport
from .optimizer import DEFAULT_HYPOTHESES, HypothesisSet, pack_states, unpack_states
from .scenario import (
    AMPLITUDE_INTERPRETATIONS,
    RunSettings,
    Scenario,
    ScenarioValidationError,
)

PRESET_DIR = importlib.resources.files("risbeam") / "presets"

_CSV_HEADER_RE = re.compile(
    r"^# risbeam-powermap mode=(\S+) count_u=(\d+) count_v=(\d+)"
    r" spacing_m=(\S+) scenario=(\S+)$"
)

_RF_KEYS = {"freq_hz", "tx_gain_dbi", "rx_gain_dbi", "tx_power_dbm"}
_RIS_KEYS = {
    "modules_across",
    "modules_down",
    "cells_per_module_side",
    "module_width_m",
    "module_height_m",
    "center_m",
    "right",
    "up",
    "normal",
}
_TX_KEYS = {"position_m", "patch_positions_m", "boresight_offset_m"}
_RX_KEYS = {"position_m"}
_GRID_KEYS = {"origin_m", "axis_u", "axis_v", "count_u", "count_v", "spacing_m"}
_OPTIMIZER_KEYS = {"hypotheses_rad", "amplitude_interpretation"}
_RUN_KEYS = {"mode", "workers", "out_dir"}
_SECTIONS = {"name", "rf", "ris", "tx", "rx", "grid", "optimizer", "run"}


class ScenarioError(ValueError):
    """Scenario file problem, with the offending key or line in the message."""


class OutputError(RuntimeError):
    """Artifact write/read failure, with the path in the message."""


def _fail(source: str, message: str) -> "ScenarioError":
    return ScenarioError(f"{source}: {message}")


def _check_keys(mapping: dict, allowed: set, path: str, source: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise _fail(source, f"unknown key '{path}.{key}'" if path else f"unknown key '{key}'")


def _section(doc: dict, name: str, source: str) -> dict:
    if name not in doc:
        raise _fail(source, f"missing required section '{name}'")
    value = doc[name]
    if not isinstance(value, dict):
        raise _fail(source, f"section '{name}' must be a mapping")
    return value


def _float(section: dict, path: str, key: str, source: str, default=None) -> float:
    if key not in section:
        if default is not None:
            return default
        raise _fail(source, f"missing required key '{path}.{key}'")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(source, f"key '{path}.{key}' must be a number, got {value!r}")
    return float(value)


def _int(section: dict, path: str, key: str, source: str) -> int:
    if key not in section:
        raise _fail(source, f"missing required key '{path}.{key}'")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(source, f"key '{path}.{key}' must be an integer, got {value!r}")
    return value


def _vec3(section: dict, path: str, key: str, source: str) -> Vec3:
    if key not in section:
        raise _fail(source, f"missing required key '{path}.{key}'")
    value = section[key]
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 3
        or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in value)
    ):
        raise _fail(source, f"key '{path}.{key}' must be a list of 3 numbers, got {value!r}")
    return Vec3(float(value[0]), float(value[1]), float(value[2]))


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Parse and fully validate a scenario document.

    Every failure is a ScenarioError naming the offending key (or the YAML
    line for syntax problems); unknown keys are rejected.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise _fail(source, f"not valid YAML{where}: {exc}") from exc
    if not isinstance(doc, dict):
        raise _fail(source, "scenario document must be a mapping of sections")
    _check_keys(doc, _SECTIONS, "", source)

    name = doc.get("name", "scenario")
    if not isinstance(name, str) or not name:
        raise _fail(source, f"key 'name' must be a non-empty string, got {name!r}")

    rf_sec = _section(doc, "rf", source)
    _check_keys(rf_sec, _RF_KEYS, "rf", source)
    ris_sec = _section(doc, "ris", source)
    _check_keys(ris_sec, _RIS_KEYS, "ris", source)
    tx_sec = _section(doc, "tx", source)
    _check_keys(tx_sec, _TX_KEYS, "tx", source)
    rx_sec = _section(doc, "rx", source)
    _check_keys(rx_sec, _RX_KEYS, "rx", source)
    grid_sec = _section(doc, "grid", source)
    _check_keys(grid_sec, _GRID_KEYS, "grid", source)

    try:
        rf = RfParams(
            carrier_freq_hz=_float(rf_sec, "rf", "freq_hz", source),
            tx_gain_dbi=_float(rf_sec, "rf", "tx_gain_dbi", source, default=0.0),
            rx_gain_dbi=_float(rf_sec, "rf", "rx_gain_dbi", source, default=0.0),
            tx_power_dbm=_float(rf_sec, "rf", "tx_power_dbm", source, default=0.0),
        )

        layout = RisLayout(
            modules_across=_int(ris_sec, "ris", "modules_across", source),
            modules_down=_int(ris_sec, "ris", "modules_down", source),
            cells_per_module_side=_int(ris_sec, "ris", "cells_per_module_side", source),
            module_width_m=_float(ris_sec, "ris", "module_width_m", source),
            module_height_m=_float(ris_sec, "ris", "module_height_m", source),
        )
        pose = Pose(
            origin=_vec3(ris_sec, "ris", "center_m", source),
            right=_vec3(ris_sec, "ris", "right", source),
            up=_vec3(ris_sec, "ris", "up", source),
            normal=_vec3(ris_sec, "ris", "normal", source),
        )

        tx_position = _parse_tx(tx_sec, pose, source)
        rx_position = _vec3(rx_sec, "rx", "position_m", source)

        grid = GridSpec(
            origin=_vec3(grid_sec, "grid", "origin_m", source),
            axis_u=_vec3(grid_sec, "grid", "axis_u", source),
            axis_v=_vec3(grid_sec, "grid", "axis_v", source),
            count_u=_int(grid_sec, "grid", "count_u", source),
            count_v=_int(grid_sec, "grid", "count_v", source),
            spacing_m=_float(grid_sec, "grid", "spacing_m", source),
        )

        hypotheses, interpretation = _parse_optimizer(doc, source)
        run = _parse_run(doc, source)

        return Scenario(
            name=name,
            rf=rf,
            layout=layout,
            pose=pose,
            tx_position=tx_position,
            rx_position=rx_position,
            grid=grid,
            hypotheses=hypotheses,
            amplitude_interpretation=interpretation,
            run=run,
        )
    except ScenarioError:
        raise
    except (GeometryError, ScenarioValidationError, ValueError) as exc:
        raise _fail(source, str(exc)) from exc


def _parse_tx(tx_sec: dict, pose: Pose, source: str) -> Vec3:
    given = [key for key in ("position_m", "patch_positions_m", "boresight_offset_m") if key in tx_sec]
    if len(given) != 1:
        raise _fail(
            source,
            "section 'tx' needs exactly one of 'position_m', 'patch_positions_m', "
            f"'boresight_offset_m'; got {given or 'none'}",
        )
    key = given[0]
    if key == "position_m":
        return _vec3(tx_sec, "tx", "position_m", source)
    if key == "boresight_offset_m":
        offset = _float(tx_sec, "tx", "boresight_offset_m", source)
        return pose.origin + pose.normal.scaled(offset)
    patches = tx_sec["patch_positions_m"]
    if not isinstance(patches, list) or len(patches) != 4:
        raise _fail(source, "key 'tx.patch_positions_m' must be a list of 4 positions")
    positions = [
        _vec3({str(idx): patch}, "tx.patch_positions_m", str(idx), source)
        for idx, patch in enumerate(patches)
    ]
    return equivalent_tx_position(positions)


def _parse_optimizer(doc: dict, source: str) -> tuple[HypothesisSet, str]:
    if "optimizer" not in doc:
        return DEFAULT_HYPOTHESES, "amplitude"
    sec = _section(doc, "optimizer", source)
    _check_keys(sec, _OPTIMIZER_KEYS, "optimizer", source)
    if "hypotheses_rad" in sec:
        raw = sec["hypotheses_rad"]
        if not isinstance(raw, list) or not raw or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in raw
        ):
            raise _fail(source, "key 'optimizer.hypotheses_rad' must be a non-empty list of numbers")
        hypotheses = HypothesisSet(tuple(float(v) for v in raw))
    else:
        hypotheses = DEFAULT_HYPOTHESES
    interpretation = sec.get("amplitude_interpretation", "amplitude")
    if interpretation not in AMPLITUDE_INTERPRETATIONS:
        raise _fail(
            source,
            f"key 'optimizer.amplitude_interpretation' must be one of "
            f"{AMPLITUDE_INTERPRETATIONS}, got {interpretation!r}",
        )
    return hypotheses, interpretation


def _parse_run(doc: dict, source: str) -> RunSettings:
    if "run" not in doc:
        return RunSettings()
    sec = _section(doc, "run", source)
    _check_keys(sec, _RUN_KEYS, "run", source)
    mode = sec.get("mode", "target-sweep")
    workers = sec.get("workers", 1)
    out_dir = sec.get("out_dir", "out")
    if not isinstance(workers, int) or isinstance(workers, bool):
        raise _fail(source, f"key 'run.workers' must be an integer, got {workers!r}")
    return RunSettings(mode=mode, workers=workers, out_dir=out_dir)


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical YAML form; parse_scenario() of the result reproduces the scenario exactly."""
    return yaml.safe_dump(scenario.to_mapping(), sort_keys=False, default_flow_style=None)


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario file: {exc}") from exc
    return parse_scenario(text, source=str(path))


def preset_names() -> list[str]:
    return sorted(p.name[: -len(".yaml")] for p in PRESET_DIR.iterdir() if p.name.endswith(".yaml"))


def load_preset(name: str) -> Scenario:
    resource = PRESET_DIR / f"{name}.yaml"
    if not resource.is_file():
        raise ScenarioError(
            f"unknown preset '{name}'; bundled presets: {', '.join(preset_names())}"
        )
    return parse_scenario(resource.read_text(), source=f"preset:{name}")


def resolve_scenario(name_or_path: str) -> Scenario:
    """Treat the argument as a bundled preset name, else as a file path."""
    if re.fullmatch(r"[A-Za-z0-9_\-]+", name_or_path) and not Path(name_or_path).exists():
        return load_preset(name_or_path)
    return load_scenario(name_or_path)


def _format_cell(value: float, sentinel: bool) -> str:
    return "floor" if sentinel else f"{value:.4f}"


def write_powermap_csv(pmap: PowerMap, path: Union[str, Path]) -> None:
    """One header line, then count_v rows of count_u comma-separated 4-decimal dBm values.

    Sentinel cells are written as the literal `floor`. Output is byte-identical
    across runs and platforms for identical maps.
    """
    grid = pmap.grid
    lines = [
        f"# risbeam-powermap mode={pmap.mode} count_u={grid.count_u} count_v={grid.count_v}"
        f" spacing_m={grid.spacing_m:.4f} scenario={pmap.scenario_digest}"
    ]
    for j in range(grid.count_v):
        lines.append(
            ",".join(
                _format_cell(pmap.values[i, j], pmap.sentinel_mask[i, j])
                for i in range(grid.count_u)
            )
        )
    write_text(path, "\n".join(lines) + "\n")


def read_powermap_csv(path: Union[str, Path]) -> PowerMap:
    """Read a power-map CSV back; grid origin and axes are placeholders (not stored)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OutputError(f"{path}: cannot read power map: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise OutputError(f"{path}: empty power-map file")
    match = _CSV_HEADER_RE.match(lines[0])
    if match is None:
        raise OutputError(f"{path}: malformed power-map header: {lines[0]!r}")
    mode, count_u, count_v, spacing, digest = match.groups()
    count_u, count_v = int(count_u), int(count_v)
    if len(lines) != 1 + count_v:
        raise OutputError(f"{path}: expected {count_v} data rows, found {len(lines) - 1}")

    values = np.empty((count_u, count_v), dtype=float)
    mask = np.zeros((count_u, count_v), dtype=bool)
    for j in range(count_v):
        cells = lines[1 + j].split(",")
        if len(cells) != count_u:
            raise OutputError(f"{path}: row {j} has {len(cells)} fields, expected {count_u}")
        for i, cell in enumerate(cells):
            if cell == "floor":
                values[i, j] = SENTINEL_FLOOR_DBM
                mask[i, j] = True
            else:
                values[i, j] = float(cell)

    grid = GridSpec(
        origin=Vec3(0.0, 0.0, 0.0),
        axis_u=Vec3(1.0, 0.0, 0.0),
        axis_v=Vec3(0.0, 1.0, 0.0),
        count_u=count_u,
        count_v=count_v,
        spacing_m=float(spacing),
    )
    return PowerMap(
        grid=grid, values=values, mode=mode, scenario_digest=digest, sentinel_mask=mask
    )


def write_powermap_pgm(
    pmap: PowerMap, path: Union[str, Path], value_range: tuple[float, float]
) -> None:
    """Binary 16-bit grayscale PGM (magic `P5`, maxval 65535, big-endian samples).

    dBm values are clamped into value_range and mapped linearly onto
    [0, 65535]; image row 0 is grid row j=0; sentinel cells render as 0.
    The encoded values are the CSV's 4-decimal representations, so a map read
    back from its CSV regenerates an identical PGM.
    """
    vmin, vmax = value_range
    if not (math.isfinite(vmin) and math.isfinite(vmax) and vmin < vmax):
        raise OutputError(f"invalid PGM range {value_range!r}: need finite min < max")
    grid = pmap.grid
    quantized = np.array(
        [
            [float(_format_cell(pmap.values[i, j], False)) for j in range(grid.count_v)]
            for i in range(grid.count_u)
        ]
    )
    scale = np.clip((quantized - vmin) / (vmax - vmin), 0.0, 1.0)
    pixels = np.rint(scale * 65535.0).astype(np.uint16)
    pixels[pmap.sentinel_mask] = 0
    image = pixels.T  # rows are j
    header = f"P5\n{grid.count_u} {grid.count_v}\n65535\n".encode("ascii")
    write_bytes(path, header + image.astype(">u2").tobytes())


def format_selectivity_report(report: SelectivityReport) -> str:
    lines = [
        "report: selectivity",
        f"mode: {report.mode}",
        f"scenario: {report.scenario_digest}",
        f"spacing_m: {report.spacing_m:.4f}",
        f"axis_u_role: {report.axis_roles[0]}",
        f"axis_v_role: {report.axis_roles[1]}",
        f"peak_dbm: {report.peak_dbm:.4f}",
        f"peak_cell_i: {report.peak_cell[0]}",
        f"peak_cell_j: {report.peak_cell[1]}",
        f"peak_offset_from_rx_m: {report.peak_offset_from_rx_m:.4f}",
        f"halfpower_extent_u_m: {report.halfpower_extent_u_m:.4f}",
        f"halfpower_extent_v_m: {report.halfpower_extent_v_m:.4f}",
    ]
    for idx, drop in enumerate(report.drop_at_radii):
        lines.append(f"drop_{idx}_radius_m: {drop.radius_m:.4f}")
        lines.append(f"drop_{idx}_cells: {drop.cell_count}")
        lines.append(f"drop_{idx}_max_db: {drop.max_drop_db:.4f}")
        lines.append(f"drop_{idx}_mean_db: {drop.mean_drop_db:.4f}")
    for idx, area in enumerate(report.area_above):
        lines.append(f"area_{idx}_threshold_db: {area.threshold_db:.4f}")
        lines.append(f"area_{idx}_cells: {area.cell_count}")
    return "\n".join(lines) + "\n"


def write_selectivity_report(report: SelectivityReport, path: Union[str, Path]) -> None:
    write_text(path, format_selectivity_report(report))


def format_broadening_verdict(verdict: BroadeningVerdict) -> str:
    lines = [
        "report: broadening",
        f"depth_axis: {verdict.depth_axis}",
        f"extent_ratio_u: {verdict.extent_ratio_u:.4f}",
        f"extent_ratio_v: {verdict.extent_ratio_v:.4f}",
        f"broadening_u: {str(verdict.broadening_u).lower()}",
        f"broadening_v: {str(verdict.broadening_v).lower()}",
        f"depth_ratio: {verdict.depth_ratio:.4f}",
        f"lateral_ratio: {verdict.lateral_ratio:.4f}",
        f"depth_broader_than_lateral: {str(verdict.depth_broader_than_lateral).lower()}",
    ]
    return "\n".join(lines) + "\n"


def write_broadening_verdict(verdict: BroadeningVerdict, path: Union[str, Path]) -> None:
    write_text(path, format_broadening_verdict(verdict))


def write_config_bitmap(config: RisConfig, path: Union[str, Path]) -> None:
    """Raw switch bitmap: element order, little-endian bit packing, zero padding."""
    write_bytes(path, pack_states(config.states))


def read_config_bitmap(path: Union[str, Path], num_elements: int) -> RisConfig:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OutputError(f"{path}: cannot read config bitmap: {exc}") from exc
    states = unpack_states(data, num_elements)
    return RisConfig(
        states=states, hypothesis=math.nan, hypothesis_index=-1, predicted_gain_db=math.nan
    )


def format_config_summary(config: RisConfig, scenario: Scenario, bitmap_name: str) -> str:
    predicted_power = scenario.rf.tx_power_dbm + config.predicted_gain_db
    lines = [
        "report: config",
        f"scenario: {scenario.digest()}",
        f"elements: {len(config)}",
        f"hypothesis_index: {config.hypothesis_index}",
        f"hypothesis_rad: {config.hypothesis:.12f}",
        f"predicted_gain_db: {config.predicted_gain_db:.4f}",
        f"predicted_power_dbm: {predicted_power:.4f}",
        f"bitmap_file: {bitmap_name}",
    ]
    return "\n".join(lines) + "\n"


def write_text(path: Union[str, Path], text: str) -> None:
    try:
        with open(path, "w", newline="\n") as handle:
            handle.write(text)
    except OSError as exc:
        raise OutputError(f"{path}: cannot write artifact: {exc}") from exc


def write_bytes(path: Union[str, Path], data: bytes) -> None:
    try:
        with open(path, "wb") as handle:
            handle.write(data)
    except OSError as exc:
        raise OutputError(f"{path}: cannot write artifact: {exc}") from exc
