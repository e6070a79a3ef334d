"""Deterministic simulator and configuration engine for geometry-driven beam steering
with a binary-phase reconfigurable intelligent surface."""

from .channel import (
    PI_STATE_AMPLITUDE,
    SENTINEL_FLOOR_DBM,
    SPEED_OF_LIGHT,
    ChannelError,
    RfParams,
    RisConfig,
    cascaded_coeff,
    cascaded_phase,
    effective_channel,
    evaluate_states,
    freespace_amplitude,
    freespace_coeff,
    received_power_dbm,
    reflection_factors,
    wrap_phase,
)
from .fieldmap import FieldmapError, PowerMap, axis_roles, sweep_receivers, sweep_targets
from .geometry import (
    GeometryError,
    GridSpec,
    Pose,
    RisLayout,
    Vec3,
    distance,
    element_positions,
    equivalent_tx_position,
    generate_grid,
    grid_point,
    project_to_grid_plane,
)
from .io import (
    OutputError,
    ScenarioError,
    load_preset,
    load_scenario,
    parse_scenario,
    preset_names,
    read_config_bitmap,
    read_powermap_csv,
    resolve_scenario,
    serialize_scenario,
    write_config_bitmap,
    write_powermap_csv,
    write_powermap_pgm,
    write_selectivity_report,
)
from .metrics import (
    BroadeningVerdict,
    MetricsError,
    SelectivityReport,
    analyze,
    compare_near_far,
)
from .optimizer import (
    BRUTE_FORCE_LIMIT,
    DEFAULT_HYPOTHESES,
    HypothesisSet,
    OptimizerError,
    brute_force_config,
    continuous_phase,
    optimize_config,
    pack_states,
    quantize,
    unpack_states,
)
from .scenario import RunSettings, Scenario, random_scene

__version__ = "0.1.0"
