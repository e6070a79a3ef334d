"""Analytic per-target configuration search with binary rounding, plus an exhaustive oracle.

For each target-phase hypothesis the continuous per-element phase is the
hypothesis minus the cascaded path phase; rounding it to the binary switch
states and keeping the best-scoring hypothesis gives the deployable
configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .channel import (
    FloatOrArray,
    RisConfig,
    cascaded_phase,
    evaluate_states,
    freespace_coeff,
    wrap_phase,
)
from .geometry import Vec3, distances_to_point

if TYPE_CHECKING:
    from .scenario import Scenario

HALF_PI = math.pi / 2.0
THREE_HALF_PI = 3.0 * math.pi / 2.0

BRUTE_FORCE_LIMIT = 20
_BRUTE_CHUNK = 1 << 16


class OptimizerError(ValueError):
    """Invalid optimizer input (element count over the exhaustive limit, bad hypothesis set)."""


@dataclass(frozen=True)
class HypothesisSet:
    """Ordered candidate values for the common target phase at the receiver."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise OptimizerError("hypothesis set must not be empty")
        for v in values:
            if not (math.isfinite(v) and 0.0 <= v < 2.0 * math.pi):
                raise OptimizerError(f"hypothesis {v!r} outside [0, 2*pi)")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise OptimizerError("hypothesis values must be strictly increasing")

    @property
    def count(self) -> int:
        return len(self.values)


DEFAULT_HYPOTHESES = HypothesisSet((0.0, HALF_PI, math.pi, THREE_HALF_PI))


def continuous_phase(target_cascaded_phase: FloatOrArray, hypothesis: float) -> FloatOrArray:
    """Continuous optimal element phase: hypothesis minus cascaded phase, in [0, 2*pi)."""
    return wrap_phase(hypothesis - np.asarray(target_cascaded_phase, dtype=float))


def quantize(tau: FloatOrArray) -> FloatOrArray:
    """Round a continuous phase to the binary switch states.

    pi for tau in [pi/2, 3*pi/2), 0 otherwise; half-open boundaries. Inputs are
    defensively wrapped into [0, 2*pi) first.
    """
    tau = wrap_phase(tau)
    states = np.where((np.asarray(tau) >= HALF_PI) & (np.asarray(tau) < THREE_HALF_PI), math.pi, 0.0)
    if np.ndim(tau) == 0:
        return float(states)
    return states


def _scene_channel(target: Vec3, scenario: "Scenario") -> tuple[np.ndarray, np.ndarray]:
    """Cascaded coefficients and cascaded phases for all elements toward one target."""
    elements = scenario.element_array()
    d_h = distances_to_point(elements, scenario.tx_position)
    d_g = distances_to_point(elements, target)
    rf = scenario.rf
    casc = freespace_coeff(d_h, rf) * freespace_coeff(d_g, rf)
    phases = cascaded_phase(d_h, d_g, rf.wavelength_m)
    return casc, phases


def _gain_db(magnitude: float) -> float:
    if magnitude == 0.0:
        return float("-inf")
    return 20.0 * math.log10(magnitude)


def optimize_config(target: Vec3, scenario: "Scenario") -> RisConfig:
    """Best deployable configuration for one target point.

    Evaluates every hypothesis in the scenario's set: continuous solution,
    binary rounding, then the predicted effective-channel magnitude. Returns
    the highest-magnitude candidate; ties keep the lowest hypothesis index.
    """
    casc, phases = _scene_channel(target, scenario)
    rf = scenario.rf
    amp = scenario.pi_state_amplitude

    best: RisConfig | None = None
    best_magnitude = -1.0
    for index, theta in enumerate(scenario.hypotheses.values):
        states = quantize(continuous_phase(phases, theta))
        magnitude = abs(evaluate_states(casc, states, rf, amp))
        if magnitude > best_magnitude:
            best_magnitude = magnitude
            best = RisConfig(
                states=states,
                hypothesis=theta,
                hypothesis_index=index,
                predicted_gain_db=_gain_db(magnitude),
            )
    assert best is not None
    return best


def brute_force_config(target: Vec3, scenario: "Scenario") -> RisConfig:
    """Global maximizer of the effective-channel magnitude over all 2^NM state vectors.

    Validation oracle for the analytic method; rejects panels above
    BRUTE_FORCE_LIMIT elements. Bit m of the pattern integer drives element m
    (1 = pi state); ties keep the lowest pattern integer.
    """
    nm = scenario.layout.num_elements
    if nm > BRUTE_FORCE_LIMIT:
        raise OptimizerError(
            f"exhaustive search is limited to NM <= {BRUTE_FORCE_LIMIT} elements, got {nm}"
        )
    casc, _ = _scene_channel(target, scenario)
    rf = scenario.rf
    amp = scenario.pi_state_amplitude

    # Same per-element factors as evaluate_states applies for states {0, pi}.
    factor_off = complex(np.exp(1j * 0.0))
    factor_on = complex(amp * np.exp(1j * math.pi))

    bit_index = np.arange(nm, dtype=np.int64)
    best_pattern = -1
    best_magnitude = -1.0
    for start in range(0, 1 << nm, _BRUTE_CHUNK):
        stop = min(start + _BRUTE_CHUNK, 1 << nm)
        patterns = np.arange(start, stop, dtype=np.int64)
        on = ((patterns[:, None] >> bit_index[None, :]) & 1).astype(bool)
        terms = casc[None, :] * np.where(on, factor_on, factor_off)
        magnitudes = np.abs(rf.gain_amplitude * terms.sum(axis=1))
        local = int(np.argmax(magnitudes))
        if magnitudes[local] > best_magnitude:
            best_magnitude = float(magnitudes[local])
            best_pattern = start + local

    bits = (best_pattern >> bit_index) & 1
    states = np.where(bits.astype(bool), math.pi, 0.0)
    magnitude = abs(evaluate_states(casc, states, rf, amp))
    return RisConfig(
        states=states,
        hypothesis=math.nan,
        hypothesis_index=-1,
        predicted_gain_db=_gain_db(magnitude),
    )


def pack_states(states: np.ndarray) -> bytes:
    """Pack binary phase states into a switch bitmap: element order, little-endian bits,
    0 bit = phase 0, 1 bit = phase pi, padded to whole bytes."""
    bits = (np.asarray(states) >= HALF_PI).astype(np.uint8)
    return np.packbits(bits, bitorder="little").tobytes()


def unpack_states(data: bytes, count: int) -> np.ndarray:
    """Inverse of pack_states; returns the phase-state array of the given length."""
    expected = (count + 7) // 8
    if len(data) != expected:
        raise OptimizerError(
            f"switch bitmap holds {len(data)} bytes, expected {expected} for {count} elements"
        )
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=count, bitorder="little")
    return np.where(bits.astype(bool), math.pi, 0.0)
