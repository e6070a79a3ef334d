"""Free-space cascaded channel model and effective end-to-end channel evaluation.

All coefficients are dimensionless linear field amplitudes; phases follow the
e^{+j 2 pi d / lambda} convention so that cascaded phases add along the path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

SPEED_OF_LIGHT = 2.99792458e8  # m/s, fixed for reproducibility

# Field-amplitude factor applied by an element switched to the pi state.
# The alternative "power" reading of the same hardware figure is sqrt of this.
PI_STATE_AMPLITUDE = 0.5012

# Finite stand-in for log(0) when the effective channel vanishes.
SENTINEL_FLOOR_DBM = -200.0

TWO_PI = 2.0 * math.pi

FloatOrArray = Union[float, np.ndarray]


class ChannelError(ValueError):
    """Unphysical channel input (non-positive distance, length mismatch)."""


def wrap_phase(phase: FloatOrArray) -> FloatOrArray:
    """Reduce an angle (radians) into [0, 2*pi)."""
    wrapped = np.mod(phase, TWO_PI)
    # np.mod of a tiny negative value can round up to exactly 2*pi
    wrapped = np.where(wrapped >= TWO_PI, wrapped - TWO_PI, wrapped)
    if np.ndim(phase) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class RfParams:
    """Carrier and link-budget constants for one experiment."""

    carrier_freq_hz: float
    tx_gain_dbi: float = 0.0
    rx_gain_dbi: float = 0.0
    tx_power_dbm: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.carrier_freq_hz) and self.carrier_freq_hz > 0):
            raise ChannelError(f"carrier_freq_hz must be > 0, got {self.carrier_freq_hz!r}")
        for name in ("tx_gain_dbi", "rx_gain_dbi", "tx_power_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ChannelError(f"{name} must be finite")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def wavenumber(self) -> float:
        """2*pi / wavelength, rad/m."""
        return TWO_PI / self.wavelength_m

    @property
    def unit_distance_amplitude(self) -> float:
        """Free-space field amplitude at 1 m: c / (4 * pi * f)."""
        return SPEED_OF_LIGHT / (4.0 * math.pi * self.carrier_freq_hz)

    @property
    def gain_amplitude(self) -> float:
        """sqrt(G_T * G_R) with gains converted from dBi to linear power ratios."""
        return math.sqrt(10.0 ** (self.tx_gain_dbi / 10.0) * 10.0 ** (self.rx_gain_dbi / 10.0))


def freespace_amplitude(d_m: FloatOrArray, rf: RfParams) -> FloatOrArray:
    """Free-space field amplitude c / (4 * pi * f * d); exact 1/d scaling."""
    if np.any(np.asarray(d_m) <= 0):
        raise ChannelError("free-space distance must be > 0")
    return rf.unit_distance_amplitude / d_m


def freespace_coeff(d_m: FloatOrArray, rf: RfParams) -> Union[complex, np.ndarray]:
    """Complex free-space coefficient: amplitude c/(4 pi f d), phase +2 pi d / lambda."""
    amp = freespace_amplitude(d_m, rf)
    coeff = amp * np.exp(1j * (rf.wavenumber * np.asarray(d_m, dtype=float)))
    if np.ndim(d_m) == 0:
        return complex(coeff)
    return coeff


def cascaded_coeff(
    h: Union[complex, np.ndarray], g: Union[complex, np.ndarray]
) -> Union[complex, np.ndarray]:
    """Per-element cascaded coefficient: the product of the two link coefficients."""
    return h * g


def cascaded_phase(d_h_m: FloatOrArray, d_g_m: FloatOrArray, wavelength_m: float) -> FloatOrArray:
    """Cascaded path phase (2 pi / lambda) * (d_h + d_g), reduced into [0, 2*pi)."""
    if np.any(np.asarray(d_h_m) <= 0) or np.any(np.asarray(d_g_m) <= 0):
        raise ChannelError("cascaded path distances must be > 0")
    k = TWO_PI / wavelength_m
    return wrap_phase(k * np.asarray(d_h_m, dtype=float) + k * np.asarray(d_g_m, dtype=float))


@dataclass(frozen=True, eq=False)
class RisConfig:
    """One binary phase state per element plus the phase hypothesis that produced it.

    states holds the applied phase of each element, exactly 0.0 or pi, in panel
    element order. hypothesis is the target-phase value selected from the
    hypothesis set (NaN for configurations not produced by hypothesis search);
    predicted_gain_db is 20*log10 of the predicted effective-channel magnitude.
    """

    states: np.ndarray
    hypothesis: float
    hypothesis_index: int
    predicted_gain_db: float

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=float)
        object.__setattr__(self, "states", states)
        if states.ndim != 1:
            raise ChannelError("states must be a 1-D array")
        if not np.all((states == 0.0) | (states == math.pi)):
            raise ChannelError("states must contain only 0 and pi")

    def __len__(self) -> int:
        return self.states.shape[0]

    def bits(self) -> np.ndarray:
        """Switch states as 0/1 integers (1 = pi state), element order."""
        return (self.states >= math.pi / 2).astype(np.uint8)


def reflection_factors(
    states: np.ndarray, pi_amplitude: float = PI_STATE_AMPLITUDE
) -> np.ndarray:
    """Per-element complex reflection coefficients A(state) * e^{j*state}.

    Single shared arithmetic for every evaluation path (analytic optimizer,
    exhaustive search, field maps), so that their objective values are
    bit-for-bit comparable.
    """
    amps = np.where(np.asarray(states) >= math.pi / 2, pi_amplitude, 1.0)
    return amps * np.exp(1j * np.asarray(states, dtype=float))


def evaluate_states(
    casc: np.ndarray,
    states: np.ndarray,
    rf: RfParams,
    pi_amplitude: float = PI_STATE_AMPLITUDE,
) -> complex:
    """sqrt(G_T G_R) * sum_m casc_m * A(state_m) * e^{j state_m}.

    The element sum is one vectorized reduction over the full array in
    ascending element order and is never split, so the value is reproducible
    across runs and worker counts. Every objective evaluation in the package
    funnels through here.
    """
    terms = np.asarray(casc) * reflection_factors(states, pi_amplitude)
    return complex(rf.gain_amplitude * np.sum(terms))


def effective_channel(
    casc: np.ndarray,
    config: RisConfig,
    rf: RfParams,
    pi_amplitude: float = PI_STATE_AMPLITUDE,
) -> complex:
    """Effective end-to-end channel for one configuration."""
    casc = np.asarray(casc)
    if casc.shape[0] != len(config):
        raise ChannelError(
            f"cascaded coefficients ({casc.shape[0]}) and config ({len(config)}) differ in length"
        )
    return evaluate_states(casc, config.states, rf, pi_amplitude)


def received_power_dbm(h_eff: complex, rf: RfParams) -> float:
    """Received power in dBm: tx power plus 20*log10 of the effective magnitude.

    Antenna gains are already inside h_eff. A vanished channel maps to the
    documented finite floor instead of -inf.
    """
    magnitude = abs(h_eff)
    if magnitude == 0.0:
        return SENTINEL_FLOOR_DBM
    return rf.tx_power_dbm + 20.0 * math.log10(magnitude)
