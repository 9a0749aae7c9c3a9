"""Behavioral model of a single bilayer metal-oxide memristor.

The device state is its effective conductance, defined as the I/V ratio at
the 0.1 V read voltage. Write pulses move the conductance by a
state-dependent, polarity-asymmetric step calibrated from pulsed switching
measurements; anything at or below the switching threshold leaves the state
untouched, which is what makes half-select addressing in a passive crossbar
possible.

The pulse response is anchored on four measured (G, dG) points, two per
polarity. Between anchors the step is interpolated linearly in G; outside
the outermost anchors it is held constant. A sub-full-amplitude pulse is
scaled down linearly between the threshold voltage (no effect) and the full
write voltage (full effect). Conductance is always clamped to the physical
window of a formed device.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Conductance window of a formed device, in siemens.
G_MIN = 10e-6
G_MAX = 100e-6

# Measured full-amplitude conductance steps, (G, dG) pairs in siemens.
SET_ANCHORS = ((20e-6, 60e-6), (65e-6, 24e-6))
RESET_ANCHORS = ((20e-6, -5e-6), (65e-6, -55e-6))

V_WRITE = 1.3
# Must sit above the half-select voltage (v_write / 2) and below v_write;
# measured switching thresholds cluster around 1 V for this stack.
V_THRESHOLD = 1.0
PULSE_WIDTH = 500e-6


@dataclass(frozen=True)
class SwitchingModel:
    """Calibrated pulse response shared by every device of one batch.

    ``set_anchors`` / ``reset_anchors`` hold the full-amplitude conductance
    step as a function of the starting conductance. ``noise_sigma`` is the
    relative cycle-to-cycle spread applied multiplicatively to each step
    (0 = deterministic). ``pulse_width`` is carried as metadata only; the
    dynamics are per pulse.
    """

    set_anchors: tuple = SET_ANCHORS
    reset_anchors: tuple = RESET_ANCHORS
    v_write: float = V_WRITE
    v_threshold: float = V_THRESHOLD
    noise_sigma: float = 0.0
    pulse_width: float = PULSE_WIDTH
    g_min: float = G_MIN
    g_max: float = G_MAX

    def __post_init__(self):
        set_a = tuple(sorted((float(g), float(d)) for g, d in self.set_anchors))
        reset_a = tuple(sorted((float(g), float(d)) for g, d in self.reset_anchors))
        if not set_a or not reset_a:
            raise ValueError("need at least one anchor per polarity")
        if any(d < 0.0 for _, d in set_a):
            raise ValueError("set anchors must have non-negative dG")
        if any(d > 0.0 for _, d in reset_a):
            raise ValueError("reset anchors must have non-positive dG")
        for anchors in (set_a, reset_a):
            gs = [g for g, _ in anchors]
            if len(set(gs)) != len(gs):
                raise ValueError("anchor conductances must be distinct")
        if not 0.0 < self.v_threshold < self.v_write:
            raise ValueError(
                f"require 0 < v_threshold < v_write, got "
                f"{self.v_threshold} / {self.v_write}"
            )
        if not 0.0 < self.g_min < self.g_max:
            raise ValueError(f"bad conductance window [{self.g_min}, {self.g_max}]")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        object.__setattr__(self, "set_anchors", set_a)
        object.__setattr__(self, "reset_anchors", reset_a)


@dataclass
class DeviceState:
    """One memristor: its conductance plus the switching model it obeys."""

    conductance: float
    model: SwitchingModel = field(default_factory=SwitchingModel)

    def __post_init__(self):
        if not self.model.g_min <= self.conductance <= self.model.g_max:
            raise ValueError(
                f"conductance {self.conductance} outside "
                f"[{self.model.g_min}, {self.model.g_max}]"
            )


@dataclass(frozen=True)
class VariabilitySpec:
    """Device-to-device spread of the initial conductance.

    Initial states are drawn uniformly from a window of full width
    ``init_window`` centred on ``init_center``, intersected with the device
    conductance bounds. ``rng_seed`` is carried for experiment configs that
    want to record it; sampling itself always uses an explicit generator.
    """

    init_center: float
    init_window: float = 5e-6
    rng_seed: int | None = None

    def __post_init__(self):
        if self.init_window < 0.0:
            raise ValueError("init_window must be >= 0")

    def bounds(self, g_min: float = G_MIN, g_max: float = G_MAX) -> tuple[float, float]:
        """Sampling interval: the init window clipped to the device bounds."""
        lo = max(self.init_center - self.init_window / 2.0, g_min)
        hi = min(self.init_center + self.init_window / 2.0, g_max)
        if lo > hi:
            raise ValueError(
                f"init window around {self.init_center} S does not overlap "
                f"the device range [{g_min}, {g_max}] S"
            )
        return lo, hi


def read_current(state: DeviceState, v_read: float) -> float:
    """Ohmic read: I = G * V. Rejects voltages that could disturb the state."""
    if abs(v_read) > state.model.v_threshold:
        raise ValueError(
            f"read at {v_read} V exceeds the {state.model.v_threshold} V "
            f"switching threshold"
        )
    return state.conductance * v_read


def pulse_delta(model: SwitchingModel, conductance, amplitude):
    """Conductance step produced by one pulse, before noise and clamping.

    Elementwise over broadcast ``conductance`` and ``amplitude`` arrays.
    Zero at or below the threshold; otherwise the anchor interpolation for
    the matching polarity, scaled linearly in |amplitude| between threshold
    and full write voltage (clipped to [0, 1] beyond that).
    """
    g = np.asarray(conductance, dtype=float)
    amp = np.asarray(amplitude, dtype=float)

    scale = (np.abs(amp) - model.v_threshold) / (model.v_write - model.v_threshold)
    scale = np.clip(scale, 0.0, 1.0)
    # |amp| == v_threshold gives scale 0 already; the explicit mask keeps the
    # identity exact (no -0.0 artifacts) and guards custom anchor lists.
    scale = np.where(np.abs(amp) > model.v_threshold, scale, 0.0)

    set_g, set_d = zip(*model.set_anchors)
    reset_g, reset_d = zip(*model.reset_anchors)
    d_set = np.maximum(np.interp(g, set_g, set_d), 0.0)
    d_reset = np.minimum(np.interp(g, reset_g, reset_d), 0.0)

    delta = np.where(amp > 0.0, d_set, d_reset) * scale
    return delta if delta.ndim else float(delta)


def apply_pulse(state: DeviceState, amplitude: float, rng: np.random.Generator | None = None) -> DeviceState:
    """Apply one write pulse and return the resulting state.

    Pulses with |amplitude| <= v_threshold are an exact no-op. With
    ``noise_sigma`` > 0 the step is multiplied by (1 + N(0, sigma)) drawn
    from ``rng``; the deterministic default consumes no randomness.
    """
    model = state.model
    if abs(amplitude) <= model.v_threshold:
        return state
    dg = pulse_delta(model, state.conductance, amplitude)
    if model.noise_sigma > 0.0:
        if rng is None:
            raise ValueError("noise_sigma > 0 requires an rng")
        dg *= 1.0 + rng.normal(0.0, model.noise_sigma)
    g = float(np.clip(state.conductance + dg, model.g_min, model.g_max))
    return DeviceState(g, model)


def sample_initial(spec: VariabilitySpec, rng: np.random.Generator,
                   model: SwitchingModel | None = None) -> DeviceState:
    """Draw one initial device state from the variability window."""
    if model is None:
        model = SwitchingModel()
    lo, hi = spec.bounds(model.g_min, model.g_max)
    return DeviceState(float(rng.uniform(lo, hi)), model)
