"""Functional network view of the crossbar.

Each signed weight is a differential pair of adjacent columns,
W[i, j] = G[j, 2i] - G[j, 2i+1], so the balanced +/-0.1 V input coding maps
to balanced output currents. Neurons are tanh units over the differential
column currents, computed by exact external electronics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crossbar import Crossbar, ReadScheme


@dataclass(frozen=True)
class PerceptronConfig:
    """Network dimensions, activation, drive levels and training targets."""

    n_inputs: int = 10            # 9 pixels + constant bias input
    n_outputs: int = 3
    gain: float = 2.0e4           # activation slope, 1/A
    target_high: float = 0.85
    target_low: float = -0.85
    v_read: float = 0.1
    v_bias: float = -0.1

    def __post_init__(self):
        if self.n_inputs < 1 or self.n_outputs < 1:
            raise ValueError("n_inputs and n_outputs must be positive")
        if not (0.0 < self.target_high < 1.0) or self.target_low != -self.target_high:
            raise ValueError("targets must satisfy target_low == -target_high, |target| < 1")
        if self.gain <= 0.0:
            raise ValueError("gain must be positive")


def differential_weights(grid: np.ndarray, cfg: PerceptronConfig) -> np.ndarray:
    """Signed weight matrix (n_outputs, n_inputs) from a conductance grid."""
    pos = grid[:, 0:2 * cfg.n_outputs:2]
    neg = grid[:, 1:2 * cfg.n_outputs:2]
    return (pos - neg).T


def forward(xbar: Crossbar, cfg: PerceptronConfig, voltages,
            scheme: ReadScheme | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One inference: differential output currents and their activations."""
    v = np.asarray(voltages, dtype=float)
    if v.shape != (cfg.n_inputs,):
        raise ValueError(f"expected {cfg.n_inputs} input voltages, got shape {v.shape}")
    if xbar.n_rows != cfg.n_inputs or xbar.n_cols < 2 * cfg.n_outputs:
        raise ValueError(
            f"crossbar {xbar.n_rows}x{xbar.n_cols} cannot host a "
            f"{cfg.n_inputs}-input, {cfg.n_outputs}-output network"
        )
    col = xbar.read_column_currents(v, scheme)
    currents = col[0:2 * cfg.n_outputs:2] - col[1:2 * cfg.n_outputs:2]
    return currents, np.tanh(cfg.gain * currents)


def activation_derivative(current, cfg: PerceptronConfig):
    """d tanh(gain * I) / dI, elementwise."""
    return cfg.gain * (1.0 - np.tanh(cfg.gain * np.asarray(current, dtype=float)) ** 2)


def classify(activations) -> int:
    """Index of the strictly largest output, or -1 on a tie.

    A tie can never match a true label, so tied outputs count as
    misclassifications for every class.
    """
    f = np.asarray(activations, dtype=float)
    best = int(np.argmax(f))
    if np.count_nonzero(f == f[best]) > 1:
        return -1
    return best
