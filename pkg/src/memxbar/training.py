"""In-situ batch training with fixed-amplitude sign updates.

One epoch presents every pattern, accumulates the delta-rule increments
e_i(n) * V_j(n) externally, reduces them to a sign per weight, and writes
each half-column with one set pulse followed by one reset pulse on the
complementary rows. There is no numeric learning rate anywhere: the step
size is whatever conductance change the fixed +/-1.3 V pulses produce at
each device's current state, which tracks the sign-update rule only
approximately.

Convergence is checked at the start of each epoch on the pre-update state;
an epoch that begins with every pattern classified correctly applies no
pulses and ends the run.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .crossbar import Crossbar, ReadScheme, WritePulsePlan
from .dataset import PatternSet, encode
from .perceptron import PerceptronConfig, activation_derivative, classify, forward


def compute_error(f, f_target, current, cfg: PerceptronConfig):
    """Delta-rule error: residual times the activation slope at the operating point."""
    f = np.asarray(f, dtype=float)
    f_target = np.asarray(f_target, dtype=float)
    return (f_target - f) * activation_derivative(current, cfg)


class DeltaAccumulator:
    """Running sum of the per-pattern weight increments over one epoch."""

    def __init__(self, n_outputs: int, n_inputs: int):
        self.sums = np.zeros((n_outputs, n_inputs))

    def reset(self) -> None:
        self.sums[:] = 0.0

    def accumulate(self, errors, voltages) -> None:
        e = np.asarray(errors, dtype=float)
        v = np.asarray(voltages, dtype=float)
        if e.shape != (self.sums.shape[0],) or v.shape != (self.sums.shape[1],):
            raise ValueError(
                f"expected shapes ({self.sums.shape[0]},) and ({self.sums.shape[1]},), "
                f"got {e.shape} and {v.shape}"
            )
        self.sums += np.outer(e, v)

    def signs(self) -> np.ndarray:
        """+1 where the accumulated sum is strictly positive, else -1.

        Zero sums fall on the reset side: the write sequence set-pulses the
        strictly-positive synapses and reset-pulses all the rest.
        """
        return np.where(self.sums > 0.0, 1, -1)


def build_write_plans(signs) -> list[WritePulsePlan]:
    """Physical pulse sequence realizing one batch of weight sign updates.

    Per output pair: set then reset on the positive column, set then reset
    on the negative column, masks complementary, so every device in the
    network fragment receives exactly one full-amplitude pulse per epoch.
    """
    signs = np.asarray(signs)
    if signs.ndim != 2:
        raise ValueError(f"signs must be 2-D, got shape {signs.shape}")
    plans = []
    for i in range(signs.shape[0]):
        up = signs[i] == 1
        plans.append(WritePulsePlan(2 * i, "set", up))
        plans.append(WritePulsePlan(2 * i, "reset", ~up))
        plans.append(WritePulsePlan(2 * i + 1, "set", ~up))
        plans.append(WritePulsePlan(2 * i + 1, "reset", up))
    return plans


@dataclass
class EpochRecord:
    """State observed at the start of one epoch, before any update."""

    epoch: int
    n_errors: int
    currents: np.ndarray       # (n_patterns, n_outputs)
    activations: np.ndarray    # (n_patterns, n_outputs)
    conductances: np.ndarray | None = None


@dataclass
class TrainingLog:
    labels: np.ndarray
    pattern_names: list
    seed: int | None = None
    config_digest: str = ""
    epochs: list = field(default_factory=list)
    converged_epoch: int | None = None

    @property
    def n_epochs(self) -> int:
        return len(self.epochs)

    @property
    def converged(self) -> bool:
        return self.converged_epoch is not None

    @property
    def updates_applied(self) -> int:
        """Weight-update epochs performed; the convergence epoch applies none."""
        if self.converged:
            return self.converged_epoch - 1
        return self.n_epochs

    def error_counts(self) -> np.ndarray:
        return np.array([rec.n_errors for rec in self.epochs], dtype=int)

    def min_correct_margin(self, record: EpochRecord) -> float:
        """Worst activation margin of the correct class over all patterns."""
        margins = []
        for n, label in enumerate(self.labels):
            f = record.activations[n]
            others = np.delete(f, label)
            margins.append(f[label] - others.max())
        return float(min(margins))

    def to_csv(self, path) -> None:
        """Per-epoch summary: error count, worst margin, mean |I| per class."""
        n_outputs = self.epochs[0].currents.shape[1] if self.epochs else 0
        header = ["epoch", "n_errors", "min_correct_margin"]
        header += [f"mean_abs_i_{k}_ua" for k in range(n_outputs)]
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for rec in self.epochs:
                cells = [str(rec.epoch), str(rec.n_errors),
                         f"{self.min_correct_margin(rec):.9f}"]
                cells += [f"{m * 1e6:.9f}" for m in np.abs(rec.currents).mean(axis=0)]
                fh.write(",".join(cells) + "\n")

    def pattern_currents_csv(self, path) -> None:
        """Full per-pattern dump: one row per (epoch, pattern, output)."""
        with open(path, "w", newline="") as fh:
            fh.write("epoch,pattern,name,label,output,current_ua,activation\n")
            for rec in self.epochs:
                for n, name in enumerate(self.pattern_names):
                    for k in range(rec.currents.shape[1]):
                        fh.write(
                            f"{rec.epoch},{n},{name},{int(self.labels[n])},{k},"
                            f"{rec.currents[n, k] * 1e6:.9f},{rec.activations[n, k]:.9f}\n"
                        )


def _config_digest(xbar: Crossbar, cfg: PerceptronConfig, max_epochs: int) -> str:
    payload = {
        "perceptron": asdict(cfg),
        "model": asdict(xbar.model),
        "shape": list(xbar.shape),
        "r_top_segment": xbar.r_top_segment,
        "r_bottom_segment": xbar.r_bottom_segment,
        "max_epochs": max_epochs,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def train(xbar: Crossbar, cfg: PerceptronConfig, dataset: PatternSet, max_epochs: int,
          rng: np.random.Generator | None = None, *,
          scheme: ReadScheme | None = None, seed: int | None = None,
          record_snapshots: bool = True) -> TrainingLog:
    """Run epochs until the pre-update state classifies every pattern, or the cap.

    The crossbar is mutated in place; the returned log holds the per-epoch
    currents, activations and (optionally) conductance snapshots taken at
    each epoch start.
    """
    if not dataset.patterns:
        raise ValueError("empty dataset")
    voltages = np.stack([encode(p, cfg) for p in dataset.patterns])
    labels = np.array([p.label for p in dataset.patterns])
    names = [p.name for p in dataset.patterns]
    log = TrainingLog(labels=labels, pattern_names=names, seed=seed,
                      config_digest=_config_digest(xbar, cfg, max_epochs))
    acc = DeltaAccumulator(cfg.n_outputs, cfg.n_inputs)
    out_idx = np.arange(cfg.n_outputs)

    for epoch in range(1, max_epochs + 1):
        currents = np.empty((len(labels), cfg.n_outputs))
        activations = np.empty_like(currents)
        for n in range(len(labels)):
            currents[n], activations[n] = forward(xbar, cfg, voltages[n], scheme)
        n_errors = int(sum(classify(activations[n]) != labels[n] for n in range(len(labels))))
        log.epochs.append(EpochRecord(
            epoch, n_errors, currents, activations,
            xbar.conductances if record_snapshots else None,
        ))
        if n_errors == 0:
            log.converged_epoch = epoch
            break

        acc.reset()
        for n, label in enumerate(labels):
            targets = np.where(out_idx == label, cfg.target_high, cfg.target_low)
            acc.accumulate(compute_error(activations[n], targets, currents[n], cfg), voltages[n])
        for plan in build_write_plans(acc.signs()):
            xbar.apply_write_plan(plan, rng)
    return log
