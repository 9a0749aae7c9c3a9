"""Experiment orchestration: seeded runs, parameter sweeps, CSV artifacts.

Everything here is a pure function of (config, seed): per-run generator
streams are derived from the master seed with ``np.random.SeedSequence``,
and every CSV cell is written with an explicit fixed-precision format, so
repeating a command reproduces the output files byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .crossbar import (R_BOTTOM_LINE, R_TOP_LINE, READ_MODES, Crossbar,
                       ReadScheme, write_grid_csv)
from .dataset import PatternSet, build_default_set, build_pattern_set, load_templates
from .device import (G_MAX, G_MIN, PULSE_WIDTH, RESET_ANCHORS, SET_ANCHORS,
                     V_THRESHOLD, V_WRITE, DeviceState, SwitchingModel,
                     VariabilitySpec, apply_pulse, pulse_delta)
from .perceptron import PerceptronConfig, differential_weights
from .training import TrainingLog, train

# Initialization centers for the default sweep, in microsiemens: a 7.5 uS
# ladder across the device window plus the near-ceiling 97.5 uS point.
DEFAULT_SWEEP_CENTERS_US = (12.5, 20.0, 27.5, 35.0, 42.5, 50.0, 57.5,
                            65.0, 72.5, 80.0, 87.5, 95.0, 97.5)


def run_rng(master_seed: int, center: float, run_index: int) -> np.random.Generator:
    """Independent, reproducible stream for one run of one sweep cell.

    The spawn key is (master seed, init center in integer nanosiemens, run
    index), so distinct centers and run indices never share a stream and the
    mapping does not depend on execution order.
    """
    key = (int(master_seed), int(round(center * 1e9)), int(run_index))
    return np.random.default_rng(np.random.SeedSequence(key))


# -- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run depends on; loadable from a JSON file."""

    model: SwitchingModel = field(default_factory=SwitchingModel)
    init_center: float = 35e-6
    init_window: float = 5e-6
    perceptron: PerceptronConfig = field(default_factory=PerceptronConfig)
    templates_file: str | None = None
    read_mode: str = "ideal"
    r_top_line: float = R_TOP_LINE
    r_bottom_line: float = R_BOTTOM_LINE
    max_epochs: int = 50
    n_runs: int = 100
    seed: int = 0
    out_dir: str = "."

    def __post_init__(self):
        if self.read_mode not in READ_MODES:
            raise ValueError(f"read_mode must be one of {READ_MODES}, got {self.read_mode!r}")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        # Fail at load time, not mid-run, if the window misses the device range.
        self.variability().bounds(self.model.g_min, self.model.g_max)

    def variability(self) -> VariabilitySpec:
        return VariabilitySpec(self.init_center, self.init_window, self.seed)

    def scheme(self) -> ReadScheme:
        return ReadScheme(self.read_mode, self.perceptron.v_read)

    def make_crossbar(self) -> Crossbar:
        return Crossbar(self.perceptron.n_inputs, 2 * self.perceptron.n_outputs,
                        self.model, self.r_top_line, self.r_bottom_line)

    def load_dataset(self) -> PatternSet:
        if self.templates_file is None:
            return build_default_set()
        return build_pattern_set(load_templates(self.templates_file))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        """Build from a plain dict; conductances in uS, voltages in volts.

        Unknown keys are rejected so a typo cannot silently fall back to a
        default.
        """
        data = dict(data)
        device = _section(data, "device")
        model = SwitchingModel(
            set_anchors=_anchors(device.pop("set_anchors_us", None), SET_ANCHORS),
            reset_anchors=_anchors(device.pop("reset_anchors_us", None), RESET_ANCHORS),
            v_write=float(device.pop("v_write", V_WRITE)),
            v_threshold=float(device.pop("v_threshold", V_THRESHOLD)),
            noise_sigma=float(device.pop("noise_sigma", 0.0)),
            pulse_width=float(device.pop("pulse_width_s", PULSE_WIDTH)),
            g_min=float(device.pop("g_min_us", G_MIN * 1e6)) * 1e-6,
            g_max=float(device.pop("g_max_us", G_MAX * 1e6)) * 1e-6,
        )
        _reject_unknown(device, "device")

        init = _section(data, "init")
        center = float(init.pop("center_us", 35.0)) * 1e-6
        window = float(init.pop("window_us", 5.0)) * 1e-6
        _reject_unknown(init, "init")

        net = _section(data, "network")
        target_high = float(net.pop("target_high", PerceptronConfig.target_high))
        perceptron = PerceptronConfig(
            n_inputs=int(net.pop("n_inputs", PerceptronConfig.n_inputs)),
            n_outputs=int(net.pop("n_outputs", PerceptronConfig.n_outputs)),
            gain=float(net.pop("gain", PerceptronConfig.gain)),
            target_high=target_high,
            target_low=-target_high,
            v_read=float(net.pop("v_read", PerceptronConfig.v_read)),
            v_bias=float(net.pop("v_bias", PerceptronConfig.v_bias)),
        )
        _reject_unknown(net, "network")

        cfg = cls(
            model=model,
            init_center=center,
            init_window=window,
            perceptron=perceptron,
            templates_file=data.pop("templates_file", None),
            read_mode=data.pop("read_mode", "ideal"),
            r_top_line=float(data.pop("r_top_line_ohm", R_TOP_LINE)),
            r_bottom_line=float(data.pop("r_bottom_line_ohm", R_BOTTOM_LINE)),
            max_epochs=int(data.pop("max_epochs", 50)),
            n_runs=int(data.pop("n_runs", 100)),
            seed=int(data.pop("seed", 0)),
            out_dir=str(data.pop("out_dir", ".")),
        )
        _reject_unknown(data, "top-level")
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ValueError(f"{path}: top level must be a JSON object")
        return cls.from_dict(data)


def _section(data: dict, key: str) -> dict:
    sec = data.pop(key, None)
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ValueError(f"config section {key!r} must be an object")
    return dict(sec)


def _anchors(pairs, default):
    if pairs is None:
        return default
    return tuple((float(g) * 1e-6, float(d) * 1e-6) for g, d in pairs)


def _reject_unknown(data: dict, where: str) -> None:
    if data:
        raise ValueError(f"unknown {where} config keys: {sorted(data)}")


def _outdir(cfg: ExperimentConfig, out_dir) -> Path:
    path = Path(out_dir if out_dir is not None else cfg.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


# -- single training run -----------------------------------------------------

def run_training(cfg: ExperimentConfig, out_dir=None) -> TrainingLog:
    """One seeded training run; writes per-epoch CSVs and grid snapshots.

    Artifacts (in ``out_dir``): epochs_seed{N}.csv with the error count and
    margin per epoch, class_outputs_seed{N}.csv with the mean activation of
    each output over each class, and the initial/final conductance grids.
    """
    dataset = cfg.load_dataset()
    xbar = cfg.make_crossbar()
    rng = run_rng(cfg.seed, cfg.init_center, 0)
    xbar.init_conductances(cfg.variability(), rng)
    initial = xbar.conductances

    log = train(xbar, cfg.perceptron, dataset, cfg.max_epochs, rng,
                scheme=cfg.scheme(), seed=cfg.seed)

    path = _outdir(cfg, out_dir)
    log.to_csv(path / f"epochs_seed{cfg.seed}.csv")
    _write_class_outputs(log, path / f"class_outputs_seed{cfg.seed}.csv")
    write_grid_csv(path / f"grid_initial_seed{cfg.seed}.csv", initial)
    write_grid_csv(path / f"grid_final_seed{cfg.seed}.csv", xbar.conductances)
    return log


def _write_class_outputs(log: TrainingLog, path) -> None:
    """Per-epoch mean activation of every output neuron over every class."""
    classes = sorted(set(int(label) for label in log.labels))
    n_outputs = log.epochs[0].activations.shape[1] if log.epochs else 0
    header = ["epoch"]
    header += [f"mean_f_out{i}_class{k}" for i in range(n_outputs) for k in classes]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for rec in log.epochs:
            cells = [str(rec.epoch)]
            for i in range(n_outputs):
                for k in classes:
                    mask = log.labels == k
                    cells.append(f"{rec.activations[mask, i].mean():.9f}")
            fh.write(",".join(cells) + "\n")


# -- initialization sweep ----------------------------------------------------

@dataclass(frozen=True)
class SweepCell:
    """Aggregate convergence statistics for one initialization center."""

    center: float
    n_runs: int
    n_converged: int
    mean_epochs: float  # over converged runs only; nan when none converged

    @property
    def n_failed(self) -> int:
        return self.n_runs - self.n_converged

    @property
    def convergence_pct(self) -> float:
        return 100.0 * self.n_converged / self.n_runs


@dataclass(frozen=True)
class SweepResult:
    cells: tuple

    def cell(self, center: float) -> SweepCell:
        key = int(round(center * 1e9))
        for c in self.cells:
            if int(round(c.center * 1e9)) == key:
                return c
        raise KeyError(f"no sweep cell at {center} S")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("center_us,n_runs,n_converged,convergence_pct,mean_epochs_converged\n")
            for c in self.cells:
                fh.write(f"{c.center * 1e6:.3f},{c.n_runs},{c.n_converged},"
                         f"{c.convergence_pct:.6f},{c.mean_epochs:.6f}\n")


def run_init_sweep(cfg: ExperimentConfig, centers, out_dir=None) -> SweepResult:
    """Convergence statistics vs initialization center; writes sweep.csv.

    Each center gets ``cfg.n_runs`` independent runs capped at
    ``cfg.max_epochs``; a run that never reaches zero errors within the cap
    counts as a failure. Epochs-to-convergence counts the update epochs a
    converged run actually performed.
    """
    centers = [float(c) for c in centers]
    for c in centers:
        if not cfg.model.g_min <= c <= cfg.model.g_max:
            raise ValueError(f"sweep center {c} S outside the device range")
    dataset = cfg.load_dataset()
    scheme = cfg.scheme()
    cells = []
    for center in centers:
        spec = VariabilitySpec(center, cfg.init_window)
        epochs = []
        for run in range(cfg.n_runs):
            rng = run_rng(cfg.seed, center, run)
            xbar = cfg.make_crossbar()
            xbar.init_conductances(spec, rng)
            log = train(xbar, cfg.perceptron, dataset, cfg.max_epochs, rng,
                        scheme=scheme, record_snapshots=False)
            if log.converged:
                epochs.append(log.updates_applied)
        mean_epochs = float(np.mean(epochs)) if epochs else math.nan
        cells.append(SweepCell(center, cfg.n_runs, len(epochs), mean_epochs))
    result = SweepResult(tuple(cells))
    result.to_csv(_outdir(cfg, out_dir) / "sweep.csv")
    return result


# -- device characterization -------------------------------------------------

def run_pulse_train(cfg: ExperimentConfig, start_g: float, amplitude: float,
                    n_pulses: int, out_dir=None) -> np.ndarray:
    """Repeat one pulse on a single device; returns the conductance trace.

    The trace has ``n_pulses + 1`` entries, starting at ``start_g``. Written
    to pulse_train.csv as (pulse index, conductance in uS).
    """
    if n_pulses < 0:
        raise ValueError("n_pulses must be >= 0")
    state = DeviceState(float(start_g), cfg.model)
    rng = run_rng(cfg.seed, start_g, 0)
    trace = [state.conductance]
    for _ in range(n_pulses):
        state = apply_pulse(state, amplitude, rng if cfg.model.noise_sigma > 0 else None)
        trace.append(state.conductance)
    trace = np.array(trace)
    with open(_outdir(cfg, out_dir) / "pulse_train.csv", "w", newline="") as fh:
        fh.write("pulse,conductance_us\n")
        for n, g in enumerate(trace):
            fh.write(f"{n},{g * 1e6:.9f}\n")
    return trace


def dump_device_curves(cfg: ExperimentConfig, out_dir=None, n_points: int = 181) -> None:
    """Full-amplitude pulse response vs conductance, as device_curves.csv."""
    model = cfg.model
    g = np.linspace(model.g_min, model.g_max, n_points)
    d_set = pulse_delta(model, g, model.v_write)
    d_reset = pulse_delta(model, g, -model.v_write)
    with open(_outdir(cfg, out_dir) / "device_curves.csv", "w", newline="") as fh:
        fh.write("conductance_us,set_delta_us,reset_delta_us\n")
        for gi, si, ri in zip(g, d_set, d_reset):
            fh.write(f"{gi * 1e6:.9f},{si * 1e6:.9f},{ri * 1e6:.9f}\n")


# -- histogram dumps ---------------------------------------------------------

def dump_histograms(log: TrainingLog, out_dir=".") -> dict:
    """Output-current gaps and differential weights, before and after training.

    For every pattern the gap is the correct class's output current minus
    each wrong class's, so a three-class, 30-pattern set yields 60 gap
    values per phase; the weight dump holds every signed differential pair.
    Requires a log recorded with conductance snapshots.
    """
    if not log.epochs:
        raise ValueError("log has no epochs to dump")
    first, last = log.epochs[0], log.epochs[-1]
    if first.conductances is None or last.conductances is None:
        raise ValueError("log was recorded without conductance snapshots")

    n_outputs = first.currents.shape[1]
    pairing = PerceptronConfig(n_inputs=first.conductances.shape[0], n_outputs=n_outputs)

    def gaps(rec):
        rows = []
        for n, label in enumerate(log.labels):
            for other in range(n_outputs):
                if other != label:
                    rows.append((n, int(label), other,
                                 rec.currents[n, label] - rec.currents[n, other]))
        return rows

    out = {
        "gaps_initial": gaps(first),
        "gaps_final": gaps(last),
        "weights_initial": differential_weights(first.conductances, pairing),
        "weights_final": differential_weights(last.conductances, pairing),
    }

    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / "histogram_gaps.csv", "w", newline="") as fh:
        fh.write("phase,pattern,label,other,gap_ua\n")
        for phase in ("initial", "final"):
            for n, label, other, gap in out[f"gaps_{phase}"]:
                fh.write(f"{phase},{n},{label},{other},{gap * 1e6:.9f}\n")
    with open(path / "histogram_weights.csv", "w", newline="") as fh:
        fh.write("phase,output,input,weight_us\n")
        for phase in ("initial", "final"):
            w = out[f"weights_{phase}"]
            for i in range(w.shape[0]):
                for j in range(w.shape[1]):
                    fh.write(f"{phase},{i},{j},{w[i, j] * 1e6:.9f}\n")
    return out
