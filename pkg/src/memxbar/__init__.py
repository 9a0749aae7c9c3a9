"""Behavioral simulator of a memristor-crossbar perceptron trained in situ.

A passive RxC crossbar of bistable metal-oxide devices realizes signed
weights as differential column pairs. Training is the fixed-amplitude sign
update: the delta-rule increments are accumulated externally over one epoch
and each weight then receives a single set or reset pulse according to the
sign of its accumulated sum, with half-biased addressing so unselected
devices stay put.
"""

from .crossbar import (R_BOTTOM_LINE, R_TOP_LINE, Crossbar, ReadScheme,
                       WritePulsePlan, read_grid_csv, write_grid_csv)
from .dataset import (DEFAULT_TEMPLATES, Pattern, PatternSet, build_default_set,
                      build_pattern_set, check_separability, encode, load_templates)
from .device import (G_MAX, G_MIN, RESET_ANCHORS, SET_ANCHORS, V_THRESHOLD,
                     V_WRITE, DeviceState, SwitchingModel, VariabilitySpec,
                     apply_pulse, pulse_delta, read_current, sample_initial)
from .experiment import (DEFAULT_SWEEP_CENTERS_US, ExperimentConfig, SweepCell,
                         SweepResult, dump_device_curves, dump_histograms,
                         run_init_sweep, run_pulse_train, run_rng, run_training)
from .perceptron import (PerceptronConfig, activation_derivative, classify,
                         differential_weights, forward)
from .training import (DeltaAccumulator, EpochRecord, TrainingLog,
                       build_write_plans, compute_error, train)

__version__ = "0.1.0"

__all__ = [
    "Crossbar", "ReadScheme", "WritePulsePlan", "R_TOP_LINE", "R_BOTTOM_LINE",
    "read_grid_csv", "write_grid_csv",
    "DeviceState", "SwitchingModel", "VariabilitySpec",
    "G_MIN", "G_MAX", "SET_ANCHORS", "RESET_ANCHORS", "V_WRITE", "V_THRESHOLD",
    "apply_pulse", "pulse_delta", "read_current", "sample_initial",
    "PerceptronConfig", "forward", "classify", "activation_derivative",
    "differential_weights",
    "Pattern", "PatternSet", "DEFAULT_TEMPLATES", "build_default_set",
    "build_pattern_set", "load_templates", "encode", "check_separability",
    "DeltaAccumulator", "EpochRecord", "TrainingLog", "build_write_plans",
    "compute_error", "train",
    "ExperimentConfig", "SweepCell", "SweepResult", "DEFAULT_SWEEP_CENTERS_US",
    "run_training", "run_init_sweep", "run_pulse_train", "run_rng",
    "dump_histograms", "dump_device_curves",
    "__version__",
]
