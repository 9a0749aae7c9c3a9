"""Command-line front end.

Subcommands map one-to-one onto the experiment module: ``train`` runs one
seeded training run, ``sweep`` scans initialization centers, ``pulse-train``
characterizes a single device, ``histograms`` dumps before/after output-gap
and weight values, ``device-curves`` tabulates the pulse response. All
commands write CSV; ``--plot`` additionally renders PNGs from the same data.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .experiment import (DEFAULT_SWEEP_CENTERS_US, ExperimentConfig,
                         dump_device_curves, dump_histograms, run_init_sweep,
                         run_pulse_train, run_training)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memxbar",
        description="Memristor-crossbar perceptron simulator with in-situ training.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="FILE",
                        help="JSON experiment config; built-in defaults when omitted")
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--out", metavar="DIR", help="override the output directory")
        sp.add_argument("--plot", action="store_true",
                        help="also render PNG plots (requires matplotlib)")

    sp = sub.add_parser("train", help="one seeded training run")
    common(sp)

    sp = sub.add_parser("sweep", help="convergence statistics vs initialization center")
    common(sp)
    sp.add_argument("--centers-us", type=float, nargs="+", metavar="US",
                    default=list(DEFAULT_SWEEP_CENTERS_US),
                    help="initialization centers in microsiemens")

    sp = sub.add_parser("pulse-train", help="repeated identical pulses on one device")
    common(sp)
    sp.add_argument("--start-us", type=float, default=20.0,
                    help="starting conductance in microsiemens")
    sp.add_argument("--amplitude", type=float, default=None,
                    help="pulse amplitude in volts (default: +v_write)")
    sp.add_argument("--pulses", type=int, default=20, help="number of pulses")

    sp = sub.add_parser("histograms",
                        help="train once, dump initial/final output gaps and weights")
    common(sp)

    sp = sub.add_parser("device-curves", help="tabulate the full-amplitude pulse response")
    common(sp)
    return parser


def load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        handler = _HANDLERS[args.command]
        handler(cfg, args)
    except (ValueError, OSError) as exc:
        print(f"memxbar: error: {exc}", file=sys.stderr)
        return 2
    return 0


# -- command handlers --------------------------------------------------------

def _cmd_train(cfg: ExperimentConfig, args) -> None:
    log = run_training(cfg)
    if log.converged:
        print(f"converged at epoch {log.converged_epoch} "
              f"after {log.updates_applied} update epochs (seed {cfg.seed})")
    else:
        print(f"no convergence within {cfg.max_epochs} epochs (seed {cfg.seed})")
    if args.plot:
        _plot_training(log, Path(cfg.out_dir) / f"training_seed{cfg.seed}.png")


def _cmd_sweep(cfg: ExperimentConfig, args) -> None:
    centers = [c * 1e-6 for c in args.centers_us]
    result = run_init_sweep(cfg, centers)
    for cell in result.cells:
        print(f"center {cell.center * 1e6:6.2f} uS: "
              f"{cell.convergence_pct:5.1f}% converged "
              f"({cell.n_converged}/{cell.n_runs}), "
              f"mean epochs {cell.mean_epochs:.2f}")
    if args.plot:
        _plot_sweep(result, Path(cfg.out_dir) / "sweep.png")


def _cmd_pulse_train(cfg: ExperimentConfig, args) -> None:
    amplitude = args.amplitude if args.amplitude is not None else cfg.model.v_write
    trace = run_pulse_train(cfg, args.start_us * 1e-6, amplitude, args.pulses)
    print(f"{args.pulses} pulses at {amplitude:+.3f} V: "
          f"{trace[0] * 1e6:.3f} -> {trace[-1] * 1e6:.3f} uS")
    if args.plot:
        _plot_pulse_train(trace, Path(cfg.out_dir) / "pulse_train.png")


def _cmd_histograms(cfg: ExperimentConfig, args) -> None:
    log = run_training(cfg)
    dumps = dump_histograms(log, cfg.out_dir)
    status = "converged" if log.converged else "not converged"
    print(f"dumped {len(dumps['gaps_final'])} gap points and "
          f"{dumps['weights_final'].size} weights ({status}, seed {cfg.seed})")
    if args.plot:
        _plot_histograms(dumps, Path(cfg.out_dir) / "histograms.png")


def _cmd_device_curves(cfg: ExperimentConfig, args) -> None:
    dump_device_curves(cfg)
    print(f"device curves written to {Path(cfg.out_dir) / 'device_curves.csv'}")
    if args.plot:
        _plot_device_curves(cfg, Path(cfg.out_dir) / "device_curves.png")


_HANDLERS = {
    "train": _cmd_train,
    "sweep": _cmd_sweep,
    "pulse-train": _cmd_pulse_train,
    "histograms": _cmd_histograms,
    "device-curves": _cmd_device_curves,
}


# -- optional plotting (headless) ---------------------------------------------

def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _plot_training(log, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    epochs = [rec.epoch for rec in log.epochs]
    ax.step(epochs, log.error_counts(), where="post")
    ax.set_xlabel("epoch")
    ax.set_ylabel("misclassified patterns")
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_sweep(result, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    centers = [c.center * 1e6 for c in result.cells]
    ax.plot(centers, [c.convergence_pct for c in result.cells], "o-", color="tab:blue")
    ax.set_xlabel("initialization center (uS)")
    ax.set_ylabel("converged runs (%)", color="tab:blue")
    ax.set_ylim(0, 105)
    ax2 = ax.twinx()
    ax2.plot(centers, [c.mean_epochs for c in result.cells], "s--", color="tab:red")
    ax2.set_ylabel("mean epochs to convergence", color="tab:red")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_pulse_train(trace, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(range(len(trace)), trace * 1e6, "o-")
    ax.set_xlabel("pulse")
    ax.set_ylabel("conductance (uS)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_histograms(dumps, path) -> None:
    plt = _pyplot()
    fig, axes = plt.subplots(2, 2, figsize=(8, 6))
    for col, phase in enumerate(("initial", "final")):
        gaps = [row[3] * 1e6 for row in dumps[f"gaps_{phase}"]]
        axes[0, col].hist(gaps, bins=20)
        axes[0, col].set_title(f"{phase} output gaps (uA)")
        axes[1, col].hist(dumps[f"weights_{phase}"].ravel() * 1e6, bins=20)
        axes[1, col].set_title(f"{phase} weights (uS)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_device_curves(cfg, path) -> None:
    import numpy as np

    from .device import pulse_delta
    plt = _pyplot()
    g = np.linspace(cfg.model.g_min, cfg.model.g_max, 181)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(g * 1e6, pulse_delta(cfg.model, g, cfg.model.v_write) * 1e6, label="set")
    ax.plot(g * 1e6, pulse_delta(cfg.model, g, -cfg.model.v_write) * 1e6, label="reset")
    ax.axhline(0.0, color="gray", lw=0.5)
    ax.set_xlabel("conductance (uS)")
    ax.set_ylabel("pulse step (uS)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
