"""The 30-pattern letter benchmark.

Three stylized 3x3 letters plus every one-pixel-flip variant of each, ten
patterns per class. Black pixels encode as +v_read, white as -v_read, and
input 0 is a constant bias held at v_bias. The same set serves for training
and testing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .perceptron import PerceptronConfig

N_PIXELS = 9
N_CLASSES = 3

# Stylized renderings; override with a template file for other glyphs.
DEFAULT_TEMPLATES = (
    ("z", (1, 1, 1,
           0, 1, 0,
           1, 1, 1)),
    ("v", (1, 0, 1,
           1, 0, 1,
           0, 1, 0)),
    ("n", (1, 0, 1,
           1, 1, 1,
           1, 0, 1)),
)


@dataclass(frozen=True)
class Pattern:
    pixels: tuple  # 9 values in {0, 1}, row-major 3x3
    label: int
    name: str

    def __post_init__(self):
        if len(self.pixels) != N_PIXELS or any(p not in (0, 1) for p in self.pixels):
            raise ValueError(f"pattern {self.name!r}: need 9 pixels in {{0, 1}}")
        if not 0 <= self.label < N_CLASSES:
            raise ValueError(f"pattern {self.name!r}: label {self.label} out of range")


@dataclass(frozen=True)
class PatternSet:
    patterns: tuple
    base_images: tuple

    def __post_init__(self):
        bases = [p.pixels for p in self.base_images]
        if len(set(bases)) != len(bases):
            raise ValueError("base images must be pairwise distinct")


def _flip(pixels: tuple, index: int) -> tuple:
    return tuple(1 - p if i == index else p for i, p in enumerate(pixels))


def build_pattern_set(templates=DEFAULT_TEMPLATES) -> PatternSet:
    """Bases plus all nine single-pixel flips of each, labels by template order."""
    if len(templates) != N_CLASSES:
        raise ValueError(f"need exactly {N_CLASSES} base templates, got {len(templates)}")
    bases = tuple(
        Pattern(tuple(pixels), label, name) for label, (name, pixels) in enumerate(templates)
    )
    patterns = []
    for base in bases:
        patterns.append(base)
        for i in range(N_PIXELS):
            patterns.append(Pattern(_flip(base.pixels, i), base.label, f"{base.name}-flip{i}"))
    return PatternSet(tuple(patterns), bases)


def build_default_set() -> PatternSet:
    return build_pattern_set()


def load_templates(path):
    """Read base templates from text: one '111010111 name' line per class."""
    templates = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or len(parts[0]) != N_PIXELS or set(parts[0]) - {"0", "1"}:
                raise ValueError(
                    f"{path}:{lineno}: expected '<9 pixels of 0/1> <name>', got {line!r}"
                )
            templates.append((parts[1], tuple(int(ch) for ch in parts[0])))
    return tuple(templates)


def encode(pattern: Pattern, cfg: PerceptronConfig | None = None) -> np.ndarray:
    """Read-voltage vector: bias first, then +v_read (black) / -v_read (white)."""
    if cfg is None:
        cfg = PerceptronConfig()
    volts = np.empty(N_PIXELS + 1)
    volts[0] = cfg.v_bias
    volts[1:] = [cfg.v_read if p else -cfg.v_read for p in pattern.pixels]
    return volts


def check_separability(patterns, cfg: PerceptronConfig | None = None) -> bool:
    """True iff every class is linearly separable one-vs-rest.

    Solves the margin feasibility program (find w with y_n * (w . x_n) >= 1
    for all patterns) per class and certifies any solution by checking the
    strict separation directly. The bias is part of the encoding, so w is a
    plain 10-vector.
    """
    if hasattr(patterns, "patterns"):
        patterns = patterns.patterns
    patterns = list(patterns)
    if not patterns:
        raise ValueError("empty pattern set")
    x = np.stack([encode(p, cfg) for p in patterns])
    labels = np.array([p.label for p in patterns])
    for k in range(N_CLASSES):
        y = np.where(labels == k, 1.0, -1.0)
        # y_n (w . x_n) >= 1   <=>   (-y_n x_n) . w <= -1
        result = linprog(
            c=np.zeros(x.shape[1]),
            A_ub=-y[:, None] * x,
            b_ub=-np.ones(len(patterns)),
            bounds=[(None, None)] * x.shape[1],
            method="highs",
        )
        if not result.success:
            return False
        if np.min(y * (x @ result.x)) <= 0.0:
            return False
    return True
