"""Passive crossbar array: device grid, electrical read-out, half-select writes.

Reads drive every row wire at its input voltage while every column wire is
held at virtual ground, so each column current is the Ohm's-law dot product
of the row voltages with that column's conductances. The optional nodal
read mode solves the full resistive network, including the finite row and
column wire segments, instead of assuming ideal wires.

Writes use half-biasing: the addressed rows and column are driven at
opposite half write voltages, so only their shared crosspoints see the full
amplitude. Every other device on a driven line sees half of it, which the
device threshold turns into a no-op.

Geometry conventions for the nodal mode: row inputs contact the row wires
at the column-0 end, column virtual grounds contact the column wires at the
last-row end, and a line's quoted total resistance is split evenly over its
crosspoint-to-crosspoint segments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .device import DeviceState, SwitchingModel, VariabilitySpec, pulse_delta

R_TOP_LINE = 800.0     # total row-wire resistance, ohms
R_BOTTOM_LINE = 600.0  # total column-wire resistance, ohms

READ_MODES = ("ideal", "nodal")
POLARITIES = ("set", "reset")


@dataclass(frozen=True)
class ReadScheme:
    """How column currents are computed: ideal summation or full nodal solve."""

    mode: str = "ideal"
    v_read: float = 0.1

    def __post_init__(self):
        if self.mode not in READ_MODES:
            raise ValueError(f"mode must be one of {READ_MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class WritePulsePlan:
    """One half-biased write: full pulses on the masked rows of one column."""

    column: int
    polarity: str
    row_mask: np.ndarray

    def __post_init__(self):
        if self.polarity not in POLARITIES:
            raise ValueError(f"polarity must be one of {POLARITIES}, got {self.polarity!r}")
        object.__setattr__(self, "row_mask", np.asarray(self.row_mask, dtype=bool))


class Crossbar:
    """R x C grid of memristors on resistive row/column wires.

    The grid starts at the low-conductance bound; call
    :meth:`init_conductances` or :meth:`set_conductances` before use.
    """

    def __init__(self, n_rows: int, n_cols: int,
                 model: SwitchingModel | None = None,
                 r_top_line: float = R_TOP_LINE,
                 r_bottom_line: float = R_BOTTOM_LINE):
        if n_rows < 1 or n_cols < 1:
            raise ValueError(f"bad grid shape {n_rows}x{n_cols}")
        if r_top_line < 0.0 or r_bottom_line < 0.0:
            raise ValueError("line resistances must be >= 0")
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.model = model if model is not None else SwitchingModel()
        # Total line resistance split over the segments between crosspoints.
        self.r_top_segment = r_top_line / (n_cols - 1) if n_cols > 1 else 0.0
        self.r_bottom_segment = r_bottom_line / (n_rows - 1) if n_rows > 1 else 0.0
        self._r_top_line = float(r_top_line)
        self._r_bottom_line = float(r_bottom_line)
        self._g = np.full((self.n_rows, self.n_cols), self.model.g_min, dtype=float)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def conductances(self) -> np.ndarray:
        """Copy of the conductance grid in siemens."""
        return self._g.copy()

    def set_conductances(self, grid) -> None:
        grid = np.asarray(grid, dtype=float)
        if grid.shape != self._g.shape:
            raise ValueError(f"grid shape {grid.shape} != {self._g.shape}")
        if np.any(grid < self.model.g_min) or np.any(grid > self.model.g_max):
            raise ValueError("conductances outside the device window")
        self._g = grid.copy()

    def device(self, row: int, col: int) -> DeviceState:
        """Snapshot of one crosspoint as a standalone device."""
        return DeviceState(float(self._g[row, col]), self.model)

    def init_conductances(self, spec: VariabilitySpec, rng: np.random.Generator) -> None:
        """Sample every device independently from the variability window."""
        lo, hi = spec.bounds(self.model.g_min, self.model.g_max)
        self._g = rng.uniform(lo, hi, size=self._g.shape)

    # -- read path ---------------------------------------------------------

    def read_column_currents(self, row_voltages, scheme: ReadScheme | None = None) -> np.ndarray:
        """Column currents into the virtual grounds for one input vector."""
        if scheme is None:
            scheme = ReadScheme()
        v = np.asarray(row_voltages, dtype=float)
        if v.shape != (self.n_rows,):
            raise ValueError(f"expected {self.n_rows} row voltages, got shape {v.shape}")
        if np.any(np.abs(v) > self.model.v_threshold):
            raise ValueError(
                f"read voltages exceed the {self.model.v_threshold} V switching threshold"
            )
        if scheme.mode == "ideal":
            return self._g.T @ v
        return _nodal_column_currents(self._g, v, self.r_top_segment, self.r_bottom_segment)

    # -- write path --------------------------------------------------------

    def plan_amplitudes(self, plan: WritePulsePlan) -> np.ndarray:
        """Per-device voltage drop produced by one half-biased write pulse."""
        if not 0 <= plan.column < self.n_cols:
            raise ValueError(f"column {plan.column} outside 0..{self.n_cols - 1}")
        if plan.row_mask.shape != (self.n_rows,):
            raise ValueError(
                f"row mask shape {plan.row_mask.shape} != ({self.n_rows},)"
            )
        v = self.model.v_write if plan.polarity == "set" else -self.model.v_write
        amp = np.zeros_like(self._g)
        amp[:, plan.column] = 0.5 * v          # half-selected: column driven only
        amp[plan.row_mask, :] = 0.5 * v        # half-selected: row driven only
        amp[plan.row_mask, plan.column] = v    # full-selected crosspoints
        return amp

    def apply_write_plan(self, plan: WritePulsePlan, rng: np.random.Generator | None = None) -> None:
        """Pulse the whole grid with the plan's amplitude pattern.

        Equivalent to :func:`memxbar.device.apply_pulse` at every crosspoint;
        cycle-to-cycle noise, when enabled, is drawn in row-major order over
        the above-threshold devices.
        """
        amp = self.plan_amplitudes(plan)
        dg = pulse_delta(self.model, self._g, amp)
        if self.model.noise_sigma > 0.0:
            if rng is None:
                raise ValueError("noise_sigma > 0 requires an rng")
            active = np.abs(amp) > self.model.v_threshold
            dg[active] *= 1.0 + rng.normal(0.0, self.model.noise_sigma, size=int(active.sum()))
        self._g = np.clip(self._g + dg, self.model.g_min, self.model.g_max)


# -- CSV snapshots -----------------------------------------------------------

def write_grid_csv(path, grid) -> None:
    """Save a conductance grid (siemens) as row-major CSV in microsiemens."""
    grid = np.asarray(grid, dtype=float)
    with open(path, "w", newline="") as fh:
        for row in grid:
            fh.write(",".join(f"{g * 1e6:.9f}" for g in row) + "\n")


def read_grid_csv(path) -> np.ndarray:
    """Load a microsiemens CSV written by :func:`write_grid_csv`, in siemens."""
    grid = np.loadtxt(path, delimiter=",", ndmin=2)
    return grid * 1e-6


# -- nodal read-out ----------------------------------------------------------

def _nodal_column_currents(g: np.ndarray, v_rows: np.ndarray,
                           r_top_segment: float, r_bottom_segment: float) -> np.ndarray:
    """Column terminal currents from the full resistive-network solution.

    Builds the node-voltage system over every row-wire and column-wire node,
    with the row sources and column grounds as fixed-potential terminals.
    Zero-resistance segments collapse their line onto the terminal node, so
    the ideal limit is reproduced exactly.
    """
    n_rows, n_cols = g.shape
    if r_top_segment == 0.0 and r_bottom_segment == 0.0:
        return g.T @ v_rows

    n_top = n_rows * n_cols

    def top(r, c):
        return r * n_cols + (0 if r_top_segment == 0.0 else c)

    def bot(r, c):
        if r_bottom_segment == 0.0:
            r = n_rows - 1
        return n_top + r * n_cols + c

    pinned = {}
    for r in range(n_rows):
        pinned[top(r, 0)] = float(v_rows[r])
    for c in range(n_cols):
        pinned[bot(n_rows - 1, c)] = 0.0

    elements = []  # (node_a, node_b, conductance)
    for r in range(n_rows):
        for c in range(n_cols):
            elements.append((top(r, c), bot(r, c), float(g[r, c])))
    if r_top_segment > 0.0:
        g_seg = 1.0 / r_top_segment
        for r in range(n_rows):
            for c in range(n_cols - 1):
                elements.append((top(r, c), top(r, c + 1), g_seg))
    if r_bottom_segment > 0.0:
        g_seg = 1.0 / r_bottom_segment
        for c in range(n_cols):
            for r in range(n_rows - 1):
                elements.append((bot(r, c), bot(r + 1, c), g_seg))

    unknowns = sorted({n for a, b, _ in elements for n in (a, b)} - pinned.keys())
    index = {n: i for i, n in enumerate(unknowns)}
    a_mat = np.zeros((len(unknowns), len(unknowns)))
    rhs = np.zeros(len(unknowns))
    for na, nb, ge in elements:
        ia, ib = index.get(na), index.get(nb)
        if ia is not None:
            a_mat[ia, ia] += ge
            if ib is None:
                rhs[ia] += ge * pinned[nb]
            else:
                a_mat[ia, ib] -= ge
        if ib is not None:
            a_mat[ib, ib] += ge
            if ia is None:
                rhs[ib] += ge * pinned[na]
            else:
                a_mat[ib, ia] -= ge

    if unknowns:
        try:
            solution = np.linalg.solve(a_mat, rhs)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"singular crossbar network: {exc}") from exc
        volts = dict(zip(unknowns, solution))
    else:
        volts = {}
    volts.update(pinned)

    currents = np.zeros(n_cols)
    for c in range(n_cols):
        terminal = bot(n_rows - 1, c)
        total = 0.0
        for na, nb, ge in elements:
            if na == terminal and nb != terminal:
                total += ge * volts[nb]
            elif nb == terminal and na != terminal:
                total += ge * volts[na]
        currents[c] = total
    return currents
