"""Independent reference solver for the crossbar read-out network.

Deliberately formulated differently from the package: instead of eliminating
the pinned terminals, it keeps every node potential as an unknown and adds
one Lagrange-multiplier current per pinned terminal, solving the bordered
system [G A; A^T 0] [u; lam] = [0; b]. Column terminal currents are read off
the multipliers. Agreement between the two constructions is the check.

Topology (matching the package's documented conventions): row sources
contact the row wires at the column-0 end, column grounds at the last-row
end, total line resistances split evenly over the segments. A line with zero
segment resistance degenerates to pinning all its nodes to the terminal.
"""

import numpy as np


def reference_column_currents(grid, v_rows, r_top_total, r_bottom_total):
    grid = np.asarray(grid, dtype=float)
    v_rows = np.asarray(v_rows, dtype=float)
    n_rows, n_cols = grid.shape
    r_top = r_top_total / (n_cols - 1) if n_cols > 1 else 0.0
    r_bot = r_bottom_total / (n_rows - 1) if n_rows > 1 else 0.0

    n = n_rows * n_cols
    top = lambda r, c: r * n_cols + c
    bot = lambda r, c: n + r * n_cols + c
    g_mat = np.zeros((2 * n, 2 * n))

    def stamp(a, b, cond):
        g_mat[a, a] += cond
        g_mat[b, b] += cond
        g_mat[a, b] -= cond
        g_mat[b, a] -= cond

    for r in range(n_rows):
        for c in range(n_cols):
            stamp(top(r, c), bot(r, c), grid[r, c])
    if r_top > 0.0:
        for r in range(n_rows):
            for c in range(n_cols - 1):
                stamp(top(r, c), top(r, c + 1), 1.0 / r_top)
    if r_bot > 0.0:
        for c in range(n_cols):
            for r in range(n_rows - 1):
                stamp(bot(r, c), bot(r + 1, c), 1.0 / r_bot)

    constraints = []  # (node, pinned potential)
    for r in range(n_rows):
        cols = range(n_cols) if r_top == 0.0 else (0,)
        for c in cols:
            constraints.append((top(r, c), v_rows[r]))
    for c in range(n_cols):
        rows = range(n_rows) if r_bot == 0.0 else (n_rows - 1,)
        for r in rows:
            constraints.append((bot(r, c), 0.0))

    n_pin = len(constraints)
    a_mat = np.zeros((2 * n, n_pin))
    b_vec = np.zeros(n_pin)
    for k, (node, value) in enumerate(constraints):
        a_mat[node, k] = 1.0
        b_vec[k] = value

    system = np.block([[g_mat, a_mat], [a_mat.T, np.zeros((n_pin, n_pin))]])
    rhs = np.concatenate([np.zeros(2 * n), b_vec])
    solution = np.linalg.solve(system, rhs)
    multipliers = solution[2 * n:]

    currents = np.zeros(n_cols)
    for k, (node, _) in enumerate(constraints):
        if node >= n:  # a column-foot pin; multiplier is the current it sinks
            currents[(node - n) % n_cols] += multipliers[k]
    return currents
