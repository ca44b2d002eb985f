"""Random schedule builders shared by the test modules."""

import numpy as np

from consensus_lab.schedule import (
    Constant,
    ConnectionSchedule,
    Hyperbolic,
    InvCbrtRight,
    InvSqrtLeft,
    PiecewiseFunction,
)


def random_piecewise(rng, t_max=6.0, n_cells=4, kinds=("zero", "constant", "hyperbolic"),
                     period=None):
    """Piecewise function on [0, t_max] (or one period) with random cells."""
    span = period if period is not None else t_max
    cuts = np.sort(rng.uniform(0.0, span, n_cells - 1))
    edges = np.concatenate([[0.0], cuts, [span]])
    pieces = []
    for lo, hi in zip(edges, edges[1:]):
        if hi - lo < 1e-3:
            continue
        kind = kinds[rng.integers(len(kinds))]
        if kind == "zero":
            continue
        if kind == "constant":
            seg = Constant(float(rng.uniform(0.1, 2.0)))
        elif kind == "hyperbolic":
            seg = Hyperbolic(float(rng.uniform(0.1, 2.0)), float(lo), float(rng.uniform(0.5, 2.0)))
        elif kind == "inv_sqrt_left":
            seg = InvSqrtLeft(float(lo))
        else:
            seg = InvCbrtRight(float(hi))
        pieces.append((float(lo), float(hi), seg))
    return PiecewiseFunction.from_pieces(pieces, period=period)


def random_schedule(rng, n=None, t_max=6.0, density=0.6, period=None, **kw):
    n = int(rng.integers(2, 6)) if n is None else n
    entries = {}
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            if j != k and rng.random() < density:
                entries[(j, k)] = random_piecewise(rng, t_max, period=period, **kw)
    return ConnectionSchedule(n, entries)
