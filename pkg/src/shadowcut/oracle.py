"""Reference values by exhaustive scanning. Report-side helpers only: the
solver never consults these, and inequality tolerances make them references,
not certificates. Instances with equality rows usually have no grid point
within tolerance and yield None."""

import math

import numpy as np

_PER_DIM = {1: 201, 2: 61, 3: 25, 4: 13, 5: 9}
_ZOOMS = 2


def _scan(m, axes, viol_tol):
    """Best feasible grid value; vectorized over the last axis."""
    n = m.n
    best_val, best_x = math.inf, None
    last = axes[-1]
    k = last.size
    grid = np.empty((k, n))
    grid[:, n - 1] = last

    def rec(d):
        nonlocal best_val, best_x
        if d == n - 1:
            ok = np.ones(k, dtype=bool)
            for con in m.cons:
                v = grid @ con.lin - con.rhs
                for (i, j), cv in con.quad.items():
                    v = v + cv * grid[:, i] * grid[:, j]
                ok &= v <= viol_tol
                if not ok.any():
                    return
            vals = grid[ok] @ m.c
            a = int(np.argmin(vals))
            if vals[a] < best_val:
                best_val = float(vals[a])
                best_x = grid[ok][a].copy()
            return
        for v in axes[d]:
            grid[:, d] = v
            rec(d + 1)

    rec(0)
    return (None, None) if best_x is None else (best_val, best_x)


def grid_minimum(m, viol_tol=1e-6, zooms=_ZOOMS):
    """Two-stage zooming grid scan. Returns (value, point) or (None, None)."""
    if m.n > max(_PER_DIM):
        return None, None
    k = _PER_DIM[m.n]
    lo = np.array(m.lb, dtype=float)
    hi = np.array(m.ub, dtype=float)
    best_val, best_x = math.inf, None
    for _ in range(zooms + 1):
        axes = []
        for d in range(m.n):
            if d in m.int_vars:
                vals = np.arange(math.ceil(m.lb[d] - 1e-9),
                                 math.floor(m.ub[d] + 1e-9) + 1, dtype=float)
                axes.append(vals if vals.size else np.array([m.lb[d]]))
            else:
                axes.append(np.linspace(lo[d], hi[d], k))
        val, x = _scan(m, axes, viol_tol)
        if val is not None and val < best_val:
            best_val, best_x = val, x
        if best_x is None:
            break  # nothing feasible on this grid; no anchor to zoom on
        half = 1.5 * (hi - lo) / (k - 1)
        lo = np.maximum(np.array(m.lb), best_x - half)
        hi = np.minimum(np.array(m.ub), best_x + half)
    if best_x is None:
        return None, None
    return best_val, [float(v) for v in best_x]
