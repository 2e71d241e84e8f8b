"""Optimization-based bound tightening and the box-vertex filter.

Every LP solution seen during tightening (and later during ray LPs) is
scanned once per product term: if both coordinates sit on their bounds, that
box vertex is provably inside the term's exact shadow and no ray toward it
can yield a cut, so it is recorded and skipped later.
"""

import math
from dataclasses import dataclass, field

from .config import Tolerances
from .lp import NumericalFailure


@dataclass
class FilterSet:
    tol: Tolerances = field(default_factory=Tolerances)
    entries: set = field(default_factory=set)

    def _snap(self, v, lo, hi):
        if abs(v - lo) <= self.tol.feas * (1.0 + abs(lo)):
            return lo
        if abs(v - hi) <= self.tol.feas * (1.0 + abs(hi)):
            return hi
        return None

    def update(self, terms, x, col_lb, col_ub):
        """Record (i, j, v_i, v_j) for every term whose coordinates hit bounds."""
        for t in terms:
            vi = self._snap(float(x[t.i]), float(col_lb[t.i]), float(col_ub[t.i]))
            if vi is None:
                continue
            vj = self._snap(float(x[t.j]), float(col_lb[t.j]), float(col_ub[t.j]))
            if vj is None:
                continue
            self.entries.add((t.i, t.j, vi, vj))

    def contains(self, i, j, vi, vj):
        return (i, j, float(vi), float(vj)) in self.entries


def obbt_variable(relax, i, tol=None):
    """Tightest LP bounds for one column; returns (lb, ub, min-sol, max-sol).

    Bounds never loosen and never cross; LP noise is absorbed by a one-sided
    1e-9 relative slack.
    """
    tol = tol or Tolerances()
    sol_min = relax.solve({i: 1.0}, sense="min", tol=tol)
    sol_max = relax.solve({i: 1.0}, sense="max", tol=tol)
    pad_lo = 1e-9 * (1.0 + abs(sol_min.obj))
    pad_hi = 1e-9 * (1.0 + abs(sol_max.obj))
    new_lb = max(float(relax.col_lb[i]), sol_min.obj - pad_lo)
    new_ub = min(float(relax.col_ub[i]), sol_max.obj + pad_hi)
    new_lb = min(new_lb, float(relax.col_ub[i]))
    new_ub = max(new_ub, new_lb)
    return new_lb, new_ub, sol_min, sol_max


def run_obbt(relax, terms, int_vars=(), tol=None):
    """Tighten every variable that occurs in a collected term, in place.

    Ascending variable order, lower bound before upper; bound writes happen
    immediately so later solves see them. Returns the populated FilterSet
    and the total simplex iteration count.

    Raises InfeasibleRelaxation if any tightening LP is infeasible.
    """
    tol = tol or Tolerances()
    filt = FilterSet(tol=tol)
    total_iters = 0
    variables = sorted({v for t in terms for v in (t.i, t.j)})
    for i in variables:
        try:
            lb, ub, sol_min, sol_max = obbt_variable(relax, i, tol=tol)
        except NumericalFailure:
            continue  # keep the old bounds; tightening is optional, validity is not
        total_iters += sol_min.iterations + sol_max.iterations
        if i in int_vars:
            lb = min(math.ceil(lb - tol.integrality), float(relax.col_ub[i]))
            ub = max(math.floor(ub + tol.integrality), lb)
        relax.col_lb[i] = lb
        relax.col_ub[i] = ub
        filt.update(terms, sol_min.x, relax.col_lb, relax.col_ub)
        filt.update(terms, sol_max.x, relax.col_lb, relax.col_ub)
    return filt, total_iters
