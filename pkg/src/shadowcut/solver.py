"""Spatial branch-and-bound for boxed MIQCPs over a product relaxation.

The root pass tightens the relaxation in stages: bound tightening on every
participating variable, a 2D shadow polytope per product term built from ray
LPs, exact product-range propagation through those polytopes, then rounds of
tangent cuts for the product envelopes. Nodes rebuild their local product
rows from the node box, repeat the cheap propagation, and branch on the worst
product mismatch; tangent rows found at a node stay with its subtree.
"""

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import propagation as prop
from .config import RunConfig
from .envelope import separate
from .lp import (TAG_MCCORMICK, TAG_ORIGINAL, TAG_SECANT, TAG_TANGENT,
                 InfeasibleRelaxation, LinRelax, NumericalFailure, Row,
                 build_relaxation, mccormick_rows, product_bounds,
                 square_bounds, square_rows)
from .model import build_extended, collect_terms
from .obbt import run_obbt
from .projection import LpBudget, compute_projection

_TAG_CUTOFF = "incumbent-cutoff"
_SEP_ROUNDS_NODE = 2
_SEP_ROUNDS_ROOT = 8
_PROP_PASSES = 5
_PLUNGE_DEPTH = 3


# ---------------------------------------------------------------------------
# metrics


def gap_closed(primal, with_cuts, without_cuts, tol=1e-9):
    """Fraction of the relaxation gap closed by the tightened bound.

    Positive when the tightened bound improves on the plain one, negative when
    it is weaker, zero when they agree. The primal value must dominate both
    bounds (minimization: lie above them)."""
    scale = max(1.0, abs(primal), abs(with_cuts), abs(without_cuts))
    if primal < max(with_cuts, without_cuts) - tol * scale:
        raise ValueError("primal value lies below a dual bound")
    if with_cuts == without_cuts:
        return 0.0
    if with_cuts > without_cuts:
        return 1.0 - (primal - with_cuts) / (primal - without_cuts)
    return -1.0 + (primal - without_cuts) / (primal - with_cuts)


def effectiveness(term_reports):
    """Occurrence-weighted share of product terms that received a ray cut."""
    total = sum(r.count for r in term_reports)
    if total == 0:
        return 0.0
    return sum(r.count for r in term_reports if r.cuts > 0) / total


# ---------------------------------------------------------------------------
# result containers


@dataclass
class Counters:
    """Deterministic work counters; the default progress measure."""

    nodes: int = 0
    lp_solves: int = 0
    lp_iterations: int = 0
    obbt_iterations: int = 0
    diag_lps: int = 0
    diag_iterations: int = 0
    projection_cuts: int = 0
    tangent_cuts: int = 0

    def to_dict(self):
        return {
            "nodes": self.nodes,
            "lp_solves": self.lp_solves,
            "lp_iterations": self.lp_iterations,
            "obbt_iterations": self.obbt_iterations,
            "diag_lps": self.diag_lps,
            "diag_iterations": self.diag_iterations,
            "projection_cuts": self.projection_cuts,
            "tangent_cuts": self.tangent_cuts,
        }


@dataclass
class TermReport:
    i: int
    j: int
    count: int
    cuts: int
    box_area: float
    poly_area: float
    forward: tuple | None = None

    def to_dict(self):
        return {
            "i": self.i, "j": self.j, "count": self.count, "cuts": self.cuts,
            "box_area": self.box_area, "poly_area": self.poly_area,
            "forward_lo": None if self.forward is None else self.forward[0],
            "forward_hi": None if self.forward is None else self.forward[1],
        }


@dataclass
class RootAnalysis:
    status: str                    # "ok" or "infeasible"
    baseline_bound: float | None   # objective LP bound after bound tightening only
    tightened_bound: float | None  # after polytopes, propagation, tangent rounds
    psi: float
    term_reports: list
    diag_budget: float | None
    counters: Counters
    relax: LinRelax | None = None
    ext: object = None
    terms: list = field(default_factory=list)
    polytopes: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "status": self.status,
            "baseline_bound": self.baseline_bound,
            "tightened_bound": self.tightened_bound,
            "psi": self.psi,
            "diag_budget": self.diag_budget,
            "terms": [t.to_dict() for t in self.term_reports],
            "counters": self.counters.to_dict(),
        }


@dataclass
class SolveResult:
    status: str                    # optimal | infeasible | node_limit | time_limit
    objective: float | None
    bound: float
    x: list | None
    gap: float | None
    counters: Counters
    root: RootAnalysis | None
    wall_time: float | None = None

    def to_dict(self):
        return {
            "status": self.status,
            "objective": self.objective,
            "bound": None if self.bound in (-math.inf, math.inf) else self.bound,
            "x": self.x,
            "gap": self.gap,
            "counters": self.counters.to_dict(),
            "root": None if self.root is None else self.root.to_dict(),
            "wall_time": self.wall_time,
        }


# ---------------------------------------------------------------------------
# shared bound machinery


def _objective_vector(ext):
    c = np.zeros(ext.miqcp.n + len(ext.slots))
    c[:ext.miqcp.n] = ext.miqcp.c
    return c


def _slot_interval(ext, t, lb, ub):
    i, j = ext.slots[t]
    if i == j:
        return square_bounds(lb[i], ub[i])
    return product_bounds(lb[i], ub[i], lb[j], ub[j])


def _refresh_product_rows(relax, ext, lb=None, ub=None):
    """Rebuild McCormick/secant rows and slot column bounds from boxes."""
    lb = relax.col_lb if lb is None else lb
    ub = relax.col_ub if ub is None else ub
    n = ext.miqcp.n
    mc, sq = [], []
    for t, (i, j) in enumerate(ext.slots):
        zlo, zhi = _slot_interval(ext, t, lb, ub)
        col = n + t
        relax.col_lb[col] = min(max(relax.col_lb[col], zlo), zhi)
        relax.col_ub[col] = max(min(relax.col_ub[col], zhi), zlo)
        if i == j:
            sq.extend(square_rows(i, t, lb[i], ub[i]))
        else:
            mc.extend(mccormick_rows(i, j, t, lb[i], ub[i], lb[j], ub[j]))
    relax.replace_rows(TAG_MCCORMICK, mc)
    relax.replace_rows(TAG_SECANT, sq)


def _fbbt_rows(dense_rows, rhs, lb, ub, feas, step):
    """One interval-propagation sweep over dense <= rows. Returns
    (changed, feasible)."""
    changed = False
    for r in range(dense_rows.shape[0]):
        a = dense_rows[r]
        nz = np.nonzero(a)[0]
        if nz.size == 0:
            if rhs[r] < -feas:
                return changed, False
            continue
        mins = np.where(a[nz] > 0.0, a[nz] * lb[nz], a[nz] * ub[nz])
        total = mins.sum()
        if total > rhs[r] + feas * (1.0 + abs(rhs[r])):
            return changed, False
        for pos, k in enumerate(nz):
            rest = total - mins[pos]
            cand = (rhs[r] - rest) / a[k]
            if a[k] > 0.0:
                if cand < ub[k] - step * (1.0 + abs(cand)):
                    ub[k] = cand
                    changed = True
            else:
                if cand > lb[k] + step * (1.0 + abs(cand)):
                    lb[k] = cand
                    changed = True
            if lb[k] > ub[k] + feas * (1.0 + abs(ub[k])):
                return changed, False
    return changed, True


def _square_reverse(lo, hi, zlo, zhi):
    """Tighten x in [lo, hi] under zlo <= x^2 <= zhi; None when empty."""
    if zhi < -1e-15:
        return None
    if zhi >= 0.0:
        r = math.sqrt(zhi)
        lo, hi = max(lo, -r), min(hi, r)
    if zlo > 0.0:
        r = math.sqrt(zlo)
        if hi < r:
            hi = min(hi, -r)
        if lo > -r:
            lo = max(lo, r)
    if lo > hi:
        return None
    return lo, hi


def _propagate(ext, terms, polytopes, dense, rhs, lb, ub, tol,
               passes=_PROP_PASSES):
    """Fixed-point bound propagation over rows and product terms.

    Mutates lb/ub (length n + nslots). Returns False when infeasibility is
    proven. Slot bounds are first clipped to the interval product of the
    current box, then sharpened through the term polytopes."""
    n = ext.miqcp.n
    feas = tol.feas
    step = tol.min_improve
    by_slot = {t.slot: t for t in terms}
    for _ in range(passes):
        changed, ok = _fbbt_rows(dense, rhs, lb, ub, feas, step)
        if not ok:
            return False
        for t, (i, j) in enumerate(ext.slots):
            col = n + t
            zlo, zhi = _slot_interval(ext, t, lb, ub)
            if zlo > lb[col] + step * (1.0 + abs(zlo)):
                lb[col] = zlo
                changed = True
            if zhi < ub[col] - step * (1.0 + abs(zhi)):
                ub[col] = zhi
                changed = True
            if lb[col] > ub[col] + feas * (1.0 + abs(ub[col])):
                return False
            if i == j:
                r = _square_reverse(lb[i], ub[i], lb[col], ub[col])
                if r is None:
                    return False
                if r[0] > lb[i] + step * (1.0 + abs(r[0])):
                    lb[i], changed = r[0], True
                if r[1] < ub[i] - step * (1.0 + abs(r[1])):
                    ub[i], changed = r[1], True
                continue
            term = by_slot.get(t)
            p0 = polytopes.get((i, j)) if polytopes else None
            if term is None or p0 is None:
                continue
            ploc = p0.restrict(lb[i], ub[i], lb[j], ub[j])
            if ploc is None:
                return False
            fb = prop.facet_propagate(ploc, (lb[i], ub[i], lb[j], ub[j]),
                                      min_improve=step)
            if fb is None:
                return False
            for col2, lo2, hi2 in ((i, fb[0], fb[1]), (j, fb[2], fb[3])):
                if lo2 > lb[col2] + step * (1.0 + abs(lo2)):
                    lb[col2], changed = lo2, True
                if hi2 < ub[col2] - step * (1.0 + abs(hi2)):
                    ub[col2], changed = hi2, True
            if len(ploc.vertices) >= 2:
                zlo2, zhi2 = prop.forward_bounds(ploc)
                if zlo2 > lb[col] + step * (1.0 + abs(zlo2)):
                    lb[col], changed = zlo2, True
                if zhi2 < ub[col] - step * (1.0 + abs(zhi2)):
                    ub[col], changed = zhi2, True
                if lb[col] > ub[col] + feas * (1.0 + abs(ub[col])):
                    return False
                lv = prop.levelset_bounds(ploc, lb[col], ub[col])
                if lv is None:
                    return False
                for col2, lo2, hi2 in ((i, lv[0], lv[1]), (j, lv[2], lv[3])):
                    if lo2 > lb[col2] + step * (1.0 + abs(lo2)):
                        lb[col2], changed = lo2, True
                    if hi2 < ub[col2] - step * (1.0 + abs(hi2)):
                        ub[col2], changed = hi2, True
            if lb[i] > ub[i] + feas * (1.0 + abs(ub[i])):
                return False
            if lb[j] > ub[j] + feas * (1.0 + abs(ub[j])):
                return False
        if not changed:
            return True
    return True


def _tangent_row(term_slot, kind, cut, i, j):
    if kind == "under":
        return Row({i: cut.ax, j: cut.ay}, {term_slot: -1.0}, cut.b, TAG_TANGENT)
    return Row({i: -cut.ax, j: -cut.ay}, {term_slot: 1.0}, -cut.b, TAG_TANGENT)


def _polish(terms, polytopes, ext, lb, ub, x, try_incumbent):
    """Feasibility polish: for each term, move (x_i, x_j) onto the level set
    of the LP's product value inside the local polytope and retest. Closes
    nodes whose LP sits on a tangency point of the envelope."""
    n = ext.miqcp.n
    found = False
    for term in terms:
        i, j, t = term.i, term.j, term.slot
        p0 = polytopes.get((i, j))
        if p0 is None:
            continue
        ploc = p0.restrict(lb[i], ub[i], lb[j], ub[j])
        if ploc is None or len(ploc.vertices) < 2:
            continue
        z = x[n + t]
        for cx, cy in prop.levelset_candidates(ploc, z, z)[:8]:
            xc = np.array(x[:n], dtype=float)
            xc[i], xc[j] = cx, cy
            if try_incumbent(xc):
                found = True
    return found


def _separate_point(terms, polytopes, ext, lb, ub, x, tol):
    """Violated tangent rows at the LP point, at most one per term and side."""
    n = ext.miqcp.n
    out = []
    for term in terms:
        i, j, t = term.i, term.j, term.slot
        p0 = polytopes.get((i, j))
        if p0 is None:
            continue
        ploc = p0.restrict(lb[i], ub[i], lb[j], ub[j])
        if ploc is None or len(ploc.vertices) < 3:
            continue
        qx = min(max(x[i], lb[i]), ub[i])
        qy = min(max(x[j], lb[j]), ub[j])
        if not ploc.contains(qx, qy, tol=1e-7):
            continue
        xval = x[n + t]
        vscale = tol.violation * (1.0 + abs(xval))
        cut = separate(ploc, (qx, qy), "under")
        if cut is not None and cut.value(qx, qy) > xval + vscale:
            out.append(_tangent_row(t, "under", cut, i, j))
        cut = separate(ploc, (qx, qy), "over")
        if cut is not None and cut.value(qx, qy) < xval - vscale:
            out.append(_tangent_row(t, "over", cut, i, j))
    return out


# ---------------------------------------------------------------------------
# root analysis


def analyze_root(m, cfg=None):
    """Tighten the root relaxation and report both objective bounds.

    baseline_bound: LP bound after bound tightening with fresh product rows.
    tightened_bound: bound after ray-cut polytopes, propagation and tangent
    cut rounds, per the config toggles."""
    cfg = cfg or RunConfig()
    tol = cfg.tol
    counters = Counters()
    ext = build_extended(m)
    terms = collect_terms(ext)
    relax = build_relaxation(ext)
    cvec = _objective_vector(ext)

    def fail():
        return RootAnalysis(status="infeasible", baseline_bound=None,
                            tightened_bound=None, psi=0.0, term_reports=[],
                            diag_budget=None, counters=counters, relax=relax,
                            ext=ext, terms=terms)

    try:
        sol = relax.solve(cvec, sense="min", tol=tol)
    except InfeasibleRelaxation:
        return fail()
    counters.lp_solves += 1
    counters.lp_iterations += sol.iterations
    root_iters = sol.iterations

    try:
        filt, obbt_iters = run_obbt(relax, terms, m.int_vars, tol=tol)
    except InfeasibleRelaxation:
        return fail()
    counters.obbt_iterations = obbt_iters

    polytopes = {}
    budget = None
    build_projection = cfg.enable_projection and (cfg.enable_separation
                                                  or cfg.enable_propagation)
    if build_projection:
        budget = LpBudget(cfg.lp_budget_factor * (root_iters + obbt_iters))
        for term in terms:
            i, j = term.i, term.j
            if relax.col_ub[i] - relax.col_lb[i] <= 1e-12 or \
               relax.col_ub[j] - relax.col_lb[j] <= 1e-12:
                continue  # fixed variable; interval arithmetic is exact
            p = compute_projection(relax, term, terms, filt, tol=tol,
                                   budget=budget)
            polytopes[(i, j)] = p
        counters.diag_lps = budget.solves
        counters.diag_iterations = budget.used
        counters.projection_cuts = sum(len(p.cuts) for p in polytopes.values())

    _refresh_product_rows(relax, ext)
    try:
        sol = relax.solve(cvec, sense="min", tol=tol)
    except InfeasibleRelaxation:
        return fail()
    counters.lp_solves += 1
    counters.lp_iterations += sol.iterations
    baseline = sol.obj

    reports = []
    for term in terms:
        i, j = term.i, term.j
        p = polytopes.get((i, j))
        wi = relax.col_ub[i] - relax.col_lb[i]
        wj = relax.col_ub[j] - relax.col_lb[j]
        reports.append(TermReport(
            i=i, j=j, count=term.count,
            cuts=0 if p is None else len(p.cuts),
            box_area=wi * wj,
            poly_area=wi * wj if p is None else p.area(),
            forward=None if p is None else prop.forward_bounds(p)))
    psi = effectiveness(reports)

    if cfg.enable_propagation:
        dense, rhs = relax.dense_rows(relax.rows_by_tag(TAG_ORIGINAL))
        ok = _propagate(ext, terms, polytopes, dense, rhs,
                        relax.col_lb, relax.col_ub, tol)
        if not ok:
            return fail()
        _refresh_product_rows(relax, ext)

    tightened = baseline
    if cfg.enable_propagation or cfg.enable_separation:
        try:
            sol = relax.solve(cvec, sense="min", tol=tol)
        except InfeasibleRelaxation:
            return fail()
        counters.lp_solves += 1
        counters.lp_iterations += sol.iterations
        tightened = max(baseline, sol.obj)

    if cfg.enable_separation and polytopes:
        for _ in range(_SEP_ROUNDS_ROOT):
            new_rows = _separate_point(terms, polytopes, ext,
                                       relax.col_lb, relax.col_ub, sol.x, tol)
            if not new_rows:
                break
            relax.rows.extend(new_rows)
            counters.tangent_cuts += len(new_rows)
            try:
                sol = relax.solve(cvec, sense="min", tol=tol)
            except InfeasibleRelaxation:
                return fail()
            counters.lp_solves += 1
            counters.lp_iterations += sol.iterations
            tightened = max(tightened, sol.obj)

    return RootAnalysis(status="ok", baseline_bound=baseline,
                        tightened_bound=tightened, psi=psi,
                        term_reports=reports,
                        diag_budget=None if budget is None else budget.cap,
                        counters=counters, relax=relax, ext=ext, terms=terms,
                        polytopes=polytopes)


# ---------------------------------------------------------------------------
# branch and bound


@dataclass
class _Node:
    lb: np.ndarray
    ub: np.ndarray
    bound: float
    depth: int
    tangent_rows: list


def _instance_scale(m):
    parts = [1.0, float(np.max(np.abs(m.lb))), float(np.max(np.abs(m.ub)))]
    for con in m.cons:
        parts.append(abs(con.rhs))
    return max(parts)


def solve(m, cfg=None):
    """Globally minimize the instance by spatial branch and bound."""
    cfg = cfg or RunConfig()
    tol = cfg.tol
    t0 = time.monotonic()
    root = analyze_root(m, cfg)
    counters = root.counters
    if root.status == "infeasible":
        return SolveResult(status="infeasible", objective=None, bound=math.inf,
                           x=None, gap=None, counters=counters, root=root,
                           wall_time=_wall(cfg, t0))
    ext, terms, relax = root.ext, root.terms, root.relax
    polytopes = root.polytopes
    n = m.n
    cvec = _objective_vector(ext)
    scale = _instance_scale(m)
    feas_tol = tol.feas * scale

    base_rows = list(relax.rows_by_tag(TAG_ORIGINAL)) \
        + list(relax.rows_by_tag(TAG_TANGENT))
    dense_orig, rhs_orig = relax.dense_rows(relax.rows_by_tag(TAG_ORIGINAL))

    incumbent = None
    upper = math.inf

    def try_incumbent(xs):
        """Round integers, clip to the box, accept if feasible. Returns
        whether the point is feasible, improving or not."""
        nonlocal incumbent, upper
        x = np.array(xs[:n], dtype=float)
        for k in m.int_vars:
            x[k] = round(x[k])
        x = np.minimum(np.maximum(x, m.lb), m.ub)
        if m.max_violation(x) > feas_tol:
            return False
        val = m.objective(x)
        if val < upper - 1e-12 * (1.0 + abs(val)):
            upper = val
            incumbent = x.copy()
        return True

    def cutoff_rows():
        if upper == math.inf:
            return []
        coefs = {k: float(m.c[k]) for k in range(n) if m.c[k] != 0.0}
        return [Row(coefs, {}, float(upper), _TAG_CUTOFF)]

    def prune_level():
        return upper - tol.gap * max(1.0, abs(upper))

    root_node = _Node(lb=relax.col_lb.copy(), ub=relax.col_ub.copy(),
                      bound=root.tightened_bound, depth=0, tangent_rows=[])
    heap = []
    seq = 0
    heapq.heappush(heap, (root_node.bound, seq, root_node))
    seq += 1
    stack = []       # plunge stack, best child last
    plunge = 0
    status = "optimal"
    best_open = root.tightened_bound

    while True:
        if cfg.node_limit is not None and counters.nodes >= cfg.node_limit:
            status = "node_limit"
            break
        if cfg.time_limit is not None and time.monotonic() - t0 > cfg.time_limit:
            status = "time_limit"
            break
        if stack and plunge < _PLUNGE_DEPTH:
            node = stack.pop()
            plunge += 1
        else:
            for nd in stack:
                heapq.heappush(heap, (nd.bound, seq, nd))
                seq += 1
            stack = []
            plunge = 0
            if not heap:
                break
            _, _, node = heapq.heappop(heap)
        counters.nodes += 1
        if node.bound >= prune_level():
            continue
        children = _process_node(node, m, ext, terms, polytopes, base_rows,
                                 dense_orig, rhs_orig, cvec, cfg, tol,
                                 counters, try_incumbent, cutoff_rows,
                                 prune_level)
        if children:
            children.sort(key=lambda nd: -nd.bound)
            stack.extend(children)
        else:
            plunge = _PLUNGE_DEPTH  # dead end; next pick from the heap

    open_bounds = [nd.bound for _, _, nd in heap] + [nd.bound for nd in stack]
    if status in ("node_limit", "time_limit"):
        bound = min(open_bounds) if open_bounds else (
            upper if incumbent is not None else math.inf)
    else:
        bound = upper if incumbent is not None else math.inf
        status = "optimal" if incumbent is not None else "infeasible"
    gap = None
    if incumbent is not None and bound > -math.inf:
        gap = max(0.0, (upper - bound) / max(1.0, abs(upper)))
    return SolveResult(
        status=status,
        objective=None if incumbent is None else float(upper),
        bound=float(bound),
        x=None if incumbent is None else [float(v) for v in incumbent],
        gap=gap, counters=counters, root=root, wall_time=_wall(cfg, t0))


def _wall(cfg, t0):
    return time.monotonic() - t0 if cfg.emit_wall_time else None


def _process_node(node, m, ext, terms, polytopes, base_rows, dense_orig,
                  rhs_orig, cvec, cfg, tol, counters, try_incumbent,
                  cutoff_rows, prune_level):
    """Tighten, solve, separate and branch one node. Returns child nodes."""
    n = m.n
    lb, ub = node.lb, node.ub

    for k in m.int_vars:
        lb[k] = math.ceil(lb[k] - tol.integrality)
        ub[k] = math.floor(ub[k] + tol.integrality)
        if lb[k] > ub[k]:
            return []

    if cfg.enable_propagation:
        co = cutoff_rows()
        if co:
            dense_co, rhs_co = LinRelax(n, ext.slots, [], lb, ub).dense_rows(co)
            dense = np.vstack([dense_orig, dense_co])
            rhs = np.concatenate([rhs_orig, rhs_co])
        else:
            dense, rhs = dense_orig, rhs_orig
        if not _propagate(ext, terms, polytopes, dense, rhs, lb, ub, tol):
            return []
    else:
        for t in range(len(ext.slots)):
            zlo, zhi = _slot_interval(ext, t, lb, ub)
            lb[n + t] = zlo
            ub[n + t] = zhi

    # local product rows always come from the node box, cuts are extras
    local = LinRelax(n, ext.slots, list(base_rows), lb, ub)
    _refresh_product_rows(local, ext)
    local.rows = local.rows + node.tangent_rows + cutoff_rows()

    sol = _solve_local(local, cvec, tol, counters)
    if sol is None:
        return []
    if sol == "numerical":
        return _branch_fallback(node, ext)
    node.bound = max(node.bound, sol.obj)
    point_feasible = try_incumbent(sol.x)
    if not point_feasible and polytopes:
        _polish(terms, polytopes, ext, lb, ub, sol.x, try_incumbent)
    if node.bound >= prune_level():
        return []

    if cfg.enable_separation and polytopes:
        for _ in range(_SEP_ROUNDS_NODE):
            new_rows = _separate_point(terms, polytopes, ext, lb, ub, sol.x, tol)
            if not new_rows:
                break
            node.tangent_rows = node.tangent_rows + new_rows
            counters.tangent_cuts += len(new_rows)
            local.rows = local.rows + new_rows
            nxt = _solve_local(local, cvec, tol, counters)
            if nxt is None:
                return []
            if nxt == "numerical":
                break
            sol = nxt
            node.bound = max(node.bound, sol.obj)
            point_feasible = try_incumbent(sol.x)
            if not point_feasible and polytopes:
                _polish(terms, polytopes, ext, lb, ub, sol.x, try_incumbent)
            if node.bound >= prune_level():
                return []

    return _branch(node, m, ext, sol.x, tol, point_feasible)


def _solve_local(local, cvec, tol, counters):
    try:
        sol = local.solve(cvec, sense="min", tol=tol)
    except InfeasibleRelaxation:
        return None
    except NumericalFailure:
        return "numerical"  # keep the subtree; split it without a new bound
    counters.lp_solves += 1
    counters.lp_iterations += sol.iterations
    return sol


def _branch_fallback(node, ext):
    """No usable LP point: split the relatively widest variable that feeds a
    product, so the subtree stays sound."""
    lb, ub = node.lb, node.ub
    cols = sorted({k for pair in ext.slots for k in pair})
    best, bw = -1, 1e-12
    for k in cols:
        w = (ub[k] - lb[k]) / (1.0 + max(abs(lb[k]), abs(ub[k])))
        if w > bw:
            best, bw = k, w
    if best < 0:
        return []
    mid = 0.5 * (lb[best] + ub[best])
    left = _Node(lb.copy(), ub.copy(), node.bound, node.depth + 1,
                 node.tangent_rows)
    left.ub[best] = mid
    right = _Node(lb.copy(), ub.copy(), node.bound, node.depth + 1,
                  node.tangent_rows)
    right.lb[best] = mid
    return [left, right]


def _branch(node, m, ext, x, tol, point_feasible):
    n = m.n
    lb, ub = node.lb, node.ub

    frac_k, frac = -1, tol.integrality
    for k in m.int_vars:
        f = abs(x[k] - round(x[k]))
        if f > frac:
            frac_k, frac = k, f
    if frac_k >= 0:
        lo = math.floor(x[frac_k])
        left = _Node(lb.copy(), ub.copy(), node.bound, node.depth + 1,
                     node.tangent_rows)
        left.ub[frac_k] = lo
        right = _Node(lb.copy(), ub.copy(), node.bound, node.depth + 1,
                      node.tangent_rows)
        right.lb[frac_k] = lo + 1.0
        return [left, right]

    best_t, best_viol = -1, 0.0
    for t, (i, j) in enumerate(ext.slots):
        viol = abs(x[n + t] - x[i] * x[j])
        rel = 1.0 + abs(x[i] * x[j])
        if viol > best_viol * (1.0 + 1e-12) and viol > tol.feas * rel:
            best_t, best_viol = t, viol
    if best_t < 0 and not point_feasible:
        # products agree to LP tolerance yet the point narrowly misses
        # feasibility: keep splitting on the largest remaining mismatch
        for t, (i, j) in enumerate(ext.slots):
            viol = abs(x[n + t] - x[i] * x[j])
            if viol > best_viol * (1.0 + 1e-12) and viol > 1e-13:
                best_t, best_viol = t, viol
    if best_t < 0:
        return []  # node value is exact or the point is feasible

    i, j = ext.slots[best_t]
    if i == j:
        v = i
    else:
        si = min(x[i] - lb[i], ub[i] - x[i]) * (ub[j] - lb[j])
        sj = min(x[j] - lb[j], ub[j] - x[j]) * (ub[i] - lb[i])
        v = i if si >= sj else j
    w = ub[v] - lb[v]
    if w <= 1e-12 * (1.0 + abs(ub[v])):
        alt = j if v == i else i
        v = alt
        w = ub[v] - lb[v]
        if w <= 1e-12 * (1.0 + abs(ub[v])):
            return []  # box is a point; nothing left to split
    pt = min(max(x[v], lb[v] + 0.1 * w), ub[v] - 0.1 * w)
    left = _Node(lb.copy(), ub.copy(), node.bound, node.depth + 1,
                 node.tangent_rows)
    left.ub[v] = pt
    right = _Node(lb.copy(), ub.copy(), node.bound, node.depth + 1,
                  node.tangent_rows)
    right.lb[v] = pt
    return [left, right]
