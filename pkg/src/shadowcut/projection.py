"""Per-term 2D projected polytopes via diagonal LPs and dual cut extraction.

For a product term (i, j), rays are shot from the post-OBBT box center toward
each box vertex inside the relaxation; the optimal dual multipliers of each
ray LP aggregate to a two-variable inequality that supports the exact shadow.
The box plus up to four such cuts is the working polytope P_ij.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import Tolerances
from .lp import InfeasibleRelaxation, NumericalFailure

_EPS = 1e-12


# ---------------------------------------------------------------------------
# polygon primitives


def clip_polygon(pts, gx, gy, g0):
    """Sutherland-Hodgman clip of a convex CCW polygon by gx*x + gy*y <= g0."""
    if not pts:
        return []
    out = []
    k = len(pts)
    vals = [gx * x + gy * y - g0 for x, y in pts]
    for a in range(k):
        b = (a + 1) % k
        va, vb = vals[a], vals[b]
        if va <= 0.0:
            out.append(pts[a])
        if (va < 0.0 < vb) or (vb < 0.0 < va):
            t = va / (va - vb)
            out.append((pts[a][0] + t * (pts[b][0] - pts[a][0]),
                        pts[a][1] + t * (pts[b][1] - pts[a][1])))
    return out


def polygon_area(pts):
    """Shoelace area of a CCW polygon (positive for CCW)."""
    k = len(pts)
    if k < 3:
        return 0.0
    s = 0.0
    for a in range(k):
        x0, y0 = pts[a]
        x1, y1 = pts[(a + 1) % k]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def dedupe_polygon(pts, scale):
    """Drop near-duplicate and collinear-interior vertices."""
    tol = 1e-9 * max(scale, 1e-30)
    out = []
    for p in pts:
        if not out or math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) > tol:
            out.append(p)
    if len(out) > 1 and math.hypot(out[0][0] - out[-1][0], out[0][1] - out[-1][1]) <= tol:
        out.pop()
    if len(out) < 3:
        return out
    kept = []
    k = len(out)
    for a in range(k):
        p0 = out[(a - 1) % k]
        p1 = out[a]
        p2 = out[(a + 1) % k]
        cross = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])
        if abs(cross) > tol * max(scale, 1e-30):
            kept.append(p1)
    return kept if len(kept) >= 3 else out


# ---------------------------------------------------------------------------
# polytope


@dataclass
class Cut2D:
    """Normalized two-variable inequality gx*x_i + gy*x_j <= g0."""

    gx: float
    gy: float
    g0: float
    vertex: tuple | None = None   # box vertex the generating ray aimed at
    support: tuple | None = None  # diag-LP primal point, where the cut is tight

    def value(self, x, y):
        return self.gx * x + self.gy * y - self.g0


@dataclass
class Facet:
    gx: float
    gy: float
    g0: float
    p0: tuple
    p1: tuple
    axis_parallel: bool


@dataclass
class Polytope2D:
    """Box plus at most four general cuts for one product term; <= 8 facets."""

    i: int
    j: int
    box: tuple                 # (li, ui, lj, uj)
    cuts: list
    vertices: list             # CCW, one facet per consecutive pair

    @property
    def scale(self):
        li, ui, lj, uj = self.box
        return max(abs(li), abs(ui), abs(lj), abs(uj), ui - li, uj - lj, 1.0)

    def halfplanes(self):
        li, ui, lj, uj = self.box
        hs = [(-1.0, 0.0, -li, True), (1.0, 0.0, ui, True),
              (0.0, -1.0, -lj, True), (0.0, 1.0, uj, True)]
        for c in self.cuts:
            hs.append((c.gx, c.gy, c.g0, False))
        return hs

    def contains(self, x, y, tol=1e-9):
        s = tol * self.scale
        return all(gx * x + gy * y <= g0 + s for gx, gy, g0, _ in self.halfplanes())

    def facets(self):
        """Assign each polygon edge to the halfplane that generated it."""
        out = []
        hs = self.halfplanes()
        k = len(self.vertices)
        s = self.scale
        for a in range(k):
            p0 = self.vertices[a]
            p1 = self.vertices[(a + 1) % k]
            best = None
            best_res = None
            for gx, gy, g0, axis in hs:
                res = max(abs(gx * p0[0] + gy * p0[1] - g0),
                          abs(gx * p1[0] + gy * p1[1] - g0))
                if best_res is None or res < best_res:
                    best_res = res
                    best = (gx, gy, g0, axis)
            gx, gy, g0, axis = best
            out.append(Facet(gx, gy, g0, p0, p1, axis))
        return out

    def area(self):
        return polygon_area(self.vertices)

    def restrict(self, li, ui, lj, uj):
        """Intersect with a sub-box; None when empty. Center containment is
        a root-construction property and is not asserted here."""
        nli, nui = max(li, self.box[0]), min(ui, self.box[1])
        nlj, nuj = max(lj, self.box[2]), min(uj, self.box[3])
        if nli > nui + _EPS or nlj > nuj + _EPS:
            return None
        return build_polytope(self.i, self.j, (nli, nui, nlj, nuj), self.cuts,
                              require_area=False)


def build_polytope(i, j, box, cuts, require_area=True):
    li, ui, lj, uj = box
    pts = [(li, lj), (ui, lj), (ui, uj), (li, uj)]
    for c in cuts:
        pts = clip_polygon(pts, c.gx, c.gy, c.g0)
        if not pts:
            return None
    scale = max(abs(li), abs(ui), abs(lj), abs(uj), ui - li, uj - lj, 1.0)
    pts = dedupe_polygon(pts, scale)
    if len(pts) < 3:
        if require_area:
            return None
        if len(pts) < 1:
            return None
    return Polytope2D(i=i, j=j, box=box, cuts=list(cuts), vertices=pts)


# ---------------------------------------------------------------------------
# diagonal LPs


@dataclass
class DiagLpSpec:
    """Ray LP: maximize sign*(x_i) over the relaxation cut to the ray line
    through the box center C and the box vertex v."""

    i: int
    j: int
    slot: int
    center: tuple
    vertex: tuple
    sign: float
    eq_coefs: dict
    eq_rhs: float


def diag_lp_spec(relax, term, vertex):
    i, j = term.i, term.j
    ci = 0.5 * (relax.col_lb[i] + relax.col_ub[i])
    cj = 0.5 * (relax.col_lb[j] + relax.col_ub[j])
    vi, vj = vertex
    di, dj = vi - ci, vj - cj
    # ray line: (x_j - cj)*di = (x_i - ci)*dj  <=>  -dj*x_i + di*x_j = di*cj - dj*ci
    return DiagLpSpec(
        i=i, j=j, slot=term.slot, center=(ci, cj), vertex=(vi, vj),
        sign=1.0 if di > 0 else -1.0,
        eq_coefs={i: -dj, j: di}, eq_rhs=di * cj - dj * ci)


def solve_diag_lp(relax, spec, tol=None):
    return relax.solve({spec.i: spec.sign}, sense="max",
                       extra_equality=(spec.eq_coefs, spec.eq_rhs), tol=tol)


def extract_cut(relax, spec, sol, tol=None):
    """Aggregate the diag-LP duals into a two-variable cut.

    cut vector = objective - mu * (equality row); valid right-hand side is
    lam.d - nu_lb.l + nu_ub.u over the relaxation rows and bounds. Returns
    None when the cut is axis-parallel within tolerance, not tight at the
    LP point, or separates nothing.
    """
    tol = tol or Tolerances()
    i, j = spec.i, spec.j
    mu = sol.mu or 0.0
    gx = spec.sign - mu * spec.eq_coefs[i]
    gy = -mu * spec.eq_coefs[j]
    d = np.array([r.rhs for r in relax.rows])
    g0 = float(sol.lam @ d) - float(sol.nu_lb @ relax.col_lb) + float(sol.nu_ub @ relax.col_ub)
    if not (math.isfinite(gx) and math.isfinite(gy) and math.isfinite(g0)):
        return None

    wi = relax.col_ub[i] - relax.col_lb[i]
    wj = relax.col_ub[j] - relax.col_lb[j]
    span_i, span_j = abs(gx) * wi, abs(gy) * wj
    if min(span_i, span_j) <= tol.axis_parallel * max(span_i, span_j, _EPS):
        return None

    norm = max(abs(gx), abs(gy))
    gx, gy, g0 = gx / norm, gy / norm, g0 / norm
    xi, xj = float(sol.x[i]), float(sol.x[j])
    scale = 1.0 + abs(g0) + abs(gx * xi) + abs(gy * xj)
    if abs(gx * xi + gy * xj - g0) > tol.feas * scale:
        return None  # dual aggregation is not tight at the LP point; degrade
    vi, vj = spec.vertex
    if gx * vi + gy * vj <= g0 + 1e-9 * scale:
        return None  # separates nothing
    ci, cj = spec.center
    if gx * ci + gy * cj > g0 + tol.feas * scale:
        return None  # would exclude the box center; numerically unsound
    return Cut2D(gx=gx, gy=gy, g0=g0, vertex=(vi, vj), support=(xi, xj))


class LpBudget:
    """Simplex-iteration allowance shared by all diagonal LPs."""

    def __init__(self, cap=None):
        self.cap = cap
        self.used = 0
        self.solves = 0

    def exhausted(self):
        return self.cap is not None and self.used >= self.cap

    def add(self, iters):
        self.used += iters
        self.solves += 1


def compute_projection(relax, term, terms, filt, tol=None, budget=None):
    """Box plus extracted ray cuts for one term. Requires a nondegenerate box.

    Filter entries suppress rays whose target vertex was already witnessed
    feasible; every ray LP solution feeds the filter for all terms.
    """
    tol = tol or Tolerances()
    i, j = term.i, term.j
    li, ui = relax.col_lb[i], relax.col_ub[i]
    lj, uj = relax.col_lb[j], relax.col_ub[j]
    if ui - li <= _EPS or uj - lj <= _EPS:
        raise ValueError("degenerate box; projection undefined for fixed variables")
    cuts = []
    for vertex in ((li, lj), (li, uj), (ui, lj), (ui, uj)):
        if filt is not None and filt.contains(i, j, vertex[0], vertex[1]):
            continue
        if budget is not None and budget.exhausted():
            break
        spec = diag_lp_spec(relax, term, vertex)
        try:
            sol = solve_diag_lp(relax, spec, tol=tol)
        except InfeasibleRelaxation:
            continue  # ray misses the shadow; no cut from this vertex
        except NumericalFailure:
            continue  # degrade to fewer cuts, never to invalidity
        if budget is not None:
            budget.add(sol.iterations)
        if filt is not None:
            filt.update(terms, sol.x, relax.col_lb, relax.col_ub)
        snap_i = tol.feas * (1.0 + abs(vertex[0]))
        snap_j = tol.feas * (1.0 + abs(vertex[1]))
        if abs(sol.x[i] - vertex[0]) <= snap_i or abs(sol.x[j] - vertex[1]) <= snap_j:
            continue  # ray reached the vertex; vertex is in the shadow
        cut = extract_cut(relax, spec, sol, tol=tol)
        if cut is not None:
            cuts.append(cut)
    p = build_polytope(i, j, (li, ui, lj, uj), cuts)
    if p is None:
        # cannot happen with center-sound cuts; degrade to the plain box
        p = build_polytope(i, j, (li, ui, lj, uj), [])
    return p


# ---------------------------------------------------------------------------
# exact shadow oracle (test-side reference; not used in production paths)


def exact_projection_oracle(relax, i, j, angles=720, tol=None):
    """Outer-approximate the exact shadow by support-function sampling.

    Solves one support LP per direction on a fine uniform angle grid and
    intersects the supporting halfplanes. Consecutive LPs reuse the previous
    basis (objective-only changes keep it primal feasible).
    """
    from .lp import SimplexEngine

    tol = tol or Tolerances()
    A, d = relax.dense_rows()
    engine = SimplexEngine(A, d, relax.col_lb, relax.col_ub, tol=tol)
    li, ui = relax.col_lb[i], relax.col_ub[i]
    lj, uj = relax.col_lb[j], relax.col_ub[j]
    pts = [(li, lj), (ui, lj), (ui, uj), (li, uj)]
    c = np.zeros(relax.ncols)
    for k in range(angles):
        th = 2.0 * math.pi * k / angles
        cx, cy = math.cos(th), math.sin(th)
        c[:] = 0.0
        c[i], c[j] = cx, cy
        sol = engine.solve(c, sense="max", warm=k > 0)
        pts = clip_polygon(pts, cx, cy, sol.obj)
        if not pts:
            return None
    scale = max(abs(li), abs(ui), abs(lj), abs(uj), ui - li, uj - lj, 1.0)
    pts = dedupe_polygon(pts, scale)
    cuts = []
    k = len(pts)
    for a in range(k):
        p0, p1 = pts[a], pts[(a + 1) % k]
        dx, dy = p1[0] - p0[0], p1[1] - p0[1]
        gx, gy = dy, -dx
        norm = max(abs(gx), abs(gy))
        if norm <= _EPS:
            continue
        gx, gy = gx / norm, gy / norm
        g0 = gx * p0[0] + gy * p0[1]
        if abs(gx) > 1e-9 and abs(gy) > 1e-9:
            cuts.append(Cut2D(gx=gx, gy=gy, g0=g0))
    return Polytope2D(i=i, j=j, box=(li, ui, lj, uj), cuts=cuts, vertices=pts)


def volume2d(p):
    """Area of a Polytope2D or a raw CCW vertex list."""
    pts = p.vertices if hasattr(p, "vertices") else p
    return abs(polygon_area(pts))


def volume_quotient(exact, relaxed):
    """vol(exact shadow) / vol(working polytope), clamped into (0, 1]."""
    vr = volume2d(relaxed)
    if vr <= 0.0:
        raise ValueError("relaxed polytope has no area")
    return min(1.0, volume2d(exact) / vr)
