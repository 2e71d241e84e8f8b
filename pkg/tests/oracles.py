"""Independent reference implementations used only by the tests.

Everything in this file is computed from first principles with numpy and
scipy so that the package has something genuinely external to agree with.
Nothing here calls into the package's geometry or simplex code; package
objects only ever enter as plain data (vertex lists, dense row matrices,
instance dictionaries).
"""

import itertools
import math
import warnings

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull


# ---------------------------------------------------------------------------
# linear programming cross-check


def scipy_lp(relax, objective, sense="min", extra_equality=None):
    """Solve the same LP a LinRelax.solve call sees, with scipy's HiGHS.

    objective is a dense vector over all columns. Returns (status, value, x)
    where status is one of "optimal", "infeasible", "unbounded".
    """
    A, d = relax.dense_rows()
    c = np.asarray(objective, dtype=float)
    if sense == "max":
        c = -c
    a_eq = b_eq = None
    if extra_equality is not None:
        coefs, rhs = extra_equality
        row = np.zeros(relax.ncols)
        for col, coef in coefs.items():
            row[col] = coef
        a_eq, b_eq = row.reshape(1, -1), [rhs]
    res = linprog(c, A_ub=A if len(A) else None, b_ub=d if len(d) else None,
                  A_eq=a_eq, b_eq=b_eq,
                  bounds=list(zip(relax.col_lb, relax.col_ub)),
                  method="highs")
    if res.status == 2:
        return "infeasible", None, None
    if res.status == 3:
        return "unbounded", None, None
    assert res.status == 0, res.message
    val = -res.fun if sense == "max" else res.fun
    return "optimal", val, res.x


# ---------------------------------------------------------------------------
# polygon brute force


def halfplane_vertices(halfplanes, tol=1e-9):
    """All vertices of the region {gx*x + gy*y <= g0}, by pairwise intersection.

    Brute force: intersect every pair of boundary lines and keep the points
    satisfying every halfplane. Returns them in counterclockwise hull order.
    """
    pts = []
    scale = max(1.0, max(abs(g0) for _, _, g0 in halfplanes))
    for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(halfplanes, 2):
        det = a1 * b2 - a2 * b1
        if abs(det) <= 1e-14 * max(1.0, abs(a1) + abs(b1)) * max(1.0, abs(a2) + abs(b2)):
            continue
        x = (c1 * b2 - c2 * b1) / det
        y = (a1 * c2 - a2 * c1) / det
        if all(gx * x + gy * y <= g0 + tol * scale for gx, gy, g0 in halfplanes):
            pts.append((x, y))
    if len(pts) < 3:
        return pts
    arr = np.array(sorted(set(pts)))
    try:
        hull = ConvexHull(arr, qhull_options="QJ")
    except Exception:
        return [tuple(p) for p in arr]
    return [tuple(arr[k]) for k in hull.vertices]


def polygon_area_shoelace(pts):
    s = 0.0
    for k in range(len(pts)):
        x0, y0 = pts[k]
        x1, y1 = pts[(k + 1) % len(pts)]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def same_vertex_set(a, b, tol):
    """Do two polygons have the same vertices up to tol (any order)?"""
    if len(a) != len(b):
        return False
    used = [False] * len(b)
    for p in a:
        hit = False
        for k, q in enumerate(b):
            if not used[k] and abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol:
                used[k] = hit = True
                break
        if not hit:
            return False
    return True


# ---------------------------------------------------------------------------
# dense grids over a 2D polytope


def polytope_mask(p, k):
    """Meshgrid over the box of Polytope2D-like p plus a membership mask."""
    li, ui, lj, uj = p.box
    xs = np.linspace(li, ui, k)
    ys = np.linspace(lj, uj, k)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    scale = max(1.0, abs(li), abs(ui), abs(lj), abs(uj))
    mask = np.ones(X.shape, dtype=bool)
    for gx, gy, g0, _ in p.halfplanes():
        norm = max(1.0, abs(gx), abs(gy), abs(g0))
        mask &= gx * X + gy * Y <= g0 + 1e-9 * norm * scale
    return X, Y, mask


def grid_product_range(p, k=1000):
    """(min, max, npoints) of x*y over the grid points inside p."""
    X, Y, mask = polytope_mask(p, k)
    if not mask.any():
        return None, None, 0
    Z = (X * Y)[mask]
    return float(Z.min()), float(Z.max()), int(Z.size)


def grid_levelset_bbox(p, zlo, zhi, k=1000):
    """Bounding box of grid points of p whose product lies in [zlo, zhi]."""
    X, Y, mask = polytope_mask(p, k)
    Z = X * Y
    band = mask & (Z >= zlo) & (Z <= zhi)
    if not band.any():
        return None
    xs, ys = X[band], Y[band]
    return float(xs.min()), float(xs.max()), float(ys.min()), float(ys.max())


def sample_in_polytope_np(p, rng, count):
    """Vectorized rejection sampling; rng is a numpy Generator."""
    li, ui, lj, uj = p.box
    xs = rng.uniform(li, ui, size=count * 8)
    ys = rng.uniform(lj, uj, size=count * 8)
    scale = max(1.0, abs(li), abs(ui), abs(lj), abs(uj))
    keep = np.ones(xs.shape, dtype=bool)
    for gx, gy, g0, _ in p.halfplanes():
        keep &= gx * xs + gy * ys <= g0 + 1e-12 * scale
    return np.stack([xs[keep][:count], ys[keep][:count]], axis=1)


def sample_in_polytope(p, rng, count):
    """Rejection-sample uniform points of p (list of (x, y))."""
    li, ui, lj, uj = p.box
    hps = p.halfplanes()
    scale = max(1.0, abs(li), abs(ui), abs(lj), abs(uj))
    out = []
    for _ in range(count * 40):
        if len(out) >= count:
            break
        x = rng.uniform(li, ui)
        y = rng.uniform(lj, uj)
        if all(gx * x + gy * y <= g0 + 1e-12 * scale for gx, gy, g0, _ in hps):
            out.append((x, y))
    return out


# ---------------------------------------------------------------------------
# bilinear envelope oracle


def boundary_points(p, per_edge=400):
    """Dense point cloud on the boundary of polygon p (vertices included)."""
    verts = p.vertices
    pts = []
    m = len(verts)
    for k in range(m):
        x0, y0 = verts[k]
        x1, y1 = verts[(k + 1) % m]
        for t in np.linspace(0.0, 1.0, per_edge, endpoint=False):
            pts.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    return np.array(pts)


def envelope_value(p, q, kind, per_edge=400):
    """Envelope of x*y over p evaluated at q, via the lifted boundary cloud.

    The convex envelope at q is the least value of sum(lam * x*y) over convex
    combinations of boundary points hitting q; the concave envelope is the
    greatest. Interior points never support either hull because the bilinear
    surface is a saddle, so the boundary cloud suffices and the chord error
    is O(spacing^2).
    """
    cloud = boundary_points(p, per_edge)
    z = cloud[:, 0] * cloud[:, 1]
    c = z if kind == "under" else -z
    a_eq = np.vstack([cloud[:, 0], cloud[:, 1], np.ones(len(cloud))])
    b_eq = [q[0], q[1], 1.0]
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        return None
    return res.fun if kind == "under" else -res.fun


# ---------------------------------------------------------------------------
# global minimization oracle for whole instances


def _instance_arrays(doc):
    n = doc["n"]
    c = np.asarray(doc["c"], dtype=float)
    lb = np.asarray(doc["lb"], dtype=float)
    ub = np.asarray(doc["ub"], dtype=float)
    cons = []
    for con in doc["cons"]:
        Q = np.zeros((n, n))
        for i, j, v in con["Q"]:
            Q[i, j] += v / 2.0
            Q[j, i] += v / 2.0
        q = np.asarray(con["q"], dtype=float)
        cons.append((Q, q, float(con["b"]), con["sense"]))
    return n, c, lb, ub, cons


def _violation(x, cons):
    worst = 0.0
    for Q, q, b, sense in cons:
        val = x @ Q @ x + q @ x - b
        worst = max(worst, abs(val) if sense == "eq" else val)
    return worst


def global_minimum(doc, seed=0, starts=48, feas_tol=1e-6):
    """Best provably-feasible objective found by dense grid + SLSQP multistart.

    Independent of the package solver: raw numpy evaluation on a coarse grid
    ranks starting points by penalized objective, then scipy SLSQP polishes
    each with the true constraints. Returns (value, x) or (None, None).
    """
    n, c, lb, ub, cons = _instance_arrays(doc)
    per_dim = {1: 4001, 2: 121, 3: 41, 4: 23}[n]
    axes = [np.linspace(lb[k], ub[k], per_dim) for k in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    obj = pts @ c
    pen = np.zeros(len(pts))
    for Q, q, b, sense in cons:
        val = np.einsum("ki,ij,kj->k", pts, Q, pts) + pts @ q - b
        pen += np.maximum(np.abs(val) if sense == "eq" else val, 0.0)
    scale = max(1.0, np.abs(obj).max())
    merit = obj + 1e3 * scale * pen
    order = np.argsort(merit)
    rng = np.random.default_rng(seed)
    cands = [pts[k] for k in order[:starts]]
    cands += [rng.uniform(lb, ub) for _ in range(starts // 2)]

    scipy_cons = []
    for Q, q, b, sense in cons:
        def fun(x, Q=Q, q=q, b=b):
            return b - (x @ Q @ x + q @ x)
        def jac(x, Q=Q, q=q):
            return -(2.0 * Q @ x + q)
        scipy_cons.append({"type": "eq" if sense == "eq" else "ineq",
                           "fun": fun, "jac": jac})
    best_val, best_x = None, None
    for x0 in cands:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(lambda x: c @ x, x0, jac=lambda x: c,
                           method="SLSQP", bounds=list(zip(lb, ub)),
                           constraints=scipy_cons,
                           options={"maxiter": 200, "ftol": 1e-12})
        x = np.clip(res.x, lb, ub)
        if _violation(x, cons) <= feas_tol and math.isfinite(c @ x):
            v = float(c @ x)
            if best_val is None or v < best_val:
                best_val, best_x = v, x.copy()
    return best_val, best_x
