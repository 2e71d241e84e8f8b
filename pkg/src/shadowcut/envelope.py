"""Tangent planes of the convex/concave envelope of x*y over a 2D polytope.

A supporting plane touches the lifted surface in one of three patterns:
three polygon vertices; one vertex plus one facet tangency; or tangencies on
two facets whose slopes share a sign. Enumerating all patterns whose contact
hull contains the query point, then keeping only planes that globally
under/over-estimate, yields the envelope value at the query. All tangency
conditions reduce to linear solves or one univariate quadratic.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

_GRACE = 1e-9    # hull-containment grace band
_VALID_TOL = 1e-7


@dataclass
class TangentCut:
    """Plane z = ax*x + ay*y - b supporting the envelope of x*y.

    kind "under": x*y >= plane on P (convex envelope side).
    kind "over":  x*y <= plane on P (concave envelope side).
    """

    kind: str
    ax: float
    ay: float
    b: float
    support: list

    def value(self, x, y):
        return self.ax * x + self.ay * y - self.b


def _poly_scale(p):
    li, ui, lj, uj = p.box
    mx = max(abs(li), abs(ui))
    my = max(abs(lj), abs(uj))
    return max((1.0 + mx) * (1.0 + my), 1.0)


def validate_plane(p, coeffs, kind, tol=_VALID_TOL):
    """Exact validity over the polygon: vertices plus per-facet quadratic minima."""
    ax, ay, b = coeffs
    s = 1.0 if kind == "under" else -1.0
    slack = tol * (_poly_scale(p) + abs(ax) + abs(ay) + abs(b))
    verts = p.vertices
    for x, y in verts:
        if s * (x * y - (ax * x + ay * y - b)) < -slack:
            return False
    k = len(verts)
    for a in range(k):
        x0, y0 = verts[a]
        x1, y1 = verts[(a + 1) % k]
        dx, dy = x1 - x0, y1 - y0
        qa = s * dx * dy
        if qa <= 0.0:
            continue  # concave or linear along the facet; endpoints suffice
        qb = s * (x0 * dy + y0 * dx - ax * dx - ay * dy)
        t = -qb / (2.0 * qa)
        if 0.0 < t < 1.0:
            x, y = x0 + t * dx, y0 + t * dy
            if s * (x * y - (ax * x + ay * y - b)) < -slack:
                return False
    return True


def _in_triangle(q, a, b, c, eps):
    d1 = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])
    d2 = (c[0] - b[0]) * (q[1] - b[1]) - (c[1] - b[1]) * (q[0] - b[0])
    d3 = (a[0] - c[0]) * (q[1] - c[1]) - (a[1] - c[1]) * (q[0] - c[0])
    neg = (d1 < -eps) or (d2 < -eps) or (d3 < -eps)
    pos = (d1 > eps) or (d2 > eps) or (d3 > eps)
    return not (neg and pos)


def _plane_through(rows, rhs):
    try:
        sol = np.linalg.solve(np.array(rows), np.array(rhs))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    return float(sol[0]), float(sol[1]), float(sol[2])


def candidates_case1(p, q):
    """Planes interpolating three lifted vertices whose triangle holds q."""
    out = []
    eps = _GRACE * _poly_scale(p)
    for a, b, c in itertools.combinations(p.vertices, 3):
        if not _in_triangle(q, a, b, c, eps):
            continue
        plane = _plane_through(
            [[a[0], a[1], -1.0], [b[0], b[1], -1.0], [c[0], c[1], -1.0]],
            [a[0] * a[1], b[0] * b[1], c[0] * c[1]])
        if plane is not None:
            out.append((plane, [a, b, c]))
    return out


def candidates_case2(p, q):
    """Lifted vertex plus a tangency on a non-axis-parallel facet line.

    The contact hull is the segment [v, t]; q inside it forces the tangency
    point onto the ray from v through q, so t comes from one ray-line
    intersection and the plane from one 3x3 solve (the double-root condition
    of the restricted quadratic holds by construction).
    """
    out = []
    scale = _poly_scale(p)
    eps = _GRACE * scale
    facets = [f for f in p.facets() if not f.axis_parallel]
    for v in p.vertices:
        dirx, diry = q[0] - v[0], q[1] - v[1]
        if math.hypot(dirx, diry) <= eps:
            continue
        for f in facets:
            denom = f.gx * dirx + f.gy * diry
            if abs(denom) <= 1e-14 * scale:
                continue
            s = (f.g0 - (f.gx * v[0] + f.gy * v[1])) / denom
            if s < 1.0 - _GRACE:
                continue  # q must lie between the vertex and the tangency
            tx, ty = v[0] + s * dirx, v[1] + s * diry
            ex, ey = f.p1[0] - f.p0[0], f.p1[1] - f.p0[1]
            seg2 = ex * ex + ey * ey
            if seg2 <= eps * eps:
                continue
            u = ((tx - f.p0[0]) * ex + (ty - f.p0[1]) * ey) / seg2
            if u < -_GRACE or u > 1.0 + _GRACE:
                continue
            plane = _plane_through(
                [[v[0], v[1], -1.0], [tx, ty, -1.0], [ex, ey, 0.0]],
                [v[0] * v[1], tx * ty, ex * ty + ey * tx])
            if plane is not None:
                out.append((plane, [v, (tx, ty)]))
    return out


def _quad_roots(c2, c1, c0):
    if abs(c2) <= 1e-14 * max(abs(c1), abs(c0), 1.0):
        if abs(c1) <= 1e-14 * max(abs(c0), 1.0):
            return []
        return [-c0 / c1]
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    # numerically stable pairing: w*w = c2*c0 + cancellation-free half
    w = -(c1 + math.copysign(sq, c1 if c1 != 0.0 else 1.0)) / 2.0
    if w == 0.0:
        return [0.0]
    return sorted({w / c2, c0 / w})


def _seg_param(pt, p0, p1):
    ex, ey = p1[0] - p0[0], p1[1] - p0[1]
    seg2 = ex * ex + ey * ey
    if seg2 <= 0.0:
        return None
    return ((pt[0] - p0[0]) * ex + (pt[1] - p0[1]) * ey) / seg2


def candidates_case3(p, q):
    """Planes tangent to x*y on two facet lines of equal slope sign.

    Writing the residual x*y - plane as (x - ay)(y - ax) - kappa, tangency to
    the line y = m*x + c means the shifted intercept obeys kappa =
    -(m*ay + c - ax)^2 / (4m). Equal kappa on both lines is one linear
    relation between (ax, ay) per sign branch; collinearity of the query with
    the two contact points then gives one quadratic. Everything stays closed
    form.
    """
    out = []
    scale = _poly_scale(p)
    facets = [f for f in p.facets() if not f.axis_parallel]
    for fa, fb in itertools.combinations(facets, 2):
        if abs(fa.gy) <= 1e-14 or abs(fb.gy) <= 1e-14:
            continue
        m1, c1 = -fa.gx / fa.gy, fa.g0 / fa.gy
        m2, c2 = -fb.gx / fb.gy, fb.g0 / fb.gy
        if m1 * m2 <= 0.0:
            continue
        r = math.sqrt(m2 / m1)
        for sigma in (1.0, -1.0):
            den = sigma * r - 1.0
            if abs(den) <= 1e-12:
                continue  # parallel lines on the +branch never meet
            # alpha = aA + aB*beta from the equal-kappa relation
            aB = (sigma * r * m1 - m2) / den
            aA = (sigma * r * c1 - c2) / den
            # shifted intercept on line 1: e1 = e1A + e1B*beta
            e1A, e1B = c1 - aA, m1 - aB
            # contact abscissas, affine in beta
            x1A, x1B = -e1A / (2.0 * m1), 1.0 - e1B / (2.0 * m1)
            y1A, y1B = m1 * x1A + c1, m1 * x1B
            x2A = -(sigma * r * e1A) / (2.0 * m2)
            x2B = 1.0 - (sigma * r * e1B) / (2.0 * m2)
            y2A, y2B = m2 * x2A + c2, m2 * x2B
            # cross(p2-p1, q-p1) = 0, quadratic in beta
            t1A, t1B = x2A - x1A, x2B - x1B
            t2A, t2B = q[1] - y1A, -y1B
            t3A, t3B = y2A - y1A, y2B - y1B
            t4A, t4B = q[0] - x1A, -x1B
            c0 = t1A * t2A - t3A * t4A
            c1q = t1A * t2B + t1B * t2A - (t3A * t4B + t3B * t4A)
            c2q = t1B * t2B - t3B * t4B
            for beta in _quad_roots(c2q, c1q, c0):
                if not math.isfinite(beta):
                    continue
                alpha = aA + aB * beta
                e1 = e1A + e1B * beta
                kappa = -(e1 * e1) / (4.0 * m1)
                gamma = alpha * beta - kappa
                p1 = (x1A + x1B * beta, y1A + y1B * beta)
                p2 = (x2A + x2B * beta, y2A + y2B * beta)
                u1 = _seg_param(p1, fa.p0, fa.p1)
                u2 = _seg_param(p2, fb.p0, fb.p1)
                if u1 is None or u2 is None:
                    continue
                if not (-_GRACE <= u1 <= 1.0 + _GRACE and -_GRACE <= u2 <= 1.0 + _GRACE):
                    continue
                sq = _seg_param(q, p1, p2)
                if sq is None or not (-_GRACE <= sq <= 1.0 + _GRACE):
                    continue
                # q must actually sit on the contact segment
                cross = (p2[0] - p1[0]) * (q[1] - p1[1]) - (p2[1] - p1[1]) * (q[0] - p1[0])
                if abs(cross) > 1e-6 * scale * scale:
                    continue
                out.append(((alpha, beta, gamma), [p1, p2]))
    return out


def separate(p, q, kind, tol=_VALID_TOL):
    """Best valid tangent plane at the query: smallest value for kind="under",
    largest for kind="over". None when no candidate survives validation."""
    if len(p.vertices) < 3:
        return None
    cands = candidates_case1(p, q) + candidates_case2(p, q) + candidates_case3(p, q)
    best = None
    best_val = None
    for coeffs, support in cands:
        if not validate_plane(p, coeffs, kind, tol=tol):
            continue
        val = coeffs[0] * q[0] + coeffs[1] * q[1] - coeffs[2]
        better = (best is None
                  or (kind == "under" and val < best_val - 1e-15)
                  or (kind == "over" and val > best_val + 1e-15))
        if better:
            best = (coeffs, support)
            best_val = val
    if best is None:
        return None
    (ax, ay, b), support = best
    return TangentCut(kind=kind, ax=ax, ay=ay, b=b, support=support)
