"""Best-possible bound propagation through a product term over its 2D polytope.

Forward: the range of x*y over a convex polygon is attained on the boundary
(the only interior stationary point of x*y is a saddle), so vertices plus one
critical point per facet give the exact min and max.

Reverse: facet inequalities tighten the coordinate box by interval reasoning,
and a known range for the product z = x*y cuts the polygon down to the region
between two level curves; coordinate extrema of that region sit at polygon
vertices inside the band or at facet / level-curve crossings.
"""

import math

_GRACE = 1e-9


def _edges(vertices):
    k = len(vertices)
    if k < 2:
        return
    if k == 2:
        yield vertices[0], vertices[1]
        return
    for a in range(k):
        yield vertices[a], vertices[(a + 1) % k]


def forward_candidates(p):
    """Vertices plus interior critical points of x*y along each facet."""
    pts = list(p.vertices)
    for (x0, y0), (x1, y1) in _edges(p.vertices):
        dx, dy = x1 - x0, y1 - y0
        den = 2.0 * dx * dy
        if den == 0.0:
            continue
        t = -(x0 * dy + y0 * dx) / den
        if 0.0 < t < 1.0:
            pts.append((x0 + t * dx, y0 + t * dy))
    return pts


def forward_bounds(p):
    """Exact (min, max) of x*y over the polygon."""
    vals = [x * y for x, y in forward_candidates(p)]
    return min(vals), max(vals)


def facet_propagate(p, box=None, max_passes=5, min_improve=1e-6):
    """Interval propagation of the polygon's halfplanes against a coordinate
    box. Returns the tightened (li, ui, lj, uj), or None when some halfplane
    proves the box empty. Fixed point is declared after max_passes or when no
    bound moves by more than min_improve * scale."""
    li, ui, lj, uj = box if box is not None else p.box
    hs = p.halfplanes()
    scale = p.scale
    step = min_improve * scale
    feas = 1e-9 * scale
    for _ in range(max_passes):
        moved = False
        for gx, gy, g0, _axis in hs:
            # bound on x from gx*x <= g0 - min(gy*y)
            if gx != 0.0:
                rest = g0 - (gy * lj if gy > 0.0 else gy * uj)
                if gx > 0.0:
                    cand = rest / gx
                    if cand < ui - step:
                        ui, moved = cand, True
                else:
                    cand = rest / gx
                    if cand > li + step:
                        li, moved = cand, True
            if gy != 0.0:
                rest = g0 - (gx * li if gx > 0.0 else gx * ui)
                if gy > 0.0:
                    cand = rest / gy
                    if cand < uj - step:
                        uj, moved = cand, True
                else:
                    cand = rest / gy
                    if cand > lj + step:
                        lj, moved = cand, True
            if li > ui + feas or lj > uj + feas:
                return None
        if not moved:
            break
    return min(li, ui), max(li, ui), min(lj, uj), max(lj, uj)


def _edge_level_hits(x0, y0, x1, y1, z, scale):
    """Parameters t in [0,1] where x*y = z along the segment."""
    dx, dy = x1 - x0, y1 - y0
    a = dx * dy
    b = x0 * dy + y0 * dx
    c = x0 * y0 - z
    out = []
    if abs(a) <= 1e-14 * scale * scale:
        if abs(b) > 1e-14 * scale * scale:
            out.append(-c / b)
    else:
        disc = b * b - 4.0 * a * c
        if disc >= 0.0:
            sq = math.sqrt(disc)
            w = -(b + math.copysign(sq, b if b != 0.0 else 1.0)) / 2.0
            if w == 0.0:
                out.append(0.0)
            else:
                out.extend((w / a, c / w))
    return [t for t in out if -_GRACE <= t <= 1.0 + _GRACE]


def levelset_candidates(p, zlo, zhi):
    """Boundary points of the polygon cut to the band zlo <= x*y <= zhi:
    vertices with product inside the band plus facet crossings of either
    level curve. Infinite band ends are simply inactive."""
    scale = p.scale
    s = _GRACE * scale * scale
    pts = []
    for x, y in p.vertices:
        v = x * y
        if (zlo == -math.inf or v >= zlo - s) and (zhi == math.inf or v <= zhi + s):
            pts.append((x, y))
    for (x0, y0), (x1, y1) in _edges(p.vertices):
        for z in (zlo, zhi):
            if not math.isfinite(z):
                continue
            for t in _edge_level_hits(x0, y0, x1, y1, z, scale):
                pts.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    return pts


def levelset_bounds(p, zlo, zhi):
    """Tightest coordinate box consistent with membership in the polygon and
    zlo <= x*y <= zhi. None means the band misses the polygon entirely."""
    pts = levelset_candidates(p, zlo, zhi)
    if not pts:
        return None
    li = max(min(x for x, _ in pts), p.box[0])
    ui = min(max(x for x, _ in pts), p.box[1])
    lj = max(min(y for _, y in pts), p.box[2])
    uj = min(max(y for _, y in pts), p.box[3])
    return li, ui, lj, uj
