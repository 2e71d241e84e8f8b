"""Deterministic random generators shared by the unit and acceptance tests."""

import math
import random

from shadowcut.lp import LinRelax, Row, TAG_ORIGINAL
from shadowcut.model import BilinearTerm
from shadowcut.projection import Cut2D, build_polytope


def random_polytope(rng, max_cuts=4, min_area_frac=0.04):
    """Random Polytope2D: a desk-scale box plus a few halfplanes that keep an
    interior point, rejected until the region has real area."""
    while True:
        li = rng.uniform(-1.5, 0.5)
        ui = li + rng.uniform(0.4, 2.0)
        lj = rng.uniform(-1.5, 0.5)
        uj = lj + rng.uniform(0.4, 2.0)
        cx = li + rng.uniform(0.25, 0.75) * (ui - li)
        cy = lj + rng.uniform(0.25, 0.75) * (uj - lj)
        cuts = []
        for _ in range(rng.randrange(0, max_cuts + 1)):
            ang = rng.uniform(0.0, 2.0 * math.pi)
            gx, gy = math.cos(ang), math.sin(ang)
            margin = rng.uniform(0.1, 0.8) * max(ui - li, uj - lj)
            cuts.append(Cut2D(gx, gy, gx * cx + gy * cy + margin))
        p = build_polytope(0, 1, (li, ui, lj, uj), cuts, require_area=False)
        if p is not None and len(p.vertices) >= 3:
            if p.area() >= min_area_frac * (ui - li) * (uj - lj):
                return p


def interior_point(p, rng, depth_frac=1e-3):
    """A point of p with positive slack on every halfplane."""
    li, ui, lj, uj = p.box
    scale = max(ui - li, uj - lj)
    hps = p.halfplanes()
    while True:
        x = rng.uniform(li, ui)
        y = rng.uniform(lj, uj)
        if all(g0 - gx * x - gy * y >= depth_frac * scale for gx, gy, g0, _ in hps):
            return x, y


def random_feasible_relax(rng, nvars=None, nrows=None):
    """Random bounded LP over [0,1]^n, feasible by construction at x0."""
    n = nvars if nvars is not None else rng.randrange(2, 6)
    x0 = [rng.uniform(0.2, 0.8) for _ in range(n)]
    rows = []
    for _ in range(nrows if nrows is not None else rng.randrange(2, 6)):
        coefs = {k: rng.uniform(-1.0, 1.0) for k in range(n)}
        norm = math.sqrt(sum(v * v for v in coefs.values())) or 1.0
        coefs = {k: v / norm for k, v in coefs.items()}
        rhs = sum(coefs[k] * x0[k] for k in range(n)) + rng.uniform(0.05, 0.5)
        rows.append(Row(coefs, {}, rhs, TAG_ORIGINAL))
    return LinRelax(n, [], rows, [0.0] * n, [1.0] * n)


def pair_term(i=0, j=1):
    return BilinearTerm(i, j, 0, 1)


def hexagon(a):
    """Box [0,1]^2 cut by -x+y <= 1-a and x-y <= 1-a (volume 1 - a^2)."""
    cuts = [Cut2D(-1.0, 1.0, 1.0 - a), Cut2D(1.0, -1.0, 1.0 - a)]
    return build_polytope(0, 1, (0.0, 1.0, 0.0, 1.0), cuts)


def hexagon_shadow(a):
    """The matching exact-shadow quadrilateral (volume 1 - a)."""
    return [(0.0, 0.0), (1.0 - a / 2.0, a / 2.0), (1.0, 1.0),
            (a / 2.0, 1.0 - a / 2.0)]


def pentagon():
    """Unit box cut by x + y <= 3/2."""
    return build_polytope(0, 1, (0.0, 1.0, 0.0, 1.0), [Cut2D(1.0, 1.0, 1.5)])


def seeded(seed):
    return random.Random(seed)
