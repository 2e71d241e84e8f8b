"""Deterministic benchmark instance generators.

Three families, all emitted as plain instance documents:

- pointpack: spread k points in a rectangle to maximize the smallest pairwise
  squared distance. Dense in squares and cross products, with ordering rows
  that break symmetry.
- ordering: two variables forced into an implied order through shared slack,
  a diagonal cap row, and a product objective; the implied order is invisible
  to interval reasoning, which is exactly what shadow polytopes recover.
- random: boxed instances with mixed product rows, feasible by construction
  at a sampled interior point.

Every generator draws from random.Random(seed) only, so a (family, count,
seed) triple reproduces byte-identical documents.
"""

import random


def toy_instance():
    """Worked example: maximize x*y inside the unit box under x + y <= 3/2,
    written as minimization of an epigraph variable."""
    return {
        "n": 3,
        "c": [0.0, 0.0, -1.0],
        "lb": [0.0, 0.0, 0.0],
        "ub": [1.0, 1.0, 1.0],
        "int": [],
        "cons": [
            {"Q": [[0, 1, -1.0]], "q": [0.0, 0.0, 1.0], "b": 0.0, "sense": "le"},
            {"Q": [], "q": [1.0, 1.0, 0.0], "b": 1.5, "sense": "le"},
        ],
    }


def pointpack_instance(rng, k=None):
    """k points in a w-by-h rectangle; maximize the least squared distance."""
    k = k if k is not None else rng.choice([2, 3])
    w = round(rng.uniform(0.8, 1.2), 3)
    h = round(rng.uniform(0.8, 1.2), 3)
    n = 2 * k + 1
    d = 2 * k  # index of the distance variable
    lb = [0.0] * (2 * k) + [0.0]
    ub = [w] * k + [h] * k + [round(w * w + h * h, 6)]
    c = [0.0] * (2 * k) + [-1.0]
    cons = []
    for a in range(k):
        for b in range(a + 1, k):
            xa, xb = a, b
            ya, yb = k + a, k + b
            quads = [[xa, xa, -1.0], [xb, xb, -1.0], [xa, xb, 2.0],
                     [ya, ya, -1.0], [yb, yb, -1.0], [ya, yb, 2.0]]
            q = [0.0] * n
            q[d] = 1.0
            cons.append({"Q": quads, "q": q, "b": 0.0, "sense": "le"})
    for a in range(k - 1):
        q = [0.0] * n
        q[a] = 1.0
        q[a + 1] = -1.0
        cons.append({"Q": [], "q": q, "b": 0.0, "sense": "le"})
    return {"n": n, "c": c, "lb": lb, "ub": ub, "int": [], "cons": cons}


def ordering_instance(rng):
    """Product objective over two variables whose order is implied by shared
    slack rows, plus a diagonal cap that moves the optimum off the corner."""
    pads = rng.choice([1, 2])
    s = round(rng.uniform(0.7, 1.3), 3)
    r = round(min(s * rng.uniform(0.9, 1.5), 1.9 * s, 2.0), 3)
    n = pads + 3  # pads, xa, xb, t
    ia, ib, it = pads, pads + 1, pads + 2
    lb = [0.0] * pads + [0.0, 0.0, -1.0]
    ub = [s] * pads + [1.0, 1.0, 0.0]
    c = [0.0] * (n - 1) + [1.0]
    pad_row = [1.0] * pads
    row_a = pad_row + [1.0, 0.0, 0.0]
    row_b = pad_row + [0.0, 1.0, 0.0]
    cap = [0.0] * pads + [1.0, 1.0, 0.0]
    epi_q = [0.0] * (n - 1) + [-1.0]
    cons = [
        {"Q": [], "q": row_a, "b": s, "sense": "le"},
        {"Q": [], "q": row_b, "b": s, "sense": "eq"},
        {"Q": [], "q": cap, "b": r, "sense": "le"},
        {"Q": [[ia, ib, -1.0]], "q": epi_q, "b": 0.0, "sense": "le"},
    ]
    return {"n": n, "c": c, "lb": lb, "ub": ub, "int": [], "cons": cons}


def random_instance(rng, n=None, integers=False):
    """Boxed instance with product rows, feasible at a sampled inner point."""
    n = n if n is not None else rng.choice([3, 4, 5])
    lb = [round(rng.uniform(-2.0, 0.5), 2) for _ in range(n)]
    ub = [round(v + rng.uniform(0.5, 2.5), 2) for v in lb]
    int_vars = []
    if integers:
        k = rng.randrange(n)
        lb[k] = float(round(lb[k]))
        ub[k] = float(max(round(ub[k]), lb[k] + 1))
        int_vars = [k]
    c = [round(rng.uniform(-1.0, 1.0), 2) for _ in range(n)]
    inner = [rng.uniform(l, u) for l, u in zip(lb, ub)]
    cons = []
    for _ in range(rng.randint(1, 3)):
        pairs = []
        seen = set()
        for _ in range(rng.randint(1, 3)):
            i = rng.randrange(n)
            j = rng.randrange(n)
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                continue
            seen.add((i, j))
            pairs.append([i, j, round(rng.uniform(-1.0, 1.0), 2)])
        q = [round(rng.uniform(-1.0, 1.0), 2) for _ in range(n)]
        val = sum(v * inner[i] * inner[j] for i, j, v in pairs)
        val += sum(qq * xx for qq, xx in zip(q, inner))
        b = round(val + rng.uniform(0.1, 1.0), 4)
        cons.append({"Q": pairs, "q": q, "b": b, "sense": "le"})
    return {"n": n, "c": c, "lb": lb, "ub": ub, "int": int_vars, "cons": cons}


_FAMILIES = ("pointpack", "ordering", "random", "mixed")


def generate(family, count, seed):
    """Named documents for one family; 'mixed' cycles through all three."""
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {_FAMILIES}")
    rng = random.Random(seed)
    out = []
    for idx in range(count):
        if family == "mixed":
            fam = ("pointpack", "ordering", "random")[idx % 3]
        else:
            fam = family
        if fam == "pointpack":
            doc = pointpack_instance(rng)
        elif fam == "ordering":
            doc = ordering_instance(rng)
        else:
            doc = random_instance(rng)
        out.append((f"{fam}-s{seed}-{idx:03d}", doc))
    return out
