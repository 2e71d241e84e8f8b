"""Problem model: boxed MIQCPs, their product-variable extension, and term bookkeeping.

The instance document is JSON with fields n, c, lb, ub, int, cons; each
constraint has Q (triplets [i, j, v], full coefficient of x_i*x_j), q, b and
sense in {"le", "ge", "eq"}. Parsing normalizes everything to <= rows.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

_DOC_FIELDS = {"n", "c", "lb", "ub", "int", "cons"}
_CON_FIELDS = {"Q", "q", "b", "sense"}


class ModelError(ValueError):
    """Instance document rejected; `field` names the offending field."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class QuadCon:
    """One constraint sum v*x_i*x_j + q.x <= b, quad keyed by (i, j) with i <= j."""

    quad: dict
    lin: np.ndarray
    rhs: float

    def value(self, x):
        v = float(self.lin @ x)
        for (i, j), coef in self.quad.items():
            v += coef * x[i] * x[j]
        return v


@dataclass
class Miqcp:
    n: int
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    int_vars: tuple
    cons: list

    def is_binary(self, i):
        return i in self.int_vars and self.lb[i] == 0.0 and self.ub[i] == 1.0

    def objective(self, x):
        return float(self.c @ x)

    def max_violation(self, x):
        """Largest constraint violation at x; bounds and integrality included."""
        worst = 0.0
        for con in self.cons:
            worst = max(worst, con.value(x) - con.rhs)
        worst = max(worst, float(np.max(self.lb - x, initial=0.0)))
        worst = max(worst, float(np.max(x - self.ub, initial=0.0)))
        for i in self.int_vars:
            worst = max(worst, abs(x[i] - round(x[i])))
        return worst

    def to_document(self):
        cons = []
        for con in self.cons:
            cons.append({
                "Q": [[i, j, v] for (i, j), v in sorted(con.quad.items())],
                "q": [float(t) for t in con.lin],
                "b": float(con.rhs),
                "sense": "le",
            })
        return {
            "n": self.n,
            "c": [float(t) for t in self.c],
            "lb": [float(t) for t in self.lb],
            "ub": [float(t) for t in self.ub],
            "int": list(self.int_vars),
            "cons": cons,
        }


def _check_vector(doc, name, n):
    v = doc[name]
    if not isinstance(v, list) or len(v) != n:
        raise ModelError(name, f"expected a list of {n} numbers")
    out = np.empty(n)
    for k, t in enumerate(v):
        if isinstance(t, bool) or not isinstance(t, (int, float)):
            raise ModelError(name, f"entry {k} is not a number")
        out[k] = float(t)
    return out


def _parse_constraint(entry, idx, n):
    where = f"cons[{idx}]"
    if not isinstance(entry, dict):
        raise ModelError(where, "expected an object")
    unknown = set(entry) - _CON_FIELDS
    if unknown:
        raise ModelError(f"{where}.{sorted(unknown)[0]}", "unknown field")
    if "b" not in entry or "sense" not in entry:
        missing = "b" if "b" not in entry else "sense"
        raise ModelError(f"{where}.{missing}", "missing field")
    sense = entry["sense"]
    if sense not in ("le", "ge", "eq"):
        raise ModelError(f"{where}.sense", f"expected le/ge/eq, got {sense!r}")
    rhs = entry["b"]
    if isinstance(rhs, bool) or not isinstance(rhs, (int, float)) or not math.isfinite(rhs):
        raise ModelError(f"{where}.b", "expected a finite number")

    lin = np.zeros(n)
    if "q" in entry:
        q = entry["q"]
        if not isinstance(q, list) or len(q) != n:
            raise ModelError(f"{where}.q", f"expected a list of {n} numbers")
        lin[:] = [float(t) for t in q]

    quad = {}
    for t, trip in enumerate(entry.get("Q", [])):
        spot = f"{where}.Q[{t}]"
        if not isinstance(trip, list) or len(trip) != 3:
            raise ModelError(spot, "expected [i, j, v]")
        i, j, v = trip
        if isinstance(i, bool) or isinstance(j, bool) or not isinstance(i, int) or not isinstance(j, int):
            raise ModelError(spot, "indices must be integers")
        if not (0 <= i < n and 0 <= j < n):
            raise ModelError(spot, f"index out of range for n={n}")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ModelError(spot, "coefficient must be a finite number")
        key = (i, j) if i <= j else (j, i)
        if key in quad:
            raise ModelError(spot, f"duplicate entry for pair {key}")
        if v != 0.0:
            quad[key] = float(v)
    return quad, lin, float(rhs), sense


def parse_problem(text):
    """Parse an instance document (JSON text or dict) into <=-normalized Miqcp."""
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ModelError("document", f"invalid JSON: {e}") from e
    else:
        doc = text
    if not isinstance(doc, dict):
        raise ModelError("document", "expected a JSON object")
    unknown = set(doc) - _DOC_FIELDS
    if unknown:
        raise ModelError(sorted(unknown)[0], "unknown field")
    for name in _DOC_FIELDS:
        if name not in doc:
            raise ModelError(name, "missing field")

    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise ModelError("n", "expected a positive integer")
    c = _check_vector(doc, "c", n)
    lb = _check_vector(doc, "lb", n)
    ub = _check_vector(doc, "ub", n)
    if not np.all(np.isfinite(lb)) or not np.all(np.isfinite(ub)):
        bad = "lb" if not np.all(np.isfinite(lb)) else "ub"
        raise ModelError(bad, "bounds must be finite (boxed problems only)")
    if np.any(lb > ub):
        k = int(np.argmax(lb > ub))
        raise ModelError("lb", f"lb[{k}] > ub[{k}]")

    ints = doc["int"]
    if not isinstance(ints, list):
        raise ModelError("int", "expected a list of variable indices")
    seen = set()
    for k in ints:
        if not isinstance(k, int) or not (0 <= k < n):
            raise ModelError("int", f"index {k!r} out of range for n={n}")
        if k in seen:
            raise ModelError("int", f"duplicate index {k}")
        seen.add(k)

    if not isinstance(doc["cons"], list):
        raise ModelError("cons", "expected a list of constraints")
    cons = []
    for idx, entry in enumerate(doc["cons"]):
        quad, lin, rhs, sense = _parse_constraint(entry, idx, n)
        if sense in ("le", "eq"):
            cons.append(QuadCon(dict(quad), lin.copy(), rhs))
        if sense in ("ge", "eq"):
            cons.append(QuadCon({k: -v for k, v in quad.items()}, -lin, -rhs))
    return Miqcp(n=n, c=c, lb=lb, ub=ub, int_vars=tuple(sorted(seen)), cons=cons)


@dataclass
class LinearizedCon:
    """Original constraint with products replaced by slot variables."""

    lin: np.ndarray        # over x columns
    slot_coefs: dict       # slot index -> coefficient
    rhs: float


@dataclass
class ExtendedForm:
    miqcp: Miqcp
    slots: list            # slot index -> (i, j) with i <= j, lexicographic
    slot_of: dict          # (i, j) -> slot index
    lin_cons: list         # LinearizedCon per constraint
    count: dict = field(default_factory=dict)  # (i, j) -> number of constraints using it

    def slot_pair(self, t):
        return self.slots[t]


def build_extended(m):
    """Create product slots for every pair appearing in some constraint."""
    pairs = set()
    count = {}
    for con in m.cons:
        for key in con.quad:
            pairs.add(key)
            count[key] = count.get(key, 0) + 1
    slots = sorted(pairs)
    slot_of = {key: t for t, key in enumerate(slots)}
    lin_cons = []
    for con in m.cons:
        lin_cons.append(LinearizedCon(
            lin=con.lin.copy(),
            slot_coefs={slot_of[key]: v for key, v in con.quad.items()},
            rhs=con.rhs,
        ))
    return ExtendedForm(miqcp=m, slots=slots, slot_of=slot_of,
                        lin_cons=lin_cons, count=count)


@dataclass(frozen=True)
class BilinearTerm:
    i: int
    j: int
    slot: int
    count: int


def collect_terms(ext):
    """Off-diagonal product terms in processing order.

    Order: descending constraint count, then descending box volume, then (i, j).
    Pairs of two binary variables are excluded.
    """
    m = ext.miqcp
    terms = []
    for (i, j), slot in ext.slot_of.items():
        if i == j:
            continue
        if m.is_binary(i) and m.is_binary(j):
            continue
        terms.append(BilinearTerm(i=i, j=j, slot=slot, count=ext.count[(i, j)]))

    def key(t):
        vol = (m.ub[t.i] - m.lb[t.i]) * (m.ub[t.j] - m.lb[t.j])
        return (-t.count, -vol, t.i, t.j)

    return sorted(terms, key=key)
