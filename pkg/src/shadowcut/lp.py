"""Linear relaxation container and a dense bounded-variable primal simplex.

The engine is deliberately self-contained: every production step needs row
duals, the dual of one auxiliary equality, and bound duals, all certified
against the KKT system at stated tolerances, plus bitwise-reproducible bases.

Sign conventions for the reported multipliers (lam, mu, nu_lb, nu_ub >= 0
except mu, which is free):
    sense="min":  c + A^T lam + mu*g - nu_lb + nu_ub = 0
    sense="max":  c = A^T lam + mu*g - nu_lb + nu_ub
where rows are a_r.z <= d_r and g.z = g0 is the optional extra equality.
"""

from dataclasses import dataclass

import numpy as np

from .config import Tolerances

# row provenance tags
TAG_ORIGINAL = "original-linear"
TAG_MCCORMICK = "mccormick"
TAG_SECANT = "secant"
TAG_PROJECTION = "projection-cut"
TAG_TANGENT = "tangent-cut"

_ITER_CAP = 50000


class RelaxationError(Exception):
    pass


class InfeasibleRelaxation(RelaxationError):
    pass


class UnboundedRelaxation(RelaxationError):
    pass


class NumericalFailure(RelaxationError):
    """KKT certification failed after refinement and a Bland-rule retry."""


@dataclass
class Row:
    """One <= row: sum(a1[i]*x_i) + sum(a2[t]*X_t) <= rhs."""

    a1: dict
    a2: dict
    rhs: float
    tag: str

    def dense(self, n, nslots):
        v = np.zeros(n + nslots)
        for i, c in self.a1.items():
            v[i] = c
        for t, c in self.a2.items():
            v[n + t] = c
        return v


@dataclass
class PrimalDualSolution:
    status: str
    x: np.ndarray
    obj: float
    lam: np.ndarray
    mu: float | None
    nu_lb: np.ndarray
    nu_ub: np.ndarray
    iterations: int
    basis: tuple
    sense: str

    def dual_objective(self, rhs, col_lb, col_ub, eq_rhs=0.0):
        base = float(self.lam @ rhs) + (self.mu or 0.0) * eq_rhs \
            - float(self.nu_lb @ col_lb) + float(self.nu_ub @ col_ub)
        return base if self.sense == "max" else -base


def product_bounds(li, ui, lj, uj):
    vals = (li * lj, li * uj, ui * lj, ui * uj)
    return min(vals), max(vals)


def square_bounds(l, u):
    hi = max(l * l, u * u)
    lo = 0.0 if l <= 0.0 <= u else min(l * l, u * u)
    return lo, hi


def mccormick_rows(i, j, slot, li, ui, lj, uj):
    """Four envelope rows for X = x_i*x_j over the box [li,ui] x [lj,uj]."""
    return [
        Row({i: uj, j: ui}, {slot: -1.0}, ui * uj, TAG_MCCORMICK),
        Row({i: lj, j: li}, {slot: -1.0}, li * lj, TAG_MCCORMICK),
        Row({i: -uj, j: -li}, {slot: 1.0}, -li * uj, TAG_MCCORMICK),
        Row({i: -lj, j: -ui}, {slot: 1.0}, -ui * lj, TAG_MCCORMICK),
    ]


def square_rows(i, slot, l, u):
    """Secant over-estimator plus gradient under-estimators for X = x_i^2."""
    rows = [Row({i: -(l + u)}, {slot: 1.0}, -l * u, TAG_SECANT)]
    for a in (l, 0.5 * (l + u), u):
        rows.append(Row({i: 2.0 * a}, {slot: -1.0}, a * a, TAG_SECANT))
    return rows


@dataclass
class LinRelax:
    """LP relaxation over columns [x_0..x_{n-1}, X_0..X_{T-1}]."""

    n: int
    slots: list
    rows: list
    col_lb: np.ndarray
    col_ub: np.ndarray

    @property
    def nslots(self):
        return len(self.slots)

    @property
    def ncols(self):
        return self.n + len(self.slots)

    def slot_col(self, t):
        return self.n + t

    def rows_by_tag(self, tag):
        return [r for r in self.rows if r.tag == tag]

    def replace_rows(self, tag, new_rows):
        self.rows = [r for r in self.rows if r.tag != tag] + list(new_rows)

    def dense_rows(self, rows=None):
        rows = self.rows if rows is None else rows
        if not rows:
            return np.zeros((0, self.ncols)), np.zeros(0)
        A = np.vstack([r.dense(self.n, len(self.slots)) for r in rows])
        d = np.array([r.rhs for r in rows])
        return A, d

    def copy(self):
        return LinRelax(self.n, list(self.slots), list(self.rows),
                        self.col_lb.copy(), self.col_ub.copy())

    def solve(self, objective, sense="max", extra_equality=None,
              rows=None, tol=None, iter_limit=_ITER_CAP):
        """Solve the relaxation LP; see module docstring for dual conventions.

        objective: dense vector over columns or {col: coef} dict.
        extra_equality: optional ({col: coef}, rhs) appended as one equality.
        rows: optional row list overriding self.rows (bounds stay shared).
        """
        tol = tol or Tolerances()
        c = np.zeros(self.ncols)
        if isinstance(objective, dict):
            for k, v in objective.items():
                c[k] = v
        else:
            c[:] = objective
        A, d = self.dense_rows(rows)
        eq = None
        if extra_equality is not None:
            coefs, g0 = extra_equality
            g = np.zeros(self.ncols)
            for k, v in coefs.items():
                g[k] = v
            eq = (g, float(g0))
        engine = SimplexEngine(A, d, self.col_lb, self.col_ub, eq=eq, tol=tol)
        return engine.solve(c, sense=sense, iter_limit=iter_limit)


def build_relaxation(ext):
    """Initial relaxation: linearized constraints, McCormick, secant rows."""
    m = ext.miqcp
    n, T = m.n, len(ext.slots)
    col_lb = np.empty(n + T)
    col_ub = np.empty(n + T)
    col_lb[:n] = m.lb
    col_ub[:n] = m.ub
    for t, (i, j) in enumerate(ext.slots):
        if i == j:
            lo, hi = square_bounds(m.lb[i], m.ub[i])
        else:
            lo, hi = product_bounds(m.lb[i], m.ub[i], m.lb[j], m.ub[j])
        col_lb[n + t], col_ub[n + t] = lo, hi

    rows = []
    for lc in ext.lin_cons:
        a1 = {i: float(v) for i, v in enumerate(lc.lin) if v != 0.0}
        rows.append(Row(a1, dict(lc.slot_coefs), lc.rhs, TAG_ORIGINAL))
    for t, (i, j) in enumerate(ext.slots):
        if i == j:
            rows.extend(square_rows(i, t, m.lb[i], m.ub[i]))
        else:
            rows.extend(mccormick_rows(i, j, t, m.lb[i], m.ub[i], m.lb[j], m.ub[j]))
    return LinRelax(n=n, slots=list(ext.slots), rows=rows,
                    col_lb=col_lb, col_ub=col_ub)


class SimplexEngine:
    """Bounded-variable primal simplex on dense arrays.

    Deterministic pivoting: Dantzig pricing with lowest-index ties, switching
    to Bland's rule after a run of degenerate steps. Slack per row; one fixed
    slack models the optional equality; artificials only where the slack
    start is infeasible.
    """

    def __init__(self, A, d, col_lb, col_ub, eq=None, tol=None):
        self.tol = tol or Tolerances()
        self.C = A.shape[1]
        rows = [A]
        rhs = [np.asarray(d, dtype=float)]
        self.eq_index = None
        if eq is not None:
            g, g0 = eq
            rows.append(g.reshape(1, -1))
            rhs.append(np.array([g0]))
            self.eq_index = A.shape[0]
        self.A = np.vstack(rows)
        self.rhs = np.concatenate(rhs)
        self.R = self.A.shape[0]
        self.col_lb = np.asarray(col_lb, dtype=float)
        self.col_ub = np.asarray(col_ub, dtype=float)
        self._warm_state = None

    # -- public ------------------------------------------------------------

    def solve(self, c, sense="min", warm=False, iter_limit=_ITER_CAP):
        if sense not in ("min", "max"):
            raise ValueError(f"sense must be min or max, got {sense!r}")
        c = np.asarray(c, dtype=float)
        cint = -c if sense == "max" else c.copy()
        if self.R == 0:
            return self._solve_boxed(c, cint, sense)
        try:
            raw = self._run(cint, warm=warm, iter_limit=iter_limit, bland=False)
            return self._package(raw, c, cint, sense)
        except NumericalFailure:
            self._warm_state = None
            raw = self._run(cint, warm=False, iter_limit=iter_limit, bland=True)
            return self._package(raw, c, cint, sense)

    # -- no-row special case ------------------------------------------------

    def _solve_boxed(self, c, cint, sense):
        at_hi = cint < 0.0
        x = np.where(at_hi, self.col_ub, self.col_lb)
        nu_lb = np.maximum(cint, 0.0)
        nu_ub = np.maximum(-cint, 0.0)
        return PrimalDualSolution(
            status="optimal", x=x, obj=float(c @ x),
            lam=np.zeros(0), mu=None, nu_lb=nu_lb, nu_ub=nu_ub,
            iterations=0, basis=(), sense=sense)

    # -- setup ---------------------------------------------------------------

    def _fresh_state(self):
        C, R = self.C, self.R
        Acols = np.hstack([self.A, np.eye(R)])
        lo = np.concatenate([self.col_lb, np.zeros(R)])
        hi = np.concatenate([self.col_ub, np.full(R, np.inf)])
        if self.eq_index is not None:
            hi[C + self.eq_index] = 0.0
        xval = np.concatenate([self.col_lb, np.zeros(R)])
        basis = np.arange(C, C + R)
        slack_vals = self.rhs - self.A @ xval[:C]
        xval[C:] = slack_vals

        art_rows = []
        for r in range(R):
            v = slack_vals[r]
            if v < lo[C + r] - 1e-12 or v > hi[C + r] + 1e-12:
                art_rows.append(r)
        n_art = len(art_rows)
        if n_art:
            art_block = np.zeros((R, n_art))
            art_lo = np.zeros(n_art)
            art_hi = np.full(n_art, np.inf)
            art_val = np.zeros(n_art)
            for k, r in enumerate(art_rows):
                sigma = 1.0 if slack_vals[r] > 0 else -1.0
                art_block[r, k] = sigma
                art_val[k] = abs(slack_vals[r])
                basis[r] = C + R + k
                xval[C + r] = 0.0  # slack pushed nonbasic at its lower bound
            Acols = np.hstack([Acols, art_block])
            lo = np.concatenate([lo, art_lo])
            hi = np.concatenate([hi, art_hi])
            xval = np.concatenate([xval, art_val])
        at_upper = np.zeros(Acols.shape[1], dtype=bool)
        in_basis = np.zeros(Acols.shape[1], dtype=bool)
        in_basis[basis] = True
        return {
            "Acols": Acols, "lo": lo, "hi": hi, "xval": xval,
            "basis": basis, "in_basis": in_basis, "at_upper": at_upper,
            "n_art": n_art, "art_start": C + R,
        }

    # -- core loop -----------------------------------------------------------

    def _run(self, cint, warm, iter_limit, bland):
        tol = self.tol
        C, R = self.C, self.R
        if warm and self._warm_state is not None:
            st = self._warm_state
            iters = 0
        else:
            st = self._fresh_state()
            iters = 0
            if st["n_art"]:
                c1 = np.zeros(st["Acols"].shape[1])
                c1[st["art_start"]:] = 1.0
                iters += self._simplex(st, c1, iter_limit, bland)
                self._refresh(st, c1)
                art_total = float(np.sum(np.abs(st["xval"][st["art_start"]:])))
                if art_total > tol.feas * (1.0 + float(np.max(np.abs(self.rhs), initial=0.0))):
                    raise InfeasibleRelaxation("phase 1 left positive infeasibility")
                self._evict_artificials(st)
                st["hi"][st["art_start"]:] = 0.0
                st["lo"][st["art_start"]:] = 0.0

        cfull = np.zeros(st["Acols"].shape[1])
        cfull[:C] = cint
        iters += self._simplex(st, cfull, iter_limit, bland)
        self._refresh(st, cfull)
        self._warm_state = st
        return st, iters

    def _simplex(self, st, cost, iter_limit, bland):
        tol = self.tol
        Acols, lo, hi = st["Acols"], st["lo"], st["hi"]
        xval, basis = st["xval"], st["basis"]
        in_basis, at_upper = st["in_basis"], st["at_upper"]
        R = self.R
        dtol = 1e-9
        degen_run = 0
        use_bland = bland
        iters = 0
        while True:
            if iters > iter_limit:
                raise NumericalFailure("simplex iteration cap reached")
            B = Acols[:, basis]
            try:
                y = np.linalg.solve(B.T, cost[basis])
            except np.linalg.LinAlgError as e:
                raise NumericalFailure(f"singular basis: {e}") from e
            rc = cost - y @ Acols
            free = ~in_basis & (lo < hi)
            cand = free & np.where(at_upper, rc > dtol, rc < -dtol)
            if not cand.any():
                return iters
            idx = np.nonzero(cand)[0]
            if use_bland:
                e = int(idx[0])
            else:
                score = np.abs(rc[idx])
                e = int(idx[int(np.argmax(score))])
            sigma = -1.0 if at_upper[e] else 1.0
            dcol = np.linalg.solve(B, Acols[:, e])
            coef = sigma * dcol
            xB = xval[basis]
            caps = np.full(R, np.inf)
            pos = coef > 1e-11
            neg = coef < -1e-11
            caps[pos] = (xB[pos] - lo[basis[pos]]) / coef[pos]
            caps[neg] = (hi[basis[neg]] - xB[neg]) / (-coef[neg])
            caps = np.maximum(caps, 0.0)
            flip_cap = hi[e] - lo[e]
            row_min = float(np.min(caps)) if R else np.inf
            delta = min(row_min, flip_cap)
            if not np.isfinite(delta):
                raise UnboundedRelaxation("improving ray with no blocking bound")
            iters += 1
            if flip_cap <= row_min:
                # entering variable swings to its other bound; basis unchanged
                at_upper[e] = not at_upper[e]
                xval[e] = hi[e] if at_upper[e] else lo[e]
                xval[basis] = xB - sigma * flip_cap * dcol
                step = flip_cap
            else:
                near = np.nonzero(caps <= row_min + 1e-15)[0]
                if use_bland:
                    lv_pos = int(near[int(np.argmin(basis[near]))])
                else:
                    lv_pos = int(near[0])
                leaving = int(basis[lv_pos])
                xval[basis] = xB - sigma * delta * dcol
                xval[e] = (hi[e] - delta) if at_upper[e] else (lo[e] + delta)
                if coef[lv_pos] > 0:
                    xval[leaving] = lo[leaving]
                    at_upper[leaving] = False
                else:
                    xval[leaving] = hi[leaving]
                    at_upper[leaving] = True
                basis[lv_pos] = e
                in_basis[leaving] = False
                in_basis[e] = True
                step = delta
            if step <= dtol:
                degen_run += 1
                if degen_run > 40:
                    use_bland = True
            else:
                degen_run = 0
            if iters % 64 == 0:
                self._refresh(st, cost)

    def _refresh(self, st, cost):
        """Recompute basic values from scratch with one refinement pass."""
        Acols, xval, basis, in_basis = st["Acols"], st["xval"], st["basis"], st["in_basis"]
        nb = ~in_basis
        resid = self.rhs - Acols[:, nb] @ xval[nb]
        B = Acols[:, basis]
        xB = np.linalg.solve(B, resid)
        xB += np.linalg.solve(B, resid - B @ xB)
        xval[basis] = xB

    def _evict_artificials(self, st):
        """Pivot zero-valued artificials out of the basis where possible."""
        Acols, basis = st["Acols"], st["basis"]
        in_basis, at_upper = st["in_basis"], st["at_upper"]
        art_start = st["art_start"]
        for pos in range(self.R):
            if basis[pos] < art_start:
                continue
            B = Acols[:, basis]
            ey = np.zeros(self.R)
            ey[pos] = 1.0
            u = np.linalg.solve(B.T, ey)
            alphas = u @ Acols[:, :art_start]
            found = -1
            for j in range(art_start):
                if not in_basis[j] and abs(alphas[j]) > 1e-7:
                    found = j
                    break
            if found < 0:
                continue  # dependent row; artificial stays basic at zero
            leaving = int(basis[pos])
            basis[pos] = found
            in_basis[leaving] = False
            in_basis[found] = True
            at_upper[leaving] = False
            st["xval"][leaving] = 0.0

    # -- solution assembly ----------------------------------------------------

    def _package(self, raw, c, cint, sense):
        st, iters = raw
        tol = self.tol
        C, R = self.C, self.R
        Acols, lo, hi = st["Acols"], st["lo"], st["hi"]
        xval, basis, in_basis, at_upper = st["xval"], st["basis"], st["in_basis"], st["at_upper"]

        cfull = np.zeros(Acols.shape[1])
        cfull[:C] = cint
        B = Acols[:, basis]
        y = np.linalg.solve(B.T, cfull[basis])
        y += np.linalg.solve(B.T, cfull[basis] - B.T @ y)
        rc = cfull - y @ Acols

        z = xval[:C].copy()
        np.clip(z, self.col_lb, self.col_ub, out=z)
        nu_lb = np.zeros(C)
        nu_ub = np.zeros(C)
        for j in range(C):
            if in_basis[j]:
                continue
            if lo[j] == hi[j]:
                nu_lb[j] = max(rc[j], 0.0)
                nu_ub[j] = max(-rc[j], 0.0)
            elif at_upper[j]:
                nu_ub[j] = max(-rc[j], 0.0)
            else:
                nu_lb[j] = max(rc[j], 0.0)
        lam_all = -y
        mu = None
        if self.eq_index is not None:
            mu = float(lam_all[self.eq_index])
        ineq_idx = [r for r in range(R) if r != self.eq_index]
        lam = lam_all[ineq_idx]

        self._certify(st, cint, z, lam, mu, nu_lb, nu_ub, rc)
        lam = np.maximum(lam, 0.0)

        obj = float(c @ z)
        sol = PrimalDualSolution(
            status="optimal", x=z, obj=obj,
            lam=lam, mu=mu, nu_lb=nu_lb, nu_ub=nu_ub,
            iterations=iters, basis=tuple(int(b) for b in basis), sense=sense)
        return sol

    def _certify(self, st, cint, z, lam, mu, nu_lb, nu_ub, rc):
        tol = self.tol
        C = self.C
        scale_c = 1.0 + float(np.max(np.abs(cint), initial=0.0))

        ineq_idx = [r for r in range(self.R) if r != self.eq_index]
        Ai = self.A[ineq_idx]
        di = self.rhs[ineq_idx]
        act = Ai @ z if len(ineq_idx) else np.zeros(0)
        row_scale = 1.0 + np.abs(di) + np.abs(Ai) @ np.abs(z) if len(ineq_idx) else np.zeros(0)
        if len(ineq_idx) and np.any(act - di > tol.feas * row_scale):
            raise NumericalFailure("primal row residual above feasibility tolerance")
        if self.eq_index is not None:
            g = self.A[self.eq_index]
            g0 = self.rhs[self.eq_index]
            sc = 1.0 + abs(g0) + float(np.abs(g) @ np.abs(z))
            if abs(float(g @ z) - g0) > tol.feas * sc:
                raise NumericalFailure("equality row residual above feasibility tolerance")

        if np.any(lam < -tol.kkt * scale_c):
            raise NumericalFailure("negative row dual beyond tolerance")
        stat = cint.copy()
        if len(ineq_idx):
            stat += Ai.T @ np.maximum(lam, 0.0)
        if self.eq_index is not None:
            stat += mu * self.A[self.eq_index]
        stat += -nu_lb + nu_ub
        if float(np.max(np.abs(stat), initial=0.0)) > tol.kkt * scale_c:
            raise NumericalFailure("stationarity residual above tolerance")

        if len(ineq_idx):
            cs = np.maximum(lam, 0.0) * np.abs(di - act)
            if np.any(cs > tol.comp_slack * row_scale * scale_c):
                raise NumericalFailure("row complementary slackness violated")
        gap_lo = nu_lb * np.abs(z - self.col_lb)
        gap_hi = nu_ub * np.abs(self.col_ub - z)
        bscale = (1.0 + np.abs(z)) * scale_c
        if np.any(gap_lo > tol.comp_slack * bscale) or np.any(gap_hi > tol.comp_slack * bscale):
            raise NumericalFailure("bound complementary slackness violated")
