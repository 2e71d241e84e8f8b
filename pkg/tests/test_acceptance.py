"""Acceptance suite: one test per shipped guarantee, one PASS/FAIL line each.

Each test prints its verdict through capsys.disabled() so the line shows up
in plain pytest output, then asserts. Reference values come from the
independent oracles in oracles.py, never from the package itself.
"""

import math
import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from helpers import (hexagon, hexagon_shadow, interior_point, pair_term,
                     pentagon, random_feasible_relax, random_polytope, seeded)
from oracles import (envelope_value, global_minimum, grid_levelset_bbox,
                     grid_product_range, polygon_area_shoelace,
                     sample_in_polytope_np)

from shadowcut.config import RunConfig
from shadowcut.corpus import generate, random_instance
from shadowcut.envelope import separate, validate_plane
from shadowcut.lp import build_relaxation
from shadowcut.model import build_extended, parse_problem
from shadowcut.obbt import run_obbt
from shadowcut.projection import (LpBudget, build_polytope, compute_projection,
                                  exact_projection_oracle, volume2d,
                                  volume_quotient)
from shadowcut.propagation import forward_bounds, levelset_bounds
from shadowcut.solver import TermReport, effectiveness, gap_closed, solve

ROOT = Path(__file__).resolve().parent.parent
TOY = ROOT / "instances" / "toy.json"


def _verdict(capsys, num, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


# ---------------------------------------------------------------------------


def test_criterion_01_worked_example_exactness(capsys, toy_model):
    t0 = time.perf_counter()
    p = pentagon()
    upper = forward_bounds(p)[1]
    ext = build_extended(toy_model)
    relax = build_relaxation(ext)
    obj = [0.0] * relax.ncols
    obj[relax.slot_col(ext.slot_of[(0, 1)])] = 1.0
    mccormick_max = relax.solve(obj, sense="max").obj
    elapsed = time.perf_counter() - t0
    ok = (abs(upper - 9.0 / 16.0) <= 1e-9
          and abs(mccormick_max - 0.75) <= 1e-9
          and elapsed < 0.1)
    _verdict(capsys, 1, ok,
             f"forward upper {upper:.12f} (want 9/16), McCormick max "
             f"{mccormick_max:.12f} (want 3/4), {elapsed * 1e3:.1f} ms")


def test_criterion_02_volume_family(capsys):
    worst = 0.0
    for a in (0.1, 0.25, 0.5, 0.75, 0.9):
        p = hexagon(a)
        shadow = hexagon_shadow(a)
        worst = max(worst, abs(volume2d(p) - (1.0 - a * a)))
        worst = max(worst, abs(polygon_area_shoelace(shadow) - (1.0 - a)))
        q = volume_quotient(shadow, p)
        worst = max(worst, abs(q - 1.0 / (1.0 + a)))
    ok = worst <= 1e-9
    _verdict(capsys, 2, ok,
             f"five polygon pairs, worst deviation {worst:.2e} (tol 1e-9)")


_CORPUS3 = []


def _criterion3_corpus():
    """>=100 random relaxations with exact bounds on the projected pair."""
    if _CORPUS3:
        return _CORPUS3
    rng = seeded(303)
    while len(_CORPUS3) < 100:
        relax = random_feasible_relax(rng)
        term = pair_term(0, 1)
        filt, _ = run_obbt(relax, [term])
        if relax.col_ub[0] - relax.col_lb[0] < 0.05:
            continue
        if relax.col_ub[1] - relax.col_lb[1] < 0.05:
            continue
        p = compute_projection(relax, term, [term], filt,
                               budget=LpBudget(None))
        if p is None:
            continue
        exact = exact_projection_oracle(relax, 0, 1)
        if exact is None:
            continue
        _CORPUS3.append((relax, p, exact))
    return _CORPUS3


def test_criterion_03_volume_quotient_floor(capsys):
    t0 = time.perf_counter()
    corpus = _criterion3_corpus()
    floor = 0.5 - 1e-6
    one_cut_floor = (2.0 + math.sqrt(2.0)) / 4.0 - 1e-6
    worst, worst_single, singles, bad = 1.0, 1.0, 0, 0
    for relax, p, exact in corpus:
        q = volume_quotient(exact, p)
        worst = min(worst, q)
        if q < floor:
            bad += 1
        non_axis = [c for c in p.cuts
                    if min(abs(c.gx), abs(c.gy)) > 1e-7 * max(abs(c.gx), abs(c.gy))]
        if len(non_axis) == 1:
            singles += 1
            worst_single = min(worst_single, q)
            if q < one_cut_floor:
                bad += 1
    elapsed = time.perf_counter() - t0
    ok = len(corpus) >= 100 and bad == 0 and elapsed < 60.0
    _verdict(capsys, 3, ok,
             f"{len(corpus)} relaxations, worst quotient {worst:.4f} "
             f"(floor 0.5), worst single-cut {worst_single:.4f} over "
             f"{singles} cases (floor {(2 + math.sqrt(2)) / 4:.4f}), "
             f"{elapsed:.1f} s")


def test_criterion_04_center_containment(capsys):
    corpus = _criterion3_corpus()
    misses = 0
    for relax, p, exact in corpus:
        ci = 0.5 * (relax.col_lb[0] + relax.col_ub[0])
        cj = 0.5 * (relax.col_lb[1] + relax.col_ub[1])
        if not exact.contains(ci, cj, tol=1e-7):
            misses += 1
    ok = len(corpus) >= 100 and misses == 0
    _verdict(capsys, 4, ok,
             f"box center inside the exact shadow on {len(corpus) - misses}"
             f"/{len(corpus)} instances")


def test_criterion_05_envelope_against_boundary_hull(capsys):
    t0 = time.perf_counter()
    rng = seeded(505)
    pairs, worst, invalid, missing = 0, 0.0, 0, 0
    while pairs < 50:
        p = random_polytope(rng)
        q = interior_point(p, rng, depth_frac=5e-3)
        pairs += 1
        for kind in ("under", "over"):
            cut = separate(p, q, kind)
            if cut is None:
                missing += 1
                continue
            if not validate_plane(p, (cut.ax, cut.ay, cut.b), kind):
                invalid += 1
                continue
            ref = envelope_value(p, q, kind, per_edge=500)
            if ref is None:
                missing += 1
                continue
            worst = max(worst, abs(cut.value(*q) - ref))
    # box polytopes must reproduce the four McCormick planes exactly
    mccormick_dev = 0.0
    for _ in range(10):
        li, ui = sorted(rng.uniform(-2.0, 2.0) for _ in range(2))
        lj, uj = sorted(rng.uniform(-2.0, 2.0) for _ in range(2))
        if ui - li < 0.2 or uj - lj < 0.2:
            continue
        box = build_polytope(0, 1, (li, ui, lj, uj), [])
        qx = rng.uniform(li, ui)
        qy = rng.uniform(lj, uj)
        under = separate(box, (qx, qy), "under")
        over = separate(box, (qx, qy), "over")
        under_planes = [(lj, li, li * lj), (uj, ui, ui * uj)]
        over_planes = [(uj, li, li * uj), (lj, ui, ui * lj)]
        dev_u = min(max(abs(under.ax - a), abs(under.ay - b), abs(under.b - c))
                    for a, b, c in under_planes)
        dev_o = min(max(abs(over.ax - a), abs(over.ay - b), abs(over.b - c))
                    for a, b, c in over_planes)
        mccormick_dev = max(mccormick_dev, dev_u, dev_o)
    elapsed = time.perf_counter() - t0
    ok = (pairs >= 50 and invalid == 0 and missing == 0
          and worst <= 5e-3 and mccormick_dev <= 1e-9 and elapsed < 30.0)
    _verdict(capsys, 5, ok,
             f"{pairs} (P, q) pairs, worst envelope gap {worst:.2e} "
             f"(tol 5e-3), box-vs-McCormick dev {mccormick_dev:.2e} "
             f"(tol 1e-9), {elapsed:.1f} s")


def test_criterion_06_propagation_grid_equivalence(capsys):
    t0 = time.perf_counter()
    rng = seeded(606)
    nprng = np.random.default_rng(606)
    k = 1000
    checked, unsound, sloppy = 0, 0, 0
    for _ in range(500):
        p = random_polytope(rng)
        li, ui, lj, uj = p.box
        h = max(ui - li, uj - lj) / (k - 1.0)
        lip = math.hypot(max(abs(li), abs(ui)), max(abs(lj), abs(uj)))
        slack = 4.0 * lip * h + 1e-9
        lo, hi = forward_bounds(p)
        glo, ghi, npts = grid_product_range(p, k=k)
        if npts < 200:
            continue
        checked += 1
        if lo > glo + 1e-9 or hi < ghi - 1e-9:
            unsound += 1
        if lo < glo - slack or hi > ghi + slack:
            sloppy += 1
        zlo = lo + 0.3 * (hi - lo)
        zhi = lo + 0.7 * (hi - lo)
        box = levelset_bounds(p, zlo, zhi)
        gbox = grid_levelset_bbox(p, zlo, zhi, k=k)
        if gbox is not None:
            if box is None:
                unsound += 1
            else:
                bli, bui, blj, buj = box
                gli, gui, glj, guj = gbox
                if (bli > gli + 1e-9 or bui < gui - 1e-9
                        or blj > glj + 1e-9 or buj < guj - 1e-9):
                    unsound += 1
                if (bli < gli - slack or bui > gui + slack
                        or blj < glj - slack or buj > guj + slack):
                    sloppy += 1
        # rejection sampling: every feasible point obeys both reports
        pts = sample_in_polytope_np(p, nprng, 100)
        if len(pts):
            prod = pts[:, 0] * pts[:, 1]
            if prod.min() < lo - 1e-9 or prod.max() > hi + 1e-9:
                unsound += 1
            if box is not None:
                band = (prod >= zlo) & (prod <= zhi)
                bx, by = pts[band, 0], pts[band, 1]
                if band.any():
                    bli, bui, blj, buj = box
                    if (bx.min() < bli - 1e-9 or bx.max() > bui + 1e-9
                            or by.min() < blj - 1e-9 or by.max() > buj + 1e-9):
                        unsound += 1
    elapsed = time.perf_counter() - t0
    ok = (checked >= 490 and unsound == 0 and sloppy == 0
          and elapsed < 120.0)
    _verdict(capsys, 6, ok,
             f"{checked} polytopes vs {k}x{k} grids, {unsound} soundness and "
             f"{sloppy} slack violations, {elapsed:.1f} s")


def test_criterion_07_root_gap_on_generated_corpus(capsys):
    t0 = time.perf_counter()
    docs = generate("pointpack", 30, seed=14) + generate("ordering", 30, seed=15)
    gcs, psis, no_incumbent, negative = [], [], 0, 0
    for name, doc in docs:
        res = solve(parse_problem(doc), RunConfig(node_limit=800))
        if res.objective is None:
            no_incumbent += 1
            continue
        gc = gap_closed(res.objective, res.root.tightened_bound,
                        res.root.baseline_bound)
        if gc < -1e-12:
            negative += 1
        gcs.append(gc)
        psis.append(res.root.psi)
    with_psi = [g for g, s in zip(gcs, psis) if s > 0.0]
    closed = sum(1 for g in with_psi if g > 1e-9)
    share = closed / max(1, len(with_psi))
    elapsed = time.perf_counter() - t0
    ok = (len(gcs) == 60 and no_incumbent == 0 and negative == 0
          and len(with_psi) > 0 and share >= 0.5)
    _verdict(capsys, 7, ok,
             f"60 instances (30 pointpack + 30 ordering), GC >= 0 on all, "
             f"GC > 0 on {closed}/{len(with_psi)} of the psi>0 instances "
             f"({100 * share:.0f}%), {elapsed:.1f} s")


def test_criterion_08_solver_vs_global_oracle(capsys):
    t0 = time.perf_counter()
    rng = random.Random(88)
    matches, node_wins, total = 0, 0, 30
    worst_gap = 0.0
    for k in range(total):
        doc = random_instance(rng, n=2 + k % 3)
        m = parse_problem(doc)
        with_proj = solve(m, RunConfig(node_limit=3000))
        without = solve(m, RunConfig(enable_projection=False,
                                     node_limit=3000))
        ref, _ = global_minimum(doc, seed=k)
        if (ref is not None and with_proj.objective is not None
                and abs(with_proj.objective - ref) <= 1e-3):
            matches += 1
            worst_gap = max(worst_gap, abs(with_proj.objective - ref))
        if with_proj.counters.nodes <= without.counters.nodes:
            node_wins += 1
    elapsed = time.perf_counter() - t0
    ok = matches == total and node_wins >= 0.6 * total
    _verdict(capsys, 8, ok,
             f"oracle match {matches}/{total} (tol 1e-3, worst gap "
             f"{worst_gap:.1e}), node count no worse on {node_wins}/{total} "
             f"(need 60%), {elapsed:.1f} s")


def test_criterion_09_metric_hand_cases(capsys):
    cases = [
        (( 0.0, -0.5, -1.0), 0.5),      # halves the gap
        (( 0.0,  0.0, -1.0), 1.0),      # closes it entirely
        (( 0.0, -1.0, -1.0), 0.0),      # equal bounds
        (( 0.0, -1.0, -0.5), -0.5),     # regression branch, negative sign
        (( 2.0,  1.0, -1.0), 2.0 / 3.0),
        ((-1.0, -2.0, -4.0), 2.0 / 3.0),
    ]
    gc_dev = max(abs(gap_closed(*args) - want) for args, want in cases)

    def rep(count, cuts):
        return TermReport(i=0, j=1, count=count, cuts=cuts,
                          box_area=1.0, poly_area=1.0)

    psi_cases = [
        ([rep(2, 1), rep(3, 2)], 1.0),
        ([rep(2, 0), rep(3, 0)], 0.0),
        ([rep(3, 2), rep(1, 0)], 0.75),
    ]
    psi_dev = max(abs(effectiveness(reports) - want)
                  for reports, want in psi_cases)
    ok = gc_dev <= 1e-12 and psi_dev <= 1e-12
    _verdict(capsys, 9, ok,
             f"6 gap-closed cases (dev {gc_dev:.1e}) and 3 effectiveness "
             f"cases (dev {psi_dev:.1e})")


def _run_cli(args, cwd):
    res = subprocess.run([sys.executable, "-m", "shadowcut.cli", *args],
                         capture_output=True, cwd=cwd)
    return res.returncode, res.stdout


def test_criterion_10_byte_identical_reruns(capsys, tmp_path):
    t0 = time.perf_counter()
    toy = str(TOY)
    commands = [
        ["solve", "--instance", toy, "--seed", "3"],
        ["solve", "--instance", toy, "--no-propagation", "--seed", "4"],
        ["root-analyze", "--instance", toy, "--oracle", "--seed", "3"],
        ["project", "--instance", toy, "--oracle", "--seed", "3"],
    ]
    stable = True
    for cmd in commands:
        code1, out1 = _run_cli(cmd, ROOT)
        code2, out2 = _run_cli(cmd, ROOT)
        stable &= code1 == code2 == 0 and out1 == out2
    for rerun in ("a", "b"):
        outdir = tmp_path / f"corp-{rerun}"
        code, _ = _run_cli(["corpus", "--family", "mixed", "--count", "4",
                            "--seed", "6", "--out", str(outdir)], ROOT)
        stable &= code == 0
    blobs = []
    for rerun in ("a", "b"):
        outdir = tmp_path / f"corp-{rerun}"
        blobs.append(b"".join(f.read_bytes()
                              for f in sorted(outdir.glob("*.json"))))
    stable &= blobs[0] == blobs[1] and len(blobs[0]) > 0
    elapsed = time.perf_counter() - t0
    _verdict(capsys, 10, stable,
             f"double runs of solve/root-analyze/project/corpus are "
             f"byte-identical, {elapsed:.1f} s")
