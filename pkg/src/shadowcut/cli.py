"""Command line client for the service.

Each subcommand builds a request, sends it to the FastAPI app through an
in-process transport (no socket), and prints one JSON record per instance
followed by a summary record. --out mirrors the records to a file and writes
a flat CSV next to it. Exit codes: 0 success, 2 instance parse error, 3 I/O
error, 4 numerical failure, 5 a limit stopped the solve.
"""

import argparse
import asyncio
import csv
import json
import math
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4
EXIT_LIMIT = 5


class CliFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _config_payload(args):
    payload = {
        "enable_projection": not args.no_projection,
        "enable_separation": not args.no_separation,
        "enable_propagation": not args.no_propagation,
        "time_limit": args.time_limit,
        "node_limit": args.node_limit,
        "lp_budget_factor": args.lp_budget_factor,
        "seed": args.seed,
        "emit_wall_time": args.timings,
    }
    if args.tol:
        overrides = {}
        for item in args.tol:
            if "=" not in item:
                raise CliFailure(EXIT_PARSE,
                                 f"--tol expects NAME=VALUE, got {item!r}")
            name, _, val = item.partition("=")
            try:
                overrides[name.strip()] = float(val)
            except ValueError:
                raise CliFailure(EXIT_PARSE,
                                 f"--tol {name}: {val!r} is not a number")
        payload["tolerances"] = overrides
    return payload


def _instance_paths(spec):
    p = Path(spec)
    if p.is_dir():
        files = sorted(p.glob("*.json"))
        if not files:
            raise CliFailure(EXIT_IO, f"no .json instances in directory {spec}")
        return files
    if p.is_file():
        return [p]
    raise CliFailure(EXIT_IO, f"instance path not found: {spec}")


def _load_document(path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot read {path}: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliFailure(EXIT_PARSE, f"{path}: invalid JSON: {exc}")
    if not isinstance(doc, dict):
        raise CliFailure(EXIT_PARSE, f"{path}: instance must be a JSON object")
    return doc


async def _post(client, path, payload):
    resp = await client.post(path, json=payload)
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail")
    except json.JSONDecodeError:
        detail = None
    if isinstance(detail, dict):
        kind = detail.get("kind")
        message = detail.get("message", "request failed")
        if kind == "parse":
            raise CliFailure(EXIT_PARSE, message)
        if kind == "numerical":
            raise CliFailure(EXIT_NUMERICAL, message)
        raise CliFailure(EXIT_PARSE, message)
    # pydantic envelope validation
    raise CliFailure(EXIT_PARSE, f"request rejected: {json.dumps(detail)}")


def _emit(records, out):
    lines = [json.dumps(r, sort_keys=True) for r in records]
    for line in lines:
        print(line)
    if out is None:
        return
    path = Path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
        _write_csv(records, path.with_suffix(".csv"))
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot write {out}: {exc}")


_CSV_FIELDS = ["record", "name", "status", "objective", "bound", "gap",
               "nodes", "lp_solves", "lp_iterations", "diag_lps",
               "projection_cuts", "tangent_cuts", "psi", "baseline_bound",
               "tightened_bound", "gap_closed", "primal", "wall_time"]


def _flatten(record):
    row = {k: record.get(k) for k in ("record", "name", "status", "gap_closed",
                                      "primal", "wall_time")}
    if row.get("primal") is None and record.get("grid_reference") is not None:
        row["primal"] = record["grid_reference"]
    res = record.get("result") or {}
    row.update({k: res.get(k) for k in ("objective", "bound", "gap")})
    counters = (res.get("counters") or record.get("counters") or {})
    row.update({k: counters.get(k) for k in
                ("nodes", "lp_solves", "lp_iterations", "diag_lps",
                 "projection_cuts", "tangent_cuts")})
    analysis = record.get("analysis") or res.get("root") or {}
    row["psi"] = analysis.get("psi")
    row["baseline_bound"] = analysis.get("baseline_bound")
    row["tightened_bound"] = analysis.get("tightened_bound")
    if record.get("status") and not row.get("status"):
        row["status"] = record["status"]
    return {k: row.get(k) for k in _CSV_FIELDS}


def _write_csv(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_FIELDS)
        writer.writeheader()
        for rec in records:
            if rec.get("record") == "summary":
                continue
            writer.writerow(_flatten(rec))


async def _run_solve(args):
    from .service import app
    paths = _instance_paths(args.instance)
    records = []
    worst = EXIT_OK
    async with httpx.AsyncClient(
            transport=httpx.ASGITransport(app=app),
            base_url="http://shadowcut.local") as client:
        for path in paths:
            doc = _load_document(path)
            body = await _post(client, "/solve", {
                "instance": doc, "config": _config_payload(args),
                "oracle": args.oracle})
            res = body["result"]
            if not args.timings:
                res["wall_time"] = None
            rec = {"record": "solve", "name": path.stem, "result": res,
                   "status": res["status"]}
            if args.oracle:
                rec["grid_reference"] = body.get("grid_reference")
            records.append(rec)
            if res["status"] in ("node_limit", "time_limit"):
                worst = max(worst, EXIT_LIMIT)
        statuses = [r["status"] for r in records]
        records.append({
            "record": "summary", "instances": len(records),
            "optimal": statuses.count("optimal"),
            "infeasible": statuses.count("infeasible"),
            "limit": sum(1 for s in statuses
                         if s in ("node_limit", "time_limit")),
        })
    _emit(records, args.out)
    return worst


async def _run_root_analyze(args):
    from .service import app
    paths = _instance_paths(args.instance)
    records = []
    gcs = []
    async with httpx.AsyncClient(
            transport=httpx.ASGITransport(app=app),
            base_url="http://shadowcut.local") as client:
        for path in paths:
            doc = _load_document(path)
            body = await _post(client, "/root-analyze", {
                "instance": doc, "config": _config_payload(args),
                "primal": args.primal, "oracle": args.oracle})
            rec = {"record": "root-analyze", "name": path.stem,
                   "analysis": body["analysis"],
                   "primal": body.get("primal"),
                   "gap_closed": body.get("gap_closed"),
                   "status": body["analysis"]["status"]}
            if not args.timings:
                rec["wall_time"] = None
            records.append(rec)
            if rec["gap_closed"] is not None:
                gcs.append(rec["gap_closed"])
        summary = {"record": "summary", "instances": len(records),
                   "mean_psi": _mean([r["analysis"]["psi"] for r in records
                                      if r["analysis"]["status"] == "ok"])}
        if gcs:
            summary["mean_gap_closed"] = _mean(gcs)
        records.append(summary)
    _emit(records, args.out)
    return EXIT_OK


def _mean(vals):
    vals = [v for v in vals if v is not None and math.isfinite(v)]
    return sum(vals) / len(vals) if vals else None


async def _run_project(args):
    from .service import app
    paths = _instance_paths(args.instance)
    records = []
    async with httpx.AsyncClient(
            transport=httpx.ASGITransport(app=app),
            base_url="http://shadowcut.local") as client:
        for path in paths:
            doc = _load_document(path)
            payload = {"instance": doc, "config": _config_payload(args),
                       "oracle": args.oracle}
            if args.term is not None:
                payload["i"], payload["j"] = args.term
            body = await _post(client, "/project", payload)
            records.append({"record": "project", "name": path.stem,
                            "status": body["status"],
                            "terms": body["terms"]})
        records.append({"record": "summary", "instances": len(paths),
                        "terms": sum(len(r["terms"]) for r in records)})
    _emit(records, args.out)
    return EXIT_OK


async def _run_corpus(args):
    from .service import app
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot create {args.out}: {exc}")
    async with httpx.AsyncClient(
            transport=httpx.ASGITransport(app=app),
            base_url="http://shadowcut.local") as client:
        body = await _post(client, "/corpus", {
            "family": args.family, "count": args.count, "seed": args.seed})
    records = []
    for item in body["instances"]:
        path = out_dir / f"{item['name']}.json"
        try:
            path.write_text(json.dumps(item["doc"], sort_keys=True,
                                       separators=(",", ":")) + "\n")
        except OSError as exc:
            raise CliFailure(EXIT_IO, f"cannot write {path}: {exc}")
        records.append({"record": "corpus", "name": item["name"],
                        "path": str(path)})
    records.append({"record": "summary", "instances": len(records),
                    "directory": str(out_dir)})
    for rec in records:
        print(json.dumps(rec, sort_keys=True))
    return EXIT_OK


def _serve(args):
    try:
        import uvicorn
    except ImportError:
        raise CliFailure(EXIT_IO,
                         "uvicorn is not installed; install the 'server' extra")
    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _add_common(sp, instance=True):
    if instance:
        sp.add_argument("--instance", required=True,
                        help="instance JSON file, or a directory of them")
    sp.add_argument("--out", default=None,
                    help="write records to this file (plus a CSV sibling)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--time-limit", type=float, default=None)
    sp.add_argument("--node-limit", type=int, default=None)
    sp.add_argument("--lp-budget-factor", type=float, default=3.0)
    sp.add_argument("--no-projection", action="store_true")
    sp.add_argument("--no-separation", action="store_true")
    sp.add_argument("--no-propagation", action="store_true")
    sp.add_argument("--oracle", action="store_true",
                    help="add exact-shadow and grid-scan references to reports")
    sp.add_argument("--tol", action="append", metavar="NAME=VALUE",
                    help="override a tolerance (repeatable)")
    sp.add_argument("--timings", action="store_true",
                    help="include wall-clock time (breaks byte determinism)")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="shadowcut",
        description="Tighten and solve boxed MIQCPs via product-term shadow "
                    "polytopes.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="branch-and-bound solve")
    _add_common(sp)

    sp = sub.add_parser("root-analyze",
                        help="root bounds with and without tightening")
    _add_common(sp)
    sp.add_argument("--primal", type=float, default=None,
                    help="reference primal value for gap-closed")

    sp = sub.add_parser("project", help="per-term shadow polytopes")
    _add_common(sp)
    sp.add_argument("--term", type=int, nargs=2, metavar=("I", "J"),
                    default=None, help="restrict to one variable pair")

    sp = sub.add_parser("corpus", help="generate benchmark instances")
    sp.add_argument("--family", required=True,
                    choices=["pointpack", "ordering", "random", "mixed"])
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="output directory")

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return asyncio.run(_run_solve(args))
        if args.command == "root-analyze":
            return asyncio.run(_run_root_analyze(args))
        if args.command == "project":
            return asyncio.run(_run_project(args))
        if args.command == "corpus":
            return asyncio.run(_run_corpus(args))
        if args.command == "serve":
            return _serve(args)
    except CliFailure as exc:
        print(json.dumps({"record": "error", "code": exc.code,
                          "message": str(exc)}), file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
