"""HTTP facade over the core library.

Every endpoint is a thin adapter: pydantic handles shape validation of the
request envelope, while instance semantics (bounds, index ranges, duplicate
products) stay with the library parser so there is a single source of truth.
"""

import dataclasses

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .config import RunConfig, Tolerances
from .corpus import generate
from .lp import NumericalFailure, RelaxationError
from .model import ModelError, parse_problem
from .oracle import grid_minimum
from .projection import exact_projection_oracle, volume2d, volume_quotient
from .solver import analyze_root, gap_closed, solve


class ConstraintModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # Q triples are [i, j, v]; keep ints as ints so parse_problem can
    # enforce integer indices itself.
    Q: list[list[int | float]]
    q: list[float]
    b: float
    sense: str


class InstanceModel(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    n: int
    c: list[float]
    lb: list[float]
    ub: list[float]
    int_vars: list[int] = Field(alias="int")
    cons: list[ConstraintModel]

    def document(self):
        return self.model_dump(by_alias=True)


class ConfigModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    enable_projection: bool = True
    enable_separation: bool = True
    enable_propagation: bool = True
    time_limit: float | None = None
    node_limit: int | None = None
    lp_budget_factor: float = 3.0
    seed: int = 0
    emit_wall_time: bool = False
    tolerances: dict[str, float] | None = None

    def run_config(self):
        tol = Tolerances()
        if self.tolerances:
            known = {f.name for f in dataclasses.fields(Tolerances)}
            bad = sorted(set(self.tolerances) - known)
            if bad:
                raise ModelError("tolerances",
                                 f"unknown tolerance names: {', '.join(bad)}")
            tol = dataclasses.replace(tol, **self.tolerances)
        return RunConfig(
            enable_projection=self.enable_projection,
            enable_separation=self.enable_separation,
            enable_propagation=self.enable_propagation,
            time_limit=self.time_limit,
            node_limit=self.node_limit,
            lp_budget_factor=self.lp_budget_factor,
            seed=self.seed,
            emit_wall_time=self.emit_wall_time,
            tol=tol,
        )


class SolveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instance: InstanceModel
    config: ConfigModel = Field(default_factory=ConfigModel)
    oracle: bool = False          # add a grid-scan reference to the report


class RootAnalyzeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instance: InstanceModel
    config: ConfigModel = Field(default_factory=ConfigModel)
    primal: float | None = None   # reference value for gap-closed
    oracle: bool = False          # derive the reference (grid, then solver)


class ProjectRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instance: InstanceModel
    config: ConfigModel = Field(default_factory=ConfigModel)
    i: int | None = None
    j: int | None = None
    oracle: bool = False          # include exact-shadow volume quotients


class CorpusRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: str
    count: int = Field(default=10, ge=1, le=500)
    seed: int = 0


app = FastAPI(title="shadowcut", version=__version__)


def _error(status, kind, message, field=None):
    return JSONResponse(status_code=status, content={
        "detail": {"kind": kind, "message": message, "field": field}})


@app.exception_handler(ModelError)
async def _model_error(request, exc):
    return _error(422, "parse", str(exc), getattr(exc, "field", None))


@app.exception_handler(RequestValidationError)
async def _request_error(request, exc):
    errs = exc.errors()
    first = errs[0] if errs else {}
    loc = ".".join(str(t) for t in first.get("loc", ()) if t != "body")
    return _error(422, "parse", first.get("msg", "invalid request"),
                  loc or None)


@app.exception_handler(NumericalFailure)
async def _numerical_error(request, exc):
    return _error(500, "numerical", str(exc))


@app.exception_handler(RelaxationError)
async def _relaxation_error(request, exc):
    return _error(500, "numerical", str(exc))


@app.exception_handler(ValueError)
async def _value_error(request, exc):
    return _error(422, "parse", str(exc))


@app.get("/health")
async def health():
    return {"status": "ok", "version": __version__}


@app.post("/solve")
async def solve_endpoint(req: SolveRequest):
    m = parse_problem(req.instance.document())
    res = solve(m, req.config.run_config())
    body = {"result": res.to_dict()}
    if req.oracle:
        ref, _ = grid_minimum(m)
        body["grid_reference"] = ref
    return body


@app.post("/root-analyze")
async def root_analyze_endpoint(req: RootAnalyzeRequest):
    m = parse_problem(req.instance.document())
    cfg = req.config.run_config()
    ra = analyze_root(m, cfg)
    body = {"analysis": ra.to_dict(), "primal": req.primal, "gap_closed": None}
    if ra.status == "ok":
        primal = req.primal
        if primal is None and req.oracle:
            primal, _ = grid_minimum(m)
            if primal is None:
                res = solve(m, cfg)
                primal = res.objective
            body["primal"] = primal
        if primal is not None:
            body["gap_closed"] = gap_closed(
                primal, ra.tightened_bound, ra.baseline_bound)
    return body


@app.post("/project")
async def project_endpoint(req: ProjectRequest):
    if (req.i is None) != (req.j is None):
        return _error(422, "parse", "provide both i and j, or neither")
    m = parse_problem(req.instance.document())
    cfg = req.config.run_config()
    ra = analyze_root(m, cfg)
    if ra.status != "ok":
        return {"status": ra.status, "terms": []}
    out = []
    for term in ra.terms:
        if req.i is not None and (term.i, term.j) != (req.i, req.j):
            continue
        p = ra.polytopes.get((term.i, term.j))
        if p is None:
            continue
        zlo, zhi = None, None
        rep = next((r for r in ra.term_reports
                    if (r.i, r.j) == (term.i, term.j)), None)
        if rep is not None and rep.forward is not None:
            zlo, zhi = rep.forward
        entry = {
            "i": term.i, "j": term.j, "count": term.count,
            "box": list(p.box),
            "cuts": [{"gx": c.gx, "gy": c.gy, "g0": c.g0} for c in p.cuts],
            "vertices": [list(v) for v in p.vertices],
            "area": p.area(),
            "product_lo": zlo, "product_hi": zhi,
        }
        if req.oracle:
            try:
                exact = exact_projection_oracle(ra.relax, term.i, term.j)
                entry["oracle_area"] = volume2d(exact)
                entry["volume_quotient"] = volume_quotient(exact, p)
            except RelaxationError:
                entry["oracle_area"] = None
                entry["volume_quotient"] = None
        out.append(entry)
    if req.i is not None and not out:
        return _error(422, "parse",
                      f"no product term for pair ({req.i}, {req.j})")
    return {"status": "ok", "terms": out}


@app.post("/corpus")
async def corpus_endpoint(req: CorpusRequest):
    try:
        named = generate(req.family, req.count, req.seed)
    except ValueError as exc:
        return _error(422, "parse", str(exc))
    return {"instances": [{"name": name, "doc": doc} for name, doc in named]}
