"""Shared numeric tolerances and run configuration."""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Tolerances:
    feas: float = 1e-7          # primal feasibility of rows and bounds
    kkt: float = 1e-6           # stationarity residual of reported duals
    comp_slack: float = 1e-6    # complementary slackness residual
    violation: float = 1e-6     # product violation |X_ij - x_i*x_j|
    integrality: float = 1e-6   # distance to nearest integer
    axis_parallel: float = 1e-7  # relative span below which a cut counts as axis-parallel
    min_improve: float = 1e-6   # bound-change threshold, scaled by 1 + interval width
    gap: float = 1e-4           # relative optimality gap at which the search stops


@dataclass
class RunConfig:
    """Solver toggles and limits. Defaults reproduce the full technique stack."""

    enable_projection: bool = True
    enable_separation: bool = True
    enable_propagation: bool = True
    time_limit: float | None = None
    node_limit: int | None = None
    lp_budget_factor: float = 3.0  # diag-LP iteration budget = factor * root LP iterations
    seed: int = 0
    emit_wall_time: bool = False   # wall clock breaks byte-determinism; off by default
    tol: Tolerances = field(default_factory=Tolerances)
