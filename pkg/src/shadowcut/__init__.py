"""Tighter relaxations for boxed MIQCPs via 2D shadow polytopes of product
terms: ray-LP cut extraction, envelope tangent separation, best-possible
bound propagation, and a spatial branch-and-bound solver around them."""

__version__ = "0.1.0"

from .config import RunConfig, Tolerances
from .corpus import generate, toy_instance
from .envelope import TangentCut, separate, validate_plane
from .lp import (InfeasibleRelaxation, LinRelax, NumericalFailure,
                 RelaxationError, Row, UnboundedRelaxation, build_relaxation,
                 mccormick_rows, square_rows)
from .model import (BilinearTerm, ExtendedForm, Miqcp, ModelError, QuadCon,
                    build_extended, collect_terms, parse_problem)
from .obbt import FilterSet, run_obbt
from .projection import (Cut2D, LpBudget, Polytope2D, build_polytope,
                         compute_projection, exact_projection_oracle,
                         volume_quotient)
from .propagation import (facet_propagate, forward_bounds, forward_candidates,
                          levelset_bounds, levelset_candidates)
from .solver import (Counters, RootAnalysis, SolveResult, TermReport,
                     analyze_root, effectiveness, gap_closed, solve)

__all__ = [
    "__version__",
    "RunConfig", "Tolerances",
    "generate", "toy_instance",
    "TangentCut", "separate", "validate_plane",
    "InfeasibleRelaxation", "LinRelax", "NumericalFailure", "RelaxationError",
    "Row", "UnboundedRelaxation", "build_relaxation", "mccormick_rows",
    "square_rows",
    "BilinearTerm", "ExtendedForm", "Miqcp", "ModelError", "QuadCon",
    "build_extended", "collect_terms", "parse_problem",
    "FilterSet", "run_obbt",
    "Cut2D", "LpBudget", "Polytope2D", "build_polytope", "compute_projection",
    "exact_projection_oracle", "volume_quotient",
    "facet_propagate", "forward_bounds", "forward_candidates",
    "levelset_bounds", "levelset_candidates",
    "Counters", "RootAnalysis", "SolveResult", "TermReport", "analyze_root",
    "effectiveness", "gap_closed", "solve",
]
