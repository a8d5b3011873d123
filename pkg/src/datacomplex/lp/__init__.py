from .program import (
    BUDGET_EXCEEDED,
    EQ,
    FEASIBLE,
    GE,
    INFEASIBLE,
    LE,
    OPTIMAL,
    UNBOUNDED,
    Constraint,
    FarkasCertificate,
    LinearProgram,
    LPResult,
)
from .simplex import minimize, solve_feasibility

__all__ = [
    "BUDGET_EXCEEDED",
    "EQ",
    "FEASIBLE",
    "GE",
    "INFEASIBLE",
    "LE",
    "OPTIMAL",
    "UNBOUNDED",
    "Constraint",
    "FarkasCertificate",
    "LinearProgram",
    "LPResult",
    "minimize",
    "solve_feasibility",
]
