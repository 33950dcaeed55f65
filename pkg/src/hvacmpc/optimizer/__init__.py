"""Linear programs and small-binary MILPs solved by exhaustive enumeration."""

from .problem import (
    LinearProgram,
    MilpSpec,
    SolveResult,
    SolverError,
    max_scaled_violation,
    write_lp_text,
)
from .solve import solve_binary_milp, solve_lp

__all__ = [
    "LinearProgram",
    "MilpSpec",
    "SolveResult",
    "SolverError",
    "max_scaled_violation",
    "write_lp_text",
    "solve_lp",
    "solve_binary_milp",
]
