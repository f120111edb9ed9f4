from .certificate import check_certificate
from .exact import solve_exact
from .problem import LPProblem, LPSolution
from .revised import solve_float


def solve(problem, mode="exact"):
    """Solve ``problem`` with the exact rational or the float backend."""
    if mode == "exact":
        return solve_exact(problem)
    if mode == "float":
        return solve_float(problem)
    raise ValueError(f"unknown mode {mode!r}")


__all__ = ["LPProblem", "LPSolution", "solve", "solve_exact", "solve_float", "check_certificate"]
