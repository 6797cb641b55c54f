"""Small complete decision procedures used by the verifier."""

from .sat import CnfProblem, UNSAT, sat_solve, check_model, to_dimacs, from_dimacs  # noqa: F401
from .linear import (  # noqa: F401
    INFEASIBLE, LinAtom, LinProblem, UnboundedVariable, lin_solve, check_assignment,
)
