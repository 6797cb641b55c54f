from .syntax import *  # noqa: F401,F403
from .parser import ParseError, parse, render, parse_definitions  # noqa: F401
from .semantics import OutOfTrace, TraceModel, eval_formula, eval_term  # noqa: F401
from .rewrite import rewrite_temporal, substitute, MissingBinding, BoundOrderViolation  # noqa: F401
from .grounding import CNF, GroundAtom, ground_term_cnf  # noqa: F401
