"""DPLL satisfiability with unit propagation and chronological backtracking.

Branching is fixed: the lowest-index unassigned variable, tried true first,
which makes results reproducible. No clause learning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["CnfProblem", "UNSAT", "sat_solve", "check_model", "to_dimacs", "from_dimacs"]


class _Unsat:
    def __repr__(self):
        return "UNSAT"

    def __bool__(self):
        return False


UNSAT = _Unsat()


@dataclass
class CnfProblem:
    """Variables ``0..n_vars-1``; each clause is a collection of
    ``(index, polarity)`` pairs."""

    n_vars: int
    clauses: list = field(default_factory=list)
    names: list | None = None  # optional label per variable, for reports

    def __post_init__(self):
        norm = []
        for c in self.clauses:
            c = tuple(sorted({(int(i), bool(p)) for i, p in c}))
            for i, _ in c:
                if not 0 <= i < self.n_vars:
                    raise ValueError(f"literal references undeclared variable {i}")
            norm.append(c)
        self.clauses = norm


def check_model(p: CnfProblem, model) -> bool:
    return all(any(model[i] == pol for i, pol in c) for c in p.clauses)


def sat_solve(p: CnfProblem):
    """Return a list of booleans satisfying ``p``, or ``UNSAT``."""
    n = p.n_vars
    clauses = [c for c in p.clauses if not _tautology(c)]
    if any(len(c) == 0 for c in clauses):
        return UNSAT
    occurs = [[] for _ in range(2 * n)]  # clause ids by literal index 2*i + pol
    for ci, c in enumerate(clauses):
        for i, pol in c:
            occurs[2 * i + pol].append(ci)

    value: list = [None] * n
    trail: list[int] = []
    # decision stack entries: (trail length before decision, var, flipped?)
    decisions: list[tuple[int, int, bool]] = []

    def assign(i, v):
        value[i] = v
        trail.append(i)

    def propagate(start: int) -> bool:
        q = start
        while q < len(trail):
            i = trail[q]
            q += 1
            falsified = 2 * i + (not value[i])
            for ci in occurs[falsified]:
                unassigned = None
                n_un = 0
                sat = False
                for j, pol in clauses[ci]:
                    vj = value[j]
                    if vj is None:
                        n_un += 1
                        unassigned = (j, pol)
                    elif vj == pol:
                        sat = True
                        break
                if sat:
                    continue
                if n_un == 0:
                    return False
                if n_un == 1:
                    assign(*unassigned)
        return True

    # initial unit clauses
    for c in clauses:
        if len(c) == 1:
            i, pol = c[0]
            if value[i] is None:
                assign(i, pol)
            elif value[i] != pol:
                return UNSAT
    ok = propagate(0)
    next_var = 0
    while True:
        if ok:
            while next_var < n and value[next_var] is not None:
                next_var += 1
            if next_var == n:
                return [bool(v) for v in value]
            decisions.append((len(trail), next_var, False))
            mark = len(trail)
            assign(next_var, True)
            ok = propagate(mark)
            continue
        # backtrack to the most recent unflipped decision
        while decisions and decisions[-1][2]:
            decisions.pop()
        if not decisions:
            return UNSAT
        mark, var, _ = decisions.pop()
        for i in trail[mark:]:
            value[i] = None
        del trail[mark:]
        decisions.append((mark, var, True))
        assign(var, False)
        ok = propagate(mark)
        next_var = var  # everything below var is untouched by the undo


def _tautology(c) -> bool:
    seen = {}
    for i, pol in c:
        if seen.setdefault(i, pol) != pol:
            return True
    return False


def to_dimacs(p: CnfProblem) -> str:
    lines = [f"p cnf {p.n_vars} {len(p.clauses)}"]
    for c in p.clauses:
        lits = [str(i + 1) if pol else str(-(i + 1)) for i, pol in c]
        lines.append(" ".join(lits + ["0"]))
    return "\n".join(lines) + "\n"


def from_dimacs(text: str) -> CnfProblem:
    n, clauses, cur = None, [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS header: {line!r}")
            n = int(parts[2])
            continue
        for tok in line.split():
            v = int(tok)
            if v == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append((abs(v) - 1, v > 0))
    if cur:
        clauses.append(cur)
    if n is None:
        raise ValueError("missing DIMACS header")
    return CnfProblem(n, clauses)
