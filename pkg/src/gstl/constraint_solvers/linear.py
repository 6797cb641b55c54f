"""Integer feasibility for CNFs of linear atoms over bounded variables.

The search alternates clause splitting (choose one atom per disjunctive
clause, asserting the negations of atoms skipped before it) with interval
bounds propagation; once every clause is decided it labels variables
smallest-domain first. Finite bounds make the procedure complete.
When every asserted constraint is a difference constraint, bounds come from
shortest paths instead, which is exact and catches cycles at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

__all__ = ["LinAtom", "LinProblem", "lin_solve", "INFEASIBLE", "UnboundedVariable",
           "check_assignment"]

_OPS = ("<=", "<", "=", ">=", ">")


class UnboundedVariable(ValueError):
    pass


class _Infeasible:
    def __repr__(self):
        return "INFEASIBLE"

    def __bool__(self):
        return False


INFEASIBLE = _Infeasible()


@dataclass(frozen=True)
class LinAtom:
    """``sum(coeffs[v] * v) op k`` with integer coefficients."""

    coeffs: tuple  # sorted ((var, coeff), ...), zero coefficients dropped
    op: str
    k: int
    label: str = field(default="", compare=False)

    def __post_init__(self):
        items = dict(self.coeffs) if not isinstance(self.coeffs, dict) else self.coeffs
        coeffs = tuple(sorted((v, int(c)) for v, c in dict(items).items() if c != 0))
        if not coeffs:
            raise ValueError("linear atom needs a nonzero coefficient")
        if self.op not in _OPS:
            raise ValueError(f"unknown comparison {self.op!r}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "k", int(self.k))

    @classmethod
    def make(cls, lhs: Mapping[str, int], op: str, k: int, label: str = "") -> "LinAtom":
        return cls(tuple(lhs.items()), op, k, label)

    def variables(self) -> list[str]:
        return [v for v, _ in self.coeffs]

    def holds(self, x: Mapping[str, int]) -> bool:
        s = sum(c * x[v] for v, c in self.coeffs)
        return {"<=": s <= self.k, "<": s < self.k, "=": s == self.k,
                ">=": s >= self.k, ">": s > self.k}[self.op]

    def as_le(self) -> list[tuple[tuple, int]]:
        """Equivalent conjunction of ``sum <= k`` constraints over integers."""
        pos = self.coeffs
        neg = tuple((v, -c) for v, c in self.coeffs)
        if self.op == "<=":
            return [(pos, self.k)]
        if self.op == "<":
            return [(pos, self.k - 1)]
        if self.op == ">=":
            return [(neg, -self.k)]
        if self.op == ">":
            return [(neg, -self.k - 1)]
        return [(pos, self.k), (neg, -self.k)]

    def __str__(self) -> str:
        terms = []
        for v, c in self.coeffs:
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            terms.append(f"{sign} {mag}{v}")
        s = " ".join(terms)
        s = s[2:] if s.startswith("+ ") else "-" + s[2:]
        return f"{s} {self.op} {self.k}"


@dataclass
class LinProblem:
    """Conjunction of disjunctive clauses of :class:`LinAtom`.

    Every variable ranges over ``[0, horizon]`` unless ``bounds`` narrows it;
    ``extra_vars`` declares variables that occur in no atom.
    """

    clauses: list
    horizon: int | None = None
    bounds: dict = field(default_factory=dict)
    extra_vars: tuple = ()

    def variables(self) -> list[str]:
        vs = {v for c in self.clauses for a in c for v in a.variables()}
        vs |= set(self.extra_vars) | set(self.bounds)
        return sorted(vs)

    def var_bounds(self) -> dict[str, tuple[int, int]]:
        out = {}
        for v in self.variables():
            if v in self.bounds:
                out[v] = tuple(self.bounds[v])
            elif self.horizon is not None:
                out[v] = (0, self.horizon)
            else:
                raise UnboundedVariable(v)
        return out


def check_assignment(p: LinProblem, x: Mapping[str, int]) -> bool:
    for v, (lo, hi) in p.var_bounds().items():
        if v not in x or not lo <= x[v] <= hi:
            return False
    return all(any(a.holds(x) for a in c) for c in p.clauses)


# ---------------------------------------------------------------- search

def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _propagate(cons: list, lo: dict, hi: dict) -> bool:
    """Tighten bounds to a fixpoint under ``sum <= k`` constraints."""
    changed = True
    while changed:
        changed = False
        for coeffs, k in cons:
            min_sum = sum(c * (lo[v] if c > 0 else hi[v]) for v, c in coeffs)
            if min_sum > k:
                return False
            slack = k - min_sum
            for v, c in coeffs:
                if c > 0:
                    new_hi = lo[v] + slack // c
                    if new_hi < hi[v]:
                        hi[v] = new_hi
                        changed = True
                else:
                    new_lo = hi[v] - slack // (-c)
                    if new_lo > lo[v]:
                        lo[v] = new_lo
                        changed = True
                if lo[v] > hi[v]:
                    return False
    return True


def _is_difference(coeffs) -> bool:
    if len(coeffs) == 1:
        return abs(coeffs[0][1]) == 1
    return len(coeffs) == 2 and sorted(c for _, c in coeffs) == [-1, 1]


def _difference_bounds(cons: list, lo: dict, hi: dict) -> bool:
    """Exact bounds for a conjunction of difference constraints (Bellman-Ford).

    Detects every infeasibility, including cycles that interval propagation
    would only expose one unit at a time.
    """
    zero = None
    edges = []  # (src, dst, w): dst - src <= w
    for v in lo:
        edges.append((zero, v, hi[v]))
        edges.append((v, zero, -lo[v]))
    for coeffs, k in cons:
        if len(coeffs) == 1:
            v, c = coeffs[0]
            edges.append((zero, v, k) if c > 0 else (v, zero, k))
        else:
            (a, ca), (b, _) = coeffs
            x, y = (a, b) if ca > 0 else (b, a)
            edges.append((y, x, k))
    nodes = list(lo) + [zero]

    def shortest(edge_list):
        dist = {n: None for n in nodes}
        dist[zero] = 0
        for _ in range(len(nodes)):
            changed = False
            for s, d, w in edge_list:
                if dist[s] is not None and (dist[d] is None or dist[s] + w < dist[d]):
                    dist[d] = dist[s] + w
                    changed = True
            if not changed:
                return dist
        return None  # negative cycle

    up = shortest(edges)
    if up is None:
        return False
    down = shortest([(d, s, w) for s, d, w in edges])
    if down is None:
        return False
    for v in lo:
        hi[v] = min(hi[v], up[v])
        lo[v] = max(lo[v], -down[v])
        if lo[v] > hi[v]:
            return False
    return True


def _tighten(cons: list, lo: dict, hi: dict) -> bool:
    if all(_is_difference(co) for co, _ in cons):
        return _difference_bounds(cons, lo, hi)
    return _propagate(cons, lo, hi)


def _status(le_list, lo, hi) -> int:
    """1 certainly true, -1 certainly false, 0 undecided under the bounds."""
    certain = True
    for coeffs, k in le_list:
        mn = sum(c * (lo[v] if c > 0 else hi[v]) for v, c in coeffs)
        if mn > k:
            return -1
        mx = sum(c * (hi[v] if c > 0 else lo[v]) for v, c in coeffs)
        if mx > k:
            certain = False
    return 1 if certain else 0


def _negate_alt(le) -> list:
    """Negation of a conjunction of ``<=`` constraints, as clause alternatives."""
    return [[(tuple((v, -c) for v, c in co), -k - 1)] for co, k in le]


def lin_solve(p: LinProblem, *, node_limit: int | None = None):
    """Integer point satisfying ``p`` (dict var -> int) or ``INFEASIBLE``."""
    bounds = p.var_bounds()
    lo = {v: b[0] for v, b in bounds.items()}
    hi = {v: b[1] for v, b in bounds.items()}
    if any(lo[v] > hi[v] for v in lo):
        return INFEASIBLE
    # each pending clause: list of alternatives, each a conjunction of <= constraints
    pending = [[a.as_le() for a in c] for c in p.clauses]
    if any(not c for c in pending):
        return INFEASIBLE
    counter = [0]
    res = _search(pending, [], lo, hi, counter, node_limit)
    if res is None:
        return INFEASIBLE
    return res


def _search(pending, cons, lo, hi, counter, limit):
    counter[0] += 1
    if limit is not None and counter[0] > limit:
        raise RuntimeError("lin_solve node limit exceeded")
    lo, hi = dict(lo), dict(hi)
    cons = list(cons)
    pending = list(pending)
    while True:
        if not _tighten(cons, lo, hi):
            return None
        rest, unit = [], False
        for alts in pending:
            live = []
            done = False
            for le in alts:
                s = _status(le, lo, hi)
                if s == 1:
                    done = True
                    break
                if s == 0:
                    live.append(le)
            if done:
                continue
            if not live:
                return None
            if len(live) == 1:
                cons.extend(live[0])
                unit = True
            else:
                rest.append(live)
        pending = rest
        if not unit:
            break
    if pending:
        # branch on the clause with fewest live alternatives
        idx = min(range(len(pending)), key=lambda i: len(pending[i]))
        alts = pending[idx]
        others = pending[:idx] + pending[idx + 1:]
        tried = []
        for le in alts:
            res = _search(others + tried, cons + le, lo, hi, counter, limit)
            if res is not None:
                return res
            tried.append(_negate_alt(le))
        return None
    return _label(cons, lo, hi, counter, limit)


def _label(cons, lo, hi, counter, limit):
    free = [v for v in lo if lo[v] < hi[v]]
    if not free:
        x = dict(lo)
        return x if all(sum(c * x[v] for v, c in co) <= k for co, k in cons) else None
    v = min(free, key=lambda u: (hi[u] - lo[u], u))
    for val in range(lo[v], hi[v] + 1):
        counter[0] += 1
        if limit is not None and counter[0] > limit:
            raise RuntimeError("lin_solve node limit exceeded")
        l2, h2 = dict(lo), dict(hi)
        l2[v] = h2[v] = val
        if _tighten(cons, l2, h2):
            res = _label(cons, l2, h2, counter, limit)
            if res is not None:
                return res
    return None
