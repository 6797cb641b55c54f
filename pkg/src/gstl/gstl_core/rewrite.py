"""Formula rewrites: temporal normal form and parameter substitution."""

from __future__ import annotations

from typing import Mapping

from .syntax import (
    Always, And, Eventually, Formula, Not, Or, Param, Term, TimeBound, Until, f_and, f_not,
    f_or, point,
)

__all__ = ["rewrite_temporal", "substitute", "MissingBinding", "BoundOrderViolation",
           "is_reduced"]


class MissingBinding(KeyError):
    pass


class BoundOrderViolation(ValueError):
    pass


def _G(lo, hi, f: Formula) -> Formula:
    return Always(TimeBound(lo, hi), f)


def _at(e, f: Formula) -> Formula:
    return Always(point(e), f)


def rewrite_temporal(f: Formula, horizon: int | None = None) -> Formula:
    """Eliminate Eventually and Until in favour of Always and Boolean structure.

    The result is equivalent to ``f`` at every evaluation point. The m/s/f
    until kinds quantify over their witness positions, so rewriting them
    requires ``horizon`` (the same bound the evaluator uses for the search).
    """
    if isinstance(f, Term):
        return f
    if isinstance(f, Not):
        return f_not(rewrite_temporal(f.arg, horizon))
    if isinstance(f, And):
        return f_and(*(rewrite_temporal(a, horizon) for a in f.args))
    if isinstance(f, Or):
        return f_or(*(rewrite_temporal(a, horizon) for a in f.args))
    if isinstance(f, Always):
        return Always(f.bound, rewrite_temporal(f.arg, horizon))
    if isinstance(f, Eventually):
        return f_not(Always(f.bound, f_not(rewrite_temporal(f.arg, horizon))))
    if isinstance(f, Until):
        return _rewrite_until(f, rewrite_temporal(f.lhs, horizon),
                              rewrite_temporal(f.rhs, horizon), horizon)
    raise TypeError(f"not a formula: {f!r}")


def _rewrite_until(f: Until, phi: Formula, psi: Formula, horizon) -> Formula:
    n_phi, n_psi = f_not(phi), f_not(psi)
    if f.bound is not None:
        a, b = f.bound.lo, f.bound.hi
        if f.kind == "b":
            body = _G(a, b, f_and(n_phi, n_psi))
            first, last = f_and(phi, n_psi), f_and(n_phi, psi)
        else:
            body = _G(a, b, f_and(phi, psi))
            first, last = {
                "o": (f_and(phi, n_psi), f_and(n_phi, psi)),
                "d": (f_and(n_phi, psi), f_and(n_phi, psi)),
                "eq": (f_and(n_phi, n_psi), f_and(n_phi, n_psi)),
            }[f.kind]
        return f_and(body, _at(a - 1, first), _at(b + 1, last))
    if horizon is None:
        raise ValueError(f"rewriting until kind {f.kind!r} needs a horizon")
    H = horizon
    if f.kind == "m":
        cases = [f_and(_at(u - 1, f_and(phi, n_psi)), _at(u, f_and(n_phi, psi)))
                 for u in range(1, H + 1)]
    else:
        start = f_and(n_phi, n_psi) if f.kind == "s" else f_and(n_phi, psi)
        end = f_and(n_phi, psi) if f.kind == "s" else f_and(n_phi, n_psi)
        cases = [f_and(_at(a - 1, start), _G(a, b, f_and(phi, psi)), _at(b + 1, end))
                 for a in range(1, H) for b in range(a + 1, H)]
    return f_or(*cases) if cases else Term(_false())


def _false():
    from .syntax import BoolConst
    return BoolConst(False)


def is_reduced(f: Formula) -> bool:
    """True when only Term/Not/And/Or/Always occur."""
    if isinstance(f, Term):
        return True
    if isinstance(f, Not):
        return is_reduced(f.arg)
    if isinstance(f, (And, Or)):
        return all(is_reduced(a) for a in f.args)
    if isinstance(f, Always):
        return is_reduced(f.arg)
    return False


def _sub_end(e, bindings):
    if isinstance(e, Param):
        if e.name not in bindings:
            raise MissingBinding(e.name)
        return int(bindings[e.name]) + e.offset
    return e


def _sub_bound(b: TimeBound, bindings) -> TimeBound:
    lo, hi = _sub_end(b.lo, bindings), _sub_end(b.hi, bindings)
    if isinstance(lo, int) and isinstance(hi, int) and lo > hi:
        raise BoundOrderViolation(f"[{lo},{hi}] after substitution")
    return TimeBound(lo, hi)


def substitute(f: Formula, bindings: Mapping[str, int]) -> Formula:
    """Replace symbolic bound parameters by integers."""
    if isinstance(f, Term):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.arg, bindings))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(substitute(a, bindings) for a in f.args))
    if isinstance(f, (Always, Eventually)):
        return type(f)(_sub_bound(f.bound, bindings), substitute(f.arg, bindings))
    if isinstance(f, Until):
        b = _sub_bound(f.bound, bindings) if f.bound is not None else None
        return Until(f.kind, b, substitute(f.lhs, bindings), substitute(f.rhs, bindings))
    raise TypeError(f"not a formula: {f!r}")
