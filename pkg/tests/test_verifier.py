import random

import pytest

from gstl.constraint_solvers import check_assignment, lin_solve, sat_solve
from gstl.domain_theory import ActionDef, DomainTheory
from gstl.gstl_core import parse
from gstl.gstl_core.parser import parse_term
from gstl.gstl_core.syntax import TRUE, Ref, Term, Until
from gstl.verifier import (
    Counterexample, ExecutablePlan, UnknownAction, UnreducedFormula, VerifierConfig,
    attach_spatial_model, build_problem, check_schedule, compile_temporal, ground_spatial,
    linearize_plan, schedule_from_assignment, schedule_from_dict, solve_temporal, verify,
)
from oracles import schedule_exists

PLAN = ("a3", "a2", "a1")

# the published schedule for the feasible plan: one second per frame,
# five-second moves, grasp one frame after each pre window opens
REPORTED_WINDOWS = {"s3": (1, 7), "a3h": (2, 13), "s3_star": (8, 14),
                 "s2": (13, 19), "a2h": (14, 25), "s2_star": (20, 26),
                 "s1": (25, 31), "a1h": (26, 37), "s1_star": (32, 38)}
REPORTED_GAPS = [(13, 14), (25, 26)]
REPORTED_T0 = {"a3": 1, "a2": 13, "a1": 25}


def reported_schedule(p):
    acts = []
    for n in PLAN:
        t0 = REPORTED_T0[n]
        u, w = t0 + 1, t0 + 7
        acts.append({"name": n, "pre": [t0, u + 5], "hand": [u, w + 5], "post": [w, w + 6]})
    return schedule_from_dict(p, {"actions": acts, "windows": REPORTED_WINDOWS,
                                  "gaps": REPORTED_GAPS, "makespan": 37})


def reported_assignment():
    x = {}
    for n, (lo, hi) in REPORTED_WINDOWS.items():
        x[f"lo[{n}]"], x[f"hi[{n}]"] = lo, hi
    for n, t0 in REPORTED_T0.items():
        x[f"t0[{n}]"], x[f"u[{n}]"], x[f"w[{n}]"] = t0, t0 + 1, t0 + 7
    x.update({"e1": 13, "e2": 14, "e3": 25, "e4": 26})
    return x


# ---------------------------------------------------------------- formula side

def test_linearize(theory):
    f = linearize_plan(PLAN, theory)
    parts = f.args
    assert [type(u) for u in parts] == [Until, Until]
    assert [(u.kind, u.lhs, u.rhs) for u in parts] == [
        ("b", Term(Ref("a3h")), Term(Ref("a2h"))), ("b", Term(Ref("a2h")), Term(Ref("a1h")))]
    assert linearize_plan(("a1",), theory) == Term(Ref("a1h"))
    assert linearize_plan((), theory) == TRUE
    with pytest.raises(UnknownAction):
        linearize_plan(("a9",), theory)


def test_compiled_system_accepts_reported_assignment(theory, task):
    p = build_problem(PLAN, theory, task, horizon=60)
    lp = compile_temporal(p)
    labels = {a.label for c in lp.clauses for a in c}
    assert "a3: motion ends by deadline" in labels and "chain: e1 < e2" in labels
    assert check_assignment(lp, reported_assignment())
    late = reported_assignment()
    late["w[a1]"] += 10
    assert not check_assignment(lp, late)


def test_task_only_deadline(theory):
    p = build_problem((), theory, parse("F[0,40] s1_star", names=theory.terms), horizon=60)
    lp = compile_temporal(p)
    x = lin_solve(lp)
    assert x["lo[s1_star]"] <= 40
    assert any("lo[s1_star]" in str(a) for c in lp.clauses for a in c)


def test_empty_problem_feasible(theory):
    lp = compile_temporal(build_problem((), theory, None, horizon=10))
    assert lp.clauses == [] and lin_solve(lp) == {}


def test_unreduced_formula(theory):
    p = build_problem((), theory, parse("G[0,5] (G[0,2] s1)", names=theory.terms), horizon=20)
    with pytest.raises(UnreducedFormula):
        compile_temporal(p)


def test_plan_restrictions(theory):
    with pytest.raises(ValueError):
        build_problem(("a1", "a1"), theory, None, 60)
    with pytest.raises(UnknownAction):
        build_problem(("zz",), theory, None, 60)


# ---------------------------------------------------------------- spatial side

def test_ground_spatial_trivia(theory, kitchen, snapshot0):
    sp = ground_spatial({}, snapshot0, kitchen, {})
    assert sp.cnf.n_vars == 0 and sat_solve(sp.cnf) == []
    terms = {"s3": theory.resolved("s3")}
    one = ground_spatial({"s3": (4, 4)}, snapshot0, kitchen, terms)
    two = ground_spatial({"s3": (4, 5)}, snapshot0, kitchen, terms)
    body = lambda sp: sum(len(ix) for d, ix in sp.groups if d != "consistency")  # noqa: E731
    assert body(two) == 2 * body(one)
    assert {a.t for a in one.atoms} == {4}


def test_spatial_counterexample_for_absent_label(kitchen, snapshot0):
    dt = DomainTheory(
        terms={"p": parse_term("CE2 (bowl & NE^left fork)"), "h": parse_term("CE2 (hand & NE<*,*,*> bowl)"),
               "q": parse_term("CE2 (bowl & NE^right fork)")},
        actions={"a": ActionDef("a", "p", "h", "q", 3)})
    res = verify(("a",), dt, None, snapshot0, kitchen, horizon=30, deadline=20)
    assert isinstance(res, Counterexample) and res.phase == "spatial"
    assert res.conflict and all("@" in c for c in res.conflict)
    assert res.to_dict()["infeasible"]["phase"] == "spatial"


# ---------------------------------------------------------------- end to end

def test_feasible_fixture(theory, task, kitchen, snapshot0):
    res = verify(PLAN, theory, task, snapshot0, kitchen, horizon=60)
    assert isinstance(res, ExecutablePlan)
    assert res.makespan <= 40
    p = build_problem(PLAN, theory, task, 60)
    compile_temporal(p)
    assert check_schedule(p, res, snapshot0, kitchen) == []
    d = res.to_dict()
    assert [a["name"] for a in d["actions"]] == list(PLAN)


def test_reported_schedule_accepted(theory, task, kitchen, snapshot0):
    p = build_problem(PLAN, theory, task, 60)
    s = reported_schedule(p)
    assert check_schedule(p, s) == []
    s = attach_spatial_model(p, s, snapshot0, kitchen)
    assert isinstance(s, ExecutablePlan)
    assert check_schedule(p, s, snapshot0, kitchen) == []


def test_infeasible_plate10(theory_plate10, task, kitchen, snapshot0):
    res = verify(("a1", "a4", "a3"), theory_plate10, task, snapshot0, kitchen, horizon=60)
    assert isinstance(res, Counterexample) and res.phase == "temporal"
    assert any("deadline" in c for c in res.conflict)
    assert not schedule_exists((5, 10, 5), 40, 60)
    ok = verify(("a1", "a4", "a3"), theory_plate10, None, snapshot0, kitchen, horizon=60, deadline=60)
    assert isinstance(ok, ExecutablePlan)
    assert schedule_exists((5, 10, 5), 60, 60)


def test_zero_deadline(theory, kitchen, snapshot0):
    res = verify(PLAN, theory, None, snapshot0, kitchen, horizon=60, deadline=0)
    assert isinstance(res, Counterexample) and res.phase == "temporal"


@pytest.mark.parametrize("tamper", ["window", "gap", "makespan", "order", "atom", "deadline"])
def test_tampered_schedules_rejected(tamper, theory, task, kitchen, snapshot0):
    p = build_problem(PLAN, theory, task, 60)
    s = verify(PLAN, theory, task, snapshot0, kitchen, horizon=60)
    compile_temporal(p)
    if tamper == "window":
        lo, hi = s.windows["s2"]
        s.windows["s2"] = (lo + 1, hi)
    elif tamper == "gap":
        s.gaps[0] = (s.gaps[0][1], s.gaps[0][1])
    elif tamper == "makespan":
        s.makespan += 1
    elif tamper == "order":
        s.actions.reverse()
    elif tamper == "atom":
        label = next(a for a in s.spatial_model if a.kind == "rel")
        s.spatial_model = {a: (not v if a == label else v) for a, v in s.spatial_model.items()}
        # flipping a relation atom must break a term or the pair symmetry
    elif tamper == "deadline":
        p.deadline = s.makespan - 6
    assert check_schedule(p, s, snapshot0, kitchen) != []


# ---------------------------------------------------------------- random plans vs brute force

def random_theory(rng, n):
    terms, actions = {}, {}
    for i in range(n):
        for part in ("pre", "hand", "post"):
            terms[f"{part}{i}"] = parse_term(f"x{i}{part}")
        actions[f"a{i}"] = ActionDef(f"a{i}", f"pre{i}", f"hand{i}", f"post{i}", rng.randint(1, 6))
    return DomainTheory(terms, {}, actions)


def test_temporal_phase_vs_brute_force():
    rng = random.Random(37)
    for _ in range(150):
        n = rng.randint(1, 3)
        dt = random_theory(rng, n)
        eps = rng.randint(1, 2)
        deadline = rng.randint(3, 40)
        horizon = deadline + rng.randint(0, 8)
        plan = tuple(rng.sample(sorted(dt.actions), n))
        p = build_problem(plan, dt, None, horizon, deadline, VerifierConfig(epsilon=eps))
        res = solve_temporal(compile_temporal(p))
        moves = tuple(dt.actions[a].move_time for a in plan)
        assert (not isinstance(res, Counterexample)) == schedule_exists(moves, deadline, horizon, eps)
        if not isinstance(res, Counterexample):
            assert check_schedule(p, schedule_from_assignment(p, res[1])) == []
