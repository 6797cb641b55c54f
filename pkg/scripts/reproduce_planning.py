#!/usr/bin/env python3
"""Plan and verify the table-setting task.

Runs the planning graph at two and three levels, verifies every extracted
plan against the 40 s deadline, then repeats the slow-plate variant with a
60 s deadline.
"""

import json
import sys
from pathlib import Path

from gstl import domain_theory
from gstl.gstl_core import parse
from gstl.planner import NoSolution, expand, extract, initial_graph
from gstl.scenarios import initial_snapshot, ontology
from gstl.verifier import ExecutablePlan, verify

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def report(label, res):
    if isinstance(res, ExecutablePlan):
        print(f"  {label}: feasible, makespan {res.makespan}")
        for a in res.actions:
            print(f"    {a.name}: pre {list(a.pre)} hand {list(a.hand)} post {list(a.post)}")
    else:
        print(f"  {label}: infeasible ({res.phase}); conflict: {'; '.join(res.conflict[:4])} ...")


def main() -> int:
    spec = json.loads((FIXTURES / "table_setting_task.json").read_text())
    theory = domain_theory.load(FIXTURES / "table_setting.gstl")
    slow = domain_theory.load(FIXTURES / "table_setting_plate10.gstl")
    task = parse(spec["task"])
    snap, o = initial_snapshot(), ontology()

    g = initial_graph(spec["initial"], theory.compiled())
    for levels in (1, 2, 3):
        expand(g)
        try:
            plans = extract(g, spec["goals"])
        except NoSolution:
            print(f"{levels} action levels: no plan")
            continue
        print(f"{levels} action levels: {[list(p.linear) for p in plans]}")
        break

    print("verification, deadline 40:")
    for p in plans:
        report(",".join(p.linear), verify(p.linear, theory, task, snap, o, horizon=spec["horizon"]))
    print("10 s plate move:")
    plan = ("a1", "a4", "a3")
    report("deadline 40", verify(plan, slow, task, snap, o, horizon=60))
    report("deadline 60", verify(plan, slow, None, snap, o, horizon=60, deadline=60))
    return 0


if __name__ == "__main__":
    sys.exit(main())
