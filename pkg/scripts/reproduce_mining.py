#!/usr/bin/env python3
"""Mine the scripted table-setting trace and the six-trace family.

Prints the Always intervals of the named table-setting terms, the three
until chains of the first trace, and the action schemas mined from the
whole family.
"""

import sys
import time
from pathlib import Path

from gstl import domain_theory
from gstl.gstl_core.parser import render_term
from gstl.miner import mine, mine_trace
from gstl.scenarios import ontology, synth, trace_family

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "table_setting.gstl"


def main() -> int:
    theory = domain_theory.load(FIXTURE)
    names = {render_term(theory.resolved(n)): n for n in theory.terms}
    o = ontology()

    t0 = time.perf_counter()
    res = mine_trace(synth("table-setting-v1"), o)
    elapsed = time.perf_counter() - t0
    print(f"table-setting-v1: {len(res.always)} Always formulas mined in {elapsed:.2f} s")
    for f in sorted(res.always, key=lambda f: f.interval):
        name = names.get(render_term(f.term))
        if name:
            print(f"  G[{f.interval[0]},{f.interval[1]}] {name:8s} {render_term(f.term)}")
    print("until chains:")
    for a in res.actions:
        print(f"  {names[render_term(a.pre.term)]} Uo {names[render_term(a.hand.term)]} "
              f"Uo {names[render_term(a.post.term)]}  overlaps {list(a.overlap1)} {list(a.overlap2)}")

    dt = mine(trace_family(), o)
    known = {theory.schema(n): n for n in theory.actions}
    print(f"six-trace family: {len(dt.actions)} action schemas")
    for n in sorted(dt.actions):
        s = dt.schema(n)
        print(f"  {n}: {names[render_term(s.pre)]} -> {names[render_term(s.hand)]} -> "
              f"{names[render_term(s.post)]}  (theory action {known.get(s, 'none')})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
