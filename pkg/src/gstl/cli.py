"""``gstl`` command line: synth | mine | plan | verify | solve | check | eval.

Exit codes: 0 ok, 1 usage or I/O, 2 parse error, 3 infeasible or unsolvable.
Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import domain_theory as dtm
from . import miner, planner, scenarios, verifier
from .config import Config, ConfigError, load_config
from .gstl_core import ParseError, parse, render
from .gstl_core.parser import render_term
from .gstl_core.semantics import OutOfTrace, SymbolicFormula, TraceModel, eval_formula
from .gstl_core.syntax import params_of, walk
from .spatial_model import FormatError, UnknownClass, UnknownNode, load_ontology, load_trace

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- helpers

def _emit(obj, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n" if not isinstance(obj, str) else obj
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args) -> Config:
    cfg = load_config(args.config) if getattr(args, "config", None) else Config()
    over = {k: getattr(args, k, None) for k in ("d", "eps_dist", "eps", "horizon", "deadline", "gap",
                                                "hold", "move_time")}
    return cfg.replace(**over)


def _ontology(args):
    return load_ontology(args.ontology) if getattr(args, "ontology", None) else scenarios.ontology()


def _snapshot(args):
    if getattr(args, "snapshot", None):
        return load_trace(args.snapshot).frames[0]
    return scenarios.initial_snapshot()


def _names(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def _task(args, dt) -> dict:
    """Initial terms, goals, task formula and optional deadline/horizon."""
    task = {}
    if getattr(args, "task_file", None):
        task = json.loads(Path(args.task_file).read_text())
    if getattr(args, "init", None):
        task["initial"] = _names(args.init)
    if getattr(args, "goals", None):
        task["goals"] = _names(args.goals)
    if getattr(args, "task", None):
        task["task"] = args.task
    if isinstance(task.get("task"), str):
        task["task"] = parse(task["task"], names=set(dt.terms))
    return task


def _vconfig(cfg: Config) -> verifier.VerifierConfig:
    return verifier.VerifierConfig(cfg.hold, cfg.move_time, cfg.eps_dist)


def _time_bounds(args, cfg: Config, task: dict) -> tuple[int, int | None]:
    horizon = args.horizon if args.horizon is not None else task.get("horizon", cfg.horizon)
    deadline = args.deadline if args.deadline is not None else task.get("deadline")
    if deadline is None and task.get("task") is None:
        deadline = cfg.deadline
    return int(horizon), deadline


# ---------------------------------------------------------------- commands

def cmd_synth(args) -> int:
    try:
        tr = scenarios.synth(args.scenario)
    except scenarios.UnknownScenario:
        raise UsageError(f"unknown scenario {args.scenario!r}; known: {sorted(scenarios.SCENARIOS)}")
    _emit(tr.to_dict(), args.out)
    return EXIT_OK


def cmd_mine(args) -> int:
    cfg = _config(args)
    o = _ontology(args)
    mcfg = miner.MinerConfig(d=cfg.d, eps=cfg.eps, gap=cfg.gap)
    traces = [load_trace(p) for p in args.traces]
    for tr, p in zip(traces, args.traces):
        if not tr.source:
            object.__setattr__(tr, "source", Path(p).stem)
    results = [miner.mine_trace(tr, o, mcfg) for tr in traces]
    grounded = [a for r in results for a in r.actions]
    facts = [f for r in results for f in r.always]
    dt = dtm.DomainTheory.from_mined(miner.parameterize(grounded), facts)
    _emit(dtm.dumps(dt), args.out)
    if args.report:
        _emit({"traces": [{
            "source": tr.source,
            "always": [{"term": render_term(f.term), "interval": list(f.interval)} for f in r.always],
            "chains": [{"pre": render_term(a.pre.term), "hand": render_term(a.hand.term),
                        "post": render_term(a.post.term), "overlap1": list(a.overlap1),
                        "overlap2": list(a.overlap2)} for a in r.actions],
        } for tr, r in zip(traces, results)]}, args.report)
    return EXIT_OK


def _plans(dt, task, max_levels: int, levels: int | None):
    actions = dt.compiled()
    if levels is None:
        return planner.plan(task["initial"], task["goals"], actions, max_levels)
    g = planner.initial_graph(task["initial"], actions)
    for _ in range(levels):
        planner.expand(g)
    return planner.extract(g, task["goals"], levels)


def cmd_plan(args) -> int:
    dt = dtm.load(args.domain)
    task = _task(args, dt)
    if "initial" not in task or "goals" not in task:
        raise UsageError("plan needs initial terms and goals (--task-file or --init/--goals)")
    plans = _plans(dt, task, args.max_levels, args.levels)
    _emit({"plans": [p.to_dict() for p in plans]}, args.out)
    return EXIT_OK


def _verify_one(dt, plan, task, args, cfg):
    horizon, deadline = _time_bounds(args, cfg, task)
    return verifier.verify(plan, dt, task.get("task"), _snapshot(args), _ontology(args),
                           horizon, deadline, _vconfig(cfg))


def cmd_verify(args) -> int:
    cfg = _config(args)
    dt = dtm.load(args.domain)
    task = _task(args, dt)
    res = _verify_one(dt, _names(args.plan), task, args, cfg)
    _emit(res.to_dict(), args.out)
    return EXIT_INFEASIBLE if isinstance(res, verifier.Counterexample) else EXIT_OK


def _plan_cost(dt, p, cfg: Config) -> tuple:
    """Total move time, then how many steps rely on hand-stated effects."""
    acts = [dt.actions[n] for n in p.linear]
    moves = sum(cfg.move_time if a.move_time is None else a.move_time for a in acts)
    annotated = sum(a.add is not None or a.delete is not None for a in acts)
    return (moves, annotated, p.linear)


def cmd_solve(args) -> int:
    """Propose plans, verify each in order, stop at the first accepted one."""
    cfg = _config(args)
    dt = dtm.load(args.domain)
    task = _task(args, dt)
    if "initial" not in task or "goals" not in task:
        raise UsageError("solve needs initial terms and goals")
    plans = _plans(dt, task, args.max_levels, None)
    if args.order == "cost":
        plans = sorted(plans, key=lambda p: _plan_cost(dt, p, cfg))
    rejected = []
    for p in plans:
        res = _verify_one(dt, p.linear, task, args, cfg)
        if isinstance(res, verifier.ExecutablePlan):
            _emit({"plan": list(p.linear), "schedule": res.to_dict(), "rejected": rejected}, args.out)
            return EXIT_OK
        rejected.append({"plan": list(p.linear), **res.to_dict()})
    _emit({"plan": None, "schedule": None, "rejected": rejected}, args.out)
    return EXIT_INFEASIBLE


def _fact_horizon(dt) -> int:
    hi = 0
    for f in dt.facts.values():
        for node in walk(f):
            b = getattr(node, "bound", None)
            if b is not None and isinstance(b.hi, int):
                hi = max(hi, b.hi)
    return hi


def cmd_check(args) -> int:
    cfg = _config(args)
    dt = dtm.load(args.domain)
    if args.schedule:
        task = _task(args, dt)
        horizon, deadline = _time_bounds(args, cfg, task)
        p = verifier.build_problem(_names(args.plan), dt, task.get("task"), horizon, deadline,
                                   _vconfig(cfg))
        verifier.compile_temporal(p)
        sched = verifier.schedule_from_dict(p, json.loads(Path(args.schedule).read_text()))
        bad = verifier.check_schedule(p, sched)
        if not bad:
            res = verifier.attach_spatial_model(p, sched, _snapshot(args), _ontology(args))
            if isinstance(res, verifier.Counterexample):
                bad = [f"no spatial model: {c}" for c in res.conflict]
            else:
                bad = verifier.check_schedule(p, sched, _snapshot(args), _ontology(args))
        _emit({"valid": not bad, "violations": bad}, args.out)
        return EXIT_OK if not bad else EXIT_INFEASIBLE
    horizon = max(args.horizon or cfg.horizon, _fact_horizon(dt))
    ok, pair = dtm.check_consistency(dt, horizon, config=_vconfig(cfg))
    _emit({"consistent": ok, "pair": list(pair) if pair else None, "horizon": horizon}, args.out)
    return EXIT_OK if ok else EXIT_INFEASIBLE


def cmd_eval(args) -> int:
    cfg = _config(args)
    defs = dtm.load(args.domain).terms if args.domain else None
    phi = parse(args.formula, names=set(defs) if defs else ())
    if params_of(phi):
        raise SymbolicFormula("formula has symbolic bounds")
    tr = load_trace(args.trace)
    model = TraceModel(tr, _ontology(args), cfg.eps_dist, cfg.eps)
    ts = [args.t] if args.t is not None else [f.t for f in tr.frames]
    out = []
    for t in ts:
        try:
            out.append({"t": t, "value": eval_formula(model, None, t, phi, defs=defs)})
        except OutOfTrace:
            if args.t is not None:
                raise
            out.append({"t": t, "value": None})
    _emit({"formula": render(phi), "results": out}, args.out)
    return EXIT_OK


# ---------------------------------------------------------------- argument parsing

def _common(p, *, thresholds=False, times=False):
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("-o", "--out", help="output path (default: stdout)")
    if thresholds:
        p.add_argument("--d", type=float, help="connectivity threshold for mining")
        p.add_argument("--eps-dist", type=float, dest="eps_dist", help="neighbor threshold")
        p.add_argument("--eps", type=float, help="interval endpoint tolerance")
        p.add_argument("--ontology", help="ontology JSON (default: built-in kitchen ontology)")
    if times:
        p.add_argument("--horizon", type=int)
        p.add_argument("--deadline", type=int)
        p.add_argument("--hold", type=int, help="frames a post-condition outlasts its move")
        p.add_argument("--move-time", type=int, dest="move_time")
        p.add_argument("--snapshot", help="trace whose first frame is the grounding universe")


def _task_args(p):
    p.add_argument("--task-file", help="JSON with initial, goals, task, deadline, horizon")
    p.add_argument("--init", help="comma-separated initial terms")
    p.add_argument("--goals", help="comma-separated goal terms")
    p.add_argument("--task", help="task formula, e.g. 'F[0,40] (s1_star & s2_star)'")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gstl", description="Spatial-temporal task mining, planning and verification")
    ap.add_argument("--version", action="version", version=f"gstl {__version__}")
    sub = ap.add_subparsers(dest="cmd", parser_class=_Parser)

    p = sub.add_parser("synth", help="render a scripted scenario into a trace")
    p.add_argument("scenario")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mine", help="mine a domain theory from traces")
    p.add_argument("traces", nargs="+")
    p.add_argument("--gap", type=int)
    p.add_argument("--report", help="also write mined Always formulas and chains as JSON")
    _common(p, thresholds=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("plan", help="propose plans with the planning graph")
    p.add_argument("domain")
    _task_args(p)
    p.add_argument("--levels", type=int, help="extract at exactly this many action levels")
    p.add_argument("--max-levels", type=int, default=10, dest="max_levels")
    _common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="schedule an ordered plan or report why it cannot be")
    p.add_argument("domain")
    p.add_argument("--plan", required=True, help="comma-separated action names in order")
    _task_args(p)
    _common(p, thresholds=True, times=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="plan, then verify plans until one is accepted")
    p.add_argument("domain")
    _task_args(p)
    p.add_argument("--max-levels", type=int, default=10, dest="max_levels")
    p.add_argument("--order", choices=("cost", "proposer"), default="cost",
                   help="try cheapest plans first, or keep the planner's order")
    _common(p, thresholds=True, times=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="theory consistency, or validate a schedule file")
    p.add_argument("domain")
    p.add_argument("--schedule", help="schedule JSON to validate (needs --plan)")
    p.add_argument("--plan", default="")
    _task_args(p)
    _common(p, thresholds=True, times=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="evaluate a formula on a trace")
    p.add_argument("formula")
    p.add_argument("trace")
    p.add_argument("--t", type=int, help="frame (default: every frame)")
    p.add_argument("--domain", help="theory whose term names the formula may use")
    _common(p, thresholds=True)
    p.set_defaults(func=cmd_eval)
    return ap


def _fail(code: int, kind: str, message: str, **extra) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("missing subcommand")
        return args.func(args)
    except UsageError as e:
        return _fail(EXIT_USAGE, "usage", str(e))
    except ParseError as e:
        return _fail(EXIT_PARSE, "parse", str(e), line=e.line, col=e.col)
    except (planner.NoSolution, planner.Unsolvable, planner.PlanningExhausted) as e:
        return _fail(EXIT_INFEASIBLE, "unsolvable", str(e) or type(e).__name__)
    except (OSError, json.JSONDecodeError, FormatError, ConfigError, UnknownClass, UnknownNode,
            OutOfTrace, SymbolicFormula, dtm.UnknownTerm, verifier.UnknownAction, ValueError,
            KeyError) as e:
        return _fail(EXIT_USAGE, type(e).__name__, str(e))


if __name__ == "__main__":
    sys.exit(main())
