import json

import pytest

from gstl.cli import main


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err
    return _run


@pytest.fixture
def paths(fixtures_dir):
    return {"dt": fixtures_dir / "table_setting.gstl", "dt10": fixtures_dir / "table_setting_plate10.gstl",
            "task": fixtures_dir / "table_setting_task.json"}


@pytest.fixture(scope="module")
def v1_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("cli") / "v1.json"
    assert main(["synth", "table-setting-v1", "-o", str(p)]) == 0
    return p


def test_synth(run, tmp_path):
    code, out, _ = run("synth", "empty")
    assert code == 0 and len(json.loads(out)["frames"]) == 1
    code, _, err = run("synth", "no-such-scene")
    assert code == 1 and json.loads(err)["error"] == "usage"


def test_missing_subcommand(run):
    assert run()[0] == 1


def test_mine_with_report(run, v1_file, tmp_path):
    rep = tmp_path / "rep.json"
    code, out, _ = run("mine", v1_file, "--report", rep)
    assert code == 0
    assert out.count("action a") == 3
    chains = json.loads(rep.read_text())["traces"][0]["chains"]
    assert [c["hand"] for c in chains] == ["CE2 (hand & NE<*,*,*> cup)", "CE2 (hand & NE<*,*,*> plate)",
                                           "CE2 (hand & NE<*,*,*> spoon)"]


def test_plan(run, paths):
    code, out, _ = run("plan", paths["dt"], "--task-file", paths["task"])
    assert code == 0
    assert sorted(p["linear"] for p in json.loads(out)["plans"]) == [["a1", "a4", "a3"], ["a3", "a2", "a1"]]
    code, _, err = run("plan", paths["dt"], "--task-file", paths["task"], "--levels", "2")
    assert code == 3 and json.loads(err)["error"] == "unsolvable"
    assert run("plan", paths["dt"], "--init", "s1")[0] == 1


def test_verify(run, paths):
    code, out, _ = run("verify", paths["dt"], "--plan", "a3,a2,a1", "--task-file", paths["task"])
    assert code == 0 and [a["name"] for a in json.loads(out)["actions"]] == ["a3", "a2", "a1"]
    code, out, _ = run("verify", paths["dt10"], "--plan", "a1,a4,a3", "--task-file", paths["task"])
    assert code == 3 and json.loads(out)["infeasible"]["phase"] == "temporal"
    assert run("verify", paths["dt"], "--plan", "a9", "--task-file", paths["task"])[0] == 1


def test_solve(run, paths):
    code, out, _ = run("solve", paths["dt"], "--task-file", paths["task"])
    d = json.loads(out)
    assert code == 0 and d["plan"] == ["a3", "a2", "a1"] and d["rejected"] == []
    code, out, _ = run("solve", paths["dt10"], "--task-file", paths["task"], "--order", "proposer")
    d = json.loads(out)
    assert code == 0 and d["plan"] == ["a3", "a2", "a1"]
    assert [r["plan"] for r in d["rejected"]] == [["a1", "a4", "a3"]]


def test_check(run, paths, tmp_path):
    code, out, _ = run("check", paths["dt"])
    assert code == 0 and json.loads(out)["consistent"]
    sched = tmp_path / "s.json"
    run("verify", paths["dt"], "--plan", "a3,a2,a1", "--task-file", paths["task"], "-o", sched)
    args = ("check", paths["dt"], "--schedule", sched, "--plan", "a3,a2,a1", "--task-file", paths["task"])
    code, out, _ = run(*args)
    assert code == 0 and json.loads(out) == {"valid": True, "violations": []}
    d = json.loads(sched.read_text())
    d["makespan"] += 3
    sched.write_text(json.dumps(d))
    code, out, _ = run(*args)
    assert code == 3 and json.loads(out)["violations"]


def test_eval(run, v1_file):
    code, out, _ = run("eval", "CE2 (cup & NE^top plate)", v1_file, "--t", "200")
    assert code == 0 and json.loads(out)["results"] == [{"t": 200, "value": True}]
    code, out, _ = run("eval", "CE2 (cup & NE^top plate)", v1_file, "--t", "10")
    assert json.loads(out)["results"][0]["value"] is False


def test_parse_error_exit_code(run, v1_file):
    code, _, err = run("eval", "CE2 (cup & ", v1_file)
    e = json.loads(err)
    assert code == 2 and e["error"] == "parse" and e["line"] == 1


def test_outputs_are_deterministic(run, paths, tmp_path):
    outs = []
    for k in range(2):
        t = tmp_path / f"t{k}.json"
        run("synth", "table-setting-v2-j1", "-o", t)
        run("mine", t, "-o", tmp_path / f"m{k}.gstl")
        run("solve", paths["dt"], "--task-file", paths["task"], "-o", tmp_path / f"s{k}.json")
        outs.append([(tmp_path / f"{x}{k}.{e}").read_bytes() for x, e in (("t", "json"), ("m", "gstl"), ("s", "json"))])
    assert outs[0] == outs[1]
