import pytest

from gstl.config import Config, ConfigError, load_config, parse_config
from gstl.scenarios import FAMILY, SCENARIOS, Scenario, UnknownScenario, box, jitter, synth


def test_overlapping_moves_rejected():
    with pytest.raises(ValueError):
        Scenario("x", {"c": "cup"}, {"c": [(5, box(0, 0, 0)), (5, box(1, 0, 0))]})
    with pytest.raises(ValueError):
        Scenario("x", {"c": "cup"}, {"c": [(5, box(0, 0, 0)), (2, box(1, 0, 0))]})


def test_box_at_and_absence():
    s = Scenario("x", {"c": "cup"}, {"c": [(3, box(0, 0, 0)), (6, None)]}, 1, 8)
    tr = s.render()
    assert [len(f.objects) for f in tr.frames] == [0, 0, 1, 1, 1, 0, 0, 0]
    assert tr.units == "dm"


def test_jitter_deterministic_and_keeps_short_steps():
    keys = {"a": 10, "b": 11, "c": 40, "d": 70}
    j = jitter(keys, 5)
    assert j == jitter(keys, 5)
    assert j["a"] == 10 and j["b"] == 11
    assert list(j.values()) == sorted(j.values())


def test_registry():
    assert set(FAMILY) <= set(SCENARIOS)
    assert synth("table-setting-v1") == synth("table-setting-v1")
    assert synth("table-setting-v1") != synth("table-setting-v1-j1")
    with pytest.raises(UnknownScenario):
        synth("nope")


def test_parse_config(tmp_path):
    c = parse_config("# run\nhorizon = 80\n d=0.5  # mining\n")
    assert c.horizon == 80 and c.d == 0.5 and c.deadline == Config().deadline
    p = tmp_path / "c.cfg"
    p.write_text("deadline = 30\n")
    assert load_config(p).deadline == 30


@pytest.mark.parametrize("text", ["colour = red", "horizon = ten", "horizon", "deadline = 90",
                                  "gap = -1", "hold = 0"])
def test_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_replace_ignores_none():
    c = Config().replace(horizon=None, deadline=20)
    assert c.horizon == Config().horizon and c.deadline == 20
