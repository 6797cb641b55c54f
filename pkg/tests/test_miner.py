import random

from gstl.gstl_core.parser import parse_term
from gstl.gstl_core.syntax import Parent, RelPattern
from gstl.interval_algebra import Box3, classify_neighbor
from gstl.miner import (
    AlwaysFormula, FrameTermSet, GroundedAction, MinerConfig, mine, mine_actions, mine_always,
    mine_frame_terms, mine_trace, merge_runs, pair_term, parameterize, parthood_term,
)
from gstl.scenarios import ontology
from gstl.spatial_model import EMPTY, Snapshot, Trace, WorldObject
from oracles import SMALL_ONTOLOGY, rand_trace, scene_term_oracle


def cube(x, y, z, s=1.0):
    return Box3.from_bounds((x, x + s), (y, y + s), (z, z + s))


def test_frame_terms_cup_behind_plate():
    s = Snapshot(0, (WorldObject("cup", "cup", cube(0, 0, 0)), WorldObject("plate", "plate", cube(0, 1.1, 0))))
    terms = mine_frame_terms(s, ontology(), 0.3).terms
    assert parse_term("CE2 (cup & NE^back plate)") in terms
    assert parse_term("CE2 (plate & NE^front cup)") in terms
    assert parthood_term("tool") in terms


def test_frame_terms_hand_grasp():
    hand, cup = cube(0, 0, 0, 0.4), cube(0.5, 0.5, -0.2)
    s = Snapshot(0, (WorldObject("hand", "hand", hand), WorldObject("cup", "cup", cup)))
    terms = mine_frame_terms(s, ontology(), 0.3).terms
    r = classify_neighbor(hand, cup)
    assert pair_term("hand", RelPattern.exact(r), "cup") in terms
    assert pair_term("hand", RelPattern.any(), "cup") in terms
    assert pair_term("hand", RelPattern.any(), Parent("E", parse_term("tool"))) in terms


def test_empty_frame_has_only_parthood_of_empties():
    s = Snapshot(0, (WorldObject("slot", EMPTY, cube(0, 0, 0)),))
    assert mine_frame_terms(s, ontology()).terms == {parthood_term("vacancy")}
    assert mine_frame_terms(Snapshot(0, ()), ontology()).terms == frozenset()


def test_merge_runs():
    same = frozenset({"x"})
    assert merge_runs([FrameTermSet(t, same) for t in range(36)]) == [(0, 35, same)]
    alt = [FrameTermSet(t, frozenset({t % 2})) for t in range(4)]
    assert len(merge_runs(alt)) == 4
    assert merge_runs([FrameTermSet(3, same)]) == [(3, 3, same)]


def test_mine_always_maximal_and_gap():
    x = parse_term("cup")
    runs = [(1, 5, frozenset({x})), (6, 9, frozenset()), (10, 12, frozenset({x}))]
    assert [f.interval for f in mine_always(runs)] == [(1, 5), (10, 12)]
    assert [f.interval for f in mine_always(runs, gap=4)] == [(1, 12)]
    assert [f.interval for f in mine_always([(0, 9, frozenset({x}))])] == [(0, 9)]


def test_no_hand_no_actions():
    f = AlwaysFormula(parse_term("CE2 (cup & NE^back plate)"), (1, 10))
    assert mine_actions([f]) == []


def test_parameterize_groups_by_shape():
    s1, h, s2 = (AlwaysFormula(parse_term(t), iv) for t, iv in
                 (("CE2 (cup & NE^back plate)", (1, 10)), ("CE2 (hand & NE<*,*,*> cup)", (5, 20)),
                  ("CE2 (cup & NE^top plate)", (15, 30))))
    a = GroundedAction(s1, h, s2, (5, 10), (15, 20))
    b = GroundedAction(*(AlwaysFormula(x.term, (x.interval[0] + 50, x.interval[1] + 50)) for x in (s1, h, s2)),
                       (55, 60), (65, 70))
    one = parameterize([a])
    assert len(one) == 1 and len(one[0].provenance) == 1
    two = parameterize([a, b])
    assert len(two) == 1 and len(two[0].provenance) == 2


def test_mined_chain_is_true_on_trace(trace_v1, kitchen):
    from gstl.gstl_core import eval_formula
    res = mine_trace(trace_v1, kitchen)
    assert len(res.actions) == 3
    for a in res.actions:
        assert eval_formula(trace_v1, None, 1, _shift(a.formula(), -1), ontology=kitchen,
                            horizon=0)


def _shift(f, k):
    """Formulas from the miner use absolute frames; re-anchor to start at ``-k``."""
    from gstl.gstl_core.syntax import Always, And, TimeBound, Until
    if isinstance(f, And):
        return And(tuple(_shift(a, k) for a in f.args))
    if isinstance(f, Always):
        return Always(TimeBound(f.bound.lo + k, f.bound.hi + k), f.arg)
    if isinstance(f, Until):
        return Until(f.kind, TimeBound(f.bound.lo + k, f.bound.hi + k), _shift(f.lhs, k), _shift(f.rhs, k))
    return f


def test_empty_and_single_frame():
    assert mine([], ontology()).actions == {}
    tr = Trace((Snapshot(1, (WorldObject("cup", "cup", cube(0, 0, 0)),
                             WorldObject("hand", "hand", cube(0, 1, 0, 0.4)))),), "dm")
    res = mine_trace(tr, ontology())
    assert res.always and not res.actions


def test_soundness_and_maximality_random():
    rng = random.Random(29)
    for _ in range(150):
        tr = rand_trace(rng, frames=rng.randint(1, 8))
        d = rng.choice((0.3, 0.6))
        res = mine_trace(tr, SMALL_ONTOLOGY, MinerConfig(d=d))
        frames = {f.t: f for f in tr.frames}
        for af in res.always:
            a, b = af.interval
            assert all(scene_term_oracle(frames[k], SMALL_ONTOLOGY, af.term, d) for k in range(a, b + 1))
            for k in (a - 1, b + 1):
                if k in frames:
                    assert not scene_term_oracle(frames[k], SMALL_ONTOLOGY, af.term, d)
        # every frame-level term is covered by one of its intervals
        for fs in res.framesets:
            for t in fs.terms:
                assert any(f.term == t and f.interval[0] <= fs.t <= f.interval[1] for f in res.always)
