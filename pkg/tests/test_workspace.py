import pytest
from hypothesis import given
from hypothesis import strategies as st

from dtstar.workspace import (
    FOREVER,
    Blockages,
    DynamicEvent,
    InvalidCellError,
    ScenarioError,
    Workspace,
    blocked_during,
    manhattan,
)


def small():
    return Workspace(4, 3, frozenset({(1, 1)}), {(3, 2): {"p"}, (0, 2): {"d"}}, (0, 0))


def test_neighbors_follow_action_order():
    w = small()
    assert w.neighbors((1, 0)) == [("left", (0, 0)), ("right", (2, 0))]
    assert w.neighbors((0, 1)) == [("up", (0, 2)), ("down", (0, 0))]


def test_neighbors_of_obstacle_raise():
    with pytest.raises(InvalidCellError):
        small().neighbors((1, 1))


def test_labels_and_lists():
    w = small()
    assert w.label_of((3, 2)) == {"p"}
    assert w.label_of((2, 2)) == frozenset()
    assert w.labeled_cells() == [(0, 2), (3, 2)]
    assert w.propositions == {"p", "d"}
    assert len(w.free_cells()) == 11


@pytest.mark.parametrize(
    "kw",
    [
        dict(initial=(1, 1)),
        dict(initial=(9, 9)),
        dict(labels={(1, 1): {"p"}}),
        dict(obstacles=frozenset({(5, 5)})),
    ],
)
def test_invalid_workspaces(kw):
    base = dict(width=4, height=3, obstacles=frozenset({(1, 1)}), labels={}, initial=(0, 0))
    base.update(kw)
    with pytest.raises(ScenarioError):
        Workspace(**base)


def test_event_validation():
    with pytest.raises(ScenarioError):
        DynamicEvent(5, 3, (0, 0))
    with pytest.raises(ScenarioError):
        DynamicEvent(5, 8, (0, 0), announced_at=6)
    e = DynamicEvent(5, 8, (0, 0))
    assert e.announced_at == 5
    assert e.covers(5) and e.covers(7) and not e.covers(8)


def test_blockages_respect_announcement():
    ev = [DynamicEvent(10, 20, (1, 0), announced_at=4)]
    assert not Blockages(ev, 3).is_blocked((1, 0), 12)
    assert Blockages(ev, 4).is_blocked((1, 0), 12)
    assert blocked_during(ev, (1, 0), 12, 4)
    assert not blocked_during(ev, (1, 0), 20, 4)


def test_merge_and_release():
    ev = [DynamicEvent(0, 5, (0, 0)), DynamicEvent(5, 9, (0, 0)), DynamicEvent(12, 14, (0, 0))]
    bl = Blockages(ev)
    assert bl.release_time((0, 0), 2) == 9
    assert bl.release_time((0, 0), 10) == 10
    assert bl.safe_intervals((0, 0))[1:] == [(9, 12), (14, FOREVER)]
    assert bl.quiet_from == 14
    assert bl.cells() == {(0, 0)}


spans = st.lists(st.tuples(st.integers(0, 60), st.integers(1, 20)), max_size=6)


@given(spans, st.integers(-5, 100))
def test_safe_intervals_complement_blocked(raw, t):
    ev = [DynamicEvent(s, s + d, (2, 2)) for s, d in raw]
    bl = Blockages(ev)
    inside = [a <= t < b for a, b in bl.safe_intervals((2, 2))]
    assert sum(inside) == (0 if bl.is_blocked((2, 2), t) else 1)
    assert bl.is_blocked((2, 2), t) == any(e.covers(t) for e in ev)


@given(spans, st.integers(0, 100))
def test_release_time_is_first_free_instant(raw, t):
    ev = [DynamicEvent(s, s + d, (0, 0)) for s, d in raw]
    bl = Blockages(ev)
    r = bl.release_time((0, 0), t)
    assert r >= t and not bl.is_blocked((0, 0), r)
    assert all(bl.is_blocked((0, 0), u) for u in range(t, r))


def test_manhattan():
    assert manhattan((1, 2), (7, 0)) == 8
