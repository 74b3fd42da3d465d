import random

import pytest

from helpers import office

from apia.errors import IntentionError
from apia.intentions import MentalState, apply_mental_dynamics, next_physical_action
from apia.transition import make_state

GOAL = "policy_compliant(greeted_by(alice,bob))"


@pytest.fixture(scope="module")
def dom():
    return office()


@pytest.fixture(scope="module")
def idle(dom):
    return make_state(dom, ["in_room(alice,r1)", "in_room(bob,r4)"])


def test_next_component(dom):
    acts = dom.activities
    assert str(next_physical_action(MentalState(GOAL, 1, 0), acts)) == "move_through(alice,d12)"
    assert next_physical_action(MentalState(GOAL, 1, 4), acts) is None
    assert str(next_physical_action(MentalState(GOAL, 3, 1), acts)) == "move_through(alice,d34)"
    assert next_physical_action(MentalState(GOAL), acts) is None


def test_select_start_progress_stop(dom, idle):
    acts = dom.activities
    m = apply_mental_dynamics(MentalState(), frozenset({f"select({GOAL})"}), idle, acts)
    assert m.active_goal == GOAL and m.activity is None
    m = apply_mental_dynamics(m, frozenset({"start(1)"}), idle, acts)
    assert (m.activity, m.progress) == (1, 0)
    m = apply_mental_dynamics(m, frozenset({"move_through(alice,d12)"}), idle, acts)
    assert m.progress == 1
    # a different action does not advance the activity
    m = apply_mental_dynamics(m, frozenset({"knock_on_door(alice,d34)"}), idle, acts)
    assert m.progress == 1
    m = apply_mental_dynamics(m, frozenset({"stop(1)"}), idle, acts)
    assert m.activity is None and m.status(1) == -1
    m = apply_mental_dynamics(m, frozenset({f"abandon({GOAL})"}), idle, acts)
    assert m.active_goal is None


def test_goal_achievement_clears_goal(dom):
    done = make_state(dom, ["in_room(alice,r4)", "in_room(bob,r4)", "greeted_by(alice,bob)"])
    m = apply_mental_dynamics(MentalState("greeted_by(alice,bob)", 1, 3),
                              frozenset({"greet(alice,bob)"}), done, dom.activities)
    assert m.active_goal is None
    assert m.progress == 4


def test_errors(dom, idle):
    with pytest.raises(IntentionError):
        apply_mental_dynamics(MentalState(GOAL, 1, 0), frozenset({"start(2)"}), idle, dom.activities)
    with pytest.raises(IntentionError):
        apply_mental_dynamics(MentalState(GOAL), frozenset({"stop(1)"}), idle, dom.activities)
    with pytest.raises(IntentionError):
        apply_mental_dynamics(MentalState(GOAL), frozenset({"start(9)"}), idle, dom.activities)


def test_random_walk_persistence_and_bounds(dom, idle):
    rng = random.Random(3)
    acts = dom.activities
    pool = list(dom.agent_actions) + ["begin_working(bob)", "wait"]
    for _ in range(200):
        m = MentalState(GOAL, rng.choice([None, 1, 2, 3]), 0)
        for _ in range(12):
            move = frozenset({rng.choice(pool)})
            after = apply_mental_dynamics(m, move, idle, acts)
            assert after.active_goal == m.active_goal
            assert after.activity == m.activity
            if m.activity is not None:
                length = next(a for a in acts if a.id == m.activity).length
                assert after.progress in (m.progress, m.progress + 1)
                assert after.progress <= length
            assert sum(after.status(a.id) >= 0 for a in acts) <= 1
            m = after
