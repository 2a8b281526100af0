import math

import pytest

from coopex.agent import (
    LOOKUP_TIME,
    AgentState,
    ExploreParams,
    World,
    knowledge_gain,
    knowledge_gain_process,
    lookup_knowledge,
    share_knowledge,
)
from coopex.maze_world import STEP_TIME, Hint, Solution, TargetMap, explore, generate_maze, hint_region
from coopex.oracle_budget import BudgetLedger


def world(cells, complex_ids=(), budget=0, remaining=100, size=10, seed=0):
    maze = generate_maze(size, seed)
    cells = dict(enumerate(cells))
    tm = TargetMap(size, cells, {t: 0 for t in cells}, {t: t in complex_ids for t in cells})
    return World(maze, tm, BudgetLedger.shared(budget), lambda: remaining)


def test_speed_must_be_positive():
    with pytest.raises(ValueError):
        AgentState(0, speed=0)


def test_learn_keeps_newer_epoch():
    a = AgentState(0)
    a.learn([(1, Solution((2, 2), 1))])
    a.learn([(1, Solution((3, 3), 0))])
    assert a.knowledge[1] == Solution((2, 2), 1)
    a.learn([(1, Solution((4, 4), 2))])
    assert a.knowledge[1].cell == (4, 4)


def test_lookup_evicts_stale_entries():
    a = AgentState(0, knowledge={3: Solution((1, 1), 0)})
    assert lookup_knowledge(a, 3, 0) == Solution((1, 1), 0)
    assert lookup_knowledge(a, 3, 1) is None
    assert 3 not in a.knowledge


def test_sharing_only_when_cooperative():
    a, b, c = AgentState(0), AgentState(1), AgentState(2)
    a.learn([(5, Solution((0, 1), 0))])
    share_knowledge(a, [a, b, c], cooperative=False)
    assert not b.knowledge
    share_knowledge(a, [a, b, c])
    assert b.knowledge == c.knowledge == a.knowledge


def test_known_task_answered_by_lookup():
    w = world([(9, 9)])
    a = AgentState(0, speed=3.0, knowledge={0: Solution((9, 9), 0)})
    out = knowledge_gain(a, 0, w)
    assert out.source == "knowledge" and out.duration == LOOKUP_TIME
    assert out.steps == 0 and out.queries == 0


def test_plain_exploration_with_inference():
    w = world([(4, 4), (4, 4)])
    out = knowledge_gain(AgentState(0, speed=2.0), 0, w, ExploreParams(cap=100))
    ref, dt = explore(w.maze, w.targets, 0, cap=100, speed=2.0)
    assert out.source == "exploration" and out.steps == ref.steps
    assert out.duration == dt
    assert out.inference == frozenset({(1, Solution((4, 4), 0))})


def test_complex_task_queries_after_failed_sweep():
    w = world([(8, 3)], complex_ids={0}, budget=5)
    out = knowledge_gain(AgentState(0), 0, w, ExploreParams(cap=100))
    hinted, _ = explore(w.maze, w.targets, 0, Hint(0, hint_region(10, (8, 3))), cap=100)
    assert out.source == "exploration" and out.queries == 1
    assert out.steps == 100 + hinted.steps
    assert math.isclose(out.duration, out.steps * STEP_TIME)
    assert w.ledger.balance(0) == 4


def test_complex_task_fails_without_budget():
    w = world([(8, 3)], complex_ids={0}, budget=0)
    out = knowledge_gain(AgentState(0), 0, w, ExploreParams(cap=100))
    assert out.source == "failed" and out.solution is None
    assert out.steps == 100 and out.queries == 0


def test_shortcut_queries_before_exploring():
    # balance 5 exceeds the 2 unfinished tasks: ask first, explore once
    w = world([(8, 3), (1, 1)], complex_ids={0}, budget=5, remaining=2)
    phases = list(knowledge_gain_process(AgentState(0), 0, w, ExploreParams(cap=100, query_latency=0.5)))
    assert [p.kind for p in phases] == ["query", "explore"]
    assert phases[1].hint is not None and phases[1].result.found
    assert w.ledger.balance(0) == 4


def test_shortcut_can_ask_repeatedly_when_allowed():
    w = world([(8, 3)], budget=9, remaining=1)
    out = knowledge_gain(AgentState(0), 0, w, ExploreParams(cap=100, direct_queries=3))
    assert out.queries == 3 and w.ledger.balance(0) == 6


def test_query_latency_counts_toward_duration():
    w = world([(8, 3)], complex_ids={0}, budget=5)
    out = knowledge_gain(AgentState(0), 0, w, ExploreParams(cap=100, query_latency=0.25))
    base = out.steps * STEP_TIME
    assert math.isclose(out.duration, base + 0.25)
