"""Agents: knowledge sets, knowledge sharing, and the knowledge-gain procedure.

``knowledge_gain_process`` is a generator that yields one :class:`Phase`
per time-consuming step (lookup, oracle query, exploration) and returns an
:class:`ExplorationOutcome`. The simulation engine resumes it at each phase's
completion time, so budget checks observe the state of the run at the moment
they happen. :func:`knowledge_gain` drives the same generator to completion
immediately for standalone use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Generator, Iterable, NamedTuple

from .maze_world import (
    STEP_TIME,
    ExploreResult,
    Hint,
    Maze,
    Solution,
    TargetMap,
    default_cap,
    explore,
)
from .oracle_budget import BudgetLedger, ask_help_from_oracle, direct_query_shortcut

LOOKUP_TIME = 0.05  # virtual seconds to answer a task from the knowledge set


@dataclass
class AgentState:
    id: int
    speed: float = 1.0
    knowledge: dict[int, Solution] = field(default_factory=dict)
    busy_time: float = 0.0
    durations: list[float] = field(default_factory=list)
    queries_used: int = 0

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError(f"agent {self.id}: speed must be > 0, got {self.speed}")

    def learn(self, entries: Iterable[tuple[int, Solution]]) -> None:
        """Merge entries into the knowledge set; the newer epoch wins."""
        for task, sol in entries:
            held = self.knowledge.get(task)
            if held is None or sol.epoch >= held.epoch:
                self.knowledge[task] = sol


def lookup_knowledge(agent: AgentState, task_id: int, current_epoch: int) -> Solution | None:
    sol = agent.knowledge.get(task_id)
    if sol is None:
        return None
    if sol.epoch != current_epoch:
        del agent.knowledge[task_id]
        return None
    return sol


def share_knowledge(source: AgentState, agents: Iterable[AgentState], cooperative: bool = True) -> None:
    if not cooperative:
        return
    entries = list(source.knowledge.items())
    for other in sorted(agents, key=lambda a: a.id):
        if other is not source:
            other.learn(entries)


@dataclass
class World:
    """What an agent can see of the run while exploring."""

    maze: Maze
    targets: TargetMap
    ledger: BudgetLedger
    remaining: Callable[[], int] = lambda: 0
    now: Callable[[], float] = lambda: 0.0


@dataclass(frozen=True)
class ExploreParams:
    cap: int | None = None
    step_time: float = STEP_TIME
    lookup_time: float = LOOKUP_TIME
    query_latency: float = 0.0
    direct_queries: int = 1  # oracle queries allowed per shortcut check


class Phase(NamedTuple):
    kind: str  # "lookup" | "query" | "explore"
    duration: float
    result: ExploreResult | None = None
    hint: Hint | None = None


@dataclass(frozen=True)
class ExplorationOutcome:
    task: int
    solution: Solution | None
    inference: frozenset[tuple[int, Solution]]
    duration: float
    queries: int
    steps: int
    source: str  # "knowledge" | "exploration" | "failed"


def _can_narrow(hint: Hint | None) -> bool:
    return hint is None or hint.region.area > 1


def knowledge_gain_process(
    agent: AgentState,
    task_id: int,
    world: World,
    params: ExploreParams = ExploreParams(),
) -> Generator[Phase, None, ExplorationOutcome]:
    targets = world.targets
    known = lookup_knowledge(agent, task_id, targets.epoch(task_id))
    if known is not None:
        yield Phase("lookup", params.lookup_time)
        return ExplorationOutcome(task_id, known, frozenset(), params.lookup_time, 0, 0, "knowledge")

    cap = params.cap if params.cap is not None else default_cap(world.maze.size)
    ledger = world.ledger
    hint: Hint | None = None
    duration = 0.0
    queries = steps = 0

    def query():
        nonlocal hint, queries, duration
        hint = ask_help_from_oracle(task_id, agent.id, ledger, world.targets, hint, world.now())
        queries += 1
        duration += params.query_latency
        return Phase("query", params.query_latency, hint=hint)

    while True:
        # exploreSoln: ask the oracle up front while budget exceeds remaining work
        for _ in range(params.direct_queries):
            if not (
                _can_narrow(hint)
                and ledger.can_afford(agent.id)
                and direct_query_shortcut(world.remaining(), ledger.balance(agent.id))
            ):
                break
            phase = query()
            if phase.duration > 0:
                yield phase
        result, dt = explore(world.maze, world.targets, task_id, hint, cap, agent.speed, params.step_time)
        duration += dt
        steps += result.steps
        yield Phase("explore", dt, result, hint)
        if result.found:
            return ExplorationOutcome(
                task_id, result.solution, result.inference, duration, queries, steps, "exploration"
            )
        if not (ledger.can_afford(agent.id) and _can_narrow(hint)):
            return ExplorationOutcome(task_id, None, frozenset(), duration, queries, steps, "failed")
        phase = query()
        if phase.duration > 0:
            yield phase


def knowledge_gain(
    agent: AgentState,
    task_id: int,
    world: World,
    params: ExploreParams = ExploreParams(),
) -> ExplorationOutcome:
    """Run the knowledge-gain procedure to completion outside the engine."""
    proc = knowledge_gain_process(agent, task_id, world, params)
    try:
        while True:
            next(proc)
    except StopIteration as stop:
        return stop.value
