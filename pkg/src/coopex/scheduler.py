"""Coordinator: pick ready tasks by reward, hand them to idle agents, validate results."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .agent import AgentState, share_knowledge
from .errors import NoIdleAgent
from .maze_world import Solution, TargetMap
from .task_graph import ProgramGraph, TaskStatus, get_independent_tasks, update_dependencies


def get_avail_tasks(graph: ProgramGraph, status: TaskStatus, n_e: int) -> list[int]:
    """Ready tasks by reward, highest first (ties by id), at most ``n_e`` of them."""
    if n_e <= 0:
        return []
    ready, rewards = get_independent_tasks(graph, status)
    ranked = [t for _, t in sorted(zip(rewards, ready), key=lambda p: (-p[0], p[1]))]
    return ranked[:n_e]


@dataclass
class Assignment:
    """Which agent holds or held which task (lambda), with dispatch times."""

    tasks: dict[int, set[int]] = field(default_factory=dict)
    owner: dict[tuple[int, int], int] = field(default_factory=dict)  # (task, epoch) -> agent
    dispatch_time: dict[int, float] = field(default_factory=dict)
    current: dict[int, int] = field(default_factory=dict)  # task -> agent, while in flight

    def of(self, agent: int) -> set[int]:
        return self.tasks.get(agent, set())


def task_assignment(
    ready: Sequence[int],
    idle_agents: Sequence[int],
    assignment: Assignment | None = None,
    time: float = 0.0,
    epochs: TargetMap | None = None,
) -> dict[int, int]:
    """Pair the k-th task with the k-th idle agent. Returns ``agent -> task``."""
    if len(ready) > len(idle_agents):
        raise NoIdleAgent(f"{len(ready)} tasks for {len(idle_agents)} idle agents")
    delta = dict(zip(idle_agents, ready))
    if assignment is not None:
        for agent, task in delta.items():
            epoch = epochs.epoch(task) if epochs is not None else 0
            key = (task, epoch)
            if key in assignment.owner and assignment.owner[key] != agent:
                raise RuntimeError(f"task {task} already assigned in epoch {epoch}")
            assignment.owner[key] = agent
            assignment.tasks.setdefault(agent, set()).add(task)
            assignment.dispatch_time[task] = time
            assignment.current[task] = agent
    return delta


@dataclass(frozen=True)
class ValidationRecord:
    task: int
    agent: int
    solution: Solution | None
    verdict: bool
    reward: float
    time: float
    stale: bool = False


def handle_soln_check(
    task_id: int,
    solution: Solution | None,
    agent: int,
    targets: TargetMap,
    graph: ProgramGraph,
    status: TaskStatus | None = None,
    assignment: Assignment | None = None,
    time: float = 0.0,
) -> ValidationRecord:
    """Validate a returned solution against the current target of ``task_id``.

    A correct cell from an older epoch is rejected and flagged ``stale``.
    On success the task is marked accomplished in ``status``.
    """
    if assignment is not None and assignment.current.get(task_id) != agent:
        raise RuntimeError(f"task {task_id} is not assigned to agent {agent}")
    current = targets.solution(task_id)
    stale = solution is not None and solution.epoch < current.epoch
    verdict = solution is not None and solution == current
    reward = graph[task_id].reward if verdict else 0.0
    if verdict and status is not None:
        update_dependencies(status, task_id, time)
    return ValidationRecord(task_id, agent, solution, verdict, reward, time, stale)


def handle_task_done(
    task_id: int,
    solution: Solution,
    inference: Iterable[tuple[int, Solution]],
    agent: AgentState,
    agents: Sequence[AgentState] = (),
    cooperative: bool = True,
) -> dict[int, Solution]:
    """Fold the solved task and its inference data into the agent's knowledge.

    In cooperative mode the agent then broadcasts its knowledge to everyone.
    """
    agent.learn([(task_id, solution), *inference])
    share_knowledge(agent, agents, cooperative)
    return agent.knowledge
