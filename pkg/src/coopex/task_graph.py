"""Task model: program graphs of rewarded, dependent tasks and their status.

A :class:`ProgramGraph` is immutable once built. The mutable part of a run
lives in :class:`TaskStatus`, which only the coordinator touches.
"""

from __future__ import annotations

import enum
import logging
import random
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CyclicGraph, DanglingEdge, NotAssigned, ParseError, UnknownGraph

log = logging.getLogger(__name__)

# Fraction of the previous layer a node depends on in G40 (3 of 9).
G40_DENSITY = 1 / 3


@dataclass(frozen=True)
class Task:
    id: int
    reward: float = 1.0
    deps: frozenset[int] = frozenset()
    complex: bool = False

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"task id must be >= 0, got {self.id}")
        if self.reward < 0:
            raise ValueError(f"task {self.id}: reward must be >= 0")
        if self.id in self.deps:
            raise CyclicGraph(f"task {self.id} depends on itself")


@dataclass(frozen=True)
class ProgramGraph:
    tasks: tuple[Task, ...]

    @property
    def m(self) -> int:
        return len(self.tasks)

    @property
    def edge_count(self) -> int:
        return sum(len(t.deps) for t in self.tasks)

    def __len__(self):
        return len(self.tasks)

    def __getitem__(self, task_id: int) -> Task:
        return self.tasks[task_id]

    def deps(self, task_id: int) -> frozenset[int]:
        return self.tasks[task_id].deps

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.tasks]
        for t in self.tasks:
            for u in sorted(t.deps):
                out[u].append(t.id)
        return tuple(tuple(s) for s in out)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, t.id) for t in self.tasks for u in sorted(t.deps)]

    def rewards(self) -> list[float]:
        return [t.reward for t in self.tasks]

    def complex_tasks(self) -> frozenset[int]:
        return frozenset(t.id for t in self.tasks if t.complex)

    def descendants(self, task_id: int) -> set[int]:
        seen: set[int] = set()
        stack = list(self.successors[task_id])
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(self.successors[v])
        return seen

    def with_attributes(
        self,
        rewards: Sequence[float] | None = None,
        complex_flags: Iterable[int] | None = None,
    ) -> "ProgramGraph":
        """Return a copy with new rewards and/or complexity flags."""
        flags = None if complex_flags is None else set(complex_flags)
        tasks = []
        for t in self.tasks:
            kw = {}
            if rewards is not None:
                kw["reward"] = float(rewards[t.id])
            if flags is not None:
                kw["complex"] = t.id in flags
            tasks.append(replace(t, **kw))
        return ProgramGraph(tuple(tasks))


def topological_order(graph: ProgramGraph) -> list[int]:
    """Kahn's algorithm. Raises CyclicGraph if no order exists."""
    indeg = [len(t.deps) for t in graph.tasks]
    queue = deque(i for i, d in enumerate(indeg) if d == 0)
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in graph.successors[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if len(order) != graph.m:
        raise CyclicGraph("dependency relation contains a cycle")
    return order


def build_graph(
    edges: Iterable[tuple[int, int]],
    rewards: Sequence[float],
    complex_flags: Iterable[int] = (),
) -> ProgramGraph:
    """Build a graph from ``(from, to)`` edges; ``to`` depends on ``from``."""
    m = len(rewards)
    deps: list[set[int]] = [set() for _ in range(m)]
    for u, v in edges:
        if not (0 <= u < m and 0 <= v < m):
            raise DanglingEdge(f"edge ({u}, {v}) references a task outside 0..{m - 1}")
        if u == v:
            raise CyclicGraph(f"self-loop on task {u}")
        deps[v].add(u)
    flags = set(complex_flags)
    for c in flags:
        if not 0 <= c < m:
            raise DanglingEdge(f"complexity flag for unknown task {c}")
    graph = ProgramGraph(
        tuple(
            Task(i, float(rewards[i]), frozenset(deps[i]), i in flags) for i in range(m)
        )
    )
    topological_order(graph)
    return graph


def _g18_edges() -> list[tuple[int, int]]:
    edges = [(0, k) for k in range(1, 9)]
    for pair, join in zip([(1, 2), (3, 4), (5, 6), (7, 8)], [9, 10, 11, 12]):
        edges += [(p, join) for p in pair]
    edges += [(u, v) for u in range(9, 13) for v in range(13, 17)]
    edges += [(u, 17) for u in range(13, 17)]
    return edges


def _g40_edges() -> list[tuple[int, int]]:
    edges = [(0, k) for k in (2, 4, 6)]
    edges += [(1, k) for k in (3, 5, 7, 8, 9, 10)]
    for lo in (2, 11, 20):
        hi = lo + 8
        for k in range(lo, hi + 1):
            for v in (k + 8, k + 9, k + 10):
                if lo + 9 <= v <= hi + 9:
                    edges.append((k, v))
    edges += [(k, 38) for k in (29, 31, 33)]
    edges += [(k, 39) for k in (30, 32, 34, 35, 36, 37)]
    return edges


BUILTIN_EDGES = {"g18": (18, _g18_edges), "g40": (40, _g40_edges)}


def builtin_graph(name: str, rewards: Sequence[float] | None = None) -> ProgramGraph:
    """The G18 / G40 program graphs. Rewards default to 1.0 each."""
    try:
        m, make_edges = BUILTIN_EDGES[name.lower()]
    except KeyError:
        raise UnknownGraph(f"unknown builtin graph {name!r}; choose from {sorted(BUILTIN_EDGES)}")
    return build_graph(make_edges(), rewards if rewards is not None else [1.0] * m)


def random_graph(m: int, layer_count: int, density: float = G40_DENSITY, seed: int = 0,
                 drop_rate: float = 0.2) -> ProgramGraph:
    """Layered banded DAG in the style of G40.

    Tasks are split into ``layer_count`` near-equal layers with ids assigned
    layer by layer. A node depends on the ``round(density * width)`` nodes of
    the previous layer nearest to its aligned position; every dependency
    except the aligned one is dropped with probability ``drop_rate``.
    """
    if m < 1:
        log.warning("random_graph: m=%s clamped to 1", m)
        m = 1
    if layer_count < 1 or layer_count > m:
        clamped = min(max(layer_count, 1), m)
        log.warning("random_graph: layer_count=%s clamped to %s", layer_count, clamped)
        layer_count = clamped
    if not 0.0 <= density <= 1.0:
        clamped = min(max(density, 0.0), 1.0)
        log.warning("random_graph: density=%s clamped to %s", density, clamped)
        density = clamped
    rng = random.Random(f"random_graph:{m}:{layer_count}:{density!r}:{seed}")

    base, extra = divmod(m, layer_count)
    layers, start = [], 0
    for i in range(layer_count):
        size = base + (1 if i < extra else 0)
        layers.append(list(range(start, start + size)))
        start += size

    edges = []
    for prev, cur in zip(layers, layers[1:]):
        wp, wc = len(prev), len(cur)
        band = max(1, round(density * wp))
        for j, v in enumerate(cur):
            centre = (j + 0.5) * wp / wc - 0.5
            ranked = sorted(range(wp), key=lambda i: (abs(i - centre), i))
            aligned, others = ranked[0], ranked[1:band]
            edges.append((prev[aligned], v))
            edges += [(prev[i], v) for i in others if rng.random() >= drop_rate]
    return build_graph(sorted(edges), [1.0] * m)


def random_rewards(m: int, seed: int, low: int = 1, high: int = 100) -> list[float]:
    rng = random.Random(f"rewards:{seed}")
    return [float(rng.randint(low, high)) for _ in range(m)]


def random_complex_flags(m: int, rate: float, seed: int) -> set[int]:
    rng = random.Random(f"complex:{seed}")
    return {i for i in range(m) if rng.random() < rate}


class TaskState(str, enum.Enum):
    PENDING = "pending"
    READY = "ready"
    ASSIGNED = "assigned"
    ACCOMPLISHED = "accomplished"
    FAILED = "failed"


@dataclass
class TaskStatus:
    """Per-task lifecycle state for one run."""

    graph: ProgramGraph
    state: list[TaskState] = field(default_factory=list)
    completion_time: list[float | None] = field(default_factory=list)

    def __post_init__(self):
        if not self.state:
            self.state = [
                TaskState.READY if not t.deps else TaskState.PENDING for t in self.graph.tasks
            ]
            self.completion_time = [None] * self.graph.m

    @classmethod
    def initial(cls, graph: ProgramGraph) -> "TaskStatus":
        return cls(graph)

    def copy(self) -> "TaskStatus":
        return TaskStatus(self.graph, list(self.state), list(self.completion_time))

    def __getitem__(self, task_id: int) -> TaskState:
        return self.state[task_id]

    def ids_in(self, *states: TaskState) -> list[int]:
        return [i for i, s in enumerate(self.state) if s in states]

    def deps_done(self, task_id: int) -> bool:
        return all(self.state[u] is TaskState.ACCOMPLISHED for u in self.graph.deps(task_id))

    def mark_assigned(self, task_id: int) -> None:
        if self.state[task_id] is not TaskState.READY:
            raise RuntimeError(f"task {task_id} is {self.state[task_id].value}, not ready")
        self.state[task_id] = TaskState.ASSIGNED

    def mark_failed(self, task_id: int, time: float) -> None:
        self.state[task_id] = TaskState.FAILED
        self.completion_time[task_id] = time

    def reopen(self, task_id: int) -> None:
        """An accomplished task whose solution expired goes back to ready."""
        if self.state[task_id] is TaskState.ACCOMPLISHED:
            self.state[task_id] = TaskState.READY
            self.completion_time[task_id] = None

    def remaining(self) -> int:
        """Tasks that are neither accomplished nor failed."""
        return sum(s not in (TaskState.ACCOMPLISHED, TaskState.FAILED) for s in self.state)


def get_independent_tasks(graph: ProgramGraph, status: TaskStatus) -> tuple[list[int], list[float]]:
    ready = [
        t.id
        for t in graph.tasks
        if status[t.id] in (TaskState.PENDING, TaskState.READY) and status.deps_done(t.id)
    ]
    return ready, [graph[t].reward for t in ready]


def update_dependencies(status: TaskStatus, task_id: int, time: float | None = None) -> TaskStatus:
    state = status[task_id]
    if state is TaskState.ACCOMPLISHED:
        return status
    if state is not TaskState.ASSIGNED:
        raise NotAssigned(f"task {task_id} is {state.value}; only dispatched tasks can complete")
    status.state[task_id] = TaskState.ACCOMPLISHED
    status.completion_time[task_id] = time
    for v in status.graph.successors[task_id]:
        if status[v] is TaskState.PENDING and status.deps_done(v):
            status.state[v] = TaskState.READY
    return status


# -- plain-text edge-list exchange format ------------------------------------


def write_edge_list(graph: ProgramGraph, path: str | Path | None = None) -> str:
    lines = [f"m {graph.m}"]
    lines += [f"{u} {v}" for u, v in graph.edges()]
    lines += [f"r {t.id} {t.reward!r}" for t in graph.tasks]
    lines += [f"c {t.id}" for t in graph.tasks if t.complex]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_edge_list(text: str) -> ProgramGraph:
    m = None
    edges, rewards, flags = [], {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "m":
                m = int(parts[1])
            elif parts[0] == "r":
                rewards[int(parts[1])] = float(parts[2])
            elif parts[0] == "c":
                flags.append(int(parts[1]))
            else:
                u, v = parts
                edges.append((int(u), int(v)))
        except (ValueError, IndexError):
            raise ParseError(f"cannot parse {raw.strip()!r}", lineno, 1) from None
    if m is None:
        raise ParseError("edge list is missing the 'm <count>' header")
    for tid in rewards:
        if not 0 <= tid < m:
            raise DanglingEdge(f"reward for unknown task {tid}")
    return build_graph(edges, [rewards.get(i, 1.0) for i in range(m)], flags)


def read_edge_list(path: str | Path) -> ProgramGraph:
    return parse_edge_list(Path(path).read_text())
