"""The solution space: a perfect maze with task targets hidden in its cells.

Every cell of an ``N x N`` maze is open; walls sit between neighbouring
cells and the passages form a spanning tree carved by a seeded recursive
backtracker. Exploration is a breadth-first sweep from the entrance at
``(0, 0)``, so the cost of a blind search is the target's position in the
sweep order.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import SizeOutOfRange
from .task_graph import ProgramGraph

Cell = tuple[int, int]

MIN_SIZE, MAX_SIZE = 10, 400
STEP_TIME = 0.0004  # virtual seconds per visited cell at speed 1

# bit flags for open passages
NORTH, SOUTH, EAST, WEST = 1, 2, 4, 8
_MOVES = ((NORTH, -1, 0, SOUTH), (SOUTH, 1, 0, NORTH), (EAST, 0, 1, WEST), (WEST, 0, -1, EAST))


class Rect(NamedTuple):
    """Half-open cell rectangle ``[r0, r1) x [c0, c1)``."""

    r0: int
    c0: int
    r1: int
    c1: int

    @property
    def area(self) -> int:
        return (self.r1 - self.r0) * (self.c1 - self.c0)

    def __contains__(self, cell) -> bool:
        r, c = cell
        return self.r0 <= r < self.r1 and self.c0 <= c < self.c1


class Maze:
    """Perfect maze plus its precomputed breadth-first sweep from the entrance."""

    entrance: Cell = (0, 0)

    def __init__(self, size: int, seed: int, passages: np.ndarray):
        self.size = size
        self.seed = seed
        self.passages = passages
        self.passages.setflags(write=False)
        n = size
        self.neighbours: list[tuple[int, ...]] = [
            tuple(
                (r + dr) * n + (c + dc)
                for bit, dr, dc, _ in _MOVES
                if passages[r * n + c] & bit
            )
            for r in range(n)
            for c in range(n)
        ]
        self.order, self.parent, self.dist = self._sweep()
        self.rank = np.empty(n * n, dtype=np.int64)
        self.rank[self.order] = np.arange(n * n)
        self._restricted: dict[Rect, dict[int, int]] = {}

    @property
    def cells(self) -> int:
        return self.size * self.size

    def index(self, cell: Cell) -> int:
        return cell[0] * self.size + cell[1]

    def cell(self, index: int) -> Cell:
        return divmod(int(index), self.size)

    def _sweep(self):
        n2 = self.cells
        parent = np.full(n2, -1, dtype=np.int64)
        dist = np.full(n2, -1, dtype=np.int64)
        order = []
        dist[0] = 0
        queue = deque([0])
        while queue:
            u = queue.popleft()
            order.append(u)
            for v in self.neighbours[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue.append(v)
        return np.asarray(order, dtype=np.int64), parent, dist

    def path_from_entrance(self, index: int) -> list[int]:
        path = [index]
        while self.parent[path[-1]] >= 0:
            path.append(int(self.parent[path[-1]]))
        return path[::-1]

    def region_entry(self, region: Rect, index: int) -> int:
        """Topmost cell of the connected piece of ``region`` that holds ``index``.

        Passages form a tree, so each piece of a rectangle is a subtree whose
        top is the piece's cell nearest the entrance.
        """
        top = index
        while True:
            up = int(self.parent[top])
            if up < 0 or self.cell(up) not in region:
                return top
            top = up

    def restricted_sweep(self, region: Rect, entry: int) -> dict[int, int]:
        """Sweep order over ``region`` plus the corridor from the entrance to ``entry``.

        Returns ``cell index -> visit rank``. Because the allowed cells reachable
        from the entrance form a subtree, the result is the full sweep order
        filtered to that subtree.
        """
        key = (region, entry)
        cached = self._restricted.get(key)
        if cached is not None:
            return cached
        n = self.size
        rows = np.arange(region.r0, region.r1)
        cols = np.arange(region.c0, region.c1)
        allowed = np.zeros(self.cells, dtype=bool)
        allowed[(rows[:, None] * n + cols[None, :]).ravel()] = True
        allowed[self.path_from_entrance(entry)] = True

        ranks = {0: 0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in self.neighbours[u]:
                if allowed[v] and v not in ranks:
                    ranks[v] = len(ranks)
                    queue.append(v)
        self._restricted[key] = ranks
        return ranks


@lru_cache(maxsize=32)
def generate_maze(size: int, seed: int) -> Maze:
    """Perfect maze by randomized depth-first carving; deterministic in (size, seed)."""
    if not MIN_SIZE <= size <= MAX_SIZE:
        raise SizeOutOfRange(f"maze size must be in [{MIN_SIZE}, {MAX_SIZE}], got {size}")
    rng = random.Random(f"maze:{size}:{seed}")
    n = size
    passages = np.zeros(n * n, dtype=np.uint8)
    visited = bytearray(n * n)
    visited[0] = 1
    stack = [(0, 0)]
    while stack:
        r, c = stack[-1]
        options = []
        for bit, dr, dc, back in _MOVES:
            rr, cc = r + dr, c + dc
            if 0 <= rr < n and 0 <= cc < n and not visited[rr * n + cc]:
                options.append((bit, rr, cc, back))
        if not options:
            stack.pop()
            continue
        bit, rr, cc, back = options[rng.randrange(len(options))]
        passages[r * n + c] |= bit
        passages[rr * n + cc] |= back
        visited[rr * n + cc] = 1
        stack.append((rr, cc))
    return Maze(size, seed, passages)


@dataclass(frozen=True)
class Solution:
    cell: Cell
    epoch: int


@dataclass(frozen=True)
class TargetMap:
    """Where each task's solution lives, versioned per task by epoch."""

    size: int
    cells: Mapping[int, Cell]
    epochs: Mapping[int, int]
    complex: Mapping[int, bool] = field(default_factory=dict)

    def target(self, task_id: int) -> Cell:
        return self.cells[task_id]

    def epoch(self, task_id: int) -> int:
        return self.epochs[task_id]

    def solution(self, task_id: int) -> Solution:
        return Solution(self.cells[task_id], self.epochs[task_id])

    def is_complex(self, task_id: int) -> bool:
        return bool(self.complex.get(task_id, False))

    def tasks_at(self, cell: Cell) -> set[int]:
        return set(self.inverse.get(cell, ()))

    @property
    def inverse(self) -> dict[Cell, frozenset[int]]:
        inv: dict[Cell, set[int]] = {}
        for t, c in self.cells.items():
            inv.setdefault(c, set()).add(t)
        return {c: frozenset(ts) for c, ts in inv.items()}

    def shared_task_count(self) -> int:
        """Tasks placed on a cell that already hosted another task."""
        return len(self.cells) - len(set(self.cells.values()))


def place_targets(maze: Maze, tasks: ProgramGraph, collision_rate: float, seed: int) -> TargetMap:
    """Uniform placement; with probability ``collision_rate`` reuse a used cell."""
    rng = random.Random(f"targets:{maze.size}:{seed}")
    used: list[Cell] = []
    used_set: set[Cell] = set()
    cells = {}
    n = maze.size
    for t in tasks.tasks:
        if used and rng.random() < collision_rate:
            cell = used[rng.randrange(len(used))]
        else:
            while True:
                cell = divmod(rng.randrange(n * n), n)
                if cell not in used_set or len(used_set) >= n * n:
                    break
            used.append(cell)
            used_set.add(cell)
        cells[t.id] = cell
    return TargetMap(
        size=n,
        cells=cells,
        epochs={t.id: 0 for t in tasks.tasks},
        complex={t.id: t.complex for t in tasks.tasks},
    )


def advance_epoch(targets: TargetMap, tasks_to_invalidate: Iterable[int], seed: int) -> TargetMap:
    """Move the listed tasks to fresh uniform cells and bump their epochs."""
    chosen = sorted(set(tasks_to_invalidate))
    if not chosen:
        return targets
    rng = random.Random(f"epoch:{seed}:{','.join(map(str, chosen))}")
    cells, epochs = dict(targets.cells), dict(targets.epochs)
    n = targets.size
    for t in chosen:
        cells[t] = divmod(rng.randrange(n * n), n)
        epochs[t] += 1
    return replace(targets, cells=cells, epochs=epochs)


@dataclass(frozen=True)
class Hint:
    task: int
    region: Rect
    granted_at: float = 0.0
    level: int = 1


def _half_containing(lo: int, width: int, x: int) -> tuple[int, int]:
    """Sub-interval of length ``max(1, width // 2)`` of ``[lo, lo+width)`` containing x."""
    h = max(1, width // 2)
    if x < lo + h:
        start = lo
    elif x >= lo + width - h:
        start = lo + width - h
    else:  # middle cell of an odd-width interval
        start = x
    return start, start + h


def hint_region(size: int, target: Cell, prior: Rect | None = None) -> Rect:
    """Quadrant of ``prior`` (the whole grid if absent) holding ``target``."""
    base = prior if prior is not None else Rect(0, 0, size, size)
    r0, r1 = _half_containing(base.r0, base.r1 - base.r0, target[0])
    c0, c1 = _half_containing(base.c0, base.c1 - base.c0, target[1])
    return Rect(r0, c0, r1, c1)


@dataclass(frozen=True)
class ExploreResult:
    solution: Solution | None
    steps: int
    inference: frozenset[tuple[int, Solution]] = frozenset()
    hinted: bool = False

    @property
    def found(self) -> bool:
        return self.solution is not None


def _nearest_member(maze: Maze, region: Rect) -> int:
    rows = np.arange(region.r0, region.r1)
    cols = np.arange(region.c0, region.c1)
    members = (rows[:, None] * maze.size + cols[None, :]).ravel()
    return int(members[np.argmin(maze.rank[members])])


def default_cap(size: int) -> int:
    return math.ceil(size * size / 2)


def explore(
    maze: Maze,
    targets: TargetMap,
    task_id: int,
    hint: Hint | None = None,
    cap: int | None = None,
    speed: float = 1.0,
    step_time: float = STEP_TIME,
) -> tuple[ExploreResult, float]:
    """Breadth-first search for one task's target.

    Without a hint the sweep covers the whole maze; with one it is confined
    to the hint region plus the corridor leading to the piece of the region
    that holds the target. A complex task's target is
    only recognised when a hint covers it. ``steps`` counts distinct cells
    visited, including the one holding the target.
    """
    if hint is not None and hint.task != task_id:
        raise ValueError(f"hint for task {hint.task} used on task {task_id}")
    if cap is None:
        cap = default_cap(maze.size)
    target = targets.target(task_id)
    t_idx = maze.index(target)
    detectable = not targets.is_complex(task_id) or (hint is not None and target in hint.region)

    if hint is None:
        reachable = maze.cells
        rank = int(maze.rank[t_idx])
    else:
        if target in hint.region:
            entry = maze.region_entry(hint.region, t_idx)
        else:  # stale hint after the target moved: search the rectangle's nearest piece
            entry = _nearest_member(maze, hint.region)
        ranks = maze.restricted_sweep(hint.region, entry)
        reachable = len(ranks)
        rank = ranks.get(t_idx)

    if detectable and rank is not None and rank + 1 <= cap:
        steps = rank + 1
        solution = targets.solution(task_id)
        inference = frozenset(
            (k, targets.solution(k)) for k in targets.tasks_at(target) if k != task_id
        )
        result = ExploreResult(solution, steps, inference, hint is not None)
    else:
        steps = min(cap, reachable)
        result = ExploreResult(None, steps, frozenset(), hint is not None)
    return result, steps * step_time / speed


def dump_maze(maze: Maze, targets: TargetMap | None = None) -> str:
    """Text rendering: '#' wall, '.' open, 'T<id>' for a cell holding targets."""
    n = maze.size
    marks: dict[Cell, str] = {}
    if targets is not None:
        for cell, ts in targets.inverse.items():
            marks[cell] = "T" + "/".join(str(t) for t in sorted(ts))
    rows = []
    for r in range(n):
        top = ["#"]
        mid = ["#"]
        for c in range(n):
            bits = maze.passages[r * n + c]
            top.append("." if bits & NORTH else "#")
            top.append("#")
            mid.append(marks.get((r, c), "."))
            mid.append("." if bits & EAST else "#")
        rows.append("".join(top))
        rows.append("".join(mid))
    rows.append("#" * (2 * n + 1))
    return "\n".join(rows) + "\n"
