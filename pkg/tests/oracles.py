"""Reference checks written independently of the package internals.

Each oracle re-derives its answer from raw inputs (passage bits, edge
lists, trace rows) instead of calling the code under test.
"""

from collections import deque

# passage bits: north, south, east, west
_DIRS = ((1, -1, 0), (2, 1, 0), (4, 0, 1), (8, 0, -1))


def open_neighbours(passages, n, r, c):
    bits = int(passages[r * n + c])
    for bit, dr, dc in _DIRS:
        if bits & bit:
            yield r + dr, c + dc


def flood_fill(passages, n):
    """Cells reachable from (0, 0) and the number of undirected passages."""
    seen = {(0, 0)}
    stack = [(0, 0)]
    while stack:
        r, c = stack.pop()
        for nb in open_neighbours(passages, n, r, c):
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    links = sum(bin(int(b)).count("1") for b in passages) // 2
    return seen, links


def passages_symmetric(passages, n):
    opposite = {1: 2, 2: 1, 4: 8, 8: 4}
    for r in range(n):
        for c in range(n):
            bits = int(passages[r * n + c])
            for bit, dr, dc in _DIRS:
                if bits & bit:
                    rr, cc = r + dr, c + dc
                    if not (0 <= rr < n and 0 <= cc < n):
                        return False
                    if not int(passages[rr * n + cc]) & opposite[bit]:
                        return False
    return True


def bfs_visit_count(passages, n, target, allowed=None):
    """Cells dequeued up to and including ``target`` in a N,S,E,W breadth-first sweep.

    ``allowed`` restricts the sweep to a set of cells. Returns None when the
    target is never reached.
    """
    start = (0, 0)
    seen = {start}
    queue = deque([start])
    count = 0
    while queue:
        cell = queue.popleft()
        count += 1
        if cell == target:
            return count
        for nb in open_neighbours(passages, n, *cell):
            if nb not in seen and (allowed is None or nb in allowed):
                seen.add(nb)
                queue.append(nb)
    return None


def tree_path(passages, n, target):
    """Cells on the unique entrance-to-target path (perfect maze)."""
    prev = {(0, 0): None}
    queue = deque([(0, 0)])
    while queue:
        cell = queue.popleft()
        if cell == target:
            break
        for nb in open_neighbours(passages, n, *cell):
            if nb not in prev:
                prev[nb] = cell
                queue.append(nb)
    path = []
    cell = target
    while cell is not None:
        path.append(cell)
        cell = prev[cell]
    return path[::-1]


def kahn_order(m, edges):
    """A topological order of 0..m-1, or None when the edges contain a cycle."""
    indeg = [0] * m
    succ = [[] for _ in range(m)]
    for u, v in edges:
        succ[u].append(v)
        indeg[v] += 1
    queue = deque(i for i in range(m) if indeg[i] == 0)
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return order if len(order) == m else None


def respects(order, edges):
    pos = {t: i for i, t in enumerate(order)}
    return all(pos[u] < pos[v] for u, v in edges)


def _detail(row):
    return dict(row.detail)


def trace_violations(trace, deps):
    """Replay a trace and list every safety violation found.

    Checks: a task is dispatched only when all its dependencies are
    accomplished (and still valid), never to a busy agent, and never while
    already in flight; an agent only reports the task it holds; event
    times and sequence numbers never go backwards.
    """
    problems = []
    done = set()
    holding = {}  # agent -> task
    in_flight = set()
    last_key = (float("-inf"), -1)
    for ev in trace:
        key = (ev.time, ev.seq)
        if key < last_key:
            problems.append(f"event {ev.seq} out of order")
        last_key = key
        if ev.kind == "dispatch":
            missing = [u for u in deps[ev.task] if u not in done]
            if missing:
                problems.append(f"t={ev.time}: task {ev.task} dispatched before deps {missing}")
            if ev.agent in holding:
                problems.append(f"t={ev.time}: agent {ev.agent} already holds {holding[ev.agent]}")
            if ev.task in in_flight or ev.task in done:
                problems.append(f"t={ev.time}: task {ev.task} dispatched twice")
            holding[ev.agent] = ev.task
            in_flight.add(ev.task)
        elif ev.kind == "task-done":
            if holding.get(ev.agent) != ev.task:
                problems.append(f"t={ev.time}: agent {ev.agent} reported {ev.task} it does not hold")
            holding.pop(ev.agent, None)
            in_flight.discard(ev.task)
            if _detail(ev).get("status") == "accomplished":
                done.add(ev.task)
        elif ev.kind == "epoch-advance":
            for t in _detail(ev).get("tasks", ()):
                done.discard(t)
    return problems


def budget_balanced(report):
    return report.queries_used + report.budget_remaining == report.budget_allocated
