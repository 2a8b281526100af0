"""Deterministic discrete-event simulation in virtual time.

Events are ordered by ``(time, seq)`` where ``seq`` is assigned at enqueue,
so simultaneous completions resolve in the order they were scheduled.
Coordination (validation, reward, knowledge merge) costs no virtual time;
only lookups, oracle latency and exploration advance the clock.
"""

from __future__ import annotations

import csv
import hashlib
import heapq
import io
import math
import random
import statistics
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence

from .agent import (
    LOOKUP_TIME,
    AgentState,
    ExploreParams,
    Phase,
    World,
    knowledge_gain_process,
)
from .errors import ConfigInvalid
from .maze_world import (
    MAX_SIZE,
    MIN_SIZE,
    STEP_TIME,
    advance_epoch,
    generate_maze,
    place_targets,
)
from .oracle_budget import PER_AGENT, POLICIES, SHARED, BudgetLedger, allocate_budgets
from .scheduler import (
    Assignment,
    get_avail_tasks,
    handle_soln_check,
    handle_task_done,
    task_assignment,
)
from .task_graph import (
    BUILTIN_EDGES,
    G40_DENSITY,
    ProgramGraph,
    TaskState,
    TaskStatus,
    builtin_graph,
    random_complex_flags,
    random_graph,
    random_rewards,
    read_edge_list,
    update_dependencies,
)

DISPATCH = "dispatch"
EXPLORE_DONE = "explore-done"
SOLN_CHECK = "soln-check"
TASK_DONE = "task-done"
EPOCH_ADVANCE = "epoch-advance"

TRACE_HEADER = ["time", "seq", "kind", "agent", "task", "detail"]
REPORT_HEADER = [
    "run_id", "seed", "agent", "speed", "budget", "assigned", "accomplished",
    "expl_mean", "twt", "queries",
    "makespan", "total_processing", "failed_tasks", "budget_allocated", "budget_remaining",
]


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class GraphSpec:
    name: str = "g18"  # g18 | g40 | random | file
    tasks: int = 40
    layers: int = 5
    density: float = G40_DENSITY
    seed: int | None = None
    path: str | None = None

    def build(self, run_seed: int) -> ProgramGraph:
        if self.name == "random":
            seed = self.seed if self.seed is not None else run_seed
            return random_graph(self.tasks, self.layers, self.density, seed)
        if self.name == "file":
            return read_edge_list(self.path)
        return builtin_graph(self.name)


@dataclass(frozen=True)
class BudgetConfig:
    mode: str = SHARED
    policy: str = "equal"
    total: int = 20
    shares: tuple[int, ...] | None = None
    query_cost: int = 1


@dataclass(frozen=True)
class DynamicConfig:
    enabled: bool = False
    interval: float = 10.0
    p_expire: float = 0.0
    max_epochs: int = 50


@dataclass(frozen=True)
class RunConfig:
    graph: GraphSpec = GraphSpec()
    maze_size: int = 100
    agents: int = 5
    speeds: tuple[float, ...] | None = None
    budget: BudgetConfig = BudgetConfig()
    collision_rate: float = 0.3
    complex_rate: float = 0.2
    rewards: tuple[float, ...] | None = None
    complex_tasks: tuple[int, ...] | None = None
    step_cap: int | None = None
    step_time: float = STEP_TIME
    lookup_time: float = LOOKUP_TIME
    query_latency: float = 0.0
    direct_queries: int = 1
    dynamic: DynamicConfig = DynamicConfig()
    cooperative: bool = True
    seed: int = 0

    def agent_speeds(self) -> tuple[float, ...]:
        return tuple(self.speeds) if self.speeds is not None else (1.0,) * self.agents

    def problems(self) -> dict[str, str]:
        p: dict[str, str] = {}
        if self.agents < 1:
            p["agents"] = "must be >= 1"
        if self.speeds is not None:
            if len(self.speeds) != self.agents:
                p["speeds"] = f"expected {self.agents} entries, got {len(self.speeds)}"
            elif any(not s > 0 for s in self.speeds):
                p["speeds"] = "every speed must be > 0"
        if not MIN_SIZE <= self.maze_size <= MAX_SIZE:
            p["maze_size"] = f"must be in [{MIN_SIZE}, {MAX_SIZE}]"
        for name in ("collision_rate", "complex_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                p[name] = "must be in [0, 1]"
        if not 0.0 <= self.dynamic.p_expire <= 1.0:
            p["dynamic.p_expire"] = "must be in [0, 1]"
        if self.dynamic.enabled and not self.dynamic.interval > 0:
            p["dynamic.interval"] = "must be > 0"
        if self.step_cap is not None and self.step_cap < 1:
            p["step_cap"] = "must be >= 1"
        for name in ("step_time", "lookup_time", "query_latency"):
            if getattr(self, name) < 0:
                p[name] = "must be >= 0"
        g = self.graph
        if g.name not in (*BUILTIN_EDGES, "random", "file"):
            p["graph"] = f"unknown graph {g.name!r}"
        elif g.name == "random":
            if g.tasks < 1:
                p["graph.tasks"] = "must be >= 1"
            if g.layers < 1:
                p["graph.layers"] = "must be >= 1"
        elif g.name == "file" and not g.path:
            p["graph.path"] = "required for file graphs"
        b = self.budget
        if b.mode not in (SHARED, PER_AGENT):
            p["budget.mode"] = f"must be {SHARED!r} or {PER_AGENT!r}"
        if b.policy not in POLICIES:
            p["budget.policy"] = f"must be one of {', '.join(POLICIES)}"
        if b.total < 0:
            p["budget.total"] = "must be >= 0"
        if b.query_cost < 1:
            p["budget.query_cost"] = "must be >= 1"
        if b.policy == "explicit":
            if b.shares is None or len(b.shares) != self.agents or sum(b.shares) != b.total:
                p["budget.shares"] = f"need {self.agents} shares summing to {b.total}"
        elif b.policy.startswith("scenario") and b.mode == PER_AGENT and self.agents != 5:
            p["budget.policy"] = "scenario policies are defined for 5 agents"
        return p

    def validate(self) -> None:
        problems = self.problems()
        if problems:
            raise ConfigInvalid(problems)

    def build_graph(self) -> ProgramGraph:
        graph = self.graph.build(self.seed)
        if self.rewards is not None:
            rewards = self.rewards
        elif self.graph.name == "file":
            rewards = graph.rewards()
        else:
            rewards = random_rewards(graph.m, self.seed)
        if len(rewards) != graph.m:
            raise ConfigInvalid({"rewards": f"expected {graph.m} rewards"})
        if self.complex_tasks is not None:
            flags = set(self.complex_tasks)
        elif self.graph.name == "file" and graph.complex_tasks():
            flags = set(graph.complex_tasks())
        else:
            flags = random_complex_flags(graph.m, self.complex_rate, self.seed)
        return graph.with_attributes(rewards=rewards, complex_flags=flags)

    def build_ledger(self) -> BudgetLedger:
        b = self.budget
        if b.mode == SHARED:
            return BudgetLedger.shared(b.total, b.query_cost)
        shares = allocate_budgets(b.policy, b.total, self.agent_speeds(), b.shares)
        return BudgetLedger.per_agent(dict(enumerate(shares)), b.query_cost)


# -- trace and report --------------------------------------------------------


@dataclass(frozen=True)
class SimEvent:
    time: float
    seq: int
    kind: str
    agent: int | None = None
    task: int | None = None
    detail: tuple[tuple[str, Any], ...] = ()

    def get(self, key, default=None):
        return dict(self.detail).get(key, default)


@dataclass(frozen=True)
class AgentReport:
    agent: int
    speed: float
    budget: int | None
    assigned: int
    accomplished: int
    expl_mean: float
    twt: float
    queries: int
    busy: float
    idle: float
    durations: tuple[float, ...] = ()


@dataclass
class SimReport:
    makespan: float
    agents: list[AgentReport]
    expl_mean: float
    wt: float
    total_processing: float
    queries_used: int
    failed_tasks: list[int]
    accomplished_tasks: int
    rewards_granted: float
    budget_allocated: int
    budget_remaining: int
    fresh_mean: float
    inferred_mean: float
    trace: list[SimEvent] = field(default_factory=list)
    seed: int = 0

    def trace_csv(self) -> str:
        return trace_to_csv(self.trace)

    @property
    def trace_hash(self) -> str:
        return hashlib.sha256(self.trace_csv().encode()).hexdigest()

    def metrics(self) -> dict[str, float]:
        """Flat metric dictionary used for aggregation across runs."""
        out = {
            "expl_mean": self.expl_mean,
            "wt": self.wt,
            "makespan": self.makespan,
            "total_processing": self.total_processing,
            "queries": float(self.queries_used),
            "failed": float(len(self.failed_tasks)),
            "accomplished": float(self.accomplished_tasks),
            "fresh_mean": self.fresh_mean,
            "inferred_mean": self.inferred_mean,
        }
        for a in self.agents:
            out[f"expl_mean[a{a.agent}]"] = a.expl_mean
            out[f"twt[a{a.agent}]"] = a.twt
        return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trace_to_csv(trace: Iterable[SimEvent]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for ev in trace:
        detail = ";".join(f"{k}={_fmt(v)}" for k, v in ev.detail)
        w.writerow([_fmt(ev.time), ev.seq, ev.kind, _fmt(ev.agent), _fmt(ev.task), detail])
    return buf.getvalue()


def report_rows(report: SimReport, run_id: str) -> list[list[str]]:
    rows = []
    for a in report.agents:
        rows.append([
            run_id, str(report.seed), str(a.agent), _fmt(float(a.speed)), _fmt(a.budget),
            str(a.assigned), str(a.accomplished), _fmt(a.expl_mean), _fmt(a.twt), str(a.queries),
            "", "", "", "", "",
        ])
    rows.append([
        run_id, str(report.seed), "SYSTEM", "", "", "-", "-",
        _fmt(report.expl_mean), _fmt(report.wt), str(report.queries_used),
        _fmt(report.makespan), _fmt(report.total_processing), str(len(report.failed_tasks)),
        str(report.budget_allocated), str(report.budget_remaining),
    ])
    return rows


def report_to_csv(report: SimReport, run_id: str = "run", header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(REPORT_HEADER)
    w.writerows(report_rows(report, run_id))
    return buf.getvalue()


# -- metrics -----------------------------------------------------------------


def _mean(xs: Sequence[float], empty: float = 0.0) -> float:
    return statistics.fmean(xs) if xs else empty


def compute_metrics(trace: Sequence[SimEvent], graph: ProgramGraph, agent_ids: Sequence[int]) -> dict:
    """Replay a complete trace and derive timing metrics.

    TWT(a) accumulates every interval in which agent ``a`` was idle while at
    least one unassigned, unfinished task was still waiting on dependencies.
    Tasks downstream of a failed one are never runnable and do not count.
    """
    status = TaskStatus.initial(graph)
    doomed: set[int] = set()
    idle = {a: True for a in agent_ids}
    started: dict[int, float] = {}
    durations = {a: [] for a in agent_ids}
    sources = {a: [] for a in agent_ids}
    assigned = {a: set() for a in agent_ids}
    accomplished = {a: set() for a in agent_ids}
    queries = {a: 0 for a in agent_ids}
    twt = {a: 0.0 for a in agent_ids}
    end = 0.0
    last = 0.0

    def waiting_work() -> bool:
        return any(
            s is TaskState.PENDING and i not in doomed for i, s in enumerate(status.state)
        )

    for ev in trace:
        if ev.time > last:
            if waiting_work():
                for a, is_idle in idle.items():
                    if is_idle:
                        twt[a] += ev.time - last
            last = ev.time
        if ev.kind == DISPATCH:
            status.mark_assigned(ev.task)
            idle[ev.agent] = False
            started[ev.agent] = ev.time
            assigned[ev.agent].add(ev.task)
        elif ev.kind == TASK_DONE:
            outcome = ev.get("status")
            if outcome == "accomplished":
                status.state[ev.task] = TaskState.ASSIGNED
                update_dependencies(status, ev.task, ev.time)
                accomplished[ev.agent].add(ev.task)
            elif outcome == "failed":
                status.mark_failed(ev.task, ev.time)
                doomed |= graph.descendants(ev.task)
            else:  # rejected as stale: back in the ready pool
                status.state[ev.task] = (
                    TaskState.READY if status.deps_done(ev.task) else TaskState.PENDING
                )
            idle[ev.agent] = True
            durations[ev.agent].append(ev.time - started.pop(ev.agent))
            sources[ev.agent].append(ev.get("source"))
            queries[ev.agent] += int(ev.get("queries", 0))
            end = max(end, ev.time)
        elif ev.kind == EPOCH_ADVANCE:
            for t in ev.get("tasks", ()):
                status.reopen(t)
                if not status.deps_done(t):
                    status.state[t] = TaskState.PENDING

    per_agent = {}
    for a in agent_ids:
        busy = math.fsum(durations[a])
        per_agent[a] = dict(
            expl_mean=_mean(durations[a]),
            twt=twt[a],
            busy=busy,
            idle=end - busy,
            assigned=len(assigned[a]),
            accomplished=len(accomplished[a]),
            queries=queries[a],
            durations=tuple(durations[a]),
        )
    pooled = [d for a in agent_ids for d in durations[a]]
    fresh = [d for a in agent_ids for d, s in zip(durations[a], sources[a]) if s == "exploration"]
    inferred = [d for a in agent_ids for d, s in zip(durations[a], sources[a]) if s == "knowledge"]
    return dict(
        makespan=end,
        agents=per_agent,
        expl_mean=_mean(pooled),
        wt=_mean([twt[a] for a in agent_ids]),
        total_processing=math.fsum(pooled),
        fresh_mean=_mean(fresh, math.nan),
        inferred_mean=_mean(inferred, math.nan),
    )


# -- engine ------------------------------------------------------------------


class Simulation:
    """One run of the coordinator loop over a fixed world."""

    def __init__(self, config: RunConfig):
        config.validate()
        self.config = config
        self.graph = config.build_graph()
        self.maze = generate_maze(config.maze_size, config.seed)
        self.targets = place_targets(self.maze, self.graph, config.collision_rate, config.seed)
        self.ledger = config.build_ledger()
        self.agents = [AgentState(i, s) for i, s in enumerate(config.agent_speeds())]
        self.status = TaskStatus.initial(self.graph)
        self.assignment = Assignment()
        self.params = ExploreParams(
            config.step_cap, config.step_time, config.lookup_time, config.query_latency,
            config.direct_queries,
        )
        self.world = World(
            self.maze, self.targets, self.ledger, self.status.remaining, lambda: self.now
        )
        self.now = 0.0
        self.trace: list[SimEvent] = []
        self.validations = []
        self._queue: list = []
        self._seq = 0
        self._idle = set(range(config.agents))
        self._procs: dict[int, tuple[int, Any, Phase]] = {}
        self._epochs = 0
        self._expiry_rng = random.Random(f"expire:{config.seed}")

    def _schedule(self, time, kind, payload):
        heapq.heappush(self._queue, (time, self._seq, kind, payload))
        self._seq += 1

    def _log(self, kind, agent=None, task=None, **detail):
        self.trace.append(SimEvent(self.now, len(self.trace), kind, agent, task, tuple(detail.items())))

    def dispatch(self):
        idle = sorted(self._idle)
        ready = get_avail_tasks(self.graph, self.status, len(idle))
        delta = task_assignment(ready, idle[: len(ready)], self.assignment, self.now, self.targets)
        for agent_id, task in delta.items():
            self.status.mark_assigned(task)
            self._idle.discard(agent_id)
            self._log(DISPATCH, agent_id, task, epoch=self.targets.epoch(task))
            proc = knowledge_gain_process(self.agents[agent_id], task, self.world, self.params)
            self._advance(agent_id, task, proc, first=True)

    def _advance(self, agent_id, task, proc, first=False):
        try:
            phase = next(proc) if first else proc.send(None)
        except StopIteration as stop:
            self._finish(agent_id, task, stop.value)
            return
        self._procs[agent_id] = (task, proc, phase)
        self._schedule(self.now + phase.duration, EXPLORE_DONE, agent_id)

    def _phase_done(self, agent_id):
        task, proc, phase = self._procs.pop(agent_id)
        if phase.result is not None:
            r = phase.result
            self._log(EXPLORE_DONE, agent_id, task, phase=phase.kind, found=int(r.found),
                      steps=r.steps, hinted=int(r.hinted))
        else:
            self._log(EXPLORE_DONE, agent_id, task, phase=phase.kind)
        self._advance(agent_id, task, proc)

    def _finish(self, agent_id, task, outcome):
        agent = self.agents[agent_id]
        agent.durations.append(outcome.duration)
        agent.busy_time += outcome.duration
        agent.queries_used += outcome.queries
        common = dict(source=outcome.source, queries=outcome.queries, steps=outcome.steps)
        if outcome.solution is not None:
            rec = handle_soln_check(task, outcome.solution, agent_id, self.targets, self.graph,
                                    self.status, self.assignment, self.now)
            self.validations.append(rec)
            self._log(SOLN_CHECK, agent_id, task, verdict=int(rec.verdict), stale=int(rec.stale),
                      reward=rec.reward)
            if rec.verdict:
                handle_task_done(task, outcome.solution, outcome.inference, agent, self.agents,
                                 self.config.cooperative)
                self._log(TASK_DONE, agent_id, task, status="accomplished",
                          inferred=len(outcome.inference), **common)
            else:
                self.status.state[task] = (
                    TaskState.READY if self.status.deps_done(task) else TaskState.PENDING
                )
                self._log(TASK_DONE, agent_id, task, status="stale", **common)
        else:
            self.status.mark_failed(task, self.now)
            self._log(TASK_DONE, agent_id, task, status="failed", **common)
        self.assignment.current.pop(task, None)
        self._idle.add(agent_id)
        self.dispatch()

    def _has_work(self) -> bool:
        return any(
            s in (TaskState.PENDING, TaskState.READY, TaskState.ASSIGNED) for s in self.status.state
        )

    def _epoch_advance(self):
        dyn = self.config.dynamic
        self._epochs += 1
        done = self.status.ids_in(TaskState.ACCOMPLISHED)
        chosen = [t for t in done if self._expiry_rng.random() < dyn.p_expire]
        if chosen:
            self.targets = advance_epoch(self.targets, chosen, self.config.seed * 1000 + self._epochs)
            self.world.targets = self.targets
            for t in chosen:
                self.status.reopen(t)
                if not self.status.deps_done(t):
                    self.status.state[t] = TaskState.PENDING
        self._log(EPOCH_ADVANCE, tasks=tuple(chosen), epoch=self._epochs)
        if self._has_work() and self._epochs < dyn.max_epochs:
            self._schedule(self.now + dyn.interval, EPOCH_ADVANCE, None)
        if chosen:
            self.dispatch()

    def run(self) -> SimReport:
        if self.config.dynamic.enabled:
            self._schedule(self.config.dynamic.interval, EPOCH_ADVANCE, None)
        self.dispatch()
        while self._queue:
            time, _, kind, payload = heapq.heappop(self._queue)
            if kind == EPOCH_ADVANCE and not (self._has_work() and self._procs):
                continue
            self.now = time
            if kind == EXPLORE_DONE:
                self._phase_done(payload)
            else:
                self._epoch_advance()
        return self._report()

    def _report(self) -> SimReport:
        ids = [a.id for a in self.agents]
        m = compute_metrics(self.trace, self.graph, ids)
        per_agent_budget = self.ledger.mode == PER_AGENT
        agents = [
            AgentReport(
                agent=a.id,
                speed=a.speed,
                budget=self.ledger.initial_balance(a.id) if per_agent_budget else None,
                assigned=m["agents"][a.id]["assigned"],
                accomplished=m["agents"][a.id]["accomplished"],
                expl_mean=m["agents"][a.id]["expl_mean"],
                twt=m["agents"][a.id]["twt"],
                queries=m["agents"][a.id]["queries"],
                busy=m["agents"][a.id]["busy"],
                idle=m["agents"][a.id]["idle"],
                durations=m["agents"][a.id]["durations"],
            )
            for a in self.agents
        ]
        return SimReport(
            makespan=m["makespan"],
            agents=agents,
            expl_mean=m["expl_mean"],
            wt=m["wt"],
            total_processing=m["total_processing"],
            queries_used=self.ledger.total_consumed,
            failed_tasks=self.status.ids_in(TaskState.FAILED),
            accomplished_tasks=len(self.status.ids_in(TaskState.ACCOMPLISHED)),
            rewards_granted=math.fsum(r.reward for r in self.validations),
            budget_allocated=self.ledger.total_allocated,
            budget_remaining=self.ledger.total_remaining,
            fresh_mean=m["fresh_mean"],
            inferred_mean=m["inferred_mean"],
            trace=self.trace,
            seed=self.config.seed,
        )


def run_simulation(config: RunConfig) -> SimReport:
    """Execute one run; identical configs give identical reports and traces."""
    return Simulation(config).run()


def with_overrides(config: RunConfig, **changes) -> RunConfig:
    return replace(config, **changes)
