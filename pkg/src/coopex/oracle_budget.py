"""Oracle hints and the query budget they are paid from."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import BudgetExhausted, SharesMismatch
from .maze_world import Hint, TargetMap, hint_region

SHARED = "shared"
PER_AGENT = "per-agent"

# Budget splits for five agents ordered slowest to fastest, out of 100.
SCENARIOS: dict[str, tuple[int, ...]] = {
    "scenario1": (45, 25, 15, 10, 5),
    "scenario2": (30, 25, 20, 15, 10),
    "scenario3": (20, 20, 20, 20, 20),
    "scenario4": (10, 15, 20, 25, 30),
    "scenario5": (5, 10, 15, 25, 45),
}
POLICIES = ("equal", "favor-fast", "favor-slow", "explicit", *SCENARIOS)


@dataclass
class BudgetLedger:
    """Query balances, either one shared pool or one account per agent.

    Only the coordinator's event loop mutates a ledger.
    """

    mode: str = SHARED
    pool: int = 0
    allocations: dict[int, int] = field(default_factory=dict)
    query_cost: int = 1
    consumed: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in (SHARED, PER_AGENT):
            raise ValueError(f"unknown budget mode {self.mode!r}")
        if self.query_cost < 1:
            raise ValueError("query_cost must be >= 1")
        if self.pool < 0 or any(v < 0 for v in self.allocations.values()):
            raise ValueError("budget balances must be non-negative")
        self._initial_pool = self.pool
        self._initial_alloc = dict(self.allocations)

    @classmethod
    def shared(cls, total: int, query_cost: int = 1) -> "BudgetLedger":
        return cls(SHARED, pool=total, query_cost=query_cost)

    @classmethod
    def per_agent(cls, allocations: Mapping[int, int], query_cost: int = 1) -> "BudgetLedger":
        return cls(PER_AGENT, allocations=dict(allocations), query_cost=query_cost)

    def balance(self, agent: int) -> int:
        if self.mode == SHARED:
            return self.pool
        return self.allocations.get(agent, 0)

    def can_afford(self, agent: int) -> bool:
        return self.balance(agent) >= self.query_cost

    def charge(self, agent: int) -> None:
        if not self.can_afford(agent):
            raise BudgetExhausted(f"agent {agent} has {self.balance(agent)} left, query costs {self.query_cost}")
        if self.mode == SHARED:
            self.pool -= self.query_cost
        else:
            self.allocations[agent] -= self.query_cost
        self.consumed[agent] = self.consumed.get(agent, 0) + self.query_cost

    @property
    def total_allocated(self) -> int:
        return self._initial_pool + sum(self._initial_alloc.values())

    @property
    def total_remaining(self) -> int:
        return self.pool + sum(self.allocations.values())

    @property
    def total_consumed(self) -> int:
        return sum(self.consumed.values())

    def initial_balance(self, agent: int) -> int:
        if self.mode == SHARED:
            return self._initial_pool
        return self._initial_alloc.get(agent, 0)


def ask_help_from_oracle(
    task_id: int,
    agent: int,
    ledger: BudgetLedger,
    targets: TargetMap,
    prior: Hint | None = None,
    time: float = 0.0,
) -> Hint:
    """Charge one query and return a region containing the task's current target.

    A first hint is the grid quadrant holding the target; each further hint
    for the same task is the quadrant of the previous region.
    """
    ledger.charge(agent)
    target = targets.target(task_id)
    region = hint_region(targets.size, target, prior.region if prior is not None else None)
    return Hint(task_id, region, time, 1 if prior is None else prior.level + 1)


def direct_query_shortcut(unaccomplished: int, remaining_budget: int) -> bool:
    """Query before exploring when remaining budget exceeds the remaining work."""
    return 0 < unaccomplished < remaining_budget


def _largest_remainder(weights: Sequence[float], total: int) -> list[int]:
    s = sum(weights)
    if s <= 0:
        return [0] * len(weights)
    raw = [w * total / s for w in weights]
    out = [int(x) for x in raw]
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - out[i]), i))
    for i in order[: total - sum(out)]:
        out[i] += 1
    return out


def allocate_budgets(
    policy: str,
    total: int,
    speeds: Sequence[float],
    shares: Sequence[int] | None = None,
) -> list[int]:
    """Split ``total`` queries among agents; returns one share per agent, in agent order.

    Speed-ranked policies give the k-th slowest agent the k-th entry of the
    pattern (ties broken by agent id). ``favor-fast`` / ``favor-slow`` use the
    scenario 5 / scenario 1 pattern for five agents and rank-proportional
    weights otherwise.
    """
    n = len(speeds)
    if total < 0:
        raise ValueError("total budget must be >= 0")
    if n == 0:
        return []
    by_speed = sorted(range(n), key=lambda i: (speeds[i], i))

    if policy == "explicit":
        if shares is None or len(shares) != n:
            raise SharesMismatch(f"explicit policy needs {n} shares")
        if sum(shares) != total or any(s < 0 for s in shares):
            raise SharesMismatch(f"shares {list(shares)} do not sum to {total}")
        return [int(s) for s in shares]

    if policy == "equal":
        base, rem = divmod(total, n)
        out = [base] * n
        for i in by_speed[:rem]:
            out[i] += 1
        return out

    if policy in SCENARIOS:
        pattern = SCENARIOS[policy]
        if n != len(pattern):
            raise SharesMismatch(f"{policy} is defined for {len(pattern)} agents, got {n}")
        ranked = _largest_remainder(pattern, total)
    elif policy in ("favor-fast", "favor-slow"):
        if n == len(SCENARIOS["scenario5"]):
            pattern = SCENARIOS["scenario5" if policy == "favor-fast" else "scenario1"]
        else:
            pattern = list(range(1, n + 1))
            if policy == "favor-slow":
                pattern.reverse()
        ranked = _largest_remainder(pattern, total)
    else:
        raise ValueError(f"unknown budget policy {policy!r}")

    out = [0] * n
    for rank, agent in enumerate(by_speed):
        out[agent] = ranked[rank]
    return out
