"""Named experiments: a base config, a list of sweep points, and the metrics to aggregate.

Agent ids run slowest to fastest, so "f faster agents" are the last f ids
and a single fast agent is always the last one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from ..errors import UnknownPreset
from ..sim_engine import BudgetConfig, GraphSpec, RunConfig

DESK_SIZE = 100
FULL_SIZE = 400
REPLICATION = 20

_AGENTS5 = tuple(f"a{i}" for i in range(5))


@dataclass(frozen=True)
class SweepPoint:
    labels: tuple[tuple[str, object], ...]
    config: RunConfig

    def label(self, key: str):
        return dict(self.labels)[key]


@dataclass(frozen=True)
class PlotSpec:
    """How to pivot an aggregate into a columnar plot-data file."""

    x: str  # sweep key on the x axis
    x_label: str
    y_label: str
    series: str | None = None  # sweep key whose values become columns
    metric: str | None = None  # single metric; otherwise one column per metric
    metrics: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    description: str
    keys: tuple[str, ...]
    points: tuple[SweepPoint, ...]
    metrics: tuple[str, ...]
    replication: int = REPLICATION
    plot: PlotSpec | None = None
    compare: tuple[tuple[str, dict, dict], ...] = ()  # (graph, point A, point B)

    def __post_init__(self):
        if not self.points:
            raise ValueError(f"preset {self.name}: empty sweep")
        if self.replication < 1:
            raise ValueError(f"preset {self.name}: replication must be >= 1")

    def runs(self, base_seed: int = 0, replication: int | None = None):
        """Yield ``(point index, point, config)`` in a fixed order; seeds run base, base+1, ..."""
        reps = self.replication if replication is None else replication
        for index, point in enumerate(self.points):
            for i in range(reps):
                yield index, point, replace(point.config, seed=base_seed + i)


def _point(cfg: RunConfig, **labels) -> SweepPoint:
    return SweepPoint(tuple(labels.items()), cfg)


def _fast_last(f: int, speed: float = 2.0, n: int = 5) -> tuple[float, ...]:
    return (1.0,) * (n - f) + (float(speed),) * f


def _table1(size):
    pts = []
    for n in (1, 3, 5, 7, 9):
        cfg = RunConfig(
            graph=GraphSpec("random", tasks=200, layers=10),
            agents=n, maze_size=size, budget=BudgetConfig(total=400),
        )
        pts.append(_point(cfg, agents=n))
    return ExperimentPreset(
        "table1", "agent count against a 200-task random graph",
        ("agents",), tuple(pts), ("makespan", "total_processing"),
    )


def _fig3(size):
    pts = []
    for m in (40, 80, 120, 160, 200):
        cfg = RunConfig(
            graph=GraphSpec("random", tasks=m, layers=max(2, m // 8)),
            maze_size=size, budget=BudgetConfig(total=2 * m),
        )
        pts.append(_point(cfg, tasks=m))
    return ExperimentPreset(
        "fig3", "makespan as the task count grows, 5 agents",
        ("tasks",), tuple(pts), ("makespan",),
        plot=PlotSpec("tasks", "tasks", "makespan [virtual s]", metric="makespan"),
    )


def _table2(size):
    cfg = RunConfig(graph=GraphSpec("g40"), maze_size=size)
    return ExperimentPreset(
        "table2", "dependency waiting time per agent on G40",
        ("graph",), (_point(cfg, graph="g40"),),
        tuple(f"twt[{a}]" for a in _AGENTS5) + ("wt",),
    )


def _coop_sweep(name, description, speeds, size):
    pts = []
    for mode, coop in (("cooperative", True), ("individual", False)):
        cfg = RunConfig(graph=GraphSpec("g18"), maze_size=size, speeds=speeds, cooperative=coop)
        pts.append(_point(cfg, mode=mode))
    metrics = tuple(f"expl_mean[{a}]" for a in _AGENTS5) + ("expl_mean",)
    return ExperimentPreset(
        name, description, ("mode",), tuple(pts), metrics,
        plot=PlotSpec("agent", "agent", "mean exploration time [virtual s]", series="mode",
                      metrics=metrics[:-1]),
    )


def _fig4(size):
    return _coop_sweep("fig4", "cooperative against individual agents on G18", None, size)


def _fig5(size):
    return _coop_sweep("fig5", "G18 with one 2x agent, cooperative against individual",
                       _fast_last(1), size)


def _fig6(size):
    sizes = (50, 100, 200) if size == DESK_SIZE else (50, 100, 200, 300, 400)
    pts = [_point(RunConfig(graph=GraphSpec("g40"), maze_size=n), maze_size=n) for n in sizes]
    return ExperimentPreset(
        "fig6", "fresh exploration against inference-answered tasks by maze size",
        ("maze_size",), tuple(pts), ("fresh_mean", "inferred_mean"),
        plot=PlotSpec("maze_size", "maze side N [cells]", "mean task time [virtual s]",
                      metrics=("fresh_mean", "inferred_mean")),
    )


def _table3(size):
    pts = [
        _point(RunConfig(graph=GraphSpec("g18"), maze_size=size, speeds=_fast_last(f)), f=f)
        for f in range(6)
    ]
    return ExperimentPreset(
        "table3", "number of 2x agents on G18", ("f",), tuple(pts), ("expl_mean", "wt"),
    )


def _fig7a(size):
    pts = [
        _point(RunConfig(graph=GraphSpec("g40"), maze_size=size, speeds=_fast_last(1, s),
                         budget=BudgetConfig(total=20)), speed=s)
        for s in range(1, 11)
    ]
    return ExperimentPreset(
        "fig7a", "speed of one agent on G40, shared budget 20",
        ("speed",), tuple(pts), ("expl_mean",),
        plot=PlotSpec("speed", "speed multiplier", "mean exploration time [virtual s]",
                      metric="expl_mean"),
    )


def _fig7b(size):
    pts = [
        _point(RunConfig(graph=GraphSpec("g40"), maze_size=size, speeds=_fast_last(1, s),
                         budget=BudgetConfig(total=b)), speed=s, budget=b)
        for s in range(1, 6)
        for b in (20, 40, 80)
    ]
    return ExperimentPreset(
        "fig7b", "speed of one agent against shared budget on G40",
        ("speed", "budget"), tuple(pts), ("expl_mean",),
        plot=PlotSpec("speed", "speed multiplier", "mean exploration time [virtual s]",
                      series="budget", metric="expl_mean"),
    )


TABLE4_GRID = (
    (0, 20), (1, 20), (1, 40), (1, 60), (1, 80),
    (1, 100), (2, 100), (3, 100), (4, 100),
    (2, 20), (3, 20), (4, 20),
)


def _table4(size):
    pts = [
        _point(RunConfig(graph=GraphSpec(g), maze_size=size, speeds=_fast_last(f),
                         budget=BudgetConfig(total=b)), graph=g, f=f, budget=b)
        for g in ("g18", "g40")
        for f, b in TABLE4_GRID
    ]
    pair = ({"f": 1, "budget": 80}, {"f": 4, "budget": 20})
    return ExperimentPreset(
        "table4", "faster agents against budget on G18 and G40",
        ("graph", "f", "budget"), tuple(pts), ("expl_mean",),
        compare=(("g18", *pair), ("g40", *pair)),
    )


def _table5(size):
    pts = [
        _point(RunConfig(graph=GraphSpec(g), maze_size=size, speeds=(1.0, 2.0, 3.0, 4.0, 5.0),
                         budget=BudgetConfig(mode="per-agent", policy=f"scenario{k}", total=100)),
               graph=g, scenario=k)
        for g in ("g18", "g40")
        for k in range(1, 6)
    ]
    return ExperimentPreset(
        "table5", "budget split across agents of speed 1x..5x",
        ("graph", "scenario"), tuple(pts), ("expl_mean",),
    )


_BUILDERS: dict[str, Callable[[int], ExperimentPreset]] = {
    "table1": _table1,
    "fig3": _fig3,
    "table2": _table2,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "table3": _table3,
    "fig7a": _fig7a,
    "fig7b": _fig7b,
    "table4": _table4,
    "table5": _table5,
}
PRESET_NAMES = tuple(_BUILDERS)


def get_preset(name: str, full_scale: bool = False) -> ExperimentPreset:
    try:
        build = _BUILDERS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    return build(FULL_SIZE if full_scale else DESK_SIZE)
