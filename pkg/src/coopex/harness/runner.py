"""Replicate presets over seeds, write per-run and aggregate CSVs, and pivot plot data."""

from __future__ import annotations

import csv
import io
import logging
import math
import statistics
from pathlib import Path
from typing import Iterable, Sequence

from ..sim_engine import RunConfig, SimReport, report_to_csv, run_simulation
from .presets import ExperimentPreset, PlotSpec, get_preset

log = logging.getLogger(__name__)

AGGREGATE_TAIL = ["metric", "mean", "stddev", "n"]


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _csv_text(rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def aggregate(values: Sequence[float]) -> tuple[float, float, int]:
    """Mean, sample standard deviation (0 for a single value) and count.

    NaN values (a run where the metric is undefined, e.g. no inferred tasks)
    are skipped, so ``n`` counts only the runs that contributed.
    """
    values = [v for v in values if not math.isnan(v)]
    n = len(values)
    if n == 0:
        return math.nan, math.nan, 0
    mean = statistics.fmean(values)
    sd = statistics.stdev(values) if n > 1 else 0.0
    return mean, sd, n


def run_id_for(preset: str, point_index: int, seed: int) -> str:
    return f"{preset}-p{point_index:02d}-s{seed}"


def run_experiment(
    preset: ExperimentPreset | str,
    out_dir,
    replication: int | None = None,
    base_seed: int = 0,
    full_scale: bool = False,
) -> dict[str, Path]:
    """Run every sweep point ``replication`` times and write results under ``out_dir``.

    Files: ``runs/<run_id>.csv`` (report per run), ``<name>_runs.csv`` (one
    metric value per row), ``<name>_aggregate.csv``, plus plot data or the
    comparison table when the preset defines one.
    """
    if isinstance(preset, str):
        preset = get_preset(preset, full_scale=full_scale)
    out = Path(out_dir)
    keys = list(preset.keys)
    long_rows = [["run_id", "seed", *keys, "metric", "value"]]
    collected: dict[tuple, list[float]] = {}
    written: dict[str, Path] = {}

    for index, point, cfg in preset.runs(base_seed, replication):
        report = run_simulation(cfg)
        rid = run_id_for(preset.name, index, cfg.seed)
        _write(out / "runs" / f"{rid}.csv", report_to_csv(report, rid))
        metrics = report.metrics()
        labels = [point.label(k) for k in keys]
        for name in preset.metrics:
            value = float(metrics[name])
            long_rows.append([rid, cfg.seed, *labels, name, _fmt(value)])
            collected.setdefault((index, name), []).append(value)
    log.info("%s: %d sweep points done", preset.name, len(preset.points))

    agg_rows = [["preset", *keys, *AGGREGATE_TAIL]]
    for index, point in enumerate(preset.points):
        for name in preset.metrics:
            mean, sd, n = aggregate(collected[(index, name)])
            agg_rows.append([preset.name, *(point.label(k) for k in keys), name, _fmt(mean), _fmt(sd), n])

    written["runs"] = _write(out / f"{preset.name}_runs.csv", _csv_text(long_rows))
    written["aggregate"] = _write(out / f"{preset.name}_aggregate.csv", _csv_text(agg_rows))
    if preset.plot is not None:
        written["plot"] = emit_plot_data(written["aggregate"], out, preset)
    if preset.compare:
        written["comparison"] = _write(
            out / f"{preset.name}_comparison.csv", _csv_text(comparison_rows(preset, agg_rows))
        )
    return written


def run_config(cfg: RunConfig, out_dir, run_id: str = "run") -> tuple[SimReport, dict[str, Path]]:
    """Single run from a config; writes its report and full trace."""
    out = Path(out_dir)
    report = run_simulation(cfg)
    files = {
        "report": _write(out / f"{run_id}_report.csv", report_to_csv(report, run_id)),
        "trace": _write(out / f"{run_id}_trace.csv", report.trace_csv()),
    }
    return report, files


def read_aggregate(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _describe(point: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in point.items())


def comparison_rows(preset: ExperimentPreset, agg_rows: list[list]) -> list[list]:
    """Pairwise winners (lower mean exploration time) for the preset's bold pairs."""
    header, body = agg_rows[0], agg_rows[1:]
    table = [dict(zip(header, map(str, row))) for row in body]

    def lookup(graph, point):
        for row in table:
            if row["graph"] == graph and row["metric"] == "expl_mean" and all(
                row[k] == str(v) for k, v in point.items()
            ):
                return float(row["mean"])
        raise KeyError(f"{graph} {point}")

    rows = [["graph", "config_a", "config_b", "expl_mean_a", "expl_mean_b", "winner"]]
    for graph, a, b in preset.compare:
        ea, eb = lookup(graph, a), lookup(graph, b)
        winner = _describe(a) if ea <= eb else _describe(b)
        rows.append([graph, _describe(a), _describe(b), _fmt(ea), _fmt(eb), winner])
    return rows


def _pivot(spec: PlotSpec, rows: list[dict[str, str]]) -> tuple[list[str], list[list[str]]]:
    if spec.metrics and spec.series is None:
        # one column per metric, x from the sweep key
        cols = list(spec.metrics)
        data: dict[str, dict[str, str]] = {}
        for r in rows:
            if r["metric"] in cols:
                data.setdefault(r[spec.x], {})[r["metric"]] = r["mean"]
        return [spec.x, *cols], [[x, *(vals.get(c, "nan") for c in cols)] for x, vals in data.items()]
    if spec.metrics:
        # x enumerates the metrics themselves (one per agent), columns are series values
        series: list[str] = []
        data = {}
        for r in rows:
            if r["metric"] not in spec.metrics:
                continue
            s = r[spec.series]
            if s not in series:
                series.append(s)
            data.setdefault(r["metric"], {})[s] = r["mean"]
        out = []
        for m in spec.metrics:
            if m in data:
                x = m[m.index("[") + 1 : m.index("]")] if "[" in m else m
                out.append([x, *(data[m].get(s, "nan") for s in series)])
        return [spec.x, *series], out
    if spec.series:
        series, data = [], {}
        for r in rows:
            if r["metric"] != spec.metric:
                continue
            s = r[spec.series]
            if s not in series:
                series.append(s)
            data.setdefault(r[spec.x], {})[s] = r["mean"]
        cols = [f"{spec.series}={s}" for s in series]
        return [spec.x, *cols], [[x, *(v.get(s, "nan") for s in series)] for x, v in data.items()]
    body = [[r[spec.x], r["mean"]] for r in rows if r["metric"] == spec.metric]
    return [spec.x, spec.metric], body


def emit_plot_data(aggregate_path, out_dir=None, preset: ExperimentPreset | str | None = None) -> Path:
    """Pivot an aggregate CSV into a whitespace-separated ``<name>.dat`` file."""
    path = Path(aggregate_path)
    rows = read_aggregate(path)
    if preset is None:
        preset = rows[0]["preset"] if rows else path.stem.removesuffix("_aggregate")
    if isinstance(preset, str):
        preset = get_preset(preset)
    spec = preset.plot
    if spec is None:
        raise ValueError(f"preset {preset.name} has no plot data")
    columns, body = _pivot(spec, rows)
    lines = [
        f"# {preset.name}: {preset.description}",
        f"# x: {spec.x_label}; y: {spec.y_label}",
        "# " + " ".join(columns),
    ]
    lines += [" ".join(row) for row in body]
    target = Path(out_dir) if out_dir is not None else path.parent
    return _write(target / f"{preset.name}.dat", "\n".join(lines) + "\n")

