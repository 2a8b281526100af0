"""``coopex`` command line.

Exit codes: 0 on success, 2 for configuration errors, 3 for I/O errors.
Output goes to ``--out``, else ``$COOPEX_OUT``, else ``./out``.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .errors import ConfigError, GraphError, SizeOutOfRange, UnknownPreset
from .harness.config import load_config
from .harness.presets import PRESET_NAMES
from .harness.runner import run_config, run_experiment
from .maze_world import dump_maze, generate_maze
from .task_graph import BUILTIN_EDGES, builtin_graph, write_edge_list

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get("COOPEX_OUT") or "out")


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    run_id = Path(args.config).stem
    report, files = run_config(cfg, _out_dir(args.out), run_id=run_id)
    print(
        f"makespan={report.makespan!r} expl_mean={report.expl_mean!r} wt={report.wt!r} "
        f"queries={report.queries_used} failed={len(report.failed_tasks)}"
    )
    for path in files.values():
        print(path)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    files = run_experiment(
        args.preset,
        _out_dir(args.out),
        replication=args.replications,
        base_seed=args.seed,
        full_scale=args.full_scale,
    )
    for key in sorted(files):
        print(files[key])
    return EXIT_OK


def _cmd_graph_export(args) -> int:
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_edge_list(builtin_graph(args.name), path)
    print(path)
    return EXIT_OK


def _cmd_maze_dump(args) -> int:
    sys.stdout.write(dump_maze(generate_maze(args.size, args.seed)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coopex", description="cooperative exploration simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="one simulation from a YAML config")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.set_defaults(func=_cmd_run)

    exp = sub.add_parser("experiment", help="replicate a named preset")
    exp.add_argument("preset", choices=PRESET_NAMES)
    exp.add_argument("--replications", type=int)
    exp.add_argument("--seed", type=int, default=0, help="base seed; run i uses seed+i")
    exp.add_argument("--full-scale", action="store_true", help="400x400 maze instead of 100x100")
    exp.add_argument("--out")
    exp.set_defaults(func=_cmd_experiment)

    graph = sub.add_parser("graph", help="program graph utilities")
    gsub = graph.add_subparsers(dest="graph_command", required=True)
    export = gsub.add_parser("export", help="write a built-in graph as an edge list")
    export.add_argument("name", choices=sorted(BUILTIN_EDGES))
    export.add_argument("--out", required=True)
    export.set_defaults(func=_cmd_graph_export)

    maze = sub.add_parser("maze", help="maze utilities")
    msub = maze.add_subparsers(dest="maze_command", required=True)
    dump = msub.add_parser("dump", help="print a maze as text")
    dump.add_argument("--size", type=int, required=True)
    dump.add_argument("--seed", type=int, default=0)
    dump.set_defaults(func=_cmd_maze_dump)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "replications", None) is not None and args.replications < 1:
        print("error: --replications must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, GraphError, SizeOutOfRange, UnknownPreset) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
