"""YAML run configurations.

A config is a mapping whose keys mirror :class:`~coopex.sim_engine.RunConfig`.
``graph``, ``budget`` and ``dynamic`` are nested mappings (``graph`` may also be
a bare name such as ``g18``). Anything left out takes the dataclass default;
unknown keys are an error. See ``configs/example.yaml`` for every field.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Any, Mapping

import yaml

from ..errors import ParseError, SchemaError
from ..sim_engine import BudgetConfig, DynamicConfig, GraphSpec, RunConfig

_NESTED = {"graph": GraphSpec, "budget": BudgetConfig, "dynamic": DynamicConfig}
_TUPLES = {"speeds", "rewards", "complex_tasks", "shares"}


def _coerce(path: str, name: str, value, default, problems: dict) -> Any:
    if name in _TUPLES:
        if value is None:
            return None
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            problems[path] = "expected a list of numbers"
            return default
        return tuple(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            problems[path] = "expected true or false"
            return default
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems[path] = "expected a number"
            return default
        return float(value)
    if isinstance(default, int) or name in ("step_cap", "seed"):
        if value is None and default is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            problems[path] = "expected an integer"
            return default
        return value
    if isinstance(default, str) or name == "path":
        if value is None and default is None:
            return None
        if not isinstance(value, str):
            problems[path] = "expected a string"
            return default
        return value
    return value


def _build(cls, data: Mapping, prefix: str, problems: dict):
    defaults = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        path = f"{prefix}{key}"
        if key not in known:
            problems[path] = "unknown key"
            continue
        if key in _NESTED and cls is RunConfig:
            sub = _NESTED[key]
            if key == "graph" and isinstance(value, str):
                value = {"name": value}
            if not isinstance(value, Mapping):
                problems[path] = "expected a mapping"
                continue
            kwargs[key] = _build(sub, value, f"{path}.", problems)
            continue
        kwargs[key] = _coerce(path, key, value, getattr(defaults, key), problems)
    return dataclasses.replace(defaults, **kwargs)


def config_from_mapping(data: Mapping) -> RunConfig:
    problems: dict[str, str] = {}
    if not isinstance(data, Mapping):
        raise SchemaError({"<root>": "expected a mapping at the top level"})
    cfg = _build(RunConfig, data, "", problems)
    if not problems:
        problems.update(cfg.problems())
    if problems:
        raise SchemaError(problems)
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse a YAML document into a validated :class:`RunConfig`."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        msg = getattr(exc, "problem", None) or str(exc)
        if mark is not None:
            raise ParseError(msg, mark.line + 1, mark.column + 1) from exc
        raise ParseError(msg) from exc
    if data is None:
        data = {}
    return config_from_mapping(data)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def config_to_mapping(cfg: RunConfig) -> dict:
    out = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if dataclasses.is_dataclass(v):
            out[f.name] = {g.name: _plain(getattr(v, g.name)) for g in dataclasses.fields(v)}
        else:
            out[f.name] = _plain(v)
    return out


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_mapping(cfg), sort_keys=False)
