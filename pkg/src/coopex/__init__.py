"""Cooperative multi-agent task exploration under speed and query-budget constraints."""

from .sim_engine import RunConfig, SimReport, run_simulation

__all__ = ["RunConfig", "SimReport", "run_simulation"]
__version__ = "0.1.0"
