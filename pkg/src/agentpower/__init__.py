"""Seeded simulator comparing distributed power control with language-model agents."""
from .dpc import FeasibilityReport, analyze_feasibility, dpc_step, run_dpc, target_sinr
from .metrics import SummaryRow, emit_trajectories, msgs_per_tx, rate_gap, summarize, total_power
from .orchestrator import generate_divergent_batch, run, sweep
from .radio_env import GenerationConfig, LinkMetrics, Scenario, compute_metrics, compute_targets, generate_scenario
from .runlog import RunConfig, RunLog, RunMode

__version__ = "0.1.0"

__all__ = [
    "FeasibilityReport",
    "GenerationConfig",
    "LinkMetrics",
    "RunConfig",
    "RunLog",
    "RunMode",
    "Scenario",
    "SummaryRow",
    "analyze_feasibility",
    "compute_metrics",
    "compute_targets",
    "dpc_step",
    "emit_trajectories",
    "generate_divergent_batch",
    "generate_scenario",
    "msgs_per_tx",
    "rate_gap",
    "run",
    "run_dpc",
    "summarize",
    "sweep",
    "target_sinr",
    "total_power",
]
