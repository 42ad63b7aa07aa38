"""Aggregation-tree construction and interference-free multichannel TDMA
scheduling for duty-cycled sensor networks."""

from .model import SINK, DutyCycle, Network, Params, min_sleep_delay, sleep_delay
from .netgen import (
    GenerationError,
    NetworkStats,
    derive_seed,
    dump_topology,
    generate_network,
    load_topology,
    network_stats,
)
from .scheduler import (
    CandidatePolicy,
    Schedule,
    Transmission,
    Violation,
    aggregation_delay,
    brute_force_optimal,
    dump_schedule,
    load_schedule,
    schedule,
    verify_schedule,
)
from .tree import (
    AggregationTree,
    Layering,
    build_ddas_tree,
    build_spt_tree,
    compute_layers,
    dump_tree,
    load_tree,
)
from .experiments import (
    ExperimentResult,
    Scheme,
    SweepSpec,
    run_sweep,
    summarize,
    summary,
)

__version__ = "0.1.0"

__all__ = [
    "SINK",
    "AggregationTree",
    "CandidatePolicy",
    "DutyCycle",
    "ExperimentResult",
    "GenerationError",
    "Layering",
    "Network",
    "NetworkStats",
    "Params",
    "Schedule",
    "Scheme",
    "SweepSpec",
    "Transmission",
    "Violation",
    "aggregation_delay",
    "brute_force_optimal",
    "build_ddas_tree",
    "build_spt_tree",
    "compute_layers",
    "derive_seed",
    "dump_schedule",
    "dump_topology",
    "dump_tree",
    "generate_network",
    "load_schedule",
    "load_topology",
    "load_tree",
    "min_sleep_delay",
    "network_stats",
    "run_sweep",
    "schedule",
    "sleep_delay",
    "summarize",
    "summary",
    "verify_schedule",
]
