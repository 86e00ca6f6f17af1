"""PartialACO: population-based ant colony optimisation for the symmetric TSP
in which ants rebuild only part of their best tour each iteration."""

from ._backend import available as available_backends
from ._backend import kernels as _kernels
from .bench import (
    AggregateStats,
    ExperimentSpec,
    PairingError,
    PRESETS,
    load_spec,
    preset_spec,
    read_rows,
    render_table,
    report_speedup,
    run_experiment,
)
from .colony import Ant, ColonyState, RunConfig, check_state, mod_cap
from .construction import (
    ConstructionScratch,
    PheromoneMatrix,
    construct_full,
    construct_partial,
    full_comparisons,
    partial_comparisons,
    select_next,
)
from .engine import ConfigError, Mode, RunReport, run, run_timed_baseline
from .instance import (
    Instance,
    Tour,
    TourError,
    TSPLIBError,
    brute_force_optimum,
    check_permutation,
    dist,
    load_instance,
    load_optima,
    parse_tsplib,
    parse_tsplib_text,
    random_instance,
    tour_length,
    write_tsplib,
)
from .local_search import TwoOptParams, maybe_two_opt, two_opt
from .rng import SplitMix64

BACKEND = _kernels.BACKEND

__version__ = "0.1.0"

__all__ = [
    "AggregateStats", "Ant", "BACKEND", "ColonyState", "ConfigError", "ConstructionScratch",
    "ExperimentSpec", "Instance", "Mode", "PRESETS", "PairingError", "PheromoneMatrix", "RunConfig",
    "RunReport", "SplitMix64", "TSPLIBError", "Tour", "TourError", "TwoOptParams",
    "available_backends", "brute_force_optimum", "check_permutation", "check_state",
    "construct_full", "construct_partial", "dist", "full_comparisons", "load_instance",
    "load_optima", "load_spec", "maybe_two_opt", "mod_cap", "parse_tsplib", "parse_tsplib_text",
    "partial_comparisons", "preset_spec", "random_instance", "read_rows", "render_table",
    "report_speedup", "run", "run_experiment", "run_timed_baseline", "select_next", "tour_length",
    "two_opt", "write_tsplib",
]
