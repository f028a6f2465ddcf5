"""Boundary-flip Markov chains for sampling and optimizing district plans."""

from ._kernel import BACKEND, available_backends
from .chain import (
    AnnealSchedule, ChainConfig, ConstraintGates, Trace, TraceRow, advance, load_trace,
    mh_acceptance, run, step_anneal, step_metropolis, step_plain, step_prerun,
)
from .graph import (
    DualGraph, Edge, GraphFormatError, PopModel, Unit, generate_grid, load_graph, make_graph,
    path_graph, read_graph_file, save_graph,
)
from .oracle import (
    InstanceTooLarge, StateIndex, canonical, enumerate_partitions, enumerate_partitions_bruteforce,
    tv_distance, uniformity_check,
)
from .partition import (
    DistrictStats, FlipProposal, Partition, apply_flip, district_holes, initial_state,
    is_simply_connected, is_valid_flip, load_partition, propose_flip, recompute_stats,
    save_partition,
)
from .render import RenderSpec, render_svg
from .scoring import (
    ElectionResult, ScoreWeights, VoteTable, balanced_score, compact_score, energy,
    evaluate_election, load_votes, max_population_deviation,
)

__version__ = "0.1.0"
