"""Deterministic toolkit for the data-I/O side of sampling-based GNN
training: graph partitioning for sampling locality, proximity-aware batch
ordering, multi-level feature-cache simulation, neighbor-sampling
communication accounting, and min-max pipeline resource allocation."""

from .allocator import (
    AllocationPlan,
    CacheCostModel,
    PipelineProfile,
    evaluate_plan,
    fit_cache_cost,
    solve_allocation,
)
from .cachesim import CacheConfig, CacheSimReport, amortized_update_ops, compare_policies, simulate, warm_static
from .graph import Graph, GraphStats, generate_power_law, graph_stats, load_edge_list
from .ordering import (
    BatchSchedule,
    ShufflingErrorReport,
    form_batches,
    generate_bfs_sequences,
    proximity_schedule,
    random_shift,
    random_shuffle_schedule,
    select_num_sequences,
    shuffling_error,
)
from .partition import (
    BlockAssignment,
    CoarsenedGraph,
    Partitioning,
    PartitionQuality,
    assign_blocks,
    coarsen,
    generate_blocks,
    merge_small_blocks,
    multilevel_partition,
    one_hop_greedy_partition,
    partition_quality,
    random_partition,
    uncoarsen,
)
from .sampler import AccessTrace, EpochCommReport, SamplingConfig, sample_batch, simulate_epoch

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
