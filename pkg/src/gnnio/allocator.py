"""Min-max resource allocation for the data-preprocessing pipeline.

Eight stage times compete: four CPU stages (two on the graph store, two on
the worker machine), two fixed latencies (network, GPU compute), and two
PCIe transfers. CPU stages 1-3 scale linearly with cores; the cache stage
follows the fitted model f(c) = a/c + d. The solver brute-forces the split
of graph-store cores, worker cores and PCIe bandwidth shares to minimize
the bottleneck stage time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STAGE_NAMES = (
    "sample_requests",  # T1 / c1
    "subgraph_construction",  # T2 / c2
    "network",  # T_net
    "subgraph_processing",  # T3 / c3
    "pcie_subgraphs",  # D_I / b_I
    "cache_workflow",  # f(c4)
    "pcie_features",  # D_II / b_II
    "gpu_compute",  # T_gpu
)


@dataclass
class PipelineProfile:
    t1: float
    t2: float
    t3: float
    t_net: float
    t_gpu: float
    d_subgraphs: float  # bytes moved for processed subgraphs
    d_features: float  # bytes moved for missed features
    cache_samples: list[tuple[int, float]] = field(default_factory=list)

    def __post_init__(self):
        for name in ("t1", "t2", "t3", "t_net", "t_gpu", "d_subgraphs", "d_features"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def from_file(cls, path) -> "PipelineProfile":
        """Flat key=value file; cache samples as 'cache_sample.<cores>=<secs>'."""
        values: dict[str, float] = {}
        samples: list[tuple[int, float]] = []
        with open(path) as f:
            for lineno, line in enumerate(f, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise ValueError(f"{path}: line {lineno}: expected key=value")
                key, _, val = stripped.partition("=")
                key = key.strip()
                if key.startswith("cache_sample."):
                    samples.append((int(key.split(".", 1)[1]), float(val)))
                else:
                    values[key] = float(val)
        required = ("t1", "t2", "t3", "t_net", "t_gpu", "d_subgraphs", "d_features")
        missing = [k for k in required if k not in values]
        if missing:
            raise ValueError(f"{path}: missing keys {missing}")
        return cls(cache_samples=samples, **{k: values[k] for k in required})


@dataclass
class CacheCostModel:
    a: float  # core-seconds
    d: float  # floor seconds

    def predict(self, cores: int) -> float:
        return self.a / cores + self.d


@dataclass
class AllocationPlan:
    c1: int
    c2: int
    c3: int
    c4: int
    b_i: int
    b_ii: int
    bottleneck: float
    bottleneck_stage: str
    candidates_evaluated: int = 0


def fit_cache_cost(samples: list[tuple[int, float]]) -> CacheCostModel:
    """Least-squares fit of t = a/c + d, with a clamped to >= 0."""
    if len(samples) < 2:
        raise ValueError("need at least 2 samples")
    cores = np.array([c for c, _ in samples], dtype=np.float64)
    times = np.array([t for _, t in samples], dtype=np.float64)
    if np.all(cores < 1):
        raise ValueError("core counts must be >= 1")
    if len(np.unique(cores)) < 2:
        raise ValueError("samples must cover at least 2 distinct core counts")
    design = np.column_stack([1.0 / cores, np.ones_like(cores)])
    (a, d), *_ = np.linalg.lstsq(design, times, rcond=None)
    if a < 0:
        a, d = 0.0, float(times.mean())
    return CacheCostModel(a=float(a), d=float(d))


def stage_times(
    profile: PipelineProfile, model: CacheCostModel, c1: int, c2: int, c3: int, c4: int, b_i: int, b_ii: int
) -> dict[str, float]:
    return {
        "sample_requests": profile.t1 / c1,
        "subgraph_construction": profile.t2 / c2,
        "network": profile.t_net,
        "subgraph_processing": profile.t3 / c3,
        "pcie_subgraphs": profile.d_subgraphs / b_i,
        "cache_workflow": model.predict(c4),
        "pcie_features": profile.d_features / b_ii,
        "gpu_compute": profile.t_gpu,
    }


def evaluate_plan(profile: PipelineProfile, model: CacheCostModel, plan: AllocationPlan) -> dict[str, float]:
    """All eight stage times plus their max under 'bottleneck'."""
    times = stage_times(profile, model, plan.c1, plan.c2, plan.c3, plan.c4, plan.b_i, plan.b_ii)
    times["bottleneck"] = max(times.values())
    return times


def solve_allocation(
    profile: PipelineProfile,
    model: CacheCostModel,
    c_gs: int,
    c_wm: int,
    b_pcie: int,
) -> AllocationPlan:
    """Brute-force minimization of the bottleneck stage time.

    Every stage time is non-increasing in its own resource and independent
    of the others', so the complements always take all remaining units
    (c2 = C_gs - c1, c4 = C_wm - c3, b_II = B_pcie - b_I): three nested
    sweeps instead of six. Ties break toward smaller c1, then c3, then b_I.
    Bandwidth shares are integers; every stage gets at least one unit.
    """
    if c_gs < 2 or c_wm < 2 or b_pcie < 2:
        raise ValueError("capacities must be >= 2 so every stage gets >= 1 unit")

    c1 = np.arange(1, c_gs, dtype=np.float64)
    c3 = np.arange(1, c_wm, dtype=np.float64)
    b_i = np.arange(1, b_pcie, dtype=np.float64)

    gs_time = np.maximum(profile.t1 / c1, profile.t2 / (c_gs - c1))
    wm_time = np.maximum(profile.t3 / c3, model.a / (c_wm - c3) + model.d)
    bw_time = np.maximum(profile.d_subgraphs / b_i, profile.d_features / (b_pcie - b_i))
    fixed = max(profile.t_net, profile.t_gpu)

    grid = np.maximum(gs_time[:, None, None], wm_time[None, :, None])
    grid = np.maximum(grid, bw_time[None, None, :])
    grid = np.maximum(grid, fixed)

    flat = int(np.argmin(grid))  # first occurrence = smallest (c1, c3, b_I)
    i, j, k = np.unravel_index(flat, grid.shape)
    plan = AllocationPlan(
        c1=int(i) + 1,
        c2=c_gs - int(i) - 1,
        c3=int(j) + 1,
        c4=c_wm - int(j) - 1,
        b_i=int(k) + 1,
        b_ii=b_pcie - int(k) - 1,
        bottleneck=float(grid[i, j, k]),
        bottleneck_stage="",
        candidates_evaluated=grid.size,
    )
    times = stage_times(profile, model, plan.c1, plan.c2, plan.c3, plan.c4, plan.b_i, plan.b_ii)
    plan.bottleneck_stage = max(times, key=times.get)
    return plan
