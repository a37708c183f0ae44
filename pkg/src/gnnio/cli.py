"""Command-line frontend chaining the modules into reproducible experiments.

Commands communicate through plain-text artifacts in the --out directory
(graph.edges, graph.meta, partition.txt, schedule.txt, trace.txt) plus CSV
metric files. Config files are flat key=value with section prefixes, e.g.::

    seed=7
    graph.n=10000
    graph.avg_degree=10
    partition.method=multilevel
    partition.k=4
    ordering.policy=proximity
    ordering.b=1000
    sampling.fanouts=15,10,5
    cache.policies=fifo,lru,static-degree
    cache.capacities=500,1000,2000
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import allocator as alc
from . import cachesim as cs
from . import graph as gr
from . import ordering as od
from . import partition as pt
from . import sampler as sp


class CliError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(x) for x in row) + "\n")


def load_config(path) -> dict[str, str]:
    cfg: dict[str, str] = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise CliError(f"{path}: line {lineno}: expected key=value")
            key, _, val = stripped.partition("=")
            cfg[key.strip()] = val.strip()
    return cfg


def _get(cfg: dict[str, str], key: str, default=None, cast=str):
    if key not in cfg:
        if default is None:
            raise CliError(f"config is missing required field '{key}'")
        return default
    try:
        return cast(cfg[key])
    except ValueError:
        raise CliError(f"config field '{key}' has invalid value {cfg[key]!r}") from None


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _artifact(out: str, name: str, producer: str):
    path = os.path.join(out, name)
    if not os.path.exists(path):
        raise CliError(f"missing {name}: run gnnio {producer} first")
    return path


def _load_graph(out: str) -> gr.Graph:
    g = gr.load_edge_list(_artifact(out, "graph.edges", "gen"))
    meta = os.path.join(out, "graph.meta")
    if os.path.exists(meta):
        g = gr.load_metadata(g, meta)
    return g


# -- commands -------------------------------------------------------------------


def cmd_gen(cfg, out, seed):
    source = _get(cfg, "graph.source", "generate")
    if source == "file":
        g = gr.load_edge_list(_get(cfg, "graph.path"))
        meta = cfg.get("graph.meta")
        if meta:
            g = gr.load_metadata(g, meta)
    elif source == "generate":
        g = gr.generate_power_law(
            n=_get(cfg, "graph.n", cast=int),
            avg_degree=_get(cfg, "graph.avg_degree", cast=int),
            seed=seed,
            train_fraction=_get(cfg, "graph.train_fraction", 0.1, float),
            num_labels=_get(cfg, "graph.num_labels", 1, int),
            cross_fraction=_get(cfg, "graph.cross_fraction", 0.05, float),
        )
    else:
        raise CliError(f"config field 'graph.source' must be 'generate' or 'file', got {source!r}")
    gr.save_edge_list(g, os.path.join(out, "graph.edges"))
    gr.save_metadata(g, os.path.join(out, "graph.meta"))
    stats = gr.graph_stats(g)
    _write_csv(
        os.path.join(out, "graph_stats.csv"),
        ["num_nodes", "num_edges", "num_train", "num_components", "max_degree"],
        [[g.num_nodes, g.num_edges, stats.num_train, stats.num_components, max(stats.degree_histogram)]],
    )
    print(f"wrote graph.edges ({g.num_nodes} nodes, {g.num_edges} adjacency entries)")


def cmd_partition(cfg, out, seed):
    g = _load_graph(out)
    method = _get(cfg, "partition.method", "multilevel")
    k = _get(cfg, "partition.k", cast=int)
    if method == "multilevel":
        p = pt.multilevel_partition(
            g,
            k,
            j=_get(cfg, "partition.j", 2, int),
            block_size_threshold=_get(cfg, "partition.block_threshold", max(1, g.num_nodes // 256), int),
            large_percentile=_get(cfg, "partition.large_percentile", 0.10, float),
            seed=seed,
        )
    elif method == "random":
        p = pt.random_partition(g, k, seed=seed)
    elif method == "onehop":
        p = pt.one_hop_greedy_partition(
            g, k, seed=seed,
            block_size_threshold=_get(cfg, "partition.block_threshold", max(1, g.num_nodes // 256), int),
        )
    else:
        raise CliError(f"config field 'partition.method' unknown: {method!r}")
    pt.save_partitioning(p, os.path.join(out, "partition.txt"))
    q = pt.partition_quality(g, p, sample_size=_get(cfg, "partition.quality_samples", 10000, int), seed=seed)
    _write_csv(
        os.path.join(out, "partition_quality.csv"),
        ["method", "k", "edge_cut_fraction", "node_balance", "train_balance", "two_hop_locality"],
        [[method, k, q.edge_cut_fraction, q.node_balance, q.train_balance, q.two_hop_locality]],
    )
    print(f"wrote partition.txt (method={method}, k={k}, edge_cut={q.edge_cut_fraction:.4f})")


def cmd_order(cfg, out, seed):
    g = _load_graph(out)
    policy = _get(cfg, "ordering.policy", "proximity")
    b = _get(cfg, "ordering.b", 1000, int)
    rows = []
    if policy == "random":
        schedule = od.random_shuffle_schedule(g, b, seed=seed)
        rows.append(["random", 0, 0.0, 0.0, 1])
    elif policy == "proximity":
        if "ordering.S" in cfg:
            S = _get(cfg, "ordering.S", cast=int)
            schedule = od.proximity_schedule(g, S, b, seed=seed)
            if g.labels is not None:
                rep = od.shuffling_error(schedule, g.labels, num_sequences=S)
                rows.append([schedule.policy, rep.epsilon, rep.max_tv, rep.threshold, S])
            else:
                rows.append([schedule.policy, 0.0, 0.0, 0.0, S])
        else:
            M = _get(cfg, "ordering.M", 1, int)
            S_max = _get(cfg, "ordering.S_max", 10, int)
            S, rep = od.select_num_sequences(g, b, M, S_max, seed=seed)
            schedule = od.proximity_schedule(g, S, b, seed=seed)
            rows.append([schedule.policy, rep.epsilon, rep.max_tv, rep.threshold, S])
    else:
        raise CliError(f"config field 'ordering.policy' unknown: {policy!r}")
    od.save_schedule(schedule, os.path.join(out, "schedule.txt"))
    _write_csv(
        os.path.join(out, "ordering.csv"),
        ["policy", "epsilon", "max_tv", "threshold", "num_sequences"],
        rows,
    )
    print(f"wrote schedule.txt ({len(schedule.batches)} batches, policy={schedule.policy})")


def cmd_sample(cfg, out, seed):
    g = _load_graph(out)
    p = pt.load_partitioning(_artifact(out, "partition.txt", "partition"), g.train_mask)
    schedule = od.load_schedule(_artifact(out, "schedule.txt", "order"))
    scfg = sp.SamplingConfig(
        fanouts=tuple(_int_list(_get(cfg, "sampling.fanouts", "15,10,5"))),
        batch_size=schedule.batch_size,
        seed=seed,
    )
    trace, report = sp.simulate_epoch(g, p, schedule, scfg)
    sp.save_trace(trace, os.path.join(out, "trace.txt"))
    rows = [[
        report.local_accesses,
        report.remote_accesses,
        report.remote_fraction,
    ] + [int(x) for x in report.seed_load] + [int(x) for x in report.request_load]]
    header = (
        ["local_accesses", "remote_accesses", "remote_fraction"]
        + [f"seed_load_{i}" for i in range(p.k)]
        + [f"request_load_{i}" for i in range(p.k)]
    )
    _write_csv(os.path.join(out, "comm.csv"), header, rows)
    print(f"wrote trace.txt ({trace.total_accesses()} accesses, remote_fraction={report.remote_fraction:.4f})")


def cmd_cache(cfg, out, seed):
    g = _load_graph(out)
    trace = sp.load_trace(_artifact(out, "trace.txt", "sample"))
    policies = tuple(_get(cfg, "cache.policies", "static-degree,fifo,lru,lfu").replace(" ", "").split(","))
    capacities = _int_list(_get(cfg, "cache.capacities", str(max(1, g.num_nodes // 10))))
    rows_dicts = cs.compare_policies(
        g,
        trace,
        capacities,
        policies=policies,
        num_devices=_get(cfg, "cache.devices", 1, int),
        host_capacity=_get(cfg, "cache.host_capacity", 0, int),
        feature_bytes_per_node=g.feature_bytes_per_node,
    )
    rows = [[r["policy"], r["capacity"], r["hit_ratio"], r["device_hits"], r["host_hits"], r["misses"]]
            for r in rows_dicts]
    _write_csv(
        os.path.join(out, "cache.csv"),
        ["policy", "capacity", "hit_ratio", "device_hits", "host_hits", "misses"],
        rows,
    )
    print(f"wrote cache.csv ({len(rows)} policy x capacity cells)")


def cmd_allocate(cfg, out, seed):
    profile = alc.PipelineProfile.from_file(_get(cfg, "allocator.profile"))
    model = alc.fit_cache_cost(profile.cache_samples)
    plan = alc.solve_allocation(
        profile,
        model,
        c_gs=_get(cfg, "allocator.c_gs", cast=int),
        c_wm=_get(cfg, "allocator.c_wm", cast=int),
        b_pcie=_get(cfg, "allocator.b_pcie", cast=int),
    )
    times = alc.evaluate_plan(profile, model, plan)
    kv_path = os.path.join(out, "allocation.txt")
    with open(kv_path, "w") as f:
        for key in ("c1", "c2", "c3", "c4", "b_i", "b_ii"):
            f.write(f"{key}={getattr(plan, key)}\n")
        f.write(f"bottleneck={_fmt(plan.bottleneck)}\n")
        f.write(f"bottleneck_stage={plan.bottleneck_stage}\n")
    _write_csv(
        os.path.join(out, "allocation.csv"),
        ["c1", "c2", "c3", "c4", "b_i", "b_ii", "bottleneck", "bottleneck_stage"]
        + list(alc.STAGE_NAMES),
        [[plan.c1, plan.c2, plan.c3, plan.c4, plan.b_i, plan.b_ii, plan.bottleneck, plan.bottleneck_stage]
         + [times[s] for s in alc.STAGE_NAMES]],
    )
    with open(kv_path) as f:
        sys.stdout.write(f.read())


def cmd_report(cfg, out, seed):
    sources = {
        "partition": "partition_quality.csv",
        "communication": "comm.csv",
        "ordering": "ordering.csv",
        "cache": "cache.csv",
        "allocation": "allocation.csv",
    }
    lines = ["table,column,row,value\n"]
    found = 0
    for table, name in sources.items():
        path = os.path.join(out, name)
        if not os.path.exists(path):
            continue
        found += 1
        with open(path) as f:
            header = f.readline().strip().split(",")
            for row_idx, line in enumerate(f):
                for col, val in zip(header, line.strip().split(",")):
                    lines.append(f"{table},{col},{row_idx},{val}\n")
    if not found:
        raise CliError("no metric CSVs found: run the pipeline commands first")
    with open(os.path.join(out, "report.csv"), "w") as f:
        f.writelines(lines)
    print(f"wrote report.csv (joined {found} metric tables)")


def cmd_repro(cfg, out, seed):
    """Reduced-scale pinned-seed versions of the headline trend experiments."""
    n, deg, labels = 20000, 10, 32
    rows = []
    for s in (1, 2, 3):
        g = gr.generate_power_law(n, deg, seed=s, train_fraction=0.1, num_labels=labels)
        scfg = sp.SamplingConfig(fanouts=(15, 10, 5), batch_size=200, seed=s)
        p_ml = pt.multilevel_partition(g, 4, seed=s)
        p_rand = pt.random_partition(g, 4, seed=s)
        sched_po = od.proximity_schedule(g, 4, 200, seed=s)
        sched_rnd = od.random_shuffle_schedule(g, 200, seed=s)
        trace_po, rep_ml = sp.simulate_epoch(g, p_ml, sched_po, scfg)
        trace_rnd, rep_rand = sp.simulate_epoch(g, p_rand, sched_rnd, scfg)
        cap = n // 10
        hit = {}
        for name, policy, trace in (
            ("fifo_po", "fifo", trace_po),
            ("fifo_random", "fifo", trace_rnd),
            ("static", "static-degree", trace_po),
        ):
            ccfg = cs.CacheConfig(device_capacity=cap, policy=policy)
            hit[name] = cs.simulate(trace, ccfg, g=g).hit_ratio
        rows.append([
            s,
            rep_ml.remote_accesses,
            rep_rand.remote_accesses,
            rep_ml.remote_accesses / max(1, rep_rand.remote_accesses),
            hit["fifo_po"], hit["static"], hit["fifo_random"],
        ])
        print(
            f"seed={s} remote_ratio={rows[-1][3]:.3f} "
            f"hit fifo+po={hit['fifo_po']:.3f} static={hit['static']:.3f} fifo+rand={hit['fifo_random']:.3f}"
        )
    _write_csv(
        os.path.join(out, "repro.csv"),
        ["seed", "remote_multilevel", "remote_random", "remote_ratio",
         "hit_fifo_po", "hit_static", "hit_fifo_random"],
        rows,
    )
    print("wrote repro.csv")


COMMANDS = {
    "gen": cmd_gen,
    "partition": cmd_partition,
    "order": cmd_order,
    "sample": cmd_sample,
    "cache": cmd_cache,
    "allocate": cmd_allocate,
    "report": cmd_report,
    "repro": cmd_repro,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gnnio", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="flat key=value config file")
    parser.add_argument("--seed", type=int, default=None, help="overrides config 'seed' (default 0)")
    parser.add_argument("--out", default=".", help="artifact directory")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else {}
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        os.makedirs(args.out, exist_ok=True)
        COMMANDS[args.command](cfg, args.out, seed)
    except (CliError, gr.GraphFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
