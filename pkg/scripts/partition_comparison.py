#!/usr/bin/env python3
"""Compare the multilevel partitioner against the random and one-hop
baselines: edge cut, balance, 2-hop locality, and one epoch's remote
adjacency lookups per method and seed."""

import argparse
import sys

from gnnio.graph import generate_power_law
from gnnio.ordering import random_shuffle_schedule
from gnnio.partition import (
    multilevel_partition,
    one_hop_greedy_partition,
    partition_quality,
    random_partition,
)
from gnnio.sampler import SamplingConfig, simulate_epoch


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--avg-degree", type=int, default=10)
    ap.add_argument("--num-labels", type=int, default=32)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--batch-size", type=int, default=200)
    ap.add_argument("--fanouts", default="15,10,5")
    ap.add_argument("--seeds", default="1,2,3")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    fanouts = tuple(int(x) for x in args.fanouts.split(","))
    out = sys.stdout if args.out == "-" else open(args.out, "w")
    out.write("seed,method,edge_cut_fraction,node_balance,train_balance,"
              "two_hop_locality,remote_accesses,remote_fraction\n")

    for seed in (int(s) for s in args.seeds.split(",")):
        g = generate_power_law(args.n, args.avg_degree, seed=seed,
                               train_fraction=0.1, num_labels=args.num_labels)
        sched = random_shuffle_schedule(g, args.batch_size, seed=seed)
        scfg = SamplingConfig(fanouts=fanouts, batch_size=args.batch_size, seed=seed)
        methods = {
            "multilevel": multilevel_partition(g, args.k, seed=seed),
            "onehop": one_hop_greedy_partition(g, args.k, seed=seed),
            "random": random_partition(g, args.k, seed=seed),
        }
        for name, p in methods.items():
            q = partition_quality(g, p, seed=seed)
            _, rep = simulate_epoch(g, p, sched, scfg)
            out.write(f"{seed},{name},{q.edge_cut_fraction:.6g},{q.node_balance:.6g},"
                      f"{q.train_balance:.6g},{q.two_hop_locality:.6g},"
                      f"{rep.remote_accesses},{rep.remote_fraction:.6g}\n")
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
