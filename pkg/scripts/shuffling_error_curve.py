#!/usr/bin/env python3
"""Measure the shuffling error of proximity-aware ordering as the number of
BFS sequences grows, averaged over seeds, alongside the sqrt(b*M)/n
convergence threshold."""

import argparse
import sys

import numpy as np

from gnnio.graph import generate_power_law
from gnnio.ordering import proximity_schedule, shuffling_error, shuffling_error_threshold


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--avg-degree", type=int, default=10)
    ap.add_argument("--num-labels", type=int, default=32)
    ap.add_argument("--batch-size", type=int, default=200)
    ap.add_argument("--workers", type=int, default=4, help="M in the threshold sqrt(b*M)/n")
    ap.add_argument("--max-sequences", type=int, default=10)
    ap.add_argument("--num-seeds", type=int, default=5)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    out = sys.stdout if args.out == "-" else open(args.out, "w")
    out.write("num_sequences,mean_epsilon,max_epsilon,threshold\n")
    for S in range(1, args.max_sequences + 1):
        eps = []
        threshold = None
        for seed in range(args.num_seeds):
            g = generate_power_law(args.n, args.avg_degree, seed=seed + 1,
                                   train_fraction=0.1, num_labels=args.num_labels)
            threshold = shuffling_error_threshold(args.batch_size, args.workers, g.num_train())
            sched = proximity_schedule(g, S, args.batch_size, seed=seed)
            eps.append(shuffling_error(sched, g.labels).epsilon)
        out.write(f"{S},{np.mean(eps):.6g},{np.max(eps):.6g},{threshold:.6g}\n")
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
