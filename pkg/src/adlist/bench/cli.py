"""Command-line entry point: ``bench --workload ... --out results.csv``."""

import argparse
import os
import sys

from .config import IMPLS, WORKLOADS, ConfigError, WorkloadConfig
from .results import emit_csv
from .workloads import run, sweep_table

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments; 2 is reserved for I/O errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="bench", description="Run list benchmarks and write a CSV of timings.")
    p.add_argument("--workload", required=True, choices=WORKLOADS)
    p.add_argument("--impl", choices=IMPLS,
                   help="list implementation (dummy-sweep always uses adlist-dummy)")
    p.add_argument("--threads", type=int)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--batches", type=int, default=1000)
    p.add_argument("--picks", type=int, help="re-prioritize operations per thread")
    p.add_argument("--inserts", type=int, help="insert operations per thread")
    p.add_argument("--available", type=int, help="elements initially owned per thread")
    p.add_argument("--evict-k", type=int, default=100)
    p.add_argument("--evict-cost-us", type=float, default=50.0)
    p.add_argument("--dummy-nodes", type=int, default=64)
    p.add_argument("--out", required=True, help="CSV file to write")
    return p


def config_from_args(args):
    return WorkloadConfig.preset(
        args.workload,
        impl=args.impl,
        threads=args.threads,
        repeats=args.repeats,
        seed=args.seed,
        batch_size=args.batch_size,
        batches=args.batches,
        picks_per_thread=args.picks,
        inserts_per_thread=args.inserts,
        available_per_thread=args.available,
        evict_batch_k=args.evict_k,
        evict_cost_us=args.evict_cost_us,
        dummy_count=args.dummy_nodes,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args).validate()
    except ConfigError as exc:
        print(f"bench: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    # fail before a long run rather than after it
    out_dir = os.path.dirname(os.path.abspath(args.out))
    if not os.path.isdir(out_dir) or not os.access(out_dir, os.W_OK):
        print(f"bench: cannot write {args.out}: directory {out_dir} is not writable",
              file=sys.stderr)
        return EXIT_IO
    results = run(cfg)
    try:
        emit_csv(results, args.out)
    except OSError as exc:
        print(f"bench: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    for r in results:
        print(f"{r.workload} {r.impl} threads={r.threads} dummies={r.dummy_count} "
              f"mean={r.mean:.6f}s ci99=±{r.ci99_halfwidth:.6f}s")
    if cfg.workload == "dummy-sweep":
        print("dummies  mean_s     t/log2(n)  fitted")
        for row in sweep_table(results):
            print(f"{row.dummy_count:7d}  {row.mean:.6f}  {row.t_over_log:.6f}  {row.fitted:.6f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
