#!/usr/bin/env python3
"""Grid-construction and retrieval timing at production feature sizes.

Reproduces the speed comparison between raw features, randomly projected
features, and projected features with the banded distance matrix, at one
or more history lengths. Cell-update counts are reported alongside the
wall times so the linear growth of the retrieval pass is visible.

Usage: python scripts/runtime_benchmark.py [--n 1000 2000] [--dim 10416]
"""

import argparse

from placealign.bench import format_table, run_benchmark


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[1000, 2000])
    ap.add_argument("--dim", type=int, default=10416)
    ap.add_argument("--target-dim", type=int, default=512)
    ap.add_argument("--seq-len", type=int, default=20)
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--repetitions", type=int, default=3)
    ap.add_argument("--xi", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rows = run_benchmark(
        args.n,
        seq_len=args.seq_len,
        beta=args.beta,
        repetitions=args.repetitions,
        dim=args.dim,
        target_dim=args.target_dim,
        xi=args.xi,
        seed=args.seed,
    )
    print(format_table(rows))
    by_variant = {(r.n, r.variant): r for r in rows}
    for n in args.n:
        orig = by_variant.get((n, "original"))
        fast = by_variant.get((n, "grp-ra"))
        if orig and fast:
            print(
                f"# n={n}: grid speedup original -> grp-ra = "
                f"{orig.dch_seconds / fast.dch_seconds:.1f}x"
            )


if __name__ == "__main__":
    main()
