#!/usr/bin/env python3
"""How well random projection preserves cosine distances.

Samples non-negative vector pairs at the raw feature dimension, projects
them, and reports the distribution of the cosine-distance error. The
projection test's 0.1 / 90% floor was frozen from this measurement.

Usage: python scripts/projection_preservation.py [--pairs 1000]
"""

import argparse

import numpy as np

from placealign.projection import ProjectionSpec, projection_matrix


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=1000)
    ap.add_argument("--source-dim", type=int, default=10416)
    ap.add_argument("--target-dim", type=int, default=512)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--data-seed", type=int, default=123)
    args = ap.parse_args()

    spec = ProjectionSpec(
        source_dim=args.source_dim, target_dim=args.target_dim, seed=args.seed
    )
    m = projection_matrix(spec)
    rng = np.random.default_rng(args.data_seed)
    x = rng.random((args.pairs, args.source_dim))
    y = rng.random((args.pairs, args.source_dim))
    px, py = x @ m.T, y @ m.T

    def cosine_rows(a, b):
        num = np.einsum("ij,ij->i", a, b)
        return 1 - num / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))

    err = np.abs(cosine_rows(x, y) - cosine_rows(px, py))
    print(f"pairs={args.pairs} {args.source_dim}->{args.target_dim} seed={args.seed}")
    print(f"mean |error| = {err.mean():.4f}")
    print(f"p95 = {np.quantile(err, 0.95):.4f}, p99 = {np.quantile(err, 0.99):.4f}, "
          f"max = {err.max():.4f}")
    print(f"fraction within 0.1: {(err <= 0.1).mean():.4f}")


if __name__ == "__main__":
    main()
