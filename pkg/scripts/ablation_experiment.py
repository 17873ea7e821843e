#!/usr/bin/env python3
"""Ablation matrix on synthetic shift data.

Runs every image-distance strategy with and without sequence matching
over seeded synthetic datasets with a fixed viewpoint shift, and prints
the max-F1 of each cell. The per-seed numbers frozen into the acceptance
regression test come from this experiment.

Usage: python scripts/ablation_experiment.py [--seeds 10] [--frames 200]
"""

import argparse

from placealign.evaluation import EvalProtocol, evaluate
from placealign.model import AlignConfig
from placealign.synthesis import SynthSpec, generate
from placealign.temporal import RetrievalConfig

CELLS = (
    ("adaptive", True),
    ("adaptive", False),
    ("vanilla", True),
    ("vanilla", False),
    ("sliding-window", True),
    ("holistic-cosine", True),
    ("holistic-cosine", False),
)


def run_matrix(seed, frames, dim, shift, noise, seq_len, tolerance):
    spec = SynthSpec(
        n_frames=frames, width=7, dim=dim, shift=shift, noise=noise, seed=seed
    )
    reference, query, _ = generate(spec)
    rcfg = RetrievalConfig(seq_len=seq_len, beta=2.0)
    protocol = EvalProtocol(tolerance=tolerance)
    scores = {}
    for mode, temporal in CELLS:
        _, curve = evaluate(
            query,
            reference,
            AlignConfig(mode=mode),
            protocol,
            rcfg,
            temporal=temporal,
        )
        scores[(mode, temporal)] = curve.best_f1
    return scores


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--frames", type=int, default=200)
    ap.add_argument("--dim", type=int, default=96)
    ap.add_argument("--shift", type=int, default=2)
    ap.add_argument("--noise", type=float, default=0.2)
    ap.add_argument("--seq-len", type=int, default=20)
    ap.add_argument("--tolerance", type=int, default=3)
    args = ap.parse_args()

    labels = [f"{m}{'+seq' if t else ''}" for m, t in CELLS]
    print("seed\t" + "\t".join(labels))
    totals = dict.fromkeys(CELLS, 0.0)
    for seed in range(args.seeds):
        scores = run_matrix(
            seed, args.frames, args.dim, args.shift, args.noise,
            args.seq_len, args.tolerance,
        )
        print(f"{seed}\t" + "\t".join(f"{scores[c]:.4f}" for c in CELLS))
        for c in CELLS:
            totals[c] += scores[c]
    print("mean\t" + "\t".join(f"{totals[c] / args.seeds:.4f}" for c in CELLS))


if __name__ == "__main__":
    main()
