"""Command-line surface: synth, project, match, eval, bench.

Every command echoes its configuration into the output header so results
can be audited and reproduced. Outputs are tab-delimited text.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bench as bench_mod
from .bundle import (
    BundleFormatError,
    FeatureBundle,
    SeedMismatchError,
    check_compatible,
    read_bundle,
    read_ground_truth,
    write_bundle,
    write_ground_truth,
)
from .evaluation import EvalProtocol, evaluate
from .model import AlignConfig, ConfigError, ShapeMismatchError
from .projection import ProjectionSpec, project_features
from .spatial import pairwise_image_distances
from .synthesis import SynthSpec, generate
from .temporal import RetrievalConfig, search_distance_matrix


def _add_align_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--mode",
        choices=("adaptive", "vanilla", "holistic-cosine", "sliding-window"),
        default="adaptive",
        help="image-distance strategy",
    )
    p.add_argument("--sigma", type=float, default=1.0, help="adaptive weight strength")
    p.add_argument("--xi", type=int, default=3, help="band half-width")
    p.add_argument(
        "--restricted", action="store_true", help="skip cells outside the |i-j| < xi band"
    )
    p.add_argument("--window-size", type=int, default=4, help="sliding-window width")


def _add_retrieval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seq-len", type=int, default=20, help="query sequence length l")
    p.add_argument("--beta", type=float, default=2.0, help="candidate window ratio k/l")


def _align_config(args) -> AlignConfig:
    return AlignConfig(
        sigma=args.sigma,
        xi=args.xi,
        mode=args.mode,
        window_size=args.window_size,
        restricted=args.restricted,
    )


def _echo_config(args, keys) -> list:
    return [f"{k.replace('_', '-')}={getattr(args, k)}" for k in keys]


def _open_out(path):
    return open(path, "w") if path and path != "-" else sys.stdout


def cmd_synth(args) -> int:
    spec = SynthSpec(
        n_frames=args.frames,
        width=args.width,
        dim=args.dim,
        shift=args.shift,
        noise=args.noise,
        speed_ratio=args.speed_ratio,
        aliasing_pairs=args.aliasing_pairs,
        seed=args.seed,
    )
    reference, query, truth = generate(spec)
    write_bundle(args.ref_out, FeatureBundle(reference.frames.astype(np.float32)))
    write_bundle(args.query_out, FeatureBundle(query.frames.astype(np.float32)))
    header = _echo_config(
        args,
        ("frames", "width", "dim", "shift", "noise", "speed_ratio", "aliasing_pairs", "seed"),
    )
    write_ground_truth(args.truth_out, truth, header_lines=["placealign synth"] + header)
    print(
        f"wrote {len(reference)} reference and {len(query)} query frames "
        f"({spec.width} x {spec.dim})"
    )
    return 0


def cmd_project(args) -> int:
    b = read_bundle(args.input)
    if b.projected:
        raise ConfigError(f"{args.input}: bundle is already projected")
    spec = ProjectionSpec(source_dim=b.dim, target_dim=args.target_dim, seed=args.seed)
    projected = project_features(b.frames.astype(np.float64), spec)
    write_bundle(
        args.output,
        FeatureBundle(
            projected.astype(np.float32), projected=True, projection_seed=args.seed
        ),
    )
    print(f"projected {b.n} frames: {b.dim} -> {args.target_dim} (seed {args.seed})")
    return 0


def cmd_match(args) -> int:
    ref_bundle = read_bundle(args.reference)
    query_bundle = read_bundle(args.query)
    check_compatible(ref_bundle, query_bundle)
    reference = ref_bundle.to_trajectory()
    query = query_bundle.to_trajectory()
    cfg = _align_config(args)
    rcfg = RetrievalConfig(seq_len=args.seq_len, beta=args.beta, threshold=args.threshold)
    l = rcfg.seq_len
    if len(query) < l:
        raise ConfigError(f"query has {len(query)} frames, need at least {l}")
    dch = pairwise_image_distances(query, reference, cfg)
    out = _open_out(args.output)
    try:
        for line in _echo_config(
            args,
            ("mode", "sigma", "xi", "restricted", "seq_len", "beta", "threshold", "top_k"),
        ):
            print(f"# {line}", file=out)
        print(f"# projected={ref_bundle.projected} seed={ref_bundle.projection_seed}", file=out)
        print("window\tquery_mid\trank\tstart\tlength\tdistance\taccepted", file=out)
        for w in range(0, len(query) - l + 1):
            ranked, _ = search_distance_matrix(dch[w : w + l], rcfg.window_len, args.top_k)
            mid = w + (l - 1) // 2
            for rank, m in enumerate(ranked):
                accepted = (
                    "" if args.threshold is None else int(m.distance < args.threshold)
                )
                print(
                    f"{w}\t{mid}\t{rank}\t{m.start}\t{m.length}"
                    f"\t{m.distance:.9f}\t{accepted}",
                    file=out,
                )
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_eval(args) -> int:
    ref_bundle = read_bundle(args.reference)
    query_bundle = read_bundle(args.query)
    check_compatible(ref_bundle, query_bundle)
    truth = read_ground_truth(args.truth)
    reference = ref_bundle.to_trajectory()
    query = query_bundle.to_trajectory(truth=truth)
    cfg = _align_config(args)
    rcfg = RetrievalConfig(seq_len=args.seq_len, beta=args.beta)
    protocol = EvalProtocol(
        tolerance=args.tolerance, thresholds=tuple(args.thresholds or ())
    )
    temporal = args.temporal == "sequence"
    predictions, curve = evaluate(query, reference, cfg, protocol, rcfg, temporal)
    header = _echo_config(
        args,
        ("mode", "sigma", "xi", "restricted", "seq_len", "beta", "temporal", "tolerance"),
    )
    with open(f"{args.out_prefix}_pr_curve.tsv", "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(curve.to_table() + "\n")
    with open(f"{args.out_prefix}_predictions.tsv", "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("query\tpredicted\tdistance\tcompensated\n")
        for p in predictions:
            fh.write(
                f"{p.query_index}\t{p.predicted_index}"
                f"\t{p.distance:.9f}\t{int(p.compensated)}\n"
            )
    best = curve.best
    print(
        f"best F1 {best.f1:.4f} at threshold {best.threshold:.6f} "
        f"(P {best.precision:.4f}, R {best.recall:.4f}; {len(predictions)} queries)"
    )
    return 0


def cmd_bench(args) -> int:
    rows = bench_mod.run_benchmark(
        n_values=args.n_frames,
        seq_len=args.seq_len,
        beta=args.beta,
        repetitions=args.repetitions,
        dim=args.dim,
        width=args.width,
        target_dim=args.target_dim,
        xi=args.xi,
        seed=args.seed,
        variants=tuple(args.variants),
    )
    for line in _echo_config(
        args, ("seq_len", "beta", "repetitions", "dim", "width", "target_dim", "xi", "seed")
    ):
        print(f"# {line}")
    print(bench_mod.format_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="placealign",
        description="Sequence-alignment retrieval engine for visual place recognition",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic reference/query pair")
    p.add_argument("--frames", type=int, required=True, help="reference frame count")
    p.add_argument("--width", type=int, default=7)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--speed-ratio", type=float, default=1.0)
    p.add_argument("--aliasing-pairs", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ref-out", required=True)
    p.add_argument("--query-out", required=True)
    p.add_argument("--truth-out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("project", help="random-project a bundle to a lower dimension")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--target-dim", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("match", help="rank history windows for every query window")
    p.add_argument("reference")
    p.add_argument("query")
    _add_align_flags(p)
    _add_retrieval_flags(p)
    p.add_argument("--threshold", type=float, default=None, help="acceptance cut")
    p.add_argument("--top-k", type=int, default=1, help="ranked matches per window")
    p.add_argument("--output", default="-", help="output path, - for stdout")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("eval", help="precision/recall evaluation against ground truth")
    p.add_argument("reference")
    p.add_argument("query")
    p.add_argument("truth")
    _add_align_flags(p)
    _add_retrieval_flags(p)
    p.add_argument("--temporal", choices=("single", "sequence"), default="sequence")
    p.add_argument("--tolerance", type=int, default=3)
    p.add_argument("--thresholds", type=float, nargs="*", default=None)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time grid construction and retrieval")
    p.add_argument("--n-frames", type=int, nargs="+", required=True)
    p.add_argument("--seq-len", type=int, default=20)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--dim", type=int, default=10416)
    p.add_argument("--width", type=int, default=7)
    p.add_argument("--target-dim", type=int, default=512)
    p.add_argument("--xi", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--variants", nargs="+", default=list(bench_mod.VARIANTS), choices=bench_mod.VARIANTS
    )
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        ConfigError,
        ShapeMismatchError,
        BundleFormatError,
        SeedMismatchError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
