"""Command line: turn an ordered image folder into a feature bundle."""

from __future__ import annotations

import argparse
import logging
import sys

from .extract import extract
from .models import MODEL_NAMES, WeightsError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="placealign-extract",
        description="Extract mid-layer CNN local features into a feature bundle",
    )
    parser.add_argument("--model", choices=MODEL_NAMES, required=True)
    parser.add_argument("--input-dir", required=True, help="folder of ordered images")
    parser.add_argument("--output", required=True, help="bundle file to write")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument(
        "--weights",
        required=True,
        help="local state-dict file, or random:<seed> for seeded untrained weights",
    )
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        meta = extract(
            args.model,
            args.input_dir,
            args.output,
            weights=args.weights,
            batch_size=args.batch_size,
            device=args.device,
        )
    except (WeightsError, NotADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {meta['frames']} frames ({meta['width']} x {meta['dim']}) "
        f"from {args.input_dir} to {args.output}"
    )
    if meta["skipped"]:
        print(f"skipped {len(meta['skipped'])} unreadable images", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
