"""Command line for hidden-state extraction."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from synprobe.treebank import ConlluParseError, TreeStructureError

from .encoders import ENCODER_KINDS, FetchError
from .extract import ExtractionError, extract_to_stores

EXIT_OK = 0
EXIT_INPUT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synprobe-extract",
        description="Extract word-aligned per-layer hidden states into WEMB1 stores.",
    )
    parser.add_argument("--model", required=True, help="checkpoint repository id or local path")
    parser.add_argument("--kind", required=True, choices=ENCODER_KINDS)
    parser.add_argument("--conllu", required=True)
    parser.add_argument("--layers", required=True, help="comma-separated layer indices")
    parser.add_argument("--out", required=True)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--name", default=None,
                        help="short model name used in file names (default: id tail)")
    parser.add_argument("--split", default=None,
                        help="split name used in file names (default: conllu stem)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        layers = sorted({int(part) for part in args.layers.split(",") if part.strip()})
        if not layers or any(layer < 0 for layer in layers):
            raise ValueError(f"bad --layers value {args.layers!r}")
        conllu = Path(args.conllu)
        if not conllu.exists():
            raise ValueError(f"treebank not found: {conllu}")
        result = extract_to_stores(
            args.model,
            args.kind,
            conllu,
            layers,
            args.out,
            name=args.name,
            split=args.split,
            batch_size=args.batch_size,
            device=args.device,
        )
    except (ValueError, FetchError, ExtractionError,
            ConlluParseError, TreeStructureError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    kept, dropped = len(result.kept), len(result.dropped)
    note = f", dropped {dropped} over the position limit" if dropped else ""
    print(f"extracted {len(result.layer_vectors)} layer(s) x {kept} sentences{note} -> {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
