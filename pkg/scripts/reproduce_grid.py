#!/usr/bin/env python3
"""Reproduce the model-by-layer probing grid on real encoders.

For each configured model this script (1) extracts word-aligned hidden
states for layers 0/6/12 of the EWT train/dev/test splits with
`synprobe-extract`, then (2) trains and evaluates one probe per layer with
`synprobe sweep`, including a train-split evaluation for the
generalization check. Results land in <out>/<model>/L<layer>/<split>/,
which is the layout the trend tests expect:

    SYNPROBE_GRID_DIR=<out> pytest tests/test_acceptance.py -k RealModel

Requirements this script cannot provide by itself: the UD_English-EWT
treebank on disk and downloadable (or cached) model checkpoints. Expect
roughly CPU-half-hour per model for extraction and a few minutes per layer
for probe training.
"""

from __future__ import annotations

import argparse
import subprocess
import sys
from pathlib import Path

MODELS = {
    "roberta-base": ("FacebookAI/roberta-base", "masked-lm"),
    "clip-vit-base-patch32": ("openai/clip-vit-base-patch32", "clip-text"),
    "flava-full": ("facebook/flava-full", "flava-text"),
    "minilm": ("microsoft/MiniLM-L12-H384-uncased", "masked-lm"),
    "sent-minilm": ("sentence-transformers/all-MiniLM-L12-v2", "sentence-encoder"),
}
SPLITS = ("train", "dev", "test")


def run(command: list[str]) -> None:
    print("+", " ".join(command), flush=True)
    subprocess.run(command, check=True)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ewt-dir", required=True,
                        help="directory containing en_ewt-ud-{train,dev,test}.conllu")
    parser.add_argument("--out", default="runs/grid")
    parser.add_argument("--models", default="roberta-base,clip-vit-base-patch32,flava-full")
    parser.add_argument("--layers", default="0,6,12")
    parser.add_argument("--rank", type=int, default=128)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--batch-size", type=int, default=16, help="extraction batch size")
    args = parser.parse_args()

    ewt = Path(args.ewt_dir)
    out = Path(args.out)
    emb_root = out / "emb"
    emb_root.mkdir(parents=True, exist_ok=True)

    for name in args.models.split(","):
        hub_id, kind = MODELS[name]
        treebanks = {}
        for split in SPLITS:
            conllu = ewt / f"en_ewt-ud-{split}.conllu"
            run([
                "synprobe-extract",
                "--model", hub_id,
                "--kind", kind,
                "--name", name,
                "--split", split,
                "--conllu", str(conllu),
                "--layers", args.layers,
                "--batch-size", str(args.batch_size),
                "--out", str(emb_root),
            ])
            filtered = emb_root / f"{split}.{name}.filtered.conllu"
            treebanks[split] = filtered if filtered.exists() else conllu
        run([
            sys.executable, "-m", "synprobe.cli", "sweep",
            "--model", name,
            "--layers", args.layers,
            "--train-conllu", str(treebanks["train"]),
            "--dev-conllu", str(treebanks["dev"]),
            "--test-conllu", str(treebanks["test"]),
            # evaluating the training split feeds the generalization check
            "--alt-test", f"train={treebanks['train']}",
            "--emb-template", str(emb_root) + "/{split}.{model}.L{layer}.wemb",
            "--rank", str(args.rank),
            "--seed", str(args.seed),
            "--jobs", str(args.jobs),
            "--out", str(out / name),
        ])
    print(f"\ndone; set SYNPROBE_GRID_DIR={out} to run the trend tests")
    return 0


if __name__ == "__main__":
    sys.exit(main())
