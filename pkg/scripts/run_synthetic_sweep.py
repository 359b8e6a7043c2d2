#!/usr/bin/env python3
"""Layer-sweep experiment on synthetic corpora, end to end through the CLI.

Builds a three-"layer" toy model in which layer 0 encodes tree structure
cleanly and deeper layers add noise and shrink the structural signal, then
runs `synprobe sweep` over the generated treebanks and stores. The point is
a full offline rehearsal of the real experiment: the emitted sweep.csv has
the exact shape the real model grids produce, and the layer curve should
fall with depth.

Usage: python scripts/run_synthetic_sweep.py [--out runs/synthetic] [--jobs N]
"""

from __future__ import annotations

import argparse
import subprocess
import sys
from pathlib import Path

from synprobe.embstore import EmbeddingHeader, save_store
from synprobe.synthetic import SyntheticConfig, build_encoder, encode_corpus, generate_trees
from synprobe.treebank import write_conllu

MODEL = "synthetic-lm"
SPLIT_SIZES = {"train": 400, "dev": 80, "test": 80}
# deeper layers carry weaker structure and more noise
LAYER_CONFIGS = {
    0: SyntheticConfig(seed=7, code_scale=1.5, noise_scale=0.02),
    1: SyntheticConfig(seed=7, code_scale=0.8, noise_scale=0.25),
    2: SyntheticConfig(seed=7, code_scale=0.4, noise_scale=0.45),
}


def build_inputs(data_dir: Path) -> None:
    data_dir.mkdir(parents=True, exist_ok=True)
    base = build_encoder(LAYER_CONFIGS[0])
    trees = {
        split: generate_trees(base, size, seed=100 + i)
        for i, (split, size) in enumerate(SPLIT_SIZES.items())
    }
    for split, split_trees in trees.items():
        (data_dir / f"{split}.conllu").write_text(write_conllu(split_trees))
    for layer, config in LAYER_CONFIGS.items():
        encoder = build_encoder(config)
        for i, (split, split_trees) in enumerate(trees.items()):
            vectors = encode_corpus(encoder, split_trees, seed=1000 * layer + i)
            save_store(
                data_dir / f"{split}.{MODEL}.L{layer}.wemb",
                EmbeddingHeader(MODEL, layer, config.hidden_dim, len(vectors)),
                vectors,
            )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/synthetic")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()
    out = Path(args.out)
    data_dir = out / "data"
    build_inputs(data_dir)
    command = [
        sys.executable, "-m", "synprobe.cli", "sweep",
        "--model", MODEL,
        "--layers", ",".join(str(layer) for layer in LAYER_CONFIGS),
        "--train-conllu", str(data_dir / "train.conllu"),
        "--dev-conllu", str(data_dir / "dev.conllu"),
        "--test-conllu", str(data_dir / "test.conllu"),
        "--emb-template", str(data_dir) + "/{split}.{model}.L{layer}.wemb",
        "--rank", "32",
        "--seed", "0",
        "--step-size", "3e-3",
        "--jobs", str(args.jobs),
        "--out", str(out / "sweep"),
    ]
    status = subprocess.run(command, check=False).returncode
    if status != 0:
        return status
    print("\nlayer curve (test split):")
    for line in (out / "sweep" / "sweep.csv").read_text().strip().split("\n")[1:]:
        model, layer, split, metric, value = line.split(",")
        if metric in ("las", "uas", "uuas", "label", "root"):
            print(f"  layer {layer} {metric:>5}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
