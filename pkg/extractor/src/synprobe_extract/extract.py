"""Per-layer hidden-state extraction into WEMB1 stores.

Hidden state 0 is the embedding-layer output (token plus position
embeddings, before the first transformer block); hidden state k is the
output of block k. Special tokens never pool into any word. Sentences whose
subword length (special tokens included) exceeds the encoder's position
limit are dropped from the stores and from a filtered treebank copy so
that store order stays positionally bound to a treebank file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from synprobe.embstore import EmbeddingHeader, align_check, save_store
from synprobe.treebank import GoldTree, load_conllu, write_conllu

from .encoders import ModelSpec, load_encoder
from .pooling import AlignmentError, pool_words, word_spans


class ExtractionError(RuntimeError):
    """A sentence could not be aligned or encoded."""


@dataclass(frozen=True)
class ExtractionResult:
    layer_vectors: dict[int, list[np.ndarray]]  # layer -> one (n_words, dim) array per sentence
    kept: list[int]     # ordinals of sentences present in the stores
    dropped: list[int]  # ordinals dropped for exceeding the position limit


def _batches(items: list[int], size: int):
    for start in range(0, len(items), size):
        yield items[start : start + size]


def extract_corpus(
    tokenizer,
    model,
    spec: ModelSpec,
    trees: list[GoldTree],
    layers: list[int],
    batch_size: int = 16,
    device: str = "cpu",
) -> ExtractionResult:
    """Run the encoder over a treebank and pool subwords to words per layer."""
    layers = sorted(set(layers))
    for layer in layers:
        if not 0 <= layer <= spec.layer_count:
            raise ValueError(
                f"layer {layer} out of range: {spec.hub_id} has layers 0..{spec.layer_count}"
            )
    forms = [list(tree.forms) for tree in trees]
    lengths = [
        len(ids)
        for ids in tokenizer(forms, is_split_into_words=True)["input_ids"]
    ] if forms else []
    kept = [i for i, length in enumerate(lengths) if length <= spec.max_positions]
    dropped = [i for i, length in enumerate(lengths) if length > spec.max_positions]
    layer_vectors: dict[int, list[np.ndarray]] = {layer: [] for layer in layers}
    with torch.no_grad():
        for batch in _batches(kept, batch_size):
            encoded = tokenizer(
                [forms[i] for i in batch],
                is_split_into_words=True,
                padding=True,
                return_tensors="pt",
            ).to(device)
            output = model(**encoded, output_hidden_states=True)
            states = [output.hidden_states[layer].cpu().numpy() for layer in layers]
            for row, ordinal in enumerate(batch):
                try:
                    spans = word_spans(encoded.word_ids(row), len(forms[ordinal]))
                except AlignmentError as err:
                    raise ExtractionError(f"sentence {ordinal}: {err}") from err
                for layer, hidden in zip(layers, states):
                    layer_vectors[layer].append(pool_words(hidden[row], spans))
    return ExtractionResult(layer_vectors=layer_vectors, kept=kept, dropped=dropped)


def default_name(hub_id: str) -> str:
    return hub_id.rstrip("/").rsplit("/", 1)[-1]


def extract_to_stores(
    hub_id: str,
    kind: str,
    conllu_path: str | Path,
    layers: list[int],
    out_dir: str | Path,
    *,
    name: str | None = None,
    split: str | None = None,
    batch_size: int = 16,
    device: str = "cpu",
) -> ExtractionResult:
    """Extract every requested layer of one treebank split to WEMB1 files.

    Files follow the ``<split>.<name>.L<layer>.wemb`` convention. When
    sentences are dropped, a ``<split>.<name>.filtered.conllu`` copy and a
    ``<split>.<name>.dropped.txt`` ordinal log are written next to them.
    """
    conllu_path = Path(conllu_path)
    layers = sorted(set(layers))
    name = name or default_name(hub_id)
    split = split or conllu_path.stem.split(".")[0]
    # relations are kept verbatim (no subtype stripping): the filtered copy
    # must reproduce the source annotation exactly
    trees = load_conllu(conllu_path, strip_subtypes=False)
    tokenizer, model, spec = load_encoder(hub_id, kind, device=device)
    result = extract_corpus(
        tokenizer, model, spec, trees, layers, batch_size=batch_size, device=device
    )
    kept_trees = [trees[i] for i in result.kept]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for layer in layers:
        vectors = result.layer_vectors[layer]
        report = align_check(kept_trees, vectors)
        if not report.ok:
            raise ExtractionError(f"internal alignment failure: {report.describe()}")
        header = EmbeddingHeader(
            model_id=name,
            layer_index=layer,
            hidden_dim=spec.hidden_dim,
            sentence_count=len(vectors),
        )
        save_store(out_dir / f"{split}.{name}.L{layer}.wemb", header, vectors)
    if result.dropped:
        (out_dir / f"{split}.{name}.filtered.conllu").write_text(write_conllu(kept_trees))
        (out_dir / f"{split}.{name}.dropped.txt").write_text(
            "".join(f"{ordinal}\n" for ordinal in result.dropped)
        )
    return result
