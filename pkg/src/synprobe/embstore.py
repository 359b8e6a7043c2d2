"""WEMB1 binary stores: word-aligned embedding vectors for one encoder layer.

Layout (little-endian throughout): the magic ``WEMB1`` (5 bytes), a u32
metadata length, the metadata as a UTF-8 JSON key/value document (modelId,
layerIndex, hiddenDim, sentenceCount, dtype), then per sentence a u32 word
count n followed by n * hiddenDim IEEE-754 binary32 values, row-major.
Vectors are stored in binary32 and upcast to binary64 on read.
"""

from __future__ import annotations

import json
import struct
from collections.abc import Sequence
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .treebank import GoldTree

MAGIC = b"WEMB1"


class StoreFormatError(ValueError):
    """The byte stream is not a well-formed WEMB1 store."""


class StoreDataError(ValueError):
    """The store decodes but carries invalid values (NaN or Inf)."""


@dataclass(frozen=True)
class EmbeddingHeader:
    model_id: str
    layer_index: int
    hidden_dim: int
    sentence_count: int
    dtype: str = "f32"

    def __post_init__(self) -> None:
        if self.hidden_dim < 1:
            raise ValueError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        if self.sentence_count < 0:
            raise ValueError(f"sentence_count must be >= 0, got {self.sentence_count}")
        if self.layer_index < 0:
            raise ValueError(f"layer_index must be >= 0, got {self.layer_index}")
        if self.dtype != "f32":
            raise ValueError(f'only dtype "f32" is supported, got {self.dtype!r}')


@dataclass(frozen=True)
class AlignmentReport:
    """Result of checking a store against its companion treebank."""

    ok: bool
    tree_count: int
    store_count: int
    mismatches: tuple[tuple[int, int, int], ...]  # (ordinal, tree tokens, store rows)

    def describe(self) -> str:
        if self.ok:
            return f"aligned: {self.tree_count} sentences"
        parts = [f"misaligned: {self.tree_count} trees vs {self.store_count} stored sentences"]
        for ordinal, n_tokens, n_rows in self.mismatches:
            parts.append(f"sentence {ordinal}: {n_tokens} tokens vs {n_rows} rows")
        return "; ".join(parts)


def write_store(
    header: EmbeddingHeader, sentences: Sequence[np.ndarray], sink: BinaryIO
) -> int:
    """Write a store; returns the number of bytes written.

    All dimension checks run before any byte is written.
    """
    if header.sentence_count != len(sentences):
        raise StoreFormatError(
            f"header declares {header.sentence_count} sentences, got {len(sentences)}"
        )
    arrays = []
    for ordinal, sentence in enumerate(sentences):
        arr = np.asarray(sentence)
        if arr.ndim != 2 or arr.shape[1] != header.hidden_dim:
            raise StoreFormatError(
                f"sentence {ordinal}: expected shape (n, {header.hidden_dim}), got {arr.shape}"
            )
        arrays.append(np.ascontiguousarray(arr, dtype="<f4"))
    meta = json.dumps(
        {
            "modelId": header.model_id,
            "layerIndex": header.layer_index,
            "hiddenDim": header.hidden_dim,
            "sentenceCount": header.sentence_count,
            "dtype": header.dtype,
        },
        sort_keys=True,
    ).encode("utf-8")
    written = 0
    written += sink.write(MAGIC)
    written += sink.write(struct.pack("<I", len(meta)))
    written += sink.write(meta)
    for arr in arrays:
        written += sink.write(struct.pack("<I", arr.shape[0]))
        written += sink.write(arr.tobytes())
    return written


def _read_exact(source: BinaryIO, count: int, what: str) -> bytes:
    data = source.read(count)
    if len(data) != count:
        raise StoreFormatError(f"unexpected end of store at {what}")
    return data


def read_store(source: BinaryIO) -> tuple[EmbeddingHeader, list[np.ndarray]]:
    """Read a store back; the exact inverse of :func:`write_store`.

    Returned vectors are float64. Every value is checked for finiteness.
    """
    magic = source.read(len(MAGIC))
    if magic != MAGIC:
        raise StoreFormatError("not an embedding store (bad magic)")
    (meta_len,) = struct.unpack("<I", _read_exact(source, 4, "metadata length"))
    try:
        meta = json.loads(_read_exact(source, meta_len, "metadata").decode("utf-8"))
        header = EmbeddingHeader(
            model_id=meta["modelId"],
            layer_index=meta["layerIndex"],
            hidden_dim=meta["hiddenDim"],
            sentence_count=meta["sentenceCount"],
            dtype=meta["dtype"],
        )
    except (ValueError, KeyError, TypeError) as err:
        raise StoreFormatError(f"invalid store metadata: {err}") from err
    dim = header.hidden_dim
    sentences: list[np.ndarray] = []
    for ordinal in range(header.sentence_count):
        where = f"sentence {ordinal}"
        (n_words,) = struct.unpack("<I", _read_exact(source, 4, where))
        raw = _read_exact(source, n_words * dim * 4, where)
        vectors = np.frombuffer(raw, dtype="<f4").reshape(n_words, dim).astype(np.float64)
        if not np.all(np.isfinite(vectors)):
            word = int(np.argwhere(~np.isfinite(vectors))[0][0])
            raise StoreDataError(f"non-finite value at sentence {ordinal}, word {word}")
        sentences.append(vectors)
    return header, sentences


def save_store(path, header: EmbeddingHeader, sentences: Sequence[np.ndarray]) -> int:
    with open(path, "wb") as sink:
        return write_store(header, sentences, sink)


def load_store(path) -> tuple[EmbeddingHeader, list[np.ndarray]]:
    with open(path, "rb") as source:
        return read_store(source)


def align_check(
    trees: Sequence[GoldTree], sentences: Sequence[np.ndarray], max_mismatches: int = 10
) -> AlignmentReport:
    """Check that each stored sentence matches its tree's token count."""
    mismatches: list[tuple[int, int, int]] = []
    for ordinal in range(max(len(trees), len(sentences))):
        n_tokens = len(trees[ordinal]) if ordinal < len(trees) else 0
        n_rows = len(sentences[ordinal]) if ordinal < len(sentences) else 0
        if n_tokens != n_rows:
            mismatches.append((ordinal, n_tokens, n_rows))
            if len(mismatches) >= max_mismatches:
                break
    return AlignmentReport(
        ok=not mismatches and len(trees) == len(sentences),
        tree_count=len(trees),
        store_count=len(sentences),
        mismatches=tuple(mismatches),
    )
