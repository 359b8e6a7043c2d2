"""Subword-to-word alignment and mean pooling."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np


class AlignmentError(ValueError):
    """Subwords cannot be mapped one-to-one onto treebank words."""


def word_spans(word_ids: Sequence[int | None], n_words: int) -> list[tuple[int, int]]:
    """Half-open subword index span per word.

    ``word_ids`` carries one entry per subword position with the word index
    it belongs to, or None for special/padding tokens (the form fast
    tokenizers produce for pre-tokenized input). Every word must receive at
    least one subword; each word's subwords must be contiguous and in word
    order.
    """
    starts = [-1] * n_words
    stops = [-1] * n_words
    previous = -1
    for position, word in enumerate(word_ids):
        if word is None:
            continue
        if not 0 <= word < n_words:
            raise AlignmentError(
                f"subword {position} maps to word {word}, outside 0..{n_words - 1}"
            )
        if starts[word] == -1:
            if word < previous:
                raise AlignmentError(f"word {word} starts after word {previous}")
            starts[word] = position
            stops[word] = position + 1
            previous = word
        else:
            if word != previous or position != stops[word]:
                raise AlignmentError(f"subwords of word {word} are not contiguous")
            stops[word] = position + 1
    for word, start in enumerate(starts):
        if start == -1:
            raise AlignmentError(f"word {word} received no subwords")
    return list(zip(starts, stops))


def pool_words(hidden: np.ndarray, spans: Sequence[tuple[int, int]]) -> np.ndarray:
    """Element-wise mean of each word's subword vectors, in float64."""
    hidden = np.asarray(hidden, dtype=np.float64)
    return np.stack([hidden[start:stop].mean(axis=0) for start, stop in spans])
