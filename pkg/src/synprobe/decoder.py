"""Greedy decoding of labeled, directed dependency trees from probe outputs.

The root is the word with the highest probability of the "root" label. The
structure grows from the root: at every step, among all pairs of an in-tree
word h and an out-of-tree word d, attach the pair with the smallest subspace
distance (ties break on the lower dependent index, then the lower head
index). Non-root words take their best label with "root" excluded, so every
decoded tree carries exactly one "root" label.
"""

from __future__ import annotations

from bisect import insort
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .embstore import align_check
from .probe import ProbeParams, label_logprobs, pairwise_distances
from .treebank import ROOT, GoldTree, LabelVocabulary


@dataclass(frozen=True)
class PredictedTree:
    """Decoded head index (or ROOT) and relation label per word."""

    heads: tuple[int, ...]
    labels: tuple[str, ...]
    root_index: int

    def __len__(self) -> int:
        return len(self.heads)


def select_root(logprobs: np.ndarray, vocabulary: LabelVocabulary) -> int:
    """Index of the word most likely to carry the "root" label (first on ties)."""
    return int(np.argmax(logprobs[:, vocabulary.root_id]))


def decode_tree(params: ProbeParams, vectors: np.ndarray) -> PredictedTree:
    """Decode one sentence into a single-rooted labeled tree."""
    logprobs = label_logprobs(params, vectors)
    n = logprobs.shape[0]
    if n == 0:
        raise ValueError("cannot decode an empty sentence")
    vocab = params.vocabulary
    root = select_root(logprobs, vocab)
    heads = [0] * n
    heads[root] = ROOT
    if n > 1:
        dists = pairwise_distances(params, vectors)
        in_tree = [root]
        out_tree = [i for i in range(n) if i != root]
        for _ in range(n - 1):
            in_arr = np.array(in_tree)
            out_arr = np.array(out_tree)
            sub = dists[np.ix_(in_arr, out_arr)]
            minimum = sub.min()
            cand_h, cand_d = np.nonzero(sub == minimum)
            pick = np.lexsort((in_arr[cand_h], out_arr[cand_d]))[0]
            head = int(in_arr[cand_h[pick]])
            dep = int(out_arr[cand_d[pick]])
            heads[dep] = head
            out_tree.remove(dep)
            insort(in_tree, dep)
    masked = logprobs.copy()
    masked[:, vocab.root_id] = -np.inf
    best = np.argmax(masked, axis=1)
    labels = [vocab.labels[j] for j in best]
    labels[root] = "root"
    return PredictedTree(tuple(heads), tuple(labels), root)


def decode_corpus(
    params: ProbeParams,
    sentences: Sequence[np.ndarray],
    trees: Sequence[GoldTree] | None = None,
) -> list[PredictedTree]:
    """Decode every sentence; with ``trees`` given, abort unless aligned."""
    if trees is not None:
        report = align_check(trees, sentences)
        if not report.ok:
            raise ValueError(f"corpus/store misalignment: {report.describe()}")
    return [decode_tree(params, vectors) for vectors in sentences]


def predictions_to_conllu(trees: Sequence[GoldTree], predictions: Sequence[PredictedTree]) -> str:
    """Emit predictions as CoNLL-U, copying FORM from the gold trees."""
    lines: list[str] = []
    for tree, pred in zip(trees, predictions):
        for i, token in enumerate(tree.tokens):
            head_id = 0 if pred.heads[i] == ROOT else pred.heads[i] + 1
            lines.append(
                "\t".join(
                    (str(i + 1), token.form, "_", "_", "_", "_",
                     str(head_id), pred.labels[i], "_", "_")
                )
            )
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")
