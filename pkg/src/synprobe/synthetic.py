"""Synthetic corpora whose gold trees are linearly decodable by construction.

Each word vector is a mixed-together concatenation of (a) a one-hot block
for the word's relation label, (b) a tree-position code, and (c) distractor
dimensions. The code assigns every edge of a sentence an orthonormal
direction and places each word at the sum of the directions on its path
from the root, so squared distances in the code block equal tree distances
exactly. A fixed random rotation mixes the blocks; both the labels and the
code stay recoverable by a linear probe, which is what makes these corpora
an oracle for end-to-end training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probe import ProbeParams
from .treebank import ROOT, GoldTree, LabelVocabulary, Token

_RELATION_POOL = (
    "nsubj", "obj", "det", "amod", "advmod", "nmod", "case", "compound",
    "punct", "obl", "mark", "aux", "cc", "conj", "cop",
)


@dataclass(frozen=True)
class SyntheticConfig:
    min_tokens: int = 3
    max_tokens: int = 12
    n_relations: int = 9  # besides "root"
    code_dim: int = 16
    distractor_dim: int = 6
    label_scale: float = 1.0
    code_scale: float = 1.5
    distractor_scale: float = 0.25
    noise_scale: float = 0.02
    seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.min_tokens <= self.max_tokens:
            raise ValueError("need 1 <= min_tokens <= max_tokens")
        if self.max_tokens - 1 > self.code_dim:
            raise ValueError("code_dim must be at least max_tokens - 1")
        if self.n_relations > len(_RELATION_POOL):
            raise ValueError(f"at most {len(_RELATION_POOL)} relations available")

    @property
    def hidden_dim(self) -> int:
        return self.n_relations + 1 + self.code_dim + self.distractor_dim


@dataclass(frozen=True)
class SyntheticEncoder:
    """The fixed linear "model": block layout plus mixing rotation."""

    config: SyntheticConfig
    labels: tuple[str, ...]  # block order; "root" last
    mixing: np.ndarray       # orthogonal (hidden_dim, hidden_dim)


def build_encoder(config: SyntheticConfig = SyntheticConfig()) -> SyntheticEncoder:
    rng = np.random.default_rng(config.seed)
    labels = _RELATION_POOL[: config.n_relations] + ("root",)
    gaussian = rng.normal(size=(config.hidden_dim, config.hidden_dim))
    mixing, _ = np.linalg.qr(gaussian)
    return SyntheticEncoder(config=config, labels=labels, mixing=mixing)


def random_tree(rng: np.random.Generator, n: int, relations: tuple[str, ...]) -> GoldTree:
    """Uniform random attachment tree with random relation labels."""
    order = rng.permutation(n)
    heads = [0] * n
    heads[order[0]] = ROOT
    for k in range(1, n):
        heads[order[k]] = int(order[rng.integers(0, k)])
    tokens = []
    for i in range(n):
        relation = "root" if heads[i] == ROOT else str(rng.choice(relations))
        tokens.append(Token(index=i + 1, form=f"w{i}", head=heads[i], relation=relation))
    return GoldTree(tuple(tokens), int(order[0]))


def _position_codes(tree: GoldTree, rng: np.random.Generator, code_dim: int) -> np.ndarray:
    """Per-word code vectors whose squared distances equal tree distances."""
    n = len(tree)
    gaussian = rng.normal(size=(code_dim, max(n - 1, 1)))
    basis, _ = np.linalg.qr(gaussian)  # orthonormal columns, one per edge
    codes = np.zeros((n, code_dim))
    children: list[list[int]] = [[] for _ in range(n)]
    for i, token in enumerate(tree.tokens):
        if token.head != ROOT:
            children[token.head].append(i)
    edge = 0
    stack = [tree.root_index]
    while stack:
        node = stack.pop()
        for child in children[node]:
            codes[child] = codes[node] + basis[:, edge]
            edge += 1
            stack.append(child)
    return codes


def generate_trees(
    encoder: SyntheticEncoder, n_sentences: int, seed: int
) -> list[GoldTree]:
    """Draw random gold trees over the encoder's relation inventory."""
    cfg = encoder.config
    rng = np.random.default_rng(seed)
    non_root = encoder.labels[:-1]
    return [
        random_tree(rng, int(rng.integers(cfg.min_tokens, cfg.max_tokens + 1)), non_root)
        for _ in range(n_sentences)
    ]


def encode_corpus(
    encoder: SyntheticEncoder, trees: list[GoldTree], seed: int
) -> list[np.ndarray]:
    """Produce word vectors for existing trees under the fixed encoder."""
    cfg = encoder.config
    rng = np.random.default_rng(seed)
    label_block = {label: i for i, label in enumerate(encoder.labels)}
    sentences: list[np.ndarray] = []
    for tree in trees:
        n = len(tree)
        raw = np.zeros((n, cfg.hidden_dim))
        for i, token in enumerate(tree.tokens):
            raw[i, label_block[token.relation]] = cfg.label_scale
        codes = _position_codes(tree, rng, cfg.code_dim)
        offset = len(encoder.labels)
        raw[:, offset : offset + cfg.code_dim] = cfg.code_scale * codes
        raw[:, offset + cfg.code_dim :] = cfg.distractor_scale * rng.normal(
            size=(n, cfg.distractor_dim)
        )
        raw += cfg.noise_scale * rng.normal(size=raw.shape)
        sentences.append(raw @ encoder.mixing.T)
    return sentences


def generate_split(
    encoder: SyntheticEncoder, n_sentences: int, seed: int
) -> tuple[list[GoldTree], list[np.ndarray]]:
    """Draw one corpus split (trees plus vectors) from the fixed encoder."""
    trees = generate_trees(encoder, n_sentences, seed)
    return trees, encode_corpus(encoder, trees, seed + 1)


def ideal_probe(encoder: SyntheticEncoder, sharpness: float = 50.0) -> ProbeParams:
    """The analytically perfect probe for an encoder: undoes the mixing.

    Label logits saturate toward the planted one-hot block; the subspace
    projection selects the tree-position code, so decoding reproduces every
    gold tree exactly (up to the generator's small noise).
    """
    cfg = encoder.config
    vocab = LabelVocabulary(tuple(sorted(encoder.labels)))
    unmix = encoder.mixing.T
    label_map = np.zeros((len(vocab), cfg.hidden_dim))
    for row, label in enumerate(vocab.labels):
        label_map[row] = sharpness * unmix[encoder.labels.index(label)]
    offset = len(encoder.labels)
    subspace_proj = unmix[offset : offset + cfg.code_dim]
    return ProbeParams(label_map, subspace_proj, vocab)
