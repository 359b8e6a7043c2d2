"""The two-matrix linear probe over frozen word representations.

``label_map`` scores each word's incoming dependency relation (trained with
cross-entropy); ``subspace_proj`` projects representations into a low-rank
subspace whose pairwise Euclidean distances are trained, with an L1 loss,
to match dependency-tree distances. Gradients are closed-form and training
is mini-batch Adam. All arithmetic is binary64.
"""

from __future__ import annotations

import json
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from math import sqrt

import numpy as np

from .embstore import align_check
from .treebank import GoldTree, LabelVocabulary, build_vocabulary, tree_distances

CHECKPOINT_VERSION = 1

_DIST_EPS = 1e-12  # pairs closer than this in the subspace get no gradient


class ProbeShapeError(ValueError):
    """Input dimensions do not match the probe's matrices."""


class CheckpointError(ValueError):
    """A probe checkpoint document is malformed or inconsistent."""


@dataclass(frozen=True)
class ProbeParams:
    """Trained probe state: the two matrices plus the label vocabulary.

    ``label_map`` has shape (n_labels, hidden_dim); ``subspace_proj`` has
    shape (rank, hidden_dim) with 1 <= rank <= hidden_dim.
    """

    label_map: np.ndarray
    subspace_proj: np.ndarray
    vocabulary: LabelVocabulary

    def __post_init__(self) -> None:
        label_map = np.ascontiguousarray(self.label_map, dtype=np.float64)
        subspace_proj = np.ascontiguousarray(self.subspace_proj, dtype=np.float64)
        if label_map.ndim != 2 or subspace_proj.ndim != 2:
            raise ProbeShapeError("probe matrices must be 2-D")
        if label_map.shape[1] != subspace_proj.shape[1]:
            raise ProbeShapeError(
                f"hidden dims disagree: label map {label_map.shape[1]} "
                f"vs subspace projection {subspace_proj.shape[1]}"
            )
        if label_map.shape[0] != len(self.vocabulary):
            raise ProbeShapeError(
                f"label map has {label_map.shape[0]} rows for "
                f"{len(self.vocabulary)} labels"
            )
        if not 1 <= subspace_proj.shape[0] <= subspace_proj.shape[1]:
            raise ProbeShapeError(
                f"rank {subspace_proj.shape[0]} outside [1, {subspace_proj.shape[1]}]"
            )
        if not (np.all(np.isfinite(label_map)) and np.all(np.isfinite(subspace_proj))):
            raise ValueError("probe matrices must be finite")
        object.__setattr__(self, "label_map", label_map)
        object.__setattr__(self, "subspace_proj", subspace_proj)

    @property
    def n_labels(self) -> int:
        return self.label_map.shape[0]

    @property
    def rank(self) -> int:
        return self.subspace_proj.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.label_map.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    rank: int = 128
    step_size: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 30
    patience: int = 5
    seed: int = 0
    label_weight: float = 1.0
    struct_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.rank < 1 or self.batch_size < 1 or self.max_epochs < 0:
            raise ValueError("rank and batch_size must be >= 1, max_epochs >= 0")
        if self.step_size <= 0 or self.label_weight < 0 or self.struct_weight < 0:
            raise ValueError("step_size must be positive and loss weights non-negative")
        if self.patience < 1 or (self.max_epochs > 0 and self.patience > self.max_epochs):
            raise ValueError(f"patience must be in [1, max_epochs], got {self.patience}")


@dataclass(frozen=True)
class EpochRecord:
    label_loss: float
    struct_loss: float
    dev_las: float
    dev_uas: float
    dev_label: float


@dataclass(frozen=True)
class TrainRecord:
    epochs: tuple[EpochRecord, ...]
    best_epoch: int  # -1 when no epoch ran
    params: ProbeParams


def _check_width(params: ProbeParams, vectors: np.ndarray) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[1] != params.hidden_dim:
        raise ProbeShapeError(
            f"expected sentence shape (n, {params.hidden_dim}), got {vectors.shape}"
        )
    return vectors


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def label_logprobs(params: ProbeParams, vectors: np.ndarray) -> np.ndarray:
    """Per-word log-probabilities over relation labels, shape (n, n_labels)."""
    vectors = _check_width(params, vectors)
    return _log_softmax(vectors @ params.label_map.T)


def subspace_distance(params: ProbeParams, vec_a: np.ndarray, vec_b: np.ndarray) -> float:
    """Euclidean distance between two words after projection into the subspace."""
    vec_a = np.asarray(vec_a, dtype=np.float64)
    vec_b = np.asarray(vec_b, dtype=np.float64)
    if vec_a.shape != (params.hidden_dim,) or vec_b.shape != (params.hidden_dim,):
        raise ProbeShapeError(
            f"expected vectors of width {params.hidden_dim}, "
            f"got {vec_a.shape} and {vec_b.shape}"
        )
    delta = params.subspace_proj @ (vec_a - vec_b)
    return float(np.sqrt(delta @ delta))


def pairwise_distances(params: ProbeParams, vectors: np.ndarray) -> np.ndarray:
    """All-pairs subspace distances for one sentence, shape (n, n)."""
    vectors = _check_width(params, vectors)
    return _pairwise(vectors @ params.subspace_proj.T)


def _pairwise(proj: np.ndarray) -> np.ndarray:
    diff = proj[:, None, :] - proj[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def structural_loss(params: ProbeParams, vectors: np.ndarray, gold_dist: np.ndarray) -> float:
    """L1 mismatch between tree distances and subspace distances.

    For a sentence of n words the sum over all ordered pairs (including the
    zero i == j terms) is divided by (n - 1)^2. Single-word sentences have
    loss 0 by definition.
    """
    vectors = _check_width(params, vectors)
    n = vectors.shape[0]
    if n == 1:
        return 0.0
    gold_dist = np.asarray(gold_dist, dtype=np.float64)
    if gold_dist.shape != (n, n):
        raise ProbeShapeError(f"expected gold distances of shape ({n}, {n}), got {gold_dist.shape}")
    dists = pairwise_distances(params, vectors)
    return float(np.abs(gold_dist - dists).sum()) / (n - 1) ** 2


@dataclass(frozen=True)
class _Prepared:
    vectors: np.ndarray
    label_ids: np.ndarray
    gold_dist: np.ndarray


def _prepare(
    trees: Sequence[GoldTree], sentences: Sequence[np.ndarray], vocab: LabelVocabulary
) -> list[_Prepared]:
    prepared = []
    for tree, vectors in zip(trees, sentences):
        ids = np.array(
            [vocab.index(t.relation) if t.relation in vocab else -1 for t in tree.tokens],
            dtype=np.intp,
        )
        prepared.append(
            _Prepared(
                vectors=np.ascontiguousarray(vectors, dtype=np.float64),
                label_ids=ids,
                gold_dist=tree_distances(tree).astype(np.float64),
            )
        )
    return prepared


def _gradient_sums(
    label_map: np.ndarray, subspace_proj: np.ndarray, batch: Sequence[_Prepared]
) -> tuple[np.ndarray, np.ndarray, float, float, int, int]:
    """Unnormalized gradients and losses over a batch.

    Returns (label grad sum, subspace grad sum, cross-entropy sum,
    structural-loss sum, token count, structural sentence count). The
    structural gradient for one pair (i, j) with projected difference delta
    and distance d = |delta| is -sign(d_gold - d) * delta (x_i - x_j)^T / d;
    pairs with d < 1e-12 are skipped and sign(0) = 0.
    """
    grad_label = np.zeros_like(label_map)
    grad_subspace = np.zeros_like(subspace_proj)
    ce_sum = 0.0
    sl_sum = 0.0
    n_tokens = 0
    n_struct = 0
    for item in batch:
        vectors = item.vectors
        n = vectors.shape[0]
        logprobs = _log_softmax(vectors @ label_map.T)
        rows = np.arange(n)
        known = item.label_ids >= 0
        ce_sum += float(-logprobs[rows[known], item.label_ids[known]].sum())
        residual = np.exp(logprobs)
        residual[rows[known], item.label_ids[known]] -= 1.0
        residual[~known] = 0.0
        grad_label += residual.T @ vectors
        n_tokens += int(known.sum())
        if n < 2:
            continue
        norm = float(n - 1) ** 2
        proj = vectors @ subspace_proj.T
        dists = _pairwise(proj)
        err = item.gold_dist - dists
        sl_sum += float(np.abs(err).sum()) / norm
        with np.errstate(divide="ignore", invalid="ignore"):
            weights = -np.sign(err) / dists
        weights[dists < _DIST_EPS] = 0.0
        np.fill_diagonal(weights, 0.0)
        weights /= norm
        # sum_ij w_ij (p_i - p_j)(x_i - x_j)^T  ==  2 P^T (diag(rowsum) - W) X
        kernel = -weights
        kernel[rows, rows] = weights.sum(axis=1)
        grad_subspace += 2.0 * proj.T @ (kernel @ vectors)
        n_struct += 1
    return grad_label, grad_subspace, ce_sum, sl_sum, n_tokens, n_struct


def gradients(
    params: ProbeParams,
    batch: Sequence[tuple[np.ndarray, GoldTree]],
    *,
    label_weight: float = 1.0,
    struct_weight: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Gradients of the weighted training objective over a batch.

    The objective is label_weight * (mean token cross-entropy) +
    struct_weight * (mean per-sentence structural loss, single-word
    sentences skipped). Returns (d label_map, d subspace_proj,
    label loss, structural loss); the losses are unweighted means.
    """
    if not batch:
        raise ValueError("gradients of an empty batch are undefined")
    prepared = _prepare(
        [tree for _, tree in batch],
        [_check_width(params, vectors) for vectors, _ in batch],
        params.vocabulary,
    )
    g_label, g_sub, ce_sum, sl_sum, n_tokens, n_struct = _gradient_sums(
        params.label_map, params.subspace_proj, prepared
    )
    label_loss = ce_sum / n_tokens if n_tokens else 0.0
    struct_loss = sl_sum / n_struct if n_struct else 0.0
    g_label *= label_weight / n_tokens if n_tokens else 0.0
    g_sub *= struct_weight / n_struct if n_struct else 0.0
    return g_label, g_sub, label_loss, struct_loss


class _Adam:
    """Per-parameter adaptive first-order updates (Adam with bias correction)."""

    def __init__(self, shape: tuple[int, ...], step_size: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
        self.step_size = step_size
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.mean = np.zeros(shape)
        self.var = np.zeros(shape)
        self.steps = 0

    def update(self, value: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.steps += 1
        self.mean = self.beta1 * self.mean + (1.0 - self.beta1) * grad
        self.var = self.beta2 * self.var + (1.0 - self.beta2) * grad * grad
        mean_hat = self.mean / (1.0 - self.beta1**self.steps)
        var_hat = self.var / (1.0 - self.beta2**self.steps)
        return value - self.step_size * mean_hat / (np.sqrt(var_hat) + self.eps)


def train(
    train_trees: Sequence[GoldTree],
    train_vectors: Sequence[np.ndarray],
    dev_trees: Sequence[GoldTree],
    dev_vectors: Sequence[np.ndarray],
    config: TrainConfig = TrainConfig(),
) -> TrainRecord:
    """Train both matrices jointly; early-stop on dev LAS.

    Deterministic for a fixed config.seed: initialization, shuffling, and
    all reductions are fixed-order. Returns the parameters from the epoch
    with the highest dev LAS (ties break toward the earlier epoch).
    """
    from . import decoder, metrics  # local import: decoding is needed only for dev eval

    if not train_trees:
        raise ValueError("empty training corpus")
    for name, trees, vectors in (
        ("train", train_trees, train_vectors),
        ("dev", dev_trees, dev_vectors),
    ):
        report = align_check(trees, vectors)
        if not report.ok:
            raise ValueError(f"{name} split is misaligned: {report.describe()}")

    vocab = build_vocabulary(train_trees)
    unseen = sorted({t.relation for tree in dev_trees for t in tree.tokens} - set(vocab.labels))
    if unseen:
        warnings.warn(
            f"dev labels unseen in training are always scored incorrect: {', '.join(unseen)}",
            stacklevel=2,
        )
    hidden_dim = int(np.asarray(train_vectors[0]).shape[1])
    if config.rank > hidden_dim:
        raise ValueError(f"rank {config.rank} exceeds hidden dim {hidden_dim}")

    rng = np.random.default_rng(config.seed)
    limit = 1.0 / sqrt(hidden_dim)
    label_map = rng.uniform(-limit, limit, size=(len(vocab), hidden_dim))
    subspace_proj = rng.uniform(-limit, limit, size=(config.rank, hidden_dim))

    prepared = _prepare(train_trees, train_vectors, vocab)
    opt_label = _Adam(label_map.shape, config.step_size)
    opt_sub = _Adam(subspace_proj.shape, config.step_size)

    records: list[EpochRecord] = []
    best_epoch = -1
    best_las = -np.inf
    best = ProbeParams(label_map.copy(), subspace_proj.copy(), vocab)

    for epoch in range(config.max_epochs):
        order = rng.permutation(len(prepared))
        ce_sum = sl_sum = 0.0
        n_tokens = n_struct = 0
        for start in range(0, len(order), config.batch_size):
            batch = [prepared[i] for i in order[start : start + config.batch_size]]
            g_label, g_sub, ce, sl, toks, structs = _gradient_sums(
                label_map, subspace_proj, batch
            )
            ce_sum += ce
            sl_sum += sl
            n_tokens += toks
            n_struct += structs
            if toks:
                label_map = opt_label.update(label_map, g_label * (config.label_weight / toks))
            if structs:
                subspace_proj = opt_sub.update(
                    subspace_proj, g_sub * (config.struct_weight / structs)
                )
        snapshot = ProbeParams(label_map.copy(), subspace_proj.copy(), vocab)
        predictions = decoder.decode_corpus(snapshot, dev_vectors)
        report = metrics.score_corpus(dev_trees, predictions)
        records.append(
            EpochRecord(
                label_loss=ce_sum / n_tokens if n_tokens else 0.0,
                struct_loss=sl_sum / n_struct if n_struct else 0.0,
                dev_las=report.las,
                dev_uas=report.uas,
                dev_label=report.label,
            )
        )
        if report.las > best_las:
            best_las = report.las
            best_epoch = epoch
            best = snapshot
        elif epoch - best_epoch >= config.patience:
            break
    return TrainRecord(tuple(records), best_epoch, best)


def save_probe(params: ProbeParams, *, model_id: str = "", layer_index: int = 0) -> str:
    """Serialize a probe to its checkpoint document (JSON text).

    Matrices round-trip losslessly: floats are written with shortest
    round-trip decimal representation.
    """
    doc = {
        "formatVersion": CHECKPOINT_VERSION,
        "modelId": model_id,
        "layerIndex": layer_index,
        "hiddenDim": params.hidden_dim,
        "rank": params.rank,
        "labels": list(params.vocabulary.labels),
        "L": params.label_map.tolist(),
        "B": params.subspace_proj.tolist(),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def load_probe(document: str) -> tuple[ProbeParams, str, int]:
    """Parse a checkpoint document; returns (params, model id, layer index)."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as err:
        raise CheckpointError(f"checkpoint is not valid JSON: {err}") from err
    try:
        if doc["formatVersion"] != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {doc['formatVersion']}")
        labels = tuple(doc["labels"])
        label_map = np.array(doc["L"], dtype=np.float64)
        subspace_proj = np.array(doc["B"], dtype=np.float64)
        model_id = doc["modelId"]
        layer_index = int(doc["layerIndex"])
        declared_dim = int(doc["hiddenDim"])
        declared_rank = int(doc["rank"])
    except (KeyError, TypeError, ValueError) as err:
        raise CheckpointError(f"malformed checkpoint: {err}") from err
    if label_map.ndim != 2 or label_map.shape[0] != len(labels):
        raise CheckpointError(
            f"label matrix has {label_map.shape[0] if label_map.ndim == 2 else '?'} rows "
            f"for {len(labels)} labels"
        )
    if label_map.shape[1] != declared_dim or subspace_proj.ndim != 2 or (
        subspace_proj.shape != (declared_rank, declared_dim)
    ):
        raise CheckpointError(
            f"matrix shapes {label_map.shape} / {subspace_proj.shape} do not match "
            f"declared hiddenDim {declared_dim} and rank {declared_rank}"
        )
    try:
        params = ProbeParams(label_map, subspace_proj, LabelVocabulary(labels))
    except ValueError as err:
        raise CheckpointError(str(err)) from err
    return params, model_id, layer_index
