"""Attachment and labeling scores for predicted dependency trees.

Token-level metrics (LAS, UAS, UUAS, LABEL) are micro-averaged over all
tokens of the corpus; ROOT is the fraction of sentences whose root word is
identified correctly. Punctuation counts like any other token. Percentages
are rounded half-up to two decimals.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Sequence
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .decoder import PredictedTree
from .treebank import ROOT, GoldTree


class ScoringError(ValueError):
    """Gold and predicted trees cannot be compared."""


@dataclass(frozen=True)
class SentenceScore:
    """Per-token correctness flags for one sentence plus the root flag."""

    head_correct: np.ndarray
    label_correct: np.ndarray
    las_correct: np.ndarray
    undirected_correct: np.ndarray
    root_correct: bool


@dataclass(frozen=True)
class RelationScore:
    gold_count: int
    attachment: float
    labeling: float


@dataclass(frozen=True)
class EvalReport:
    las: float
    uas: float
    uuas: float
    label: float
    root: float
    token_count: int
    sentence_count: int
    per_relation: dict[str, RelationScore]


def percentage(correct: int, total: int) -> float:
    """100 * correct / total, rounded half-up to two decimals (0.0 when empty)."""
    if total == 0:
        return 0.0
    value = Decimal(correct * 100) / Decimal(total)
    return float(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def score_sentence(gold: GoldTree, pred: PredictedTree, ordinal: int | None = None) -> SentenceScore:
    """Compare one predicted tree against gold.

    A token's undirected edge is correct when the unordered pair
    {token, predicted head} occurs as a gold edge; the gold root's edge
    counts as correct exactly when the prediction also roots it.
    """
    n = len(gold)
    if len(pred) != n:
        where = f"sentence {ordinal}" if ordinal is not None else "sentence"
        raise ScoringError(f"{where}: gold has {n} tokens but prediction has {len(pred)}")
    gold_heads = gold.heads
    gold_labels = gold.relations
    head_correct = np.fromiter(
        (pred.heads[i] == gold_heads[i] for i in range(n)), dtype=bool, count=n
    )
    label_correct = np.fromiter(
        (pred.labels[i] == gold_labels[i] for i in range(n)), dtype=bool, count=n
    )
    gold_edges = {
        (min(i, h), max(i, h)) for i, h in enumerate(gold_heads) if h != ROOT
    }
    undirected = np.zeros(n, dtype=bool)
    for i in range(n):
        pred_head = pred.heads[i]
        if gold_heads[i] == ROOT:
            undirected[i] = pred_head == ROOT
        elif pred_head != ROOT:
            undirected[i] = (min(i, pred_head), max(i, pred_head)) in gold_edges
    return SentenceScore(
        head_correct=head_correct,
        label_correct=label_correct,
        las_correct=head_correct & label_correct,
        undirected_correct=undirected,
        root_correct=pred.root_index == gold.root_index,
    )


def score_corpus(golds: Sequence[GoldTree], preds: Sequence[PredictedTree]) -> EvalReport:
    """Micro-averaged corpus scores with a per-gold-relation breakdown."""
    if len(golds) != len(preds):
        raise ScoringError(f"corpus size mismatch: {len(golds)} gold vs {len(preds)} predicted")
    tokens = heads = labels = las = undirected = roots = 0
    by_relation: dict[str, list[int]] = {}  # relation -> [gold count, head ok, label ok]
    for ordinal, (gold, pred) in enumerate(zip(golds, preds)):
        score = score_sentence(gold, pred, ordinal)
        n = len(gold)
        tokens += n
        heads += int(score.head_correct.sum())
        labels += int(score.label_correct.sum())
        las += int(score.las_correct.sum())
        undirected += int(score.undirected_correct.sum())
        roots += int(score.root_correct)
        for i, token in enumerate(gold.tokens):
            cell = by_relation.setdefault(token.relation, [0, 0, 0])
            cell[0] += 1
            cell[1] += int(score.head_correct[i])
            cell[2] += int(score.label_correct[i])
    per_relation = {
        rel: RelationScore(
            gold_count=count,
            attachment=percentage(head_ok, count),
            labeling=percentage(label_ok, count),
        )
        for rel, (count, head_ok, label_ok) in by_relation.items()
    }
    return EvalReport(
        las=percentage(las, tokens),
        uas=percentage(heads, tokens),
        uuas=percentage(undirected, tokens),
        label=percentage(labels, tokens),
        root=percentage(roots, len(golds)),
        token_count=tokens,
        sentence_count=len(golds),
        per_relation=per_relation,
    )


def sorted_relations(report: EvalReport, top_k: int | None = None) -> list[tuple[str, RelationScore]]:
    """Relations by descending gold count (alphabetical on ties), optionally truncated."""
    items = sorted(report.per_relation.items(), key=lambda kv: (-kv[1].gold_count, kv[0]))
    return items if top_k is None else items[:top_k]


AGGREGATE_METRICS = ("las", "uas", "uuas", "label", "root")


def long_rows(
    model: str, layer: int, split: str, report: EvalReport, *, relations: bool = True
) -> list[tuple[str, int, str, str, str]]:
    """Long-format report rows (model, layer, split, metric, value).

    Per-relation rows use metric names ``count:<rel>``, ``attachment:<rel>``,
    and ``labeling:<rel>``; no relation present in the gold corpus is omitted.
    """
    rows = [
        (model, layer, split, metric, f"{getattr(report, metric):.2f}")
        for metric in AGGREGATE_METRICS
    ]
    if relations:
        for rel, score in sorted_relations(report):
            rows.append((model, layer, split, f"count:{rel}", str(score.gold_count)))
            rows.append((model, layer, split, f"attachment:{rel}", f"{score.attachment:.2f}"))
            rows.append((model, layer, split, f"labeling:{rel}", f"{score.labeling:.2f}"))
    return rows


def aggregate_csv(model: str, layer: int, split: str, report: EvalReport) -> str:
    """CSV with one row per (model, layer, split, metric)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("model", "layer", "split", "metric", "value"))
    writer.writerows(long_rows(model, layer, split, report, relations=False))
    return buffer.getvalue()


def relation_csv(report: EvalReport, top_k: int | None = None) -> str:
    """Per-relation table sorted by gold count descending."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("relation", "gold_count", "attachment", "labeling"))
    for rel, score in sorted_relations(report, top_k):
        writer.writerow((rel, score.gold_count, f"{score.attachment:.2f}", f"{score.labeling:.2f}"))
    return buffer.getvalue()


def report_to_json(report: EvalReport) -> str:
    """Structured document mirroring the report."""
    doc = {
        "las": report.las,
        "uas": report.uas,
        "uuas": report.uuas,
        "label": report.label,
        "root": report.root,
        "tokenCount": report.token_count,
        "sentenceCount": report.sentence_count,
        "perRelation": {
            rel: {
                "goldCount": score.gold_count,
                "attachment": score.attachment,
                "labeling": score.labeling,
            }
            for rel, score in sorted_relations(report)
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)
