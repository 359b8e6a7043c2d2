"""CoNLL-U treebanks: parsing, validation, length filtering, and tree distances."""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

ROOT = -1
"""Head value marking the root word (attached to the artificial ROOT node)."""

DEFAULT_MAX_TOKENS = 75

_N_COLUMNS = 10
_PLAIN_EXTRAS = ("_",) * 6  # LEMMA, UPOS, XPOS, FEATS, DEPS, MISC
_SKIPPED_ID = re.compile(r"\d+-\d+$|\d+\.\d+$")  # multiword-token range / empty node


class ConlluParseError(ValueError):
    """A CoNLL-U line could not be parsed; the message carries the line number."""


class TreeStructureError(ValueError):
    """Head indices of a sentence do not form a single rooted tree."""


@dataclass(frozen=True)
class Token:
    """One syntactic word with its incoming dependency edge.

    ``index`` is the 1-based position within the sentence; ``head`` is the
    0-based index of the head word, or ``ROOT``. ``extras`` holds the six
    CoNLL-U columns we do not interpret (LEMMA, UPOS, XPOS, FEATS, DEPS,
    MISC), preserved verbatim for round-tripping.
    """

    index: int
    form: str
    head: int
    relation: str
    extras: tuple[str, ...] = _PLAIN_EXTRAS

    def __post_init__(self) -> None:
        if not self.relation:
            raise ValueError(f"token {self.index} ({self.form!r}) has an empty relation")


@dataclass(frozen=True)
class GoldTree:
    """A gold dependency tree over one sentence."""

    tokens: tuple[Token, ...]
    root_index: int

    @classmethod
    def from_tokens(cls, tokens: Iterable[Token]) -> "GoldTree":
        """Build a tree, verifying the heads form a single rooted tree."""
        toks = tuple(tokens)
        root = verify_heads([t.head for t in toks])
        return cls(toks, root)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def forms(self) -> tuple[str, ...]:
        return tuple(t.form for t in self.tokens)

    @property
    def heads(self) -> tuple[int, ...]:
        return tuple(t.head for t in self.tokens)

    @property
    def relations(self) -> tuple[str, ...]:
        return tuple(t.relation for t in self.tokens)


@dataclass(frozen=True)
class LabelVocabulary:
    """Ordered set of dependency relation labels with integer ids."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels in vocabulary")
        if "root" not in self.labels:
            raise ValueError('vocabulary must contain the "root" label')

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self._lookup

    def index(self, label: str) -> int:
        return self._lookup[label]

    @property
    def root_id(self) -> int:
        return self._lookup["root"]

    @property
    def _lookup(self) -> dict[str, int]:
        lookup = self.__dict__.get("_lookup_cache")
        if lookup is None:
            lookup = {label: i for i, label in enumerate(self.labels)}
            self.__dict__["_lookup_cache"] = lookup
        return lookup


def verify_heads(heads: Sequence[int], context: str = "") -> int:
    """Check that ``heads`` (one ROOT entry) forms a single rooted tree.

    Returns the root index. Raises ``TreeStructureError`` on zero or multiple
    roots, out-of-range heads, self-loops, or cycles.
    """
    where = f" in {context}" if context else ""
    n = len(heads)
    roots = [i for i, h in enumerate(heads) if h == ROOT]
    if len(roots) != 1:
        raise TreeStructureError(f"expected exactly one root{where}, found {len(roots)}")
    children: list[list[int]] = [[] for _ in range(n)]
    for i, h in enumerate(heads):
        if h == ROOT:
            continue
        if h == i:
            raise TreeStructureError(f"token {i + 1} is its own head{where}")
        if not 0 <= h < n:
            raise TreeStructureError(f"token {i + 1} has head {h} out of range{where}")
        children[h].append(i)
    seen = 0
    stack = [roots[0]]
    while stack:
        seen += 1
        stack.extend(children[stack.pop()])
    if seen != n:
        raise TreeStructureError(
            f"heads{where} contain a cycle: only {seen} of {n} tokens reachable from the root"
        )
    return roots[0]


def strip_subtype(relation: str) -> str:
    """Drop a relation subtype: ``nmod:poss`` becomes ``nmod``."""
    return relation.split(":", 1)[0]


def parse_conllu(text: str | bytes, *, strip_subtypes: bool = True) -> list[GoldTree]:
    """Parse a CoNLL-U document into gold trees.

    Multiword-token range lines (id ``1-2``) and empty-node lines (id ``3.1``)
    are skipped; comment lines start with ``#``. HEAD 0 maps to ``ROOT``.
    Relation subtypes are stripped at the first ``:`` unless
    ``strip_subtypes=False``.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    trees: list[GoldTree] = []
    pending: list[tuple[int, list[str]]] = []  # (line number, columns)

    def flush() -> None:
        if not pending:
            return
        sentence_no = len(trees) + 1
        tokens = []
        for position, (line_no, cols) in enumerate(pending, start=1):
            word_id = int(cols[0])
            if word_id != position:
                raise ConlluParseError(
                    f"line {line_no}: word id {word_id} out of sequence (expected {position})"
                )
            head_id = int(cols[6])
            if head_id < 0 or head_id > len(pending):
                raise TreeStructureError(
                    f"sentence {sentence_no}: head {head_id} of token {word_id} out of range"
                )
            relation = cols[7]
            if not relation:
                raise ConlluParseError(f"line {line_no}: empty DEPREL column")
            if strip_subtypes:
                relation = strip_subtype(relation)
            extras = (cols[2], cols[3], cols[4], cols[5], cols[8], cols[9])
            tokens.append(
                Token(
                    index=word_id,
                    form=cols[1],
                    head=ROOT if head_id == 0 else head_id - 1,
                    relation=relation,
                    extras=extras,
                )
            )
        root = verify_heads([t.head for t in tokens], context=f"sentence {sentence_no}")
        trees.append(GoldTree(tuple(tokens), root))
        pending.clear()

    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line:
            flush()
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != _N_COLUMNS:
            raise ConlluParseError(
                f"line {line_no}: expected {_N_COLUMNS} tab-separated columns, got {len(cols)}"
            )
        if _SKIPPED_ID.match(cols[0]):
            continue  # multiword-token range or empty node
        if not cols[0].isdigit():
            raise ConlluParseError(f"line {line_no}: non-numeric word id {cols[0]!r}")
        if not (cols[6].isdigit() or (cols[6].startswith("-") and cols[6][1:].isdigit())):
            raise ConlluParseError(f"line {line_no}: non-numeric head {cols[6]!r}")
        pending.append((line_no, cols))
    flush()
    return trees


def load_conllu(path, *, strip_subtypes: bool = True) -> list[GoldTree]:
    with open(path, "rb") as handle:
        return parse_conllu(handle.read(), strip_subtypes=strip_subtypes)


def write_conllu(trees: Iterable[GoldTree]) -> str:
    """Serialize trees back to CoNLL-U text (LF line endings)."""
    lines: list[str] = []
    for tree in trees:
        for token in tree.tokens:
            e = token.extras
            head_id = 0 if token.head == ROOT else token.head + 1
            lines.append(
                "\t".join(
                    (str(token.index), token.form, e[0], e[1], e[2], e[3],
                     str(head_id), token.relation, e[4], e[5])
                )
            )
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


def filter_corpus(
    trees: Sequence[GoldTree], max_tokens: int = DEFAULT_MAX_TOKENS
) -> tuple[list[GoldTree], int]:
    """Keep sentences with at most ``max_tokens`` words.

    Returns the retained trees (order preserved) and the number removed.
    """
    if max_tokens < 1:
        raise ValueError(f"max_tokens must be >= 1, got {max_tokens}")
    kept = [t for t in trees if len(t) <= max_tokens]
    return kept, len(trees) - len(kept)


def tree_distances(tree: GoldTree) -> np.ndarray:
    """All-pairs path lengths (edge counts) in the undirected tree.

    Returns a symmetric (n, n) integer matrix with zero diagonal.
    """
    n = len(tree)
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for i, token in enumerate(tree.tokens):
        if token.head != ROOT:
            neighbors[i].append(token.head)
            neighbors[token.head].append(i)
    dist = np.zeros((n, n), dtype=np.int64)
    for start in range(n):
        row = dist[start]
        visited = [False] * n
        visited[start] = True
        frontier = [start]
        depth = 0
        while frontier:
            depth += 1
            nxt = []
            for node in frontier:
                for other in neighbors[node]:
                    if not visited[other]:
                        visited[other] = True
                        row[other] = depth
                        nxt.append(other)
            frontier = nxt
    return dist


def build_vocabulary(trees: Sequence[GoldTree]) -> LabelVocabulary:
    """Collect the distinct relation labels of a corpus, sorted lexicographically."""
    if not trees:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    labels = sorted({t.relation for tree in trees for t in tree.tokens})
    return LabelVocabulary(tuple(labels))
