#!/usr/bin/env python3
"""Generate the committed English-like treebank fixture.

The UD English-EWT test split cannot be redistributed with this repository
and the build environment has no network access, so the self-evaluation
acceptance check runs against this deterministic stand-in by default (set
SYNPROBE_EWT_TEST to a real en_ewt-ud-test.conllu to use the real data).
The generator emits grammatical template sentences over ~20 relation types,
including subtyped relations, so the fixture exercises the same parser
paths as real EWT files.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

DET = ["the", "a", "this", "that", "some", "every"]
ADJ = ["big", "small", "red", "old", "new", "quick", "quiet", "bright", "late", "happy"]
NOUN = [
    "cat", "dog", "bird", "tree", "house", "car", "book", "river", "city",
    "teacher", "student", "idea", "door", "garden", "window", "friend",
    "story", "road", "mountain", "letter", "coffee", "train", "market",
]
PROPN = ["Alice", "Bob", "Carol", "Dave", "Paris", "London"]
PRON = ["she", "he", "they", "it", "we"]
VERB_TRANS = [
    "sees", "likes", "finds", "takes", "reads", "writes", "builds",
    "paints", "follows", "watches", "visits", "remembers",
]
VERB_INTRANS = ["sleeps", "runs", "smiles", "waits", "arrives", "laughs", "works"]
ADV = ["quickly", "quietly", "often", "never", "today", "yesterday", "soon", "again"]
PREP = ["in", "on", "under", "near", "with", "from", "over", "behind"]
AUX = ["will", "can", "must", "may"]
MARK = ["because", "while", "if", "when"]
NUM = ["two", "three", "four", "five"]

UPOS = {}
for words, tag in [
    (DET, "DET"), (ADJ, "ADJ"), (NOUN, "NOUN"), (PROPN, "PROPN"), (PRON, "PRON"),
    (VERB_TRANS + VERB_INTRANS, "VERB"), (ADV, "ADV"), (PREP, "ADP"),
    (AUX, "AUX"), (MARK, "SCONJ"), (NUM, "NUM"),
    (["and", "or"], "CCONJ"), (["is", "was"], "AUX"), (["'s"], "PART"),
    ([".", "!", "?", ","], "PUNCT"),
]:
    for word in words:
        UPOS[word] = tag

HEAD = -1     # this token is the phrase head
PENDING = -2  # attach to the phrase head once it is known


class Phrase:
    """Ordered tokens with phrase-local head links."""

    def __init__(self):
        self.forms: list[str] = []
        self.rels: list[str] = []
        self.heads: list[int] = []
        self.head_idx = 0

    def add(self, form: str, rel: str, head: int = PENDING) -> int:
        self.forms.append(form)
        self.rels.append(rel)
        self.heads.append(head)
        return len(self.forms) - 1

    def absorb(self, other: "Phrase", rel: str, attach_to: int) -> int:
        """Append a finished phrase, attaching its head token here."""
        offset = len(self.forms)
        for form, r, h in zip(other.forms, other.rels, other.heads):
            self.forms.append(form)
            self.rels.append(r)
            self.heads.append(attach_to if h == HEAD else h + offset)
        head = offset + other.head_idx
        self.rels[head] = rel
        return head

    def finish(self, head_idx: int) -> "Phrase":
        """Declare the phrase head and resolve pending attachments."""
        self.head_idx = head_idx
        self.heads[head_idx] = HEAD
        for i, h in enumerate(self.heads):
            if h == PENDING:
                self.heads[i] = head_idx
        return self


def pick(rng, items):
    return items[int(rng.integers(0, len(items)))]


def make_np(rng, depth=0) -> Phrase:
    phrase = Phrase()
    kind = rng.random()
    if kind < 0.12:
        head = phrase.add(pick(rng, PRON), "_")
    elif kind < 0.30:
        owner = pick(rng, PROPN)
        if rng.random() < 0.5:
            possessor = phrase.add(owner, "nmod:poss")
            phrase.add("'s", "case", head=possessor)
            head = phrase.add(pick(rng, NOUN), "_")
        else:
            head = phrase.add(owner, "_")
    else:
        if rng.random() < 0.85:
            phrase.add(pick(rng, DET), "det")
        if rng.random() < 0.18:
            phrase.add(pick(rng, NUM), "nummod")
        if rng.random() < 0.5:
            for _ in range(int(rng.integers(1, 3))):
                phrase.add(pick(rng, ADJ), "amod")
        if rng.random() < 0.15:
            phrase.add(pick(rng, NOUN), "compound")
        head = phrase.add(pick(rng, NOUN), "_")
    phrase.finish(head)
    if depth < 1 and rng.random() < 0.25:
        phrase.absorb(make_pp(rng, depth + 1), "nmod", head)
    return phrase


def make_pp(rng, depth=0) -> Phrase:
    phrase = Phrase()
    prep = phrase.add(pick(rng, PREP), "case")
    head = phrase.absorb(make_np(rng, depth + 1), "_", attach_to=prep)
    phrase.heads[prep] = head
    return phrase.finish(head)


def make_conjunct(rng, depth) -> Phrase:
    phrase = Phrase()
    cc = phrase.add(pick(rng, ["and", "or"]), "cc")
    head = phrase.absorb(make_np(rng, depth), "_", attach_to=cc)
    phrase.heads[cc] = head
    return phrase.finish(head)


def make_subclause(rng, depth) -> Phrase:
    phrase = Phrase()
    mark = phrase.add(pick(rng, MARK), "mark")
    head = phrase.absorb(make_clause(rng, depth), "_", attach_to=mark)
    phrase.heads[mark] = head
    return phrase.finish(head)


def make_clause(rng, depth=0) -> Phrase:
    phrase = Phrase()
    subject = phrase.absorb(make_np(rng, depth), "nsubj", attach_to=PENDING)
    if rng.random() < 0.18:  # copular clause
        phrase.add(pick(rng, ["is", "was"]), "cop")
        if rng.random() < 0.5:
            predicate = phrase.add(pick(rng, ADJ), "_")
        else:
            predicate = phrase.absorb(make_np(rng, depth + 1), "_", attach_to=PENDING)
        phrase.heads[subject] = PENDING
        return phrase.finish(predicate)
    if rng.random() < 0.25:
        phrase.add(pick(rng, AUX), "aux")
    if rng.random() < 0.2:
        phrase.add(pick(rng, ADV), "advmod")
    transitive = rng.random() < 0.7
    verb = phrase.add(pick(rng, VERB_TRANS if transitive else VERB_INTRANS), "_")
    phrase.heads[subject] = PENDING
    if transitive:
        obj_head = phrase.absorb(make_np(rng, depth + 1), "obj", attach_to=verb)
        if rng.random() < 0.2:
            phrase.absorb(make_conjunct(rng, depth + 1), "conj", attach_to=obj_head)
    if rng.random() < 0.35:
        phrase.absorb(make_pp(rng, depth + 1), "obl", attach_to=verb)
    if rng.random() < 0.2:
        phrase.add(pick(rng, ADV), "advmod", head=verb)
    if depth == 0 and rng.random() < 0.18:
        phrase.absorb(make_subclause(rng, depth + 1), "advcl", attach_to=verb)
    return phrase.finish(verb)


def make_sentence(rng) -> Phrase:
    phrase = make_clause(rng)
    root = phrase.head_idx
    phrase.rels[root] = "root"
    phrase.add(pick(rng, [".", ".", ".", "!", "?"]), "punct", head=root)
    return phrase


def to_conllu(sentences) -> str:
    lines = []
    for ordinal, phrase in enumerate(sentences, start=1):
        text = " ".join(phrase.forms).replace(" 's", "'s")
        lines.append(f"# sent_id = stub-{ordinal:04d}")
        lines.append(f"# text = {text}")
        for i, form in enumerate(phrase.forms):
            head = 0 if phrase.heads[i] == HEAD else phrase.heads[i] + 1
            lines.append(
                "\t".join(
                    (
                        str(i + 1), form, form.lower(), UPOS.get(form, "X"), "_", "_",
                        str(head), phrase.rels[i], "_", "_",
                    )
                )
            )
        lines.append("")
    return "\n".join(lines) + "\n"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sentences", type=int, default=400)
    parser.add_argument("--seed", type=int, default=20240)
    parser.add_argument(
        "--out", default=str(Path(__file__).resolve().parent.parent
                             / "tests" / "data" / "stub_ewt_test.conllu")
    )
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    sentences = [make_sentence(rng) for _ in range(args.sentences)]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(to_conllu(sentences))
    n_tokens = sum(len(s.forms) for s in sentences)
    relations = {rel for s in sentences for rel in s.rels}
    print(f"wrote {out}: {len(sentences)} sentences, {n_tokens} tokens, "
          f"{len(relations)} relation types")


if __name__ == "__main__":
    main()
