import numpy as np
import pytest

from synprobe.treebank import ROOT, GoldTree, Token


def make_tree(heads, labels=None, forms=None) -> GoldTree:
    """Build a GoldTree from 0-based heads (ROOT marks the root)."""
    n = len(heads)
    labels = labels or ["root" if h == ROOT else "dep" for h in heads]
    forms = forms or [f"w{i}" for i in range(n)]
    tokens = tuple(
        Token(index=i + 1, form=forms[i], head=heads[i], relation=labels[i])
        for i in range(n)
    )
    return GoldTree.from_tokens(tokens)


def random_heads(rng: np.random.Generator, n: int) -> list[int]:
    """Heads of a uniformly grown random attachment tree."""
    order = rng.permutation(n)
    heads = [0] * n
    heads[order[0]] = ROOT
    for k in range(1, n):
        heads[order[k]] = int(order[rng.integers(0, k)])
    return heads


FIVE_TOKEN_FORMS = ["I", "love", "Air", "France", "!"]
FIVE_TOKEN_HEADS = [1, ROOT, 3, 1, 1]
FIVE_TOKEN_GOLD_LABELS = ["nsubj", "root", "compound", "obj", "punct"]
FIVE_TOKEN_PRED_LABELS = ["nsubj", "root", "compound", "compound", "punct"]

FIVE_TOKEN_CONLLU = (
    "# text = I love Air France !\n"
    "1\tI\t_\t_\t_\t_\t2\tnsubj\t_\t_\n"
    "2\tlove\t_\t_\t_\t_\t0\troot\t_\t_\n"
    "3\tAir\t_\t_\t_\t_\t4\tcompound\t_\t_\n"
    "4\tFrance\t_\t_\t_\t_\t2\tobj\t_\t_\n"
    "5\t!\t_\t_\t_\t_\t2\tpunct\t_\t_\n"
)


@pytest.fixture
def five_token_gold() -> GoldTree:
    return make_tree(FIVE_TOKEN_HEADS, FIVE_TOKEN_GOLD_LABELS, FIVE_TOKEN_FORMS)
