import json

import pytest
import torch
from transformers import (
    BertConfig,
    BertModel,
    BertTokenizerFast,
    CLIPTextConfig,
    CLIPTextModel,
    CLIPTokenizerFast,
    FlavaTextConfig,
    FlavaTextModel,
)

from synprobe.treebank import ROOT, GoldTree, Token, write_conllu

WORDPIECE_VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "cat", "sat", "on", "mat", "un", "##believ", "##able",
    "hello", "world", "!", "a", "dog", "ran",
]


def chain_treebank(sentences: list[list[str]]) -> str:
    """CoNLL-U text where each sentence is a head-initial chain."""
    trees = []
    for forms in sentences:
        tokens = tuple(
            Token(index=i + 1, form=form, head=ROOT if i == 0 else i - 1,
                  relation="root" if i == 0 else "dep")
            for i, form in enumerate(forms)
        )
        trees.append(GoldTree(tokens, 0))
    return write_conllu(trees)


@pytest.fixture(scope="session")
def bert_checkpoint(tmp_path_factory):
    """A tiny randomly initialized wordpiece encoder saved to disk."""
    directory = tmp_path_factory.mktemp("tiny-bert")
    vocab_file = directory / "vocab.txt"
    vocab_file.write_text("\n".join(WORDPIECE_VOCAB) + "\n")
    tokenizer = BertTokenizerFast(str(vocab_file))
    tokenizer.model_max_length = 24
    config = BertConfig(
        vocab_size=len(WORDPIECE_VOCAB), hidden_size=16, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=32, max_position_embeddings=24,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return directory


@pytest.fixture(scope="session")
def clip_checkpoint(tmp_path_factory):
    """A tiny character-level CLIP text tower (no merges: words split to chars)."""
    directory = tmp_path_factory.mktemp("tiny-clip")
    chars = list("abcdefghijklmnopqrstuvwxyz!.")
    vocab = {"<|startoftext|>": 0, "<|endoftext|>": 1}
    for char in chars:
        vocab[char] = len(vocab)
    for char in chars:
        vocab[char + "</w>"] = len(vocab)
    (directory / "vocab.json").write_text(json.dumps(vocab))
    (directory / "merges.txt").write_text("#version: 0.2\n")
    tokenizer = CLIPTokenizerFast(
        vocab_file=str(directory / "vocab.json"),
        merges_file=str(directory / "merges.txt"),
    )
    tokenizer.model_max_length = 20
    config = CLIPTextConfig(
        vocab_size=len(vocab), hidden_size=16, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=32, max_position_embeddings=20,
        bos_token_id=0, eos_token_id=1,
    )
    torch.manual_seed(1)
    model = CLIPTextModel(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return directory


@pytest.fixture(scope="session")
def flava_checkpoint(tmp_path_factory):
    """A tiny FLAVA text tower sharing the wordpiece tokenizer."""
    directory = tmp_path_factory.mktemp("tiny-flava")
    vocab_file = directory / "vocab.txt"
    vocab_file.write_text("\n".join(WORDPIECE_VOCAB) + "\n")
    tokenizer = BertTokenizerFast(str(vocab_file))
    tokenizer.model_max_length = 24
    config = FlavaTextConfig(
        vocab_size=len(WORDPIECE_VOCAB), hidden_size=16, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=32, max_position_embeddings=24,
    )
    torch.manual_seed(2)
    model = FlavaTextModel(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return directory
