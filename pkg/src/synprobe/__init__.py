"""Linear probing of frozen text-encoder layers for dependency syntax."""

from .decoder import PredictedTree, decode_corpus, decode_tree, select_root
from .embstore import (
    AlignmentReport,
    EmbeddingHeader,
    align_check,
    load_store,
    read_store,
    save_store,
    write_store,
)
from .metrics import EvalReport, RelationScore, score_corpus, score_sentence
from .probe import (
    ProbeParams,
    TrainConfig,
    TrainRecord,
    gradients,
    label_logprobs,
    load_probe,
    pairwise_distances,
    save_probe,
    structural_loss,
    subspace_distance,
    train,
)
from .treebank import (
    ROOT,
    GoldTree,
    LabelVocabulary,
    Token,
    build_vocabulary,
    filter_corpus,
    load_conllu,
    parse_conllu,
    tree_distances,
    write_conllu,
)

__version__ = "0.1.0"

__all__ = [
    "ROOT",
    "AlignmentReport",
    "EmbeddingHeader",
    "EvalReport",
    "GoldTree",
    "LabelVocabulary",
    "PredictedTree",
    "ProbeParams",
    "RelationScore",
    "Token",
    "TrainConfig",
    "TrainRecord",
    "align_check",
    "build_vocabulary",
    "decode_corpus",
    "decode_tree",
    "filter_corpus",
    "gradients",
    "label_logprobs",
    "load_conllu",
    "load_probe",
    "load_store",
    "pairwise_distances",
    "parse_conllu",
    "read_store",
    "save_probe",
    "save_store",
    "score_corpus",
    "score_sentence",
    "select_root",
    "structural_loss",
    "subspace_distance",
    "train",
    "tree_distances",
    "write_conllu",
    "write_store",
]
