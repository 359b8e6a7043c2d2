"""Hidden-state extraction from pretrained text encoders into WEMB1 stores."""

from .encoders import ENCODER_KINDS, FetchError, ModelSpec, load_encoder
from .extract import ExtractionError, ExtractionResult, extract_corpus, extract_to_stores
from .pooling import AlignmentError, pool_words, word_spans

__version__ = "0.1.0"

__all__ = [
    "ENCODER_KINDS",
    "AlignmentError",
    "ExtractionError",
    "ExtractionResult",
    "FetchError",
    "ModelSpec",
    "extract_corpus",
    "extract_to_stores",
    "load_encoder",
    "pool_words",
    "word_spans",
]
