"""Time series as a foreign language: codec, corpora, backends, evaluation."""

__version__ = "0.1.0"

from .codec import (
    BinGrid,
    BinWord,
    ForeignWordSeq,
    NanWord,
    ScalingParams,
    SeriesWindow,
    count_tokens,
    decode,
    encode,
    parse_words,
)
from .vocabulary import Vocabulary, build_vocabulary, load_vocabulary, save_vocabulary

__all__ = [
    "BinGrid", "BinWord", "ForeignWordSeq", "NanWord", "ScalingParams",
    "SeriesWindow", "count_tokens", "decode", "encode", "parse_words",
    "Vocabulary", "build_vocabulary", "load_vocabulary", "save_vocabulary",
    "__version__",
]
