"""Byte-level BPE tokenizers that can absorb new vocabulary without renumbering old tokens."""

__version__ = "0.1.0"

from .core import (
    DEFAULT_SPECIALS,
    ByteUnicodeMap,
    MergeRule,
    SpecialTokens,
    Tokenizer,
    build_byte_map,
    decode,
    encode,
    pre_tokenize,
    validate,
)
from .corpus import PackedChunk, SentenceSplit, pack_document, pack_sequences, split_sentences
from .embeddings import extend_embeddings, load_embeddings, save_embeddings
from .evolve import DiffReport, MergeOutcome, build_diff_report, merge_tokenizers, vocab_diff
from .pppl import PPPLReport, UniformScorer, UnigramScorer, early_stop_check, pppl, pseudo_log_likelihood
from .serialization import load, save
from .trainer import TrainConfig, count_pairs, count_words, train

__all__ = [
    "DEFAULT_SPECIALS", "ByteUnicodeMap", "MergeRule", "SpecialTokens", "Tokenizer",
    "build_byte_map", "decode", "encode", "pre_tokenize", "validate",
    "PackedChunk", "SentenceSplit", "pack_document", "pack_sequences", "split_sentences",
    "extend_embeddings", "load_embeddings", "save_embeddings",
    "DiffReport", "MergeOutcome", "build_diff_report", "merge_tokenizers", "vocab_diff",
    "PPPLReport", "UniformScorer", "UnigramScorer", "early_stop_check", "pppl", "pseudo_log_likelihood",
    "load", "save",
    "TrainConfig", "count_pairs", "count_words", "train",
]
