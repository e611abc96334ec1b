"""Corpus annotation and evaluation tools for pre-orthographic French."""

__version__ = "0.1.0"

from .corpus import (AnnotatedToken, Corpus, Document, Sentence, Tagset, charset_inventory,
                     nfkd_normalize, read_tsv, write_tsv)
from .tokenizer import TokenizerConfig, tokenize, tokenize_corpus

__all__ = [
    "AnnotatedToken", "Corpus", "Document", "Sentence", "Tagset", "TokenizerConfig",
    "charset_inventory", "nfkd_normalize", "read_tsv", "tokenize", "tokenize_corpus",
    "write_tsv",
]
