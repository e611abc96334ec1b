"""Maximalist tokenizer.

Blank space is the separator, punctuation (always including the hyphen)
becomes a token of its own, and welded words are left whole: nothing is ever
merged into a multi-word unit. ``peut-être`` gives ``peut``, ``-``, ``être``
and ``tandis que`` gives ``tandis``, ``que``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import AnnotatedToken, Corpus, DEFAULT_DOC_ID

DEFAULT_PUNCTUATION = frozenset(".,;:!?()«»\"'-")
DEFAULT_ELISION = frozenset("'’")
SENTENCE_FINAL = frozenset(".!?")
# closing marks that stay with the sentence they close
_CLOSERS = frozenset(")»\"”’")


@dataclass(frozen=True)
class TokenizerConfig:
    punctuation_set: frozenset[str] = DEFAULT_PUNCTUATION
    elision_markers: frozenset[str] = DEFAULT_ELISION
    split_elision: bool = True

    def __post_init__(self):
        # the hyphen is a token in its own right, whatever the caller asks
        object.__setattr__(self, "punctuation_set", frozenset(self.punctuation_set) | {"-"})
        object.__setattr__(self, "elision_markers", frozenset(self.elision_markers))
        for ch in self.punctuation_set | self.elision_markers:
            if len(ch) != 1 or ch.isspace():
                raise ValueError(f"invalid tokenizer character {ch!r}")


DEFAULT_CONFIG = TokenizerConfig()


def tokenize_spans(text: str, config: TokenizerConfig = DEFAULT_CONFIG) -> list[tuple[int, int]]:
    """Return ``(start, end)`` offsets of every token in *text*.

    ``text[start:end]`` is the token form and everything between two spans
    is whitespace.
    """
    spans: list[tuple[int, int]] = []
    punct = config.punctuation_set
    elision = config.elision_markers
    n = len(text)
    start = None  # start of the word being accumulated
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                spans.append((start, i))
                start = None
        elif ch in elision and start is not None and i + 1 < n and text[i + 1].isalpha():
            # word-internal apostrophe: l'homme
            if config.split_elision:
                spans.append((start, i + 1))
                start = None
        elif ch in punct:
            if start is not None:
                spans.append((start, i))
                start = None
            spans.append((i, i + 1))
        elif start is None:
            start = i
    if start is not None:
        spans.append((start, n))
    return spans


def tokenize(text: str, config: TokenizerConfig = DEFAULT_CONFIG) -> list[str]:
    return [text[s:e] for s, e in tokenize_spans(text, config)]


def split_sentences(forms: list[str]) -> list[list[str]]:
    """Cut a token sequence after sentence-final punctuation."""
    sentences: list[list[str]] = []
    current: list[str] = []
    closing = False
    for form in forms:
        if closing and form not in _CLOSERS and form not in SENTENCE_FINAL:
            sentences.append(current)
            current = []
            closing = False
        current.append(form)
        if form in SENTENCE_FINAL:
            closing = True
    if current:
        sentences.append(current)
    return sentences


def tokenize_corpus(text: str, config: TokenizerConfig = DEFAULT_CONFIG,
                    doc_id: str = DEFAULT_DOC_ID) -> Corpus:
    """Tokenize raw text into an unannotated single-document corpus.

    Each input line is segmented on its own; within a line, sentences end
    after ``.``, ``!`` or ``?`` (plus any closing bracket or quote).
    """
    sentences = []
    for line in text.splitlines():
        for forms in split_sentences(tokenize(line, config)):
            sentences.append([AnnotatedToken(f) for f in forms])
    return Corpus.from_sentences(sentences, doc_id=doc_id) if sentences else Corpus()
