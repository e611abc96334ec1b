"""Authority lists and annotation consistency checks.

A lemma is accepted when it appears in one of the three lists (lemmas,
named entities, foreign words), or when it is an underscore compound such as
``tres_obeissant`` whose every part appears in one of them. Matching is done
on NFKD-normalized, case-sensitive strings.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import UNKNOWN, Corpus, Tagset, _read_entries, nfkd


class LexiconError(ValueError):
    pass


def is_compound(lemma: str) -> bool:
    return lemma != UNKNOWN and "_" in lemma


@dataclass(frozen=True)
class Lexicon:
    lemmas: frozenset[str] = frozenset()
    named_entities: frozenset[str] = frozenset()
    foreign: frozenset[str] = frozenset()

    def __post_init__(self):
        for name in ("lemmas", "named_entities", "foreign"):
            entries = frozenset(nfkd(e) for e in getattr(self, name))
            for e in entries:
                if not e or any(c.isspace() for c in e):
                    raise LexiconError(f"invalid {name} entry {e!r}")
            object.__setattr__(self, name, entries)

    def __contains__(self, lemma: str) -> bool:
        lemma = nfkd(lemma)
        return lemma in self.lemmas or lemma in self.named_entities or lemma in self.foreign

    def failing_parts(self, lemma: str) -> list[str] | None:
        """Parts of *lemma* absent from the lists, or None if it is a valid simple lemma.

        A simple lemma that is not listed has itself as its only failing part.
        """
        if lemma in self:
            return None
        if is_compound(lemma):
            bad = [p for p in lemma.split("_") if p not in self]
            return bad or None
        return [lemma]

    def is_valid(self, lemma: str) -> bool:
        return self.failing_parts(lemma) is None

    def extend(self, lemmas=(), named_entities=(), foreign=()) -> Lexicon:
        return Lexicon(self.lemmas | set(lemmas), self.named_entities | set(named_entities),
                       self.foreign | set(foreign))


def _load_list(path: str | Path, what: str) -> frozenset[str]:
    text = Path(path).read_text(encoding="utf-8")
    entries = frozenset(_read_entries(text))
    if not entries:
        raise LexiconError(f"{what} list {path} has no entries")
    return entries


def load_lexicon(lemma_path, ne_path, foreign_path) -> Lexicon:
    return Lexicon(
        _load_list(lemma_path, "lemma"),
        _load_list(ne_path, "named-entity"),
        _load_list(foreign_path, "foreign-word"),
    )


@dataclass
class ValidationReport:
    unknown_lemmas: Counter = field(default_factory=Counter)
    invalid_compounds: list[tuple[str, str]] = field(default_factory=list)
    invalid_pos: list[tuple[tuple[str, str, int], str]] = field(default_factory=list)
    n_tokens: int = 0
    n_flagged: int = 0

    @property
    def coverage(self) -> float:
        if self.n_tokens == 0:
            return 1.0
        return 1.0 - self.n_flagged / self.n_tokens

    @property
    def n_findings(self) -> int:
        return self.n_flagged

    def rows(self):
        """Flat ``(kind, item, detail)`` rows for TSV output."""
        for lemma, count in sorted(self.unknown_lemmas.items()):
            yield "unknown_lemma", lemma, str(count)
        for lemma, part in self.invalid_compounds:
            yield "invalid_compound", lemma, part
        for (doc_id, sent_id, i), tag in self.invalid_pos:
            yield "invalid_pos", f"{doc_id}/{sent_id}/{i}", tag

    def summary(self) -> str:
        return (f"tokens: {self.n_tokens}\n"
                f"tokens with findings: {self.n_flagged}\n"
                f"coverage: {self.coverage:.4f}\n"
                f"unknown lemmas: {len(self.unknown_lemmas)} types, "
                f"{sum(self.unknown_lemmas.values())} tokens\n"
                f"invalid compound parts: {len(self.invalid_compounds)}\n"
                f"invalid POS tags: {len(self.invalid_pos)}")


def validate(corpus: Corpus, lexicon: Lexicon, tagset: Tagset) -> ValidationReport:
    report = ValidationReport()
    compounds: set[tuple[str, str]] = set()
    verdicts: dict[str, list[str] | None] = {}
    for doc, sent in corpus.sentences():
        for i, tok in enumerate(sent.tokens, start=1):
            report.n_tokens += 1
            flagged = False
            if tok.lemma not in verdicts:
                verdicts[tok.lemma] = lexicon.failing_parts(tok.lemma)
            bad = verdicts[tok.lemma]
            if bad is not None:
                flagged = True
                if is_compound(tok.lemma):
                    compounds.update((tok.lemma, p) for p in bad)
                else:
                    report.unknown_lemmas[tok.lemma] += 1
            if tok.pos not in tagset:
                flagged = True
                report.invalid_pos.append(((doc.doc_id, sent.id, i), tok.pos))
            report.n_flagged += flagged
    report.invalid_compounds = sorted(compounds)
    return report
