"""Injection of early-modern print glyphs into token forms.

Three rewrite rules are applied to each form, in this order, each
character being rewritten at most once:

* ``ss`` becomes ``ß``;
* a remaining ``s`` followed by a letter (i.e. not word-final) becomes ``ſ``;
* ``o``, ``a``, ``u`` or ``i`` followed by ``n``/``m`` and then by a
  consonant or the end of the word collapses with the nasal into the
  tilded vowel (``bonté`` -> ``bõté``).

Every eligible site fires independently with the rule's probability. The
random draw for a site is a hash of (seed, rule, doc id, sentence id, token
index, site index), so the output does not depend on processing order.
"""

from __future__ import annotations

import hashlib
import struct
import unicodedata
from dataclasses import dataclass

from .corpus import AnnotatedToken, Corpus, Document, Sentence

LONG_S = "ſ"
ESZETT = "ß"
TILDED = {"o": "õ", "a": "ã", "u": "ũ", "i": "ĩ"}
_VOWELS = frozenset("aeiouy")


@dataclass(frozen=True)
class AugmentConfig:
    p_long_s: float = 0.02
    p_eszett: float = 0.01
    p_tilde: float = 0.01
    seed: int = 0

    def __post_init__(self):
        for name in ("p_long_s", "p_eszett", "p_tilde"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


def site_uniform(seed: int, rule: str, doc_id: str, sent_id: str, token: int, site: int) -> float:
    """Deterministic draw in [0, 1) for one augmentation site."""
    key = "\x1f".join((str(seed), rule, doc_id, sent_id, str(token), str(site)))
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return struct.unpack(">Q", digest)[0] / 2.0**64


def _is_consonant(ch: str) -> bool:
    base = unicodedata.normalize("NFD", ch)[0].lower()
    return ch.isalpha() and base not in _VOWELS


def eligible_sites(form: str) -> dict[str, list[int]]:
    """Candidate positions for each rule, computed on the original form.

    ``eszett`` sites are the start indices of non-overlapping ``ss`` pairs,
    ``long_s`` sites are indices of non-final ``s`` and ``tilde`` sites are
    vowel indices. R1 sites include the letters of ``ss`` pairs; they are
    skipped at application time when R2 has fired on the pair.
    """
    eszett, long_s, tilde = [], [], []
    n = len(form)
    i = 0
    while i < n - 1:
        if form[i] == "s" and form[i + 1] == "s":
            eszett.append(i)
            i += 2
        else:
            i += 1
    for i, ch in enumerate(form):
        if ch == "s" and i + 1 < n and form[i + 1].isalpha():
            long_s.append(i)
        elif ch in TILDED and i + 1 < n and form[i + 1] in "nm":
            if i + 2 == n or _is_consonant(form[i + 2]):
                tilde.append(i)
    return {"eszett": eszett, "long_s": long_s, "tilde": tilde}


def augment_form(form: str, config: AugmentConfig, key: tuple[str, str, int]) -> str:
    doc_id, sent_id, tok_idx = key
    sites = eligible_sites(form)
    if not any(sites.values()):
        return form
    # position -> replacement; None marks a character that is deleted
    edits: dict[int, str | None] = {}

    def fires(rule, site, p):
        return p > 0.0 and site_uniform(config.seed, rule, doc_id, sent_id, tok_idx, site) < p

    for j, i in enumerate(sites["eszett"]):
        if fires("eszett", j, config.p_eszett):
            edits[i] = ESZETT
            edits[i + 1] = None
    for j, i in enumerate(sites["long_s"]):
        if i not in edits and fires("long_s", j, config.p_long_s):
            edits[i] = LONG_S
    for j, i in enumerate(sites["tilde"]):
        if fires("tilde", j, config.p_tilde):
            edits[i] = TILDED[form[i]]
            edits[i + 1] = None
    if not edits:
        return form
    out = []
    for i, ch in enumerate(form):
        rep = edits.get(i, ch)
        if rep is not None:
            out.append(rep)
    return "".join(out)


def augment(corpus: Corpus, config: AugmentConfig) -> Corpus:
    """Rewrite token forms with historical glyphs; annotations are left untouched."""
    docs = []
    for doc in corpus.documents:
        sents = []
        for sent in doc.sentences:
            toks = []
            for k, tok in enumerate(sent.tokens):
                new = augment_form(tok.form, config, (doc.doc_id, sent.id, k))
                toks.append(tok if new == tok.form else
                            AnnotatedToken(new, tok.lemma, tok.pos, tok.morph))
            sents.append(Sentence(sent.id, tuple(toks)))
        docs.append(Document(doc.doc_id, tuple(sents), doc.century, doc.genre))
    return Corpus(tuple(docs))
