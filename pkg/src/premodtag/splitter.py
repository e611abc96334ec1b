"""Train/dev/test partitioning and out-of-domain sample extraction."""

from __future__ import annotations

import hashlib
import math
from collections import defaultdict
from dataclasses import dataclass, replace

from .corpus import Corpus, Document, Sentence


class SplitError(ValueError):
    pass


class SamplingError(ValueError):
    pass


@dataclass(frozen=True)
class SplitConfig:
    ratios: tuple[float, float, float] = (0.84, 0.06, 0.10)
    seed: int = 0
    unit: str = "sentence"

    def __post_init__(self):
        ratios = tuple(float(r) for r in self.ratios)
        if len(ratios) != 3 or any(r < 0 or not math.isfinite(r) for r in ratios):
            raise SplitError(f"ratios must be three non-negative numbers, got {self.ratios}")
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise SplitError(f"ratios must sum to 1, got {sum(ratios)!r}")
        if self.unit not in ("sentence", "document"):
            raise SplitError(f"unit must be 'sentence' or 'document', got {self.unit!r}")
        object.__setattr__(self, "ratios", ratios)


def _shuffle_key(seed: int, *parts: str) -> bytes:
    key = "\x1f".join((str(seed),) + parts)
    return hashlib.blake2b(key.encode("utf-8"), digest_size=16).digest()


def _assign(units: list[tuple[bytes, int]], ratios) -> list[int]:
    """Map each (sort_key, n_tokens) unit to a part index 0/1/2.

    Units are visited in key order; a unit goes to the part whose share of
    the cumulative token axis contains the unit's midpoint. The achieved
    share of each part therefore differs from its ratio by at most one
    unit's length divided by the total.
    """
    total = sum(n for _, n in units)
    bounds = (ratios[0], ratios[0] + ratios[1])
    order = sorted(range(len(units)), key=lambda i: units[i][0])
    parts = [0] * len(units)
    seen = 0
    for i in order:
        n = units[i][1]
        mid = (seen + n / 2) / total
        parts[i] = 0 if mid < bounds[0] else 1 if mid < bounds[1] else 2
        seen += n
    return parts


def split(corpus: Corpus, config: SplitConfig) -> tuple[Corpus, Corpus, Corpus]:
    """Partition *corpus* into (train, dev, test).

    Sentences (or whole documents) are never cut. Each output keeps the
    source document structure and order, minus the units sent elsewhere.
    """
    if corpus.n_tokens == 0:
        raise SplitError("cannot split an empty corpus")
    buckets: list[list[Document]] = [[], [], []]
    if config.unit == "document":
        docs = corpus.documents
        parts = _assign([(_shuffle_key(config.seed, d.doc_id), d.n_tokens) for d in docs],
                        config.ratios)
        for doc, p in zip(docs, parts):
            if doc.sentences:
                buckets[p].append(doc)
    else:
        pairs = list(corpus.sentences())
        parts = _assign([(_shuffle_key(config.seed, d.doc_id, s.id), len(s)) for d, s in pairs],
                        config.ratios)
        chosen: list[dict[str, list[Sentence]]] = [defaultdict(list) for _ in range(3)]
        for (doc, sent), p in zip(pairs, parts):
            chosen[p][doc.doc_id].append(sent)
        for p in range(3):
            for doc in corpus.documents:
                sents = chosen[p].get(doc.doc_id)
                if sents:
                    buckets[p].append(replace(doc, sentences=tuple(sents)))
    train, dev, test = (Corpus(tuple(b)) for b in buckets)
    return train, dev, test


def split_report(parts: tuple[Corpus, Corpus, Corpus]) -> dict:
    total = sum(p.n_tokens for p in parts)
    out = {}
    for name, part in zip(("train", "dev", "test"), parts):
        out[name] = {
            "sentences": part.n_sentences,
            "tokens": part.n_tokens,
            "share": part.n_tokens / total if total else 0.0,
        }
    return out


# ---------------------------------------------------------------------------
# out-of-domain samples


def _stratum(doc: Document, stratify: str):
    if stratify == "century":
        return (doc.century,) if doc.century is not None else None
    if stratify == "genre":
        return (doc.genre,) if doc.genre is not None else None
    if stratify == "both":
        if doc.century is None or doc.genre is None:
            return None
        return (doc.century, doc.genre)
    raise ValueError(f"stratify must be 'century', 'genre' or 'both', got {stratify!r}")


def _stratum_name(key) -> str:
    return "/".join(str(k) for k in key)


def _runs(docs: list[Document], sample_tokens: int):
    """Non-overlapping contiguous runs reaching *sample_tokens*, within documents.

    Returns ``(doc, index of first sentence, sentences)`` triples.
    """
    runs = []
    for doc in docs:
        current: list[Sentence] = []
        count = start = 0
        for i, sent in enumerate(doc.sentences):
            if not current:
                start = i
            current.append(sent)
            count += len(sent)
            if count >= sample_tokens:
                runs.append((doc, start, tuple(current)))
                current, count = [], 0
    return runs


def sample_ood(corpus: Corpus, n_samples: int, sample_tokens: int,
               stratify: str = "century", strata=None) -> Corpus:
    """Draw *n_samples* short contiguous samples, spread evenly across strata.

    *strata* optionally lists the stratum keys that must be covered (e.g.
    ``[(16,), (17,), (18,)]`` for centuries); by default every stratum
    present in the corpus is used. Samples are spaced evenly through each
    stratum's material, so the result depends only on corpus order.
    """
    if n_samples < 1 or sample_tokens < 1:
        raise SamplingError("n_samples and sample_tokens must be positive")
    groups: dict[tuple, list[Document]] = defaultdict(list)
    for doc in corpus.documents:
        key = _stratum(doc, stratify)
        if key is None:
            raise SamplingError(f"document {doc.doc_id!r} lacks {stratify} metadata")
        groups[key].append(doc)
    if strata is None:
        keys = sorted(groups, key=lambda k: tuple(str(x) for x in k))
    else:
        keys = [tuple(k) if isinstance(k, (tuple, list)) else (k,) for k in strata]
        for key in keys:
            if key not in groups:
                raise SamplingError(f"stratum {_stratum_name(key)} is absent from the corpus")
    if not keys:
        raise SamplingError("corpus has no documents to sample from")

    base, extra = divmod(n_samples, len(keys))
    out: list[Document] = []
    for rank, key in enumerate(keys):
        want = base + (1 if rank < extra else 0)
        if want == 0:
            continue
        runs = _runs(groups[key], sample_tokens)
        if len(runs) < want:
            raise SamplingError(
                f"stratum {_stratum_name(key)} yields {len(runs)} samples of "
                f"{sample_tokens} tokens, {want} requested")
        for j in range(want):
            doc, start, sents = runs[j * len(runs) // want]
            out.append(Document(f"{doc.doc_id}@{start + 1}", sents, doc.century, doc.genre))
    return Corpus(tuple(out))
