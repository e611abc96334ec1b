"""Trainable POS tagger and lemmatizer.

Two model kinds share one interface:

``majority``
    every known form gets its most frequent training analysis
    (lemma, POS, morph); unknown forms get the globally most frequent tag.
``context``
    POS comes from a greedy left-to-right averaged perceptron over form,
    affix and neighbour features; lemma and morph come from the training
    analyses of the form under the predicted tag.

Unknown forms are lemmatized with suffix-exchange rules induced from the
training pairs (``comtesses`` -> ``comte`` teaches ``-sses`` -> ``-``),
falling back to the form itself. Ties are broken by count, then by the
lexicographically smallest candidate.
"""

from __future__ import annotations

import json
import random
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import EMPTY_MORPH, AnnotatedToken, Corpus, Document, Sentence

MODEL_FORMAT = "premodtag-model"
MODEL_VERSION = 1
KINDS = ("majority", "context")
EPOCHS = 5
MAX_AFFIX = 4
RULE_CONTEXT = 2  # stem characters kept in a suffix rule key beyond the stripped part

_BOS, _EOS = "<s>", "</s>"

Analysis = tuple[str, str, str]


class TrainingError(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


def _best(counts: dict):
    """Highest count, then smallest candidate."""
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


# ---------------------------------------------------------------------------
# averaged perceptron


def features(forms: list[str], i: int, prev_tag: str) -> list[str]:
    form = forms[i]
    low = form.lower()
    feats = ["bias", "w=" + form, "lw=" + low, "-1t=" + prev_tag,
             "-1w=" + (forms[i - 1] if i > 0 else _BOS),
             "+1w=" + (forms[i + 1] if i + 1 < len(forms) else _EOS)]
    for k in range(1, min(MAX_AFFIX, len(low)) + 1):
        feats.append(f"p{k}=" + low[:k])
        feats.append(f"s{k}=" + low[-k:])
    return feats


class AveragedPerceptron:
    def __init__(self, classes):
        self.classes = sorted(classes)
        self.weights: dict[str, dict[str, float]] = {}
        self._totals: dict[tuple[str, str], float] = defaultdict(float)
        self._stamps: dict[tuple[str, str], int] = defaultdict(int)
        self.steps = 0

    def predict(self, feats: list[str]) -> str:
        return predict(self.weights, self.classes, feats)

    def update(self, truth: str, guess: str, feats: list[str]) -> None:
        self.steps += 1
        if truth == guess:
            return
        for f in feats:
            w = self.weights.setdefault(f, {})
            for tag, delta in ((truth, 1.0), (guess, -1.0)):
                param = (f, tag)
                old = w.get(tag, 0.0)
                self._totals[param] += (self.steps - self._stamps[param]) * old
                self._stamps[param] = self.steps
                w[tag] = old + delta

    def averaged(self) -> dict[str, dict[str, float]]:
        out = {}
        for f, w in self.weights.items():
            avg = {}
            for tag, value in w.items():
                param = (f, tag)
                total = self._totals[param] + (self.steps - self._stamps[param]) * value
                mean = total / self.steps
                if mean:
                    avg[tag] = mean
            if avg:
                out[f] = avg
        return out


def predict(weights: dict[str, dict[str, float]], classes: list[str], feats: list[str]) -> str:
    scores: dict[str, float] = dict.fromkeys(classes, 0.0)
    for f in feats:
        w = weights.get(f)
        if w:
            for tag, value in w.items():
                scores[tag] += value
    # classes is sorted, so the first maximum is the smallest tag
    best, best_score = classes[0], scores[classes[0]]
    for tag in classes[1:]:
        if scores[tag] > best_score:
            best, best_score = tag, scores[tag]
    return best


# ---------------------------------------------------------------------------
# suffix rules


def suffix_exchange(form: str, lemma: str) -> tuple[int, str, str]:
    """Split *form*/*lemma* at their longest common prefix.

    Returns ``(prefix length, stripped form suffix, appended lemma suffix)``.
    """
    n = 0
    for a, b in zip(form, lemma):
        if a != b:
            break
        n += 1
    return n, form[n:], lemma[n:]


Rules = dict[tuple[str, str], dict[tuple[str, str, bool], int]]


def induce_suffix_rules(pairs) -> Rules:
    """Count suffix-exchange rules from ``(form, lemma, pos)`` triples.

    An exchange ``(strip, append, lower)`` is learned on the lowercased form
    when the lemma is lowercase (``lower`` is then True), on the form as is
    otherwise. It is counted under keys made of the stripped suffix plus 0
    to ``RULE_CONTEXT`` preceding stem characters; keys are never empty, so
    every rule looks at the end of the word. Pairs sharing no prefix with
    their lemma (suppletive forms) teach nothing transferable and are
    skipped.
    """
    rules: Rules = defaultdict(dict)
    for form, lemma, pos in pairs:
        lower = lemma == lemma.lower()
        surface = form.lower() if lower else form
        n, strip, append = suffix_exchange(surface, lemma)
        if n == 0:
            continue
        for extra in range(min(RULE_CONTEXT, n - 1) + 1):
            suffix = surface[n - extra:]
            if not suffix:
                continue
            rule = rules[(pos, suffix)]
            exchange = (strip, append, lower)
            rule[exchange] = rule.get(exchange, 0) + 1
    return dict(rules)


def apply_suffix_rules(rules: Rules, form: str, pos: str) -> str:
    """Lemmatize *form* with the longest matching rule for *pos*.

    Lowercasing rules are matched against the lowercased form, the others
    against the form itself; the longest matching suffix wins, then the
    most frequent exchange. No match (or an empty result) returns
    *form*.
    """
    low = form.lower()
    for k in range(len(form), 0, -1):
        votes: dict[tuple[str, str, bool], int] = {}
        for surface, lower in ((form, False), (low, True)):
            for exchange, count in rules.get((pos, surface[-k:]), {}).items():
                if exchange[2] == lower or form == low:
                    votes[exchange] = votes.get(exchange, 0) + count
        if votes:
            strip, append, lower = _best(votes)
            surface = low if lower else form
            lemma = surface[:len(surface) - len(strip)] + append
            if lemma:
                return lemma
    return form


# ---------------------------------------------------------------------------
# model


@dataclass
class TaggerModel:
    kind: str
    form_table: dict[str, dict[Analysis, int]]
    suffix_rules: Rules
    pos_weights: dict[str, dict[str, float]] = field(default_factory=dict)
    tags: list[str] = field(default_factory=list)
    default_tag: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        self.known_forms = frozenset(self.form_table)
        self.known_lemmas = frozenset(a[0] for entry in self.form_table.values() for a in entry)
        self.ambiguous_forms = frozenset(
            f for f, entry in self.form_table.items() if len({a[0] for a in entry}) > 1)
        self.pos_ambiguous_forms = frozenset(
            f for f, entry in self.form_table.items() if len({a[1] for a in entry}) > 1)
        self._majority = {f: _best(entry) for f, entry in self.form_table.items()}
        by_pos: dict[tuple[str, str], dict[Analysis, int]] = defaultdict(dict)
        for f, entry in self.form_table.items():
            for a, c in entry.items():
                by_pos[(f, a[1])][a] = c
        self._by_pos = {k: _best(v) for k, v in by_pos.items()}

    def majority_analysis(self, form: str) -> Analysis | None:
        return self._majority.get(form)

    def ambiguous_for(self, task: str) -> frozenset[str]:
        return self.ambiguous_forms if task == "lemma" else self.pos_ambiguous_forms

    def _annotate(self, form: str, pos: str | None) -> AnnotatedToken:
        if pos is None:
            known = self._majority.get(form)
            if known is not None:
                return AnnotatedToken(form, *known)
            pos = self.default_tag
        else:
            known = self._by_pos.get((form, pos))
            if known is not None:
                return AnnotatedToken(form, *known)
            if form in self._majority:
                return AnnotatedToken(form, self._majority[form][0], pos, EMPTY_MORPH)
        return AnnotatedToken(form, apply_suffix_rules(self.suffix_rules, form, pos), pos, EMPTY_MORPH)

    def tag_forms(self, forms: list[str]) -> list[AnnotatedToken]:
        if self.kind == "majority":
            return [self._annotate(f, None) for f in forms]
        out = []
        prev = _BOS
        for i, form in enumerate(forms):
            prev = predict(self.pos_weights, self.tags, features(forms, i, prev))
            out.append(self._annotate(form, prev))
        return out

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        data = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": self.kind,
            "default_tag": self.default_tag,
            "tags": self.tags,
            "form_table": sorted([f, *a, c] for f, entry in self.form_table.items()
                                 for a, c in entry.items()),
            "suffix_rules": sorted([pos, suf, strip, app, lower, c]
                                   for (pos, suf), rule in self.suffix_rules.items()
                                   for (strip, app, lower), c in rule.items()),
            "pos_weights": self.pos_weights,
        }
        return json.dumps(data, ensure_ascii=False, sort_keys=True, indent=0) + "\n"

    @classmethod
    def from_json(cls, text: str) -> TaggerModel:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ModelFormatError(f"model file is not JSON: {e}") from None
        if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
            raise ModelFormatError("not a premodtag model file")
        if data.get("version") != MODEL_VERSION:
            raise ModelFormatError(f"unsupported model version {data.get('version')!r}")
        form_table: dict[str, dict[Analysis, int]] = defaultdict(dict)
        for form, lemma, pos, morph, count in data["form_table"]:
            form_table[form][(lemma, pos, morph)] = count
        rules: dict = defaultdict(dict)
        for pos, suf, strip, app, lower, count in data["suffix_rules"]:
            rules[(pos, suf)][(strip, app, bool(lower))] = count
        return cls(data["kind"], dict(form_table), dict(rules), data["pos_weights"],
                   data["tags"], data["default_tag"])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> TaggerModel:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def train(corpus: Corpus, kind: str = "majority", seed: int = 0, epochs: int = EPOCHS) -> TaggerModel:
    if kind not in KINDS:
        raise TrainingError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    if corpus.n_tokens == 0:
        raise TrainingError("cannot train on an empty corpus")
    missing = [(doc.doc_id, sent.id, i)
               for doc, sent in corpus.sentences()
               for i, tok in enumerate(sent.tokens, start=1) if not tok.is_annotated]
    if missing:
        shown = ", ".join(f"{d}/{s}/{i}" for d, s, i in missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise TrainingError(f"{len(missing)} unannotated tokens: {shown}{more}")

    form_table: dict[str, dict[Analysis, int]] = defaultdict(dict)
    tag_counts: Counter = Counter()
    for tok in corpus.tokens():
        entry = form_table[tok.form]
        entry[tok.analysis] = entry.get(tok.analysis, 0) + 1
        tag_counts[tok.pos] += 1
    rules = induce_suffix_rules((t.form, t.lemma, t.pos) for t in corpus.tokens())
    tags = sorted(tag_counts)
    default_tag = _best(tag_counts)

    weights: dict[str, dict[str, float]] = {}
    if kind == "context":
        sentences = [s.tokens for _, s in corpus.sentences()]
        model = AveragedPerceptron(tags)
        rng = random.Random(seed)
        for _ in range(epochs):
            rng.shuffle(sentences)
            for toks in sentences:
                forms = [t.form for t in toks]
                prev = _BOS
                for i, tok in enumerate(toks):
                    feats = features(forms, i, prev)
                    guess = model.predict(feats)
                    model.update(tok.pos, guess, feats)
                    prev = guess
        weights = model.averaged()
    return TaggerModel(kind, dict(form_table), rules, weights, tags, default_tag)


def tag_sentence(model: TaggerModel, sentence: Sentence) -> Sentence:
    return Sentence(sentence.id, tuple(model.tag_forms(sentence.forms)))


_worker_model: TaggerModel | None = None


def _init_worker(model: TaggerModel) -> None:
    global _worker_model
    _worker_model = model


def _tag_document(doc: Document) -> Document:
    return _tag_document_with(_worker_model, doc)


def _tag_document_with(model: TaggerModel, doc: Document) -> Document:
    return Document(doc.doc_id, tuple(tag_sentence(model, s) for s in doc.sentences),
                    doc.century, doc.genre)


def tag(model: TaggerModel, corpus: Corpus, jobs: int = 1) -> Corpus:
    """Annotate every token of *corpus*, ignoring any annotation it carries.

    With ``jobs > 1`` documents are tagged in worker processes; the output
    is identical to the sequential one.
    """
    if jobs > 1 and len(corpus.documents) > 1:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(model,)) as pool:
            return Corpus(tuple(pool.map(_tag_document, corpus.documents)))
    return Corpus(tuple(_tag_document_with(model, doc) for doc in corpus.documents))
