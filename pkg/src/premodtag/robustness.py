"""Robustness of a model to spelling variation.

For every pair of forms sharing lemma, POS and morphology (``afin`` /
``affin``), the test sentences containing either form under that lemma are
collected twice: once with every such occurrence rewritten to the first
variant, once to the second. Both copies therefore offer the two spellings
the same contexts and the same number of occurrences. The model tags both,
and the absolute difference between the accuracies on the rewritten tokens
(``delta``) measures its sensitivity to the spelling.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations

from .corpus import AnnotatedToken, Corpus, Sentence, nfkd
from .tagger import TaggerModel, tag

TASKS = ("lemma", "pos", "both")


class PairSkipped(Exception):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


@dataclass(frozen=True, order=True)
class VariantPair:
    form_a: str
    form_b: str
    lemma: str
    pos: str
    morph: str
    freq_a: int = 0
    freq_b: int = 0

    def __post_init__(self):
        if not self.form_a < self.form_b:
            raise ValueError(f"pair forms must be distinct and ordered: {self.form_a!r}, {self.form_b!r}")


@dataclass(frozen=True)
class PairResult:
    pair: VariantPair
    acc_a: float
    acc_b: float
    n_targets: int = 0

    @property
    def delta(self) -> float:
        return abs(self.acc_a - self.acc_b)

    @property
    def weight(self) -> int:
        return self.pair.freq_b


@dataclass
class RobustnessReport:
    per_pair: list[PairResult]
    median_delta: float
    geo_mean_delta: float
    weighted_geo_mean_delta: float
    arith_mean_delta: float
    weighted_arith_mean_delta: float
    skipped_pairs: list[tuple[VariantPair, str]] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "pairs_evaluated": len(self.per_pair),
            "pairs_skipped": len(self.skipped_pairs),
            "median_delta": self.median_delta,
            "geo_mean_delta": self.geo_mean_delta,
            "weighted_geo_mean_delta": self.weighted_geo_mean_delta,
            "arith_mean_delta": self.arith_mean_delta,
            "weighted_arith_mean_delta": self.weighted_arith_mean_delta,
        }


def extract_pairs(gold: Corpus, train: Corpus | None = None) -> list[VariantPair]:
    """All pairs of distinct forms attested with an identical (lemma, POS, morph).

    ``freq_a``/``freq_b`` count the forms in *train* when given, otherwise
    in *gold*.
    """
    forms_by_analysis: dict[tuple[str, str, str], set[str]] = defaultdict(set)
    for tok in gold.tokens():
        if tok.is_annotated:
            forms_by_analysis[tok.analysis].add(tok.form)
    freq = Counter(t.form for t in (train or gold).tokens())
    pairs = []
    for (lemma, pos, morph), forms in forms_by_analysis.items():
        for a, b in combinations(sorted(forms), 2):
            pairs.append(VariantPair(a, b, lemma, pos, morph, freq[a], freq[b]))
    pairs.sort()
    return pairs


def _is_target(tok: AnnotatedToken, pair: VariantPair) -> bool:
    return tok.lemma == pair.lemma and (tok.form == pair.form_a or tok.form == pair.form_b)


def build_swap_sets(pair: VariantPair, test: Corpus) -> tuple[Corpus, Corpus]:
    """Matching test sentences with every target rewritten to form_a, then to form_b.

    Raises PairSkipped when no test sentence contains either variant with
    the pair's lemma.
    """
    docs_a, docs_b = [], []
    for doc in test.documents:
        sa, sb = [], []
        for sent in doc.sentences:
            if not any(_is_target(t, pair) for t in sent.tokens):
                continue
            sa.append(_rewrite(sent, pair, pair.form_a))
            sb.append(_rewrite(sent, pair, pair.form_b))
        if sa:
            docs_a.append(replace(doc, sentences=tuple(sa)))
            docs_b.append(replace(doc, sentences=tuple(sb)))
    if not docs_a:
        raise PairSkipped("no test sentence contains either variant")
    return Corpus(tuple(docs_a)), Corpus(tuple(docs_b))


def _rewrite(sent: Sentence, pair: VariantPair, form: str) -> Sentence:
    return Sentence(sent.id, tuple(
        AnnotatedToken(form, t.lemma, t.pos, t.morph) if _is_target(t, pair) else t
        for t in sent.tokens))


def _correct(gold: AnnotatedToken, pred: AnnotatedToken, task: str) -> bool:
    lemma_ok = nfkd(gold.lemma) == nfkd(pred.lemma)
    if task == "lemma":
        return lemma_ok
    if task == "pos":
        return gold.pos == pred.pos
    return lemma_ok and gold.pos == pred.pos


def target_accuracy(model: TaggerModel, pair: VariantPair, gold_set: Corpus,
                    task: str = "lemma") -> tuple[float, int]:
    predicted = tag(model, gold_set)
    correct = total = 0
    for g, p in zip(gold_set.tokens(), predicted.tokens()):
        if _is_target(g, pair):
            total += 1
            correct += _correct(g, p, task)
    if total == 0:
        raise PairSkipped("swap set has no target tokens")
    return correct / total, total


def evaluate_pair(model: TaggerModel, pair: VariantPair, set_a: Corpus, set_b: Corpus,
                  task: str = "lemma") -> PairResult:
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}, got {task!r}")
    acc_a, n_a = target_accuracy(model, pair, set_a, task)
    acc_b, _ = target_accuracy(model, pair, set_b, task)
    return PairResult(pair, acc_a, acc_b, n_a)


def _geo_mean(values: list[float], weights: list[float]) -> float:
    if any(v == 0 for v in values):
        return 0.0
    wsum = math.fsum(weights)
    return math.exp(math.fsum(w * math.log(v) for v, w in zip(values, weights)) / wsum)


def aggregate(rows: list[PairResult], skipped=()) -> RobustnessReport:
    """Summary statistics of the per-pair deltas.

    Geometric means are 0 as soon as one delta is 0. Weighted means use the
    training frequency of ``form_b``; if every weight is 0 they fall back to
    unit weights.
    """
    if not rows:
        raise ValueError("no evaluated pairs to aggregate")
    deltas = [r.delta for r in rows]
    weights = [float(r.weight) for r in rows]
    if math.fsum(weights) == 0:
        weights = [1.0] * len(rows)
    n = len(deltas)
    ones = [1.0] * n
    return RobustnessReport(
        per_pair=list(rows),
        median_delta=statistics.median(deltas),
        geo_mean_delta=_geo_mean(deltas, ones),
        weighted_geo_mean_delta=_geo_mean(deltas, weights),
        arith_mean_delta=math.fsum(deltas) / n,
        weighted_arith_mean_delta=math.fsum(w * d for w, d in zip(weights, deltas)) / math.fsum(weights),
        skipped_pairs=list(skipped),
    )


def _evaluate_one(model, pair, test, task):
    try:
        set_a, set_b = build_swap_sets(pair, test)
        return evaluate_pair(model, pair, set_a, set_b, task)
    except PairSkipped as e:
        return e.reason


_worker_state = None


def _init_worker(model, test, task):
    global _worker_state
    _worker_state = (model, test, task)


def _evaluate_in_worker(pair):
    model, test, task = _worker_state
    return _evaluate_one(model, pair, test, task)


def evaluate_pairs(model: TaggerModel, pairs: list[VariantPair], test: Corpus,
                   task: str = "lemma", jobs: int = 1):
    """Evaluate each pair; returns ``(results, skipped)``, skipped carrying reasons."""
    if jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(jobs, initializer=_init_worker,
                                 initargs=(model, test, task)) as pool:
            outcomes = list(pool.map(_evaluate_in_worker, pairs, chunksize=16))
    else:
        outcomes = [_evaluate_one(model, pair, test, task) for pair in pairs]
    results, skipped = [], []
    for pair, outcome in zip(pairs, outcomes):
        if isinstance(outcome, PairResult):
            results.append(outcome)
        else:
            skipped.append((pair, outcome))
    return results, skipped


def run_robustness(model: TaggerModel, gold: Corpus, test: Corpus, train: Corpus | None = None,
                   task: str = "lemma") -> RobustnessReport:
    pairs = extract_pairs(gold, train)
    results, skipped = evaluate_pairs(model, pairs, test, task)
    if not results:
        raise ValueError(f"none of the {len(pairs)} variant pairs could be evaluated")
    return aggregate(results, skipped)
