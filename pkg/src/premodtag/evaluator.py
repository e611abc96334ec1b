"""Stratified accuracy and confusion matrices for lemma and POS predictions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .corpus import Corpus, nfkd
from .tagger import TaggerModel

TASKS = ("lemma", "pos")


class AlignmentError(ValueError):
    pass


@dataclass
class Stratum:
    correct: int = 0
    support: int = 0

    @property
    def accuracy(self) -> float | None:
        return self.correct / self.support if self.support else None

    def add(self, ok: bool) -> None:
        self.support += 1
        self.correct += ok


@dataclass
class EvalReport:
    task: str
    all: Stratum = field(default_factory=Stratum)
    ambiguous: Stratum = field(default_factory=Stratum)
    unknown_tokens: Stratum = field(default_factory=Stratum)
    unknown_targets: Stratum | None = None
    confusion: Counter = field(default_factory=Counter)

    @property
    def acc_all(self):
        return self.all.accuracy

    @property
    def acc_ambiguous(self):
        return self.ambiguous.accuracy

    @property
    def acc_unknown_tokens(self):
        return self.unknown_tokens.accuracy

    @property
    def acc_unknown_targets(self):
        return self.unknown_targets.accuracy if self.unknown_targets is not None else None

    def strata(self):
        rows = [("all", self.all), ("ambiguous tokens", self.ambiguous),
                ("unknown tokens", self.unknown_tokens)]
        if self.unknown_targets is not None:
            rows.append(("unknown targets", self.unknown_targets))
        return rows

    def table(self) -> str:
        lines = [f"{self.task.upper():<18}{'accuracy':>10}{'support':>10}"]
        for name, s in self.strata():
            acc = f"{100 * s.accuracy:.2f}" if s.accuracy is not None else "-"
            lines.append(f"{name:<18}{acc:>10}{s.support:>10}")
        return "\n".join(lines)


def _value(tok, task):
    return nfkd(tok.lemma) if task == "lemma" else tok.pos


def evaluate(gold: Corpus, predicted: Corpus, model: TaggerModel, task: str = "lemma",
             century: int | None = None) -> EvalReport:
    """Score *predicted* against *gold* on one task.

    Strata follow the model's training vocabulary: unknown tokens are forms
    it never saw, ambiguous tokens are forms seen with more than one value
    for *task*, unknown targets (lemma task only) are gold lemmas it never
    saw. With *century*, only gold documents of that century are scored.
    """
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}, got {task!r}")
    if len(gold.documents) != len(predicted.documents):
        raise AlignmentError(f"gold has {len(gold.documents)} documents, "
                             f"predicted has {len(predicted.documents)}")
    report = EvalReport(task, unknown_targets=Stratum() if task == "lemma" else None)
    ambiguous = model.ambiguous_for(task)
    known_lemmas = {nfkd(lem) for lem in model.known_lemmas}
    for gdoc, pdoc in zip(gold.documents, predicted.documents):
        if len(gdoc.sentences) != len(pdoc.sentences):
            raise AlignmentError(f"document {gdoc.doc_id!r}: {len(gdoc.sentences)} gold "
                                 f"sentences vs {len(pdoc.sentences)} predicted")
        if century is not None and gdoc.century != century:
            continue
        for gs, ps in zip(gdoc.sentences, pdoc.sentences):
            if len(gs) != len(ps):
                raise AlignmentError(f"{gdoc.doc_id}/{gs.id}: {len(gs)} gold tokens vs {len(ps)} predicted")
            for ti, (g, p) in enumerate(zip(gs.tokens, ps.tokens), start=1):
                if g.form != p.form and nfkd(g.form) != nfkd(p.form):
                    raise AlignmentError(f"{gdoc.doc_id}/{gs.id}/{ti}: gold form {g.form!r} "
                                         f"vs predicted {p.form!r}")
                gv, pv = _value(g, task), _value(p, task)
                ok = gv == pv
                report.all.add(ok)
                report.confusion[(gv, pv)] += 1
                if g.form not in model.known_forms:
                    report.unknown_tokens.add(ok)
                elif g.form in ambiguous:
                    report.ambiguous.add(ok)
                if report.unknown_targets is not None and gv not in known_lemmas:
                    report.unknown_targets.add(ok)
    return report


def top_confusions(report: EvalReport, n: int) -> list[tuple[str, str, int]]:
    cells = [(g, p, c) for (g, p), c in report.confusion.items() if g != p and c > 0]
    cells.sort(key=lambda x: (-x[2], x[0], x[1]))
    return cells[:n]


def confusion_rows(report: EvalReport):
    """All non-empty cells as ``(gold, predicted, count)``, sorted."""
    return sorted(((g, p, c) for (g, p), c in report.confusion.items() if c),
                  key=lambda x: (x[0], x[1]))
