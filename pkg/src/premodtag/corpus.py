"""Annotated corpus data model and the four-column TSV interchange format.

The TSV layout is::

    form<TAB>lemma<TAB>POS<TAB>morph
    # doc_id = cornmol-01
    # century = 17
    # genre = drama
    mangeons<TAB>manger<TAB>VERcjg<TAB>MODE=ind|PERS.=1|NOMB.=p
    .<TAB>.<TAB>PONfrt<TAB>_

    # sent_id = cornmol-01-s2
    ...

A blank line ends a sentence, `# doc_id = X` starts a new document and
`# sent_id`, `# century`, `# genre` lines attach metadata. Sentence ids that
equal their positional default (`<doc_id>-<n>`) are not written out, and
neither is the `# doc_id` line of a lone leading document named
`DEFAULT_DOC_ID`, so that ``write_tsv(read_tsv(f))`` reproduces any
canonical file byte for byte.
"""

from __future__ import annotations

import sys
import unicodedata
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

HEADER = ("form", "lemma", "POS", "morph")
UNKNOWN = "_"
EMPTY_MORPH = "_"
DEFAULT_DOC_ID = "default"
CENTURY_RANGE = range(12, 21)

_META_KEYS = ("doc_id", "sent_id", "century", "genre")


class CorpusError(ValueError):
    """A value violates one of the corpus invariants."""


class TSVFormatError(CorpusError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class EmptyCorpusError(TSVFormatError):
    pass


class SerializationError(CorpusError):
    pass


@dataclass(frozen=True, slots=True)
class AnnotatedToken:
    form: str
    lemma: str = UNKNOWN
    pos: str = UNKNOWN
    morph: str = EMPTY_MORPH

    def __post_init__(self):
        form = self.form
        if not form:
            raise CorpusError("token form is empty")
        if "\t" in form or "\n" in form or "\r" in form:
            raise CorpusError(f"token form {form!r} contains a tab or line break")
        if form[0].isspace() or form[-1].isspace():
            raise CorpusError(f"token form {form!r} has surrounding whitespace")
        lemma = self.lemma
        if lemma != UNKNOWN and "_" in lemma and not all(lemma.split("_")):
            raise CorpusError(f"malformed compound lemma {lemma!r}")

    @property
    def is_annotated(self) -> bool:
        return self.lemma != UNKNOWN and self.pos != UNKNOWN

    @property
    def analysis(self) -> tuple[str, str, str]:
        return (self.lemma, self.pos, self.morph)


@dataclass(frozen=True, slots=True)
class Sentence:
    id: str
    tokens: tuple[AnnotatedToken, ...]

    def __post_init__(self):
        if not self.tokens:
            raise CorpusError(f"sentence {self.id!r} has no tokens")
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[AnnotatedToken]:
        return iter(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]


@dataclass(frozen=True, slots=True)
class Document:
    doc_id: str
    sentences: tuple[Sentence, ...] = ()
    century: int | None = None
    genre: str | None = None

    def __post_init__(self):
        if not isinstance(self.sentences, tuple):
            object.__setattr__(self, "sentences", tuple(self.sentences))
        if not self.doc_id or any(c.isspace() for c in self.doc_id):
            raise CorpusError(f"invalid doc_id {self.doc_id!r}")
        if self.century is not None and self.century not in CENTURY_RANGE:
            raise CorpusError(f"century {self.century} outside 12..20")
        ids = [s.id for s in self.sentences]
        if len(set(ids)) != len(ids):
            raise CorpusError(f"duplicate sentence id in document {self.doc_id!r}")

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)


@dataclass(frozen=True, slots=True)
class Corpus:
    documents: tuple[Document, ...] = ()

    def __post_init__(self):
        if not isinstance(self.documents, tuple):
            object.__setattr__(self, "documents", tuple(self.documents))
        ids = [d.doc_id for d in self.documents]
        if len(set(ids)) != len(ids):
            raise CorpusError("duplicate doc_id in corpus")

    def sentences(self) -> Iterator[tuple[Document, Sentence]]:
        for doc in self.documents:
            for sent in doc.sentences:
                yield doc, sent

    def tokens(self) -> Iterator[AnnotatedToken]:
        for doc in self.documents:
            for sent in doc.sentences:
                yield from sent.tokens

    @property
    def n_sentences(self) -> int:
        return sum(len(d.sentences) for d in self.documents)

    @property
    def n_tokens(self) -> int:
        return sum(d.n_tokens for d in self.documents)

    def map_tokens(self, fn) -> Corpus:
        """Return a corpus of identical shape where each token is ``fn(token)``."""
        return Corpus(tuple(
            replace(doc, sentences=tuple(
                Sentence(sent.id, tuple(fn(t) for t in sent.tokens))
                for sent in doc.sentences))
            for doc in self.documents))

    @classmethod
    def from_sentences(cls, sentences: Iterable[Iterable[AnnotatedToken]],
                       doc_id: str = DEFAULT_DOC_ID, **meta) -> Corpus:
        sents = tuple(Sentence(default_sentence_id(doc_id, i), tuple(toks))
                      for i, toks in enumerate(sentences, start=1))
        return cls((Document(doc_id, sents, **meta),))


@dataclass(frozen=True)
class Tagset:
    name: str
    codes: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.codes:
            raise CorpusError(f"tagset {self.name!r} is empty")
        for code in self.codes:
            if not code or any(c.isspace() for c in code):
                raise CorpusError(f"invalid tag code {code!r}")

    def __contains__(self, code: str) -> bool:
        return code in self.codes

    @classmethod
    def from_file(cls, path: str | Path, name: str | None = None) -> Tagset:
        path = Path(path)
        return cls(name or path.stem, frozenset(_read_entries(path.read_text(encoding="utf-8"))))

    @classmethod
    def cattex(cls) -> Tagset:
        """The bundled CATTEX code inventory."""
        text = resources.files("premodtag.data").joinpath("cattex.txt").read_text(encoding="utf-8")
        return cls("CATTEX", frozenset(_read_entries(text)))


def _read_entries(text: str) -> Iterator[str]:
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            yield line


def default_sentence_id(doc_id: str, index: int) -> str:
    return f"{doc_id}-{index}"


# ---------------------------------------------------------------------------
# TSV reading


def read_tsv(path: str | Path, *, allow_empty: bool = False) -> Corpus:
    """Read a corpus from a TSV file, or from stdin when *path* is ``"-"``."""
    if path == "-":
        return parse_tsv(sys.stdin.buffer.read().decode("utf-8"), allow_empty=allow_empty)
    with open(path, "rb") as f:
        data = f.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise TSVFormatError(f"file is not valid UTF-8: {e}") from None
    return parse_tsv(text, allow_empty=allow_empty)


class _Builder:
    def __init__(self):
        self.docs: list[Document] = []
        self.doc_meta: dict | None = None
        self.sentences: list[Sentence] = []
        self.tokens: list[AnnotatedToken] = []
        self.sent_id: str | None = None

    def close_sentence(self):
        if self.tokens:
            if self.doc_meta is None:
                self.doc_meta = {"doc_id": DEFAULT_DOC_ID}
            sid = self.sent_id or default_sentence_id(self.doc_meta["doc_id"],
                                                      len(self.sentences) + 1)
            self.sentences.append(Sentence(sid, tuple(self.tokens)))
        elif self.sent_id is not None:
            raise CorpusError(f"sentence {self.sent_id!r} has no tokens")
        self.tokens = []
        self.sent_id = None

    def close_document(self):
        self.close_sentence()
        if self.doc_meta is not None:
            self.docs.append(Document(sentences=tuple(self.sentences), **self.doc_meta))
        self.doc_meta = None
        self.sentences = []


def parse_tsv(text: str, *, allow_empty: bool = False) -> Corpus:
    if text.startswith("\ufeff"):
        text = text[1:]
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    if not text.strip():
        raise EmptyCorpusError("empty file")
    if tuple(lines[0].split("\t")) != HEADER:
        raise TSVFormatError(f"expected header {'<TAB>'.join(HEADER)!r}, got {lines[0]!r}", 1)

    b = _Builder()
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            if not line.strip():
                b.close_sentence()
            elif line.startswith("#"):
                key, value = _parse_meta(line, lineno)
                if key == "doc_id":
                    b.close_document()
                    b.doc_meta = {"doc_id": value}
                elif key == "sent_id":
                    b.close_sentence()
                    b.sent_id = value
                else:
                    if b.doc_meta is None or b.sentences or b.tokens:
                        raise TSVFormatError(f"'# {key}' must directly follow '# doc_id'", lineno)
                    if key == "century":
                        try:
                            b.doc_meta["century"] = int(value)
                        except ValueError:
                            raise TSVFormatError(f"century {value!r} is not an integer", lineno) from None
                    else:
                        b.doc_meta["genre"] = value
            else:
                cols = line.split("\t")
                if len(cols) != len(HEADER):
                    raise TSVFormatError(f"expected {len(HEADER)} columns, found {len(cols)}", lineno)
                b.tokens.append(AnnotatedToken(*cols))
        except TSVFormatError:
            raise
        except CorpusError as e:
            raise TSVFormatError(str(e), lineno) from None
    try:
        b.close_document()
        corpus = Corpus(tuple(b.docs))
    except CorpusError as e:
        raise TSVFormatError(str(e)) from None
    if corpus.n_tokens == 0 and not allow_empty:
        raise EmptyCorpusError("corpus contains no tokens")
    return corpus


def _parse_meta(line: str, lineno: int) -> tuple[str, str]:
    body = line[1:].strip()
    key, sep, value = body.partition("=")
    key, value = key.strip(), value.strip()
    if not sep or key not in _META_KEYS or not value:
        raise TSVFormatError(f"unrecognized comment line {line!r}", lineno)
    return key, value


# ---------------------------------------------------------------------------
# TSV writing


def _check_field(value: str, what: str, token: AnnotatedToken) -> str:
    if not value or "\t" in value or "\n" in value or "\r" in value:
        raise SerializationError(f"{what} {value!r} of token {token.form!r} cannot be serialized")
    return value


def format_tsv(corpus: Corpus) -> str:
    out = ["\t".join(HEADER)]
    first = True
    for doc in corpus.documents:
        bare = (first and doc.doc_id == DEFAULT_DOC_ID
                and doc.century is None and doc.genre is None)
        if not first:
            out.append("")
        if not bare:
            out.append(f"# doc_id = {doc.doc_id}")
            if doc.century is not None:
                out.append(f"# century = {doc.century}")
            if doc.genre is not None:
                out.append(f"# genre = {_check_meta(doc.genre)}")
        for i, sent in enumerate(doc.sentences, start=1):
            if i > 1:
                out.append("")
            if sent.id != default_sentence_id(doc.doc_id, i):
                out.append(f"# sent_id = {_check_meta(sent.id)}")
            for tok in sent.tokens:
                out.append("\t".join((
                    _check_field(tok.form, "form", tok),
                    _check_field(tok.lemma, "lemma", tok),
                    _check_field(tok.pos, "POS", tok),
                    _check_field(tok.morph, "morph", tok),
                )))
        first = False
    return "\n".join(out) + "\n"


def _check_meta(value: str) -> str:
    if value != value.strip() or "\n" in value or "\r" in value or not value:
        raise SerializationError(f"metadata value {value!r} cannot be serialized")
    return value


def write_tsv(corpus: Corpus, path: str | Path) -> None:
    data = format_tsv(corpus).encode("utf-8")
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    Path(path).write_bytes(data)


# ---------------------------------------------------------------------------
# Unicode


def nfkd(text: str) -> str:
    return unicodedata.normalize("NFKD", text)


def nfkd_normalize(corpus: Corpus) -> Corpus:
    """Apply compatibility decomposition to every form and lemma."""
    # spacing accents (U+00B4, U+00A8...) decompose to " " + combining mark
    return corpus.map_tokens(
        lambda t: AnnotatedToken(nfkd(t.form).strip(" "), nfkd(t.lemma).strip(" "),
                                 t.pos, t.morph))


def charset_inventory(corpus: Corpus) -> set[str]:
    chars: set[str] = set()
    for tok in corpus.tokens():
        chars.update(tok.form)
    return chars
