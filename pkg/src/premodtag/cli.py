"""Command-line entry point: ``premodtag <subcommand> ...``.

Every corpus argument accepts ``-`` for standard input/output. Options may
also come from a JSON file given with ``--config`` (keys are option names
with dashes or underscores); explicit flags override it. The seed falls back
to the ``PREMODTAG_SEED`` environment variable, then to 0.

Exit status: 0 on success, 1 when ``validate`` finds more problems than
``--max-findings``, 2 on usage, format or I/O errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import unicodedata
from collections import Counter
from pathlib import Path

from . import __version__
from .augment import AugmentConfig, augment
from .corpus import Corpus, Tagset, format_tsv, nfkd_normalize, parse_tsv
from .evaluator import confusion_rows, evaluate, top_confusions
from .lexicon import load_lexicon, validate
from .robustness import aggregate, evaluate_pairs, extract_pairs
from .splitter import SplitConfig, sample_ood, split, split_report
from .tagger import KINDS, TaggerModel, tag, train
from .tokenizer import DEFAULT_ELISION, DEFAULT_PUNCTUATION, TokenizerConfig, tokenize_corpus

TSV_HELP = """\
Corpus files are UTF-8 TSV with the header line 'form<TAB>lemma<TAB>POS<TAB>morph',
one token per line, a blank line between sentences, and optional
'# doc_id = X', '# century = N', '# genre = G', '# sent_id = S' comment lines.
Unannotated fields and empty morphology are written '_'."""

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# I/O helpers


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def atomic_write(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Run:
    """Collects input/output digests and writes the run manifest."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.inputs: dict[str, str] = {}
        self.outputs: dict[str, str] = {}

    def read(self, path: str) -> bytes:
        data = _read_bytes(path)
        self.inputs[path] = _digest(data)
        return data

    def read_corpus(self, path: str, allow_empty: bool = False) -> Corpus:
        data = self.read(path)
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise UsageError(f"{path}: not valid UTF-8 ({e})") from None
        return parse_tsv(text, allow_empty=allow_empty)

    def write(self, path: str, data: bytes) -> None:
        if path == "-":
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        else:
            atomic_write(path, data)
        self.outputs[path] = _digest(data)

    def manifest(self, path: str | Path) -> None:
        record = {
            "tool": "premodtag",
            "version": __version__,
            "subcommand": self.command,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
        }
        atomic_write(path, (json.dumps(record, indent=2, sort_keys=True, ensure_ascii=False)
                            + "\n").encode("utf-8"))


def _sidecar(args, run: Run, output: str) -> None:
    target = getattr(args, "manifest", None)
    if target is None and output != "-":
        target = output + ".manifest.json"
    if target:
        run.manifest(target)


def _effective_config(args) -> dict:
    skip = {"command", "handler", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("PREMODTAG_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"PREMODTAG_SEED must be an integer, got {env!r}") from None
    return 0


def _parse_ratios(value) -> tuple[float, float, float]:
    if isinstance(value, str):
        try:
            value = [float(x) for x in value.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"ratios must be three comma-separated numbers: {value!r}")
    if len(value) != 3:
        raise argparse.ArgumentTypeError(f"ratios must have three values, got {len(value)}")
    return tuple(float(x) for x in value)


# ---------------------------------------------------------------------------
# subcommands


def cmd_tokenize(args) -> int:
    run = Run("tokenize", _effective_config(args))
    text = run.read(args.input).decode("utf-8")
    config = TokenizerConfig(
        punctuation_set=frozenset(args.punctuation),
        elision_markers=frozenset(args.elision),
        split_elision=not args.no_split_elision,
    )
    corpus = tokenize_corpus(text, config)
    data = format_tsv(corpus).encode("utf-8") if corpus.n_tokens else b""
    run.write(args.output, data)
    _sidecar(args, run, args.output)
    return EXIT_OK


def cmd_normalize(args) -> int:
    run = Run("normalize", _effective_config(args))
    corpus = nfkd_normalize(run.read_corpus(args.input))
    run.write(args.output, format_tsv(corpus).encode("utf-8"))
    _sidecar(args, run, args.output)
    return EXIT_OK


def cmd_inventory(args) -> int:
    run = Run("inventory", _effective_config(args))
    corpus = run.read_corpus(args.input)
    if args.nfkd:
        corpus = nfkd_normalize(corpus)
    counts = Counter(ch for tok in corpus.tokens() for ch in tok.form)
    lines = [f"U+{ord(ch):04X}\t{ch}\t{unicodedata.name(ch, '?')}\t{counts[ch]}"
             for ch in sorted(counts)]
    run.write(args.output, ("\n".join(lines) + "\n" if lines else "").encode("utf-8"))
    print(f"{len(counts)} distinct characters", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    run = Run("validate", _effective_config(args))
    corpus = run.read_corpus(args.input)
    for p in (args.lemmas, args.named_entities, args.foreign):
        run.read(p)
    lexicon = load_lexicon(args.lemmas, args.named_entities, args.foreign)
    if args.tagset:
        run.read(args.tagset)
        tagset = Tagset.from_file(args.tagset)
    else:
        tagset = Tagset.cattex()
    report = validate(corpus, lexicon, tagset)
    if args.report:
        rows = ["kind\titem\tdetail"] + ["\t".join(r) for r in report.rows()]
        run.write(args.report, ("\n".join(rows) + "\n").encode("utf-8"))
        _sidecar(args, run, args.report)
    print(report.summary())
    if report.n_findings > args.max_findings:
        print(f"{report.n_findings} tokens with findings exceed --max-findings {args.max_findings}",
              file=sys.stderr)
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_augment(args) -> int:
    seed = _seed(args)
    config = AugmentConfig(p_long_s=args.p_long_s, p_eszett=args.p_eszett,
                           p_tilde=args.p_tilde, seed=seed)
    run = Run("augment", {**_effective_config(args), "seed": seed})
    corpus = augment(run.read_corpus(args.input), config)
    run.write(args.output, format_tsv(corpus).encode("utf-8"))
    _sidecar(args, run, args.output)
    return EXIT_OK


def cmd_split(args) -> int:
    seed = _seed(args)
    ratios = _parse_ratios(args.ratios)
    config = SplitConfig(ratios=ratios, seed=seed, unit=args.unit)
    run = Run("split", {**_effective_config(args), "seed": seed, "ratios": list(ratios)})
    parts = split(run.read_corpus(args.input), config)
    out = Path(args.outdir)
    for name, part in zip(("train", "dev", "test"), parts):
        run.write(str(out / f"{name}.tsv"), format_tsv(part).encode("utf-8"))
    run.config["achieved"] = split_report(parts)
    run.manifest(out / "manifest.json")
    report = run.config["achieved"]
    for name in ("train", "dev", "test"):
        r = report[name]
        print(f"{name}\t{r['sentences']} sentences\t{r['tokens']} tokens\t{100 * r['share']:.2f}%")
    return EXIT_OK


def cmd_sample(args) -> int:
    run = Run("sample", _effective_config(args))
    corpus = run.read_corpus(args.input)
    strata = None
    if args.strata:
        strata = []
        for item in args.strata.split(","):
            parts = item.split("/")
            strata.append(tuple(int(p) if p.isdigit() else p for p in parts))
    samples = sample_ood(corpus, args.n_samples, args.sample_tokens, args.stratify, strata)
    run.write(args.output, format_tsv(samples).encode("utf-8"))
    _sidecar(args, run, args.output)
    return EXIT_OK


def cmd_train(args) -> int:
    seed = _seed(args)
    run = Run("train", {**_effective_config(args), "seed": seed})
    model = train(run.read_corpus(args.input), kind=args.kind, seed=seed)
    run.write(args.output, model.to_json().encode("utf-8"))
    _sidecar(args, run, args.output)
    return EXIT_OK


def cmd_tag(args) -> int:
    run = Run("tag", _effective_config(args))
    model = TaggerModel.from_json(run.read(args.model).decode("utf-8"))
    if args.text:
        corpus = tokenize_corpus(run.read(args.input).decode("utf-8"))
    else:
        corpus = run.read_corpus(args.input)
    tagged = tag(model, corpus, jobs=args.jobs)
    run.write(args.output, format_tsv(tagged).encode("utf-8"))
    _sidecar(args, run, args.output)
    return EXIT_OK


def cmd_eval(args) -> int:
    run = Run("eval", _effective_config(args))
    model = TaggerModel.from_json(run.read(args.model).decode("utf-8"))
    gold = run.read_corpus(args.gold)
    predicted = run.read_corpus(args.predicted)
    report = evaluate(gold, predicted, model, args.task, century=args.century)
    print(report.table())
    top = top_confusions(report, args.top)
    if top:
        print(f"\ntop {len(top)} confusions (gold -> predicted):")
        for g, p, c in top:
            print(f"{c:>6}  {g} -> {p}")
    if args.confusions:
        rows = ["gold\tpredicted\tcount"] + [f"{g}\t{p}\t{c}" for g, p, c in confusion_rows(report)]
        run.write(args.confusions, ("\n".join(rows) + "\n").encode("utf-8"))
        _sidecar(args, run, args.confusions)
    return EXIT_OK


def cmd_robustness(args) -> int:
    run = Run("robustness", _effective_config(args))
    model = TaggerModel.from_json(run.read(args.model).decode("utf-8"))
    gold = run.read_corpus(args.gold)
    test = run.read_corpus(args.test)
    train_corpus = run.read_corpus(args.train) if args.train else None
    pairs = extract_pairs(gold, train_corpus)
    results, skipped = evaluate_pairs(model, pairs, test, args.task, jobs=args.jobs)
    if not results:
        raise UsageError(f"none of the {len(pairs)} variant pairs occur in the test corpus")
    report = aggregate(results, skipped)
    rows = ["form_a\tform_b\tlemma\tPOS\tmorph\tfreq_a\tfreq_b\ttargets\tacc_a\tacc_b\tdelta"]
    for r in report.per_pair:
        p = r.pair
        rows.append(f"{p.form_a}\t{p.form_b}\t{p.lemma}\t{p.pos}\t{p.morph}\t{p.freq_a}\t"
                    f"{p.freq_b}\t{r.n_targets}\t{r.acc_a!r}\t{r.acc_b!r}\t{r.delta!r}")
    run.write(args.output, ("\n".join(rows) + "\n").encode("utf-8"))
    summary = report.summary()
    if args.summary:
        run.write(args.summary, (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    _sidecar(args, run, args.output)
    for key, value in summary.items():
        print(f"{key}\t{value}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, output: bool = True) -> None:
    p.add_argument("--config", metavar="JSON", help="JSON file of option defaults (flags win)")
    if output:
        p.add_argument("-o", "--output", default="-", help="output path ('-' for stdout, default)")
        p.add_argument("--manifest", metavar="PATH",
                       help="run manifest path (default: <output>.manifest.json for file outputs)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="premodtag",
        description="Annotation and evaluation toolkit for pre-orthographic French corpora.",
        epilog=TSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)

    def add(name, handler, help, description=""):
        p = sub.add_parser(name, help=help, description=(description or help) + "\n\n" + TSV_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(handler=handler)
        return p

    p = add("tokenize", cmd_tokenize, "tokenize raw UTF-8 text into an unannotated TSV corpus",
            "Split raw text on blank space; punctuation and hyphens become tokens, "
            "locutions are never merged. One sentence per line, cut again after . ! ?")
    p.add_argument("input", help="raw text file or '-'")
    p.add_argument("--punctuation", default="".join(sorted(DEFAULT_PUNCTUATION)),
                   help="characters split off as tokens (the hyphen is always included)")
    p.add_argument("--elision", default="".join(sorted(DEFAULT_ELISION)),
                   help="apostrophes ending an elided clitic (l' homme)")
    p.add_argument("--no-split-elision", action="store_true",
                   help="keep word-internal apostrophes inside the word")
    _common(p)

    p = add("normalize", cmd_normalize, "apply NFKD normalization to forms and lemmas")
    p.add_argument("input")
    _common(p)

    p = add("inventory", cmd_inventory, "list the distinct characters used in forms",
            "Write one line per character: code point, character, Unicode name, count.")
    p.add_argument("input")
    p.add_argument("--nfkd", action="store_true", help="normalize before counting")
    _common(p)

    p = add("validate", cmd_validate, "check lemmas against authority lists and POS against a tagset",
            "Authority lists are UTF-8 files with one entry per line; '#' starts a comment. "
            "Compound lemmas (a_b) are valid when every part is. The report TSV has columns "
            "kind, item, detail.")
    p.add_argument("input")
    p.add_argument("--lemmas", required=True, help="lemma authority list")
    p.add_argument("--named-entities", required=True, help="named-entity authority list")
    p.add_argument("--foreign", required=True, help="foreign-word authority list")
    p.add_argument("--tagset", help="tagset file, one code per line (default: bundled CATTEX)")
    p.add_argument("--report", help="write findings as TSV to this path")
    p.add_argument("--max-findings", type=int, default=0,
                   help="exit 1 when more tokens than this have findings (default 0)")
    p.add_argument("--config", metavar="JSON", help="JSON file of option defaults (flags win)")
    p.add_argument("--manifest", metavar="PATH", help="run manifest path")

    p = add("augment", cmd_augment, "inject long s, eszett and tilded vowels into forms",
            "Each eligible site is rewritten independently with the given probability; "
            "annotations are unchanged. A manifest recording the configuration is written "
            "next to file outputs.")
    p.add_argument("input")
    p.add_argument("--seed", type=int, help="random seed (default: $PREMODTAG_SEED or 0)")
    p.add_argument("--p-long-s", type=float, default=AugmentConfig.p_long_s)
    p.add_argument("--p-eszett", type=float, default=AugmentConfig.p_eszett)
    p.add_argument("--p-tilde", type=float, default=AugmentConfig.p_tilde)
    _common(p)

    p = add("split", cmd_split, "split a corpus into train/dev/test",
            "Writes OUTDIR/train.tsv, dev.tsv, test.tsv and manifest.json (configuration "
            "and achieved sentence/token counts). Sentences are never cut.")
    p.add_argument("input")
    p.add_argument("outdir")
    p.add_argument("--ratios", type=_parse_ratios, default="0.84,0.06,0.10",
                   help="train,dev,test fractions summing to 1 (default 0.84,0.06,0.10)")
    p.add_argument("--seed", type=int, help="random seed (default: $PREMODTAG_SEED or 0)")
    p.add_argument("--unit", choices=("sentence", "document"), default="sentence")
    p.add_argument("--config", metavar="JSON", help="JSON file of option defaults (flags win)")

    p = add("sample", cmd_sample, "extract short contiguous out-of-domain samples")
    p.add_argument("input")
    p.add_argument("--n-samples", type=int, default=10)
    p.add_argument("--sample-tokens", type=int, default=100)
    p.add_argument("--stratify", choices=("century", "genre", "both"), default="century")
    p.add_argument("--strata", help="comma-separated strata that must be covered, e.g. 16,17,18 "
                                    "or 17/drama,18/drama")
    _common(p)

    p = add("train", cmd_train, "train a tagger/lemmatizer model",
            "The model is written as a versioned JSON document.")
    p.add_argument("input", help="fully annotated TSV corpus")
    p.add_argument("--kind", choices=KINDS, default="context")
    p.add_argument("--seed", type=int, help="random seed (default: $PREMODTAG_SEED or 0)")
    _common(p)

    p = add("tag", cmd_tag, "annotate a corpus with a trained model")
    p.add_argument("model")
    p.add_argument("input", help="TSV corpus (annotations ignored), or raw text with --text")
    p.add_argument("--text", action="store_true", help="input is raw text; tokenize it first")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    _common(p)

    p = add("eval", cmd_eval, "score predictions against gold annotations",
            "Prints accuracy and support for all, ambiguous and unknown tokens (and unknown "
            "lemmas for the lemma task). --confusions writes gold, predicted, count TSV.")
    p.add_argument("gold")
    p.add_argument("predicted")
    p.add_argument("--model", required=True, help="model used to define the strata")
    p.add_argument("--task", choices=("lemma", "pos"), default="lemma")
    p.add_argument("--century", type=int, help="score only documents of this century")
    p.add_argument("--top", type=int, default=10, help="number of confusions to print")
    p.add_argument("--confusions", help="write the confusion matrix as TSV")
    p.add_argument("--config", metavar="JSON", help="JSON file of option defaults (flags win)")
    p.add_argument("--manifest", metavar="PATH", help="run manifest path")

    p = add("robustness", cmd_robustness, "measure accuracy differences between spelling variants",
            "Pairs are mined from --gold, weighted by --train frequencies (or gold ones), "
            "and evaluated on --test. The per-pair TSV has columns form_a, form_b, lemma, POS, "
            "morph, freq_a, freq_b, targets, acc_a, acc_b, delta.")
    p.add_argument("--model", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--train", help="training corpus for variant frequencies")
    p.add_argument("--task", choices=("lemma", "pos", "both"), default="lemma")
    p.add_argument("--summary", help="write aggregate statistics as JSON")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    _common(p)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str], args) -> argparse.Namespace:
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {args.config}: {e}") from None
    if not isinstance(config, dict):
        raise UsageError("config file must hold a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest for a in subparser._actions}
    defaults = {}
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest not in dests or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        defaults[dest] = value
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, argv, args)
        return args.handler(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except (UsageError, ValueError, OSError, argparse.ArgumentTypeError) as e:
        print(f"premodtag {argv[0] if argv else ''}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
