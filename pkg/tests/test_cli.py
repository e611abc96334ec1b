from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from premodtag.cli import build_parser, main
from premodtag.corpus import read_tsv

FIXTURES = Path(__file__).parent / "fixtures"
MINI = str(FIXTURES / "mini_corpus.tsv")
LISTS = ["--lemmas", str(FIXTURES / "lemmas.txt"),
         "--named-entities", str(FIXTURES / "named_entities.txt"),
         "--foreign", str(FIXTURES / "foreign.txt")]


def run_module(*args, stdin=b""):
    return subprocess.run([sys.executable, "-m", "premodtag", *args], input=stdin,
                          capture_output=True, timeout=120)


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err
    assert main([]) == 2


def test_tokenize_empty_stdin():
    proc = run_module("tokenize", "-")
    assert proc.returncode == 0
    assert proc.stdout == b""


def test_tokenize_stdin_to_stdout():
    proc = run_module("tokenize", "-", stdin="Il dort. Peut-être l'homme\n".encode())
    assert proc.returncode == 0
    lines = proc.stdout.decode().splitlines()
    assert lines[0] == "form\tlemma\tPOS\tmorph"
    assert [ln.split("\t")[0] for ln in lines[1:] if ln] == \
        ["Il", "dort", ".", "Peut", "-", "être", "l'", "homme"]


def test_tokenize_file_with_manifest(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("quant à lui\n", encoding="utf-8")
    out = tmp_path / "out.tsv"
    assert main(["tokenize", str(src), "-o", str(out), "--no-split-elision"]) == 0
    assert [t.form for t in read_tsv(out).tokens()] == ["quant", "à", "lui"]
    manifest = json.loads((tmp_path / "out.tsv.manifest.json").read_text())
    assert manifest["subcommand"] == "tokenize"
    assert manifest["config"]["no_split_elision"] is True
    assert manifest["inputs"][str(src)].startswith("sha256:")
    assert manifest["outputs"][str(out)].startswith("sha256:")
    assert not list(tmp_path.glob(".*.tmp"))


def test_split_outputs_and_determinism(tmp_path, capsys):
    args = ["split", "--ratios", "0.84,0.06,0.10", "--seed", "1", MINI, str(tmp_path / "a")]
    names = ("train.tsv", "dev.tsv", "test.tsv", "manifest.json")
    assert main(args) == 0
    first = {f: (tmp_path / "a" / f).read_bytes() for f in names}
    assert main(args) == 0
    assert first == {f: (tmp_path / "a" / f).read_bytes() for f in names}
    assert "train\t" in capsys.readouterr().out
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    achieved = manifest["config"]["achieved"]
    assert manifest["config"]["seed"] == 1 and manifest["config"]["ratios"] == [0.84, 0.06, 0.1]
    assert sum(achieved[p]["tokens"] for p in ("train", "dev", "test")) == read_tsv(MINI).n_tokens
    assert abs(achieved["train"]["share"] - 0.84) < 0.015


def test_split_bad_ratios(tmp_path, capsys):
    assert main(["split", "--ratios", "0.5,0.5,0.5", MINI, str(tmp_path)]) == 2
    assert main(["split", "--ratios", "a,b", MINI, str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    config = tmp_path / "c.json"
    config.write_text(json.dumps({"ratios": "0.5,0.25,0.25", "seed": 7}))
    assert main(["split", "--config", str(config), MINI, str(tmp_path / "x")]) == 0
    m = json.loads((tmp_path / "x" / "manifest.json").read_text())["config"]
    assert (m["ratios"], m["seed"]) == ([0.5, 0.25, 0.25], 7)
    assert main(["split", "--config", str(config), "--seed", "3", MINI, str(tmp_path / "y")]) == 0
    m = json.loads((tmp_path / "y" / "manifest.json").read_text())["config"]
    assert (m["ratios"], m["seed"]) == ([0.5, 0.25, 0.25], 3)
    config.write_text(json.dumps({"no_such_option": 1}))
    assert main(["split", "--config", str(config), MINI, str(tmp_path / "z")]) == 2


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("PREMODTAG_SEED", "11")
    assert main(["augment", MINI, "-o", str(tmp_path / "a.tsv"), "--p-long-s", "0.5"]) == 0
    manifest = json.loads((tmp_path / "a.tsv.manifest.json").read_text())
    assert manifest["config"]["seed"] == 11
    monkeypatch.setenv("PREMODTAG_SEED", "nope")
    assert main(["augment", MINI, "-o", str(tmp_path / "b.tsv")]) == 2


def test_augment_reproducible(tmp_path):
    args = ["augment", MINI, "--seed", "5", "--p-long-s", "0.3", "--p-tilde", "0.2"]
    assert main(args + ["-o", str(tmp_path / "a.tsv")]) == 0
    assert main(args + ["-o", str(tmp_path / "b.tsv")]) == 0
    assert (tmp_path / "a.tsv").read_bytes() == (tmp_path / "b.tsv").read_bytes()
    assert main(["augment", MINI, "--p-long-s", "2", "-o", str(tmp_path / "c.tsv")]) == 2


def test_validate_exit_codes(tmp_path, capsys):
    assert main(["validate", MINI, *LISTS]) == 0
    bad = tmp_path / "bad.tsv"
    bad.write_text("form\tlemma\tPOS\tmorph\ntandis\ttandis\tLOCconj\t_\nxyzzy\txyzzy\tNOMcom\t_\n",
                   encoding="utf-8")
    report = tmp_path / "report.tsv"
    assert main(["validate", str(bad), *LISTS, "--report", str(report)]) == 1
    rows = report.read_text().splitlines()
    assert rows[0] == "kind\titem\tdetail"
    assert "invalid_pos\tdefault/default-1/1\tLOCconj" in rows
    assert "unknown_lemma\txyzzy\t1" in rows
    assert main(["validate", str(bad), *LISTS, "--max-findings", "2"]) == 0
    assert "coverage" in capsys.readouterr().out


def test_format_errors(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("form\tlemma\n", encoding="utf-8")
    assert main(["normalize", str(bad)]) == 2
    assert main(["normalize", str(tmp_path / "missing.tsv")]) == 2
    bad.write_bytes(b"form\tlemma\tPOS\tmorph\n\xff\t_\t_\t_\n")
    assert main(["normalize", str(bad)]) == 2


def test_normalize_and_inventory(tmp_path, capsys):
    src = tmp_path / "in.tsv"
    src.write_text("form\tlemma\tPOS\tmorph\ná\tá\tPRE\t_\nà\tà\tPRE\t_\n", encoding="utf-8")
    assert main(["inventory", str(src)]) == 0
    before = capsys.readouterr().out.splitlines()
    assert len(before) == 2 and before[0].startswith("U+00E0\tà\tLATIN SMALL LETTER A WITH GRAVE\t1")
    assert main(["inventory", "--nfkd", str(src)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 3
    out = tmp_path / "n.tsv"
    assert main(["normalize", str(src), "-o", str(out)]) == 0
    assert "a\u0301" in out.read_text(encoding="utf-8")


def test_sample(tmp_path):
    out = tmp_path / "s.tsv"
    assert main(["sample", MINI, "--n-samples", "3", "--sample-tokens", "40",
                 "--strata", "16,17,18", "-o", str(out)]) == 0
    assert sorted(d.century for d in read_tsv(out).documents) == [16, 17, 18]
    assert main(["sample", MINI, "--strata", "15", "-o", str(out)]) == 2


def test_pipeline(tmp_path, capsys):
    parts = tmp_path / "parts"
    assert main(["split", MINI, str(parts), "--seed", "0"]) == 0
    model = tmp_path / "model.json"
    assert main(["train", str(parts / "train.tsv"), "-o", str(model), "--seed", "0"]) == 0
    assert json.loads(model.read_text())["kind"] == "context"
    pred = tmp_path / "pred.tsv"
    assert main(["tag", str(model), str(parts / "test.tsv"), "-o", str(pred), "--jobs", "2"]) == 0
    capsys.readouterr()
    conf = tmp_path / "conf.tsv"
    assert main(["eval", str(parts / "test.tsv"), str(pred), "--model", str(model),
                 "--task", "pos", "--confusions", str(conf)]) == 0
    table = capsys.readouterr().out
    assert "ambiguous tokens" in table and "unknown tokens" in table
    assert conf.read_text().splitlines()[0] == "gold\tpredicted\tcount"

    majority = tmp_path / "majority.json"
    assert main(["train", MINI, "--kind", "majority", "-o", str(majority)]) == 0
    pairs, summary = tmp_path / "pairs.tsv", tmp_path / "summary.json"
    assert main(["robustness", "--model", str(majority), "--gold", MINI, "--test",
                 str(parts / "test.tsv"), "--train", MINI, "-o", str(pairs),
                 "--summary", str(summary)]) == 0
    data = json.loads(summary.read_text())
    assert data["median_delta"] == 0 and data["geo_mean_delta"] == 0
    assert pairs.read_text().splitlines()[0].startswith("form_a\tform_b\tlemma")


def test_tag_raw_text(tmp_path):
    model = tmp_path / "m.json"
    assert main(["train", MINI, "--kind", "majority", "-o", str(model)]) == 0
    text = tmp_path / "t.txt"
    text.write_text("il mangeoit le pain.\n", encoding="utf-8")
    out = tmp_path / "o.tsv"
    assert main(["tag", str(model), str(text), "--text", "-o", str(out)]) == 0
    lemmas = [t.lemma for t in read_tsv(out).tokens()]
    assert lemmas == ["il", "manger", "le", "pain", "."]


def test_train_rejects_unannotated(tmp_path):
    src = tmp_path / "u.tsv"
    src.write_text("form\tlemma\tPOS\tmorph\nx\t_\t_\t_\n", encoding="utf-8")
    assert main(["train", str(src), "-o", str(tmp_path / "m.json")]) == 2


@pytest.mark.parametrize("command", ["tokenize", "normalize", "inventory", "validate", "augment",
                                     "split", "sample", "train", "tag", "eval", "robustness"])
def test_help(command, capsys):
    assert main([command, "--help"]) == 0
    text = capsys.readouterr().out
    assert "form<TAB>lemma<TAB>POS<TAB>morph" in text
    sub = build_parser()._subparsers._group_actions[0].choices[command]
    for action in sub._actions:
        for flag in action.option_strings:
            assert flag in text
