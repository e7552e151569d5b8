import csv
import io
import json
import subprocess
import sys

import pytest

from scriptfidelity.cli import main

HI_ROWS = [
    {"id": "a", "lang": "hi", "model": "m1", "hypothesis": "नमस्ते दुनिया", "reference": "नमस्ते दुनिया"},
    {"id": "b", "lang": "hi", "model": "m1", "hypothesis": "namaste duniya", "reference": "नमस्ते दुनिया"},
    {"id": "c", "lang": "hi", "model": "m2", "hypothesis": "...", "reference": "नमस्ते"},
]


def run(argv, capsys=None):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


@pytest.fixture
def corpus(write_jsonl):
    return str(write_jsonl(HI_ROWS))


class TestScore:
    def test_text(self, corpus):
        code, out = run(["score", corpus])
        assert code == 0
        assert "corpus[hi]: utterances=3 null=1 mean_sfr=0.5000" in out

    def test_jsonl(self, corpus):
        code, out = run(["score", corpus, "--format", "jsonl"])
        lines = [json.loads(x) for x in out.splitlines()]
        assert [x.get("sfr") for x in lines[:3]] == [1.0, 0.0, None]
        assert lines[3]["corpus"]["mean_sfr"] == 0.5

    def test_csv(self, corpus):
        code, out = run(["score", corpus, "--format", "csv"])
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows[-1]["id"] == "corpus:hi" and rows[2]["sfr"] == ""

    def test_lang_override(self, corpus):
        _, out = run(["score", corpus, "--lang", "bn", "--format", "jsonl"])
        assert json.loads(out.splitlines()[0])["sfr"] == 0.0

    def test_byte_identical(self, corpus):
        assert run(["score", corpus, "--format", "csv"]) == run(["score", corpus, "--format", "csv"])

    def test_missing_lang_is_usage(self, write_jsonl):
        assert run(["score", str(write_jsonl([{"hypothesis": "x"}]))])[0] == 2

    def test_unknown_lang_is_usage(self, corpus):
        assert run(["score", corpus, "--lang", "xx"])[0] == 2

    def test_bad_input_is_format_error(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text("{nope\n")
        assert run(["score", str(p)])[0] == 3

    def test_argparse_usage(self):
        with pytest.raises(SystemExit) as exc:
            main(["score"])
        assert exc.value.code == 2


class TestEval:
    def test_jsonl_and_matrix(self, corpus, tmp_path):
        mpath = tmp_path / "m.csv"
        code, out = run(["eval", corpus, "--format", "jsonl", "--matrix-out", str(mpath)])
        assert code == 0
        rows = [json.loads(x) for x in out.splitlines()]
        assert rows[0]["wer"] == 0.0 and rows[1]["wer"] == 1.0
        assert rows[2]["wer"] == 1.0  # empty hypothesis: all deletions
        text = mpath.read_text()
        assert text.splitlines()[0] == "model,language,sfr,wer"
        assert "m1,hi,50.0,50.0" in text

    def test_missing_reference_warns(self, write_jsonl, capsys):
        path = write_jsonl([{"id": "x", "lang": "hi", "hypothesis": "नमस्ते"}])
        code, out = run(["eval", str(path)])
        assert code == 0 and "no reference" in capsys.readouterr().err


class TestTaxonomy:
    def test_groups(self, write_jsonl):
        rows = [{"lang": "bn", "model": "mms", "hypothesis": "আমি ভাত খাই"}] * 3
        rows += [{"lang": "bn", "model": "wh", "hypothesis": "ami bhat khai"}] * 2
        code, out = run(["taxonomy", str(write_jsonl(rows)), "--format", "csv"])
        got = {r["group"]: r for r in csv.DictReader(io.StringIO(out))}
        assert got["mms"]["Target"] == "3" and got["wh"]["Latin"] == "2"

    def test_labels_out_keeps_ids(self, write_jsonl, tmp_path):
        rows = [{"id": "same-file", "lang": "hi", "hypothesis": "नमस्ते"}]
        a = write_jsonl(rows, "a.jsonl")
        b = write_jsonl(rows, "b.jsonl")
        lab = tmp_path / "labels.jsonl"
        code, _ = run(["taxonomy", str(a), str(b), "--labels-out", str(lab)])
        # same ids across files are fine for taxonomy
        assert code == 0
        assert [json.loads(x)["id"] for x in lab.read_text().splitlines()] == ["same-file"] * 2

    def test_bad_dominance(self, corpus):
        assert run(["taxonomy", corpus, "--dominance", "0"])[0] == 2


class TestReport:
    def test_fixture(self):
        code, out = run(["report", "--fixture"])
        assert code == 0
        assert "18 of 53 evaluated (34.0%; 95% Wilson CI 23-47%)" in out
        assert "highest collapsed 7.2%, lowest non-collapsed 13.0% (5.8 points)" in out
        assert "18 below 10%, 5 intermediate, 30 above 90%" in out
        assert "discrepancies" in out

    def test_csv_and_scatter(self, tmp_path):
        sc = tmp_path / "scatter.csv"
        code, out = run(["report", "--fixture", "--format", "csv", "--scatter", str(sc)])
        assert len(out.splitlines()) == 55
        assert len(sc.read_text().splitlines()) == 54

    def test_matrix_round_trip(self, tmp_path):
        _, fixture_out = run(["report", "--fixture", "--format", "csv"])
        p = tmp_path / "m.csv"
        p.write_text("model,language,sfr,wer\nwhisper-x,hi,3.0,120.0\nmms-y,hi,99.0,30.0\n")
        code, out = run(["report", "--matrix", str(p)])
        assert code == 0 and "1 of 2 evaluated" in out

    def test_predictions(self, corpus):
        code, out = run(["report", "--predictions", corpus, "--family", "m1=Fam", "--family", "m2=Fam"])
        assert code == 0 and "Fam" in out

    def test_source_required(self):
        assert run(["report"])[0] == 2
        assert run(["report", "--fixture", "--matrix", "x.csv"])[0] == 2

    def test_bad_family(self):
        assert run(["report", "--fixture", "--family", "oops"])[0] == 2

    def test_bad_matrix(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("a,b\n")
        assert run(["report", "--matrix", str(p)])[0] == 3


class TestValidate:
    def test_passes(self):
        code, out = run(["validate"])
        assert code == 0

    def test_pashto_predictions(self, write_jsonl):
        rows = [{"model": "whisper-small", "hypothesis": "za kor ta zam"}] * 5
        assert run(["validate", "--pashto-predictions", str(write_jsonl(rows))])[0] == 0
        rows = [{"model": "whisper-small", "hypothesis": "زه کور ته ځم"}]
        assert run(["validate", "--pashto-predictions", str(write_jsonl(rows, "x.jsonl"))])[0] == 1

    def test_broken_override_fails(self, tmp_path):
        p = tmp_path / "s.yaml"
        # Hindi pointed at the Bengali block: positives must fail
        p.write_text("hi:\n  script: Devanagari\n  ranges: ['0980-09FF']\n"
                     "  normalization: Indic\n")
        assert run(["validate", "--lang", "hi", "--scripts", str(p)])[0] == 1


def test_scripts_override_changes_scores(tmp_path, corpus):
    p = tmp_path / "s.yaml"
    p.write_text("hi:\n  script: Latin\n  ranges: ['0041-007A']\n  normalization: LatinLowercase\n")
    _, out = run(["score", corpus, "--scripts", str(p), "--format", "jsonl"])
    assert [json.loads(x).get("sfr") for x in out.splitlines()[:2]] == [0.0, 1.0]


def test_bad_scripts_file(tmp_path, corpus):
    p = tmp_path / "s.yaml"
    p.write_text("hi: [1, 2\n")
    assert run(["score", corpus, "--scripts", str(p)])[0] == 3


class TestAudit:
    def sfr(self, lines, *args):
        proc = subprocess.run(
            [sys.executable, "-m", "scriptfidelity.cli", "audit", "--no-timestamp", *args],
            input="".join(json.dumps(x, ensure_ascii=False) + "\n" for x in lines)
            if isinstance(lines, list) else lines,
            capture_output=True, text=True, encoding="utf-8",
        )
        return proc

    def test_alert_stream(self):
        lines = [{"id": f"u{i}", "lang": "hi", "hypothesis": "hello"} for i in range(10)]
        proc = self.sfr(lines, "--window", "5")
        assert proc.returncode == 0
        (ev,) = [json.loads(x) for x in proc.stdout.splitlines()]
        assert ev == {"event": "alert", "language": "hi", "window_mean": 0.0,
                      "window_size": 5, "utterance_id": "u4", "sequence": 5}
        assert "ALERT" in proc.stderr

    def test_fail_on_alert(self):
        lines = [{"lang": "hi", "hypothesis": "hello"}] * 5
        assert self.sfr(lines, "--window", "5", "--fail-on-alert").returncode == 1

    def test_malformed_line_continues(self):
        good = json.dumps({"lang": "hi", "hypothesis": "hello"}) + "\n"
        proc = self.sfr(good + "{bad\n" + good * 4, "--window", "5")
        assert proc.returncode == 3 and len(proc.stdout.splitlines()) == 1

    def test_bad_window(self):
        assert self.sfr([], "--window", "0").returncode == 2

    def test_deterministic(self):
        lines = [{"lang": "hi", "hypothesis": h} for h in ["नमस्ते", "hi there"] * 30]
        a = self.sfr(lines, "--window", "10")
        b = self.sfr(lines, "--window", "10")
        assert a.stdout == b.stdout and a.stdout
