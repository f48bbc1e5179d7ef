import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from jointkern.cli import main

MODELS = Path(__file__).parent / "models"
CHAIN = str(MODELS / "chain.json")
WEIGHTED = str(MODELS / "weighted.json")
INPUTS = str(MODELS / "inputs.json")
NORMAL = str(MODELS / "normal.json")


def run(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_usage_and_help(capsys):
    code, out, _ = run(capsys)
    assert code == 2 and out.startswith("usage: jointkern")
    code, out, _ = run(capsys, "-h")
    assert code == 0 and "export-dot" in out
    code, _, err = run(capsys, "frobnicate", CHAIN)
    assert code == 2 and "unknown command" in err


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", CHAIN)
    assert (code, out) == (0, "OK\n")


def test_exit_codes():
    cases = [
        (str(MODELS / "syntax_error.json"), 3),
        (str(MODELS / "cyclic_bad.json"), 5),
        (str(MODELS / "type_error.json"), 4),
        (str(MODELS / "no_such_file.json"), 2),
    ]
    for path, want in cases:
        assert main(["validate", path]) == want, path


def test_cycle_violations_are_listed(capsys):
    code, _, err = run(capsys, "validate", str(MODELS / "cyclic_bad.json"))
    assert code == 5
    assert "error:" in err and "cycle" in err


def test_sample_deterministic(capsys):
    code, out1, _ = run(capsys, "sample", CHAIN, "--n", "5", "--seed", "7")
    assert code == 0
    code, out2, _ = run(capsys, "sample", CHAIN, "--n", "5", "--seed", "7")
    assert out1 == out2
    lines = out1.strip().split("\n")
    assert len(lines) == 5
    for line in lines:
        rec = json.loads(line)
        assert set(rec) == {"trace", "output", "logpdf"}
        assert set(rec["trace"]) == {"b1", "b2"}
        assert rec["output"] == rec["trace"]["b2"]
    # different seeds give different records eventually
    code, out3, _ = run(capsys, "sample", CHAIN, "--n", "5", "--seed", "8")
    assert out3 != out1


def test_sample_env_seed(capsys, monkeypatch):
    monkeypatch.setenv("JOINTKERN_SEED", "9")
    code, from_env, _ = run(capsys, "sample", CHAIN, "--n", "4")
    monkeypatch.delenv("JOINTKERN_SEED")
    code, explicit, _ = run(capsys, "sample", CHAIN, "--n", "4", "--seed", "9")
    assert from_env == explicit


def test_sample_out_appends(capsys, tmp_path):
    f = tmp_path / "records.jsonl"
    run(capsys, "sample", CHAIN, "--n", "2", "--seed", "1", "--out", str(f))
    run(capsys, "sample", CHAIN, "--n", "1", "--seed", "2", "--out", str(f))
    assert len(f.read_text().strip().split("\n")) == 3


def test_logpdf_roundtrip(capsys, tmp_path):
    f = tmp_path / "records.jsonl"
    run(capsys, "sample", CHAIN, "--n", "6", "--seed", "3", "--out", str(f))
    recs = [json.loads(line) for line in f.read_text().strip().split("\n")]
    code, out, _ = run(capsys, "logpdf", CHAIN, "--trace", str(f))
    assert code == 0
    got = [float(line) for line in out.strip().split("\n")]
    assert got == [rec["logpdf"] for rec in recs]


def test_logpdf_neg_inf(capsys, tmp_path):
    f = tmp_path / "t.jsonl"
    f.write_text('{"trace": {"g": 0}}\n')
    code, out, _ = run(capsys, "logpdf", str(MODELS / "sure.json"), "--trace", str(f))
    assert (code, out) == (0, "-inf\n")


def test_logpdf_trace_errors(capsys, tmp_path):
    code, _, _ = run(capsys, "logpdf", CHAIN, "--trace",
                     str(tmp_path / "missing.jsonl"))
    assert code == 2

    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"trace": {"b1": 1, "b2": 1}}\nnot json\n')
    code, _, err = run(capsys, "logpdf", CHAIN, "--trace", str(bad))
    assert code == 3 and "bad.jsonl:2" in err

    nofield = tmp_path / "nofield.jsonl"
    nofield.write_text('{"b1": 1}\n')
    assert main(["logpdf", CHAIN, "--trace", str(nofield)]) == 3

    unknown = tmp_path / "unknown.jsonl"
    unknown.write_text('{"trace": {"b1": 1, "zz": 0}}\n')
    assert main(["logpdf", CHAIN, "--trace", str(unknown)]) == 4

    offspace = tmp_path / "offspace.jsonl"
    offspace.write_text('{"trace": {"b1": 1, "b2": 5}}\n')
    assert main(["logpdf", CHAIN, "--trace", str(offspace)]) == 4


def test_do_validate_and_set_forms(capsys):
    assert main(["do", CHAIN, "--set", "flip=1", "validate"]) == 0
    assert main(["do", CHAIN, "--set=flip=1", "validate"]) == 0
    # graph box names resolve to their generator
    assert main(["do", CHAIN, "--set", "b1=1", "validate"]) == 0
    assert main(["do", CHAIN, "--set", "nope=1", "validate"]) == 4
    assert main(["do", CHAIN, "--set", "flip", "validate"]) == 4
    assert main(["do", CHAIN, "--set", "flip=oops", "validate"]) == 4
    assert main(["do", CHAIN, "--set", "flip=1"]) == 2
    assert main(["do"]) == 2


def test_do_sample_removes_box(capsys):
    code, out, _ = run(capsys, "do", CHAIN, "--set", "flip=1",
                       "sample", "--n", "300", "--seed", "0")
    assert code == 0
    lines = out.strip().split("\n")
    ones = 0
    for line in lines:
        rec = json.loads(line)
        assert set(rec["trace"]) == {"b2"}
        ones += rec["output"]
    assert 0.6 < ones / 300 < 0.8


def test_do_on_shared_generator(capsys):
    dup = str(MODELS / "dup_gen.json")
    # a graph box that shares its generator is ambiguous
    code, _, err = run(capsys, "do", dup, "--set", "b1=1", "validate")
    assert code == 4 and "shares generator" in err
    # naming the generator forces every box that carries it
    code, out, _ = run(capsys, "do", dup, "--set", "flip=1",
                       "sample", "--n", "3", "--seed", "0")
    assert code == 0
    for line in out.strip().split("\n"):
        rec = json.loads(line)
        assert rec["output"] == [1, 1] and rec["trace"] == {}


def test_nested_do(capsys):
    code, out, _ = run(capsys, "do", CHAIN, "--set", "flip=1",
                       "do", "--set", "step=0", "sample", "--n", "3", "--seed", "1")
    assert code == 0
    for line in out.strip().split("\n"):
        rec = json.loads(line)
        assert rec == {"trace": {}, "output": 0, "logpdf": 0.0}


def test_cf_command(capsys, tmp_path):
    u = tmp_path / "u.jsonl"
    u.write_text('{"b1": [0.6], "b2": [0.6]}\n')
    code, out, _ = run(capsys, "cf", CHAIN, "--u", str(u))
    assert code == 0
    assert json.loads(out) == {"trace": {"b1": 0, "b2": 0}, "output": 0}
    code, out, _ = run(capsys, "cf", CHAIN, "--u", str(u), "--set", "flip=1")
    assert json.loads(out) == {"trace": {"b2": 1}, "output": 1}


def test_cf_under_do_prefix(capsys, tmp_path):
    # do ... cf --u is the same surgery as cf --set
    u = tmp_path / "u.jsonl"
    u.write_text('{"b1": [0.6], "b2": [0.6]}\n')
    code, via_do, _ = run(capsys, "do", CHAIN, "--set", "flip=1",
                          "cf", "--u", str(u))
    assert code == 0
    code, via_set, _ = run(capsys, "cf", CHAIN, "--u", str(u), "--set", "flip=1")
    assert via_do == via_set


def test_abduct_cf_roundtrip(capsys, tmp_path):
    recs = tmp_path / "records.jsonl"
    run(capsys, "sample", CHAIN, "--n", "4", "--seed", "2", "--out", str(recs))
    originals = [json.loads(line) for line in recs.read_text().strip().split("\n")]

    ufile = tmp_path / "u.jsonl"
    code, _, _ = run(capsys, "abduct", CHAIN, "--trace", str(recs),
                     "--out", str(ufile))
    assert code == 0
    code, out, _ = run(capsys, "cf", CHAIN, "--u", str(ufile))
    assert code == 0
    replayed = [json.loads(line) for line in out.strip().split("\n")]
    assert len(replayed) == len(originals)
    for rec, rep in zip(originals, replayed):
        assert rep["trace"] == rec["trace"]
        assert rep["output"] == rec["output"]


def test_abduct_offsupport(capsys, tmp_path):
    t = tmp_path / "t.jsonl"
    t.write_text('{"trace": {"g": 0}}\n')
    assert main(["abduct", str(MODELS / "sure.json"), "--trace", str(t)]) == 4


def test_spw_chain(capsys):
    code, out, _ = run(capsys, "spw", CHAIN, "--n", "2000", "--seed", "0")
    assert code == 0
    report = json.loads(out)
    assert len(report) == 1
    row = report[0]
    assert row["h"] == "$0" and row["pass"] is True
    assert row["reference"] == pytest.approx(0.45, abs=1e-12)

    code, out, _ = run(capsys, "spw", CHAIN, "--n", "2000", "--seed", "0",
                       "--h", "$0", "--ref", "0.8")
    assert code == 1
    assert json.loads(out)[0]["pass"] is False

    assert main(["spw", CHAIN, "--n", "10"]) == 4


def test_spw_weighted_model(capsys):
    code, out, _ = run(capsys, "spw", WEIGHTED, "--n", "4000", "--seed", "1")
    assert code == 0
    row = json.loads(out)[0]
    assert row["reference"] == pytest.approx(0.9, abs=1e-12)
    assert row["pass"] is True


def test_spw_continuous_reference(capsys):
    code, out, _ = run(capsys, "spw", str(MODELS / "uniform2x.json"),
                       "--n", "20000", "--seed", "3",
                       "--h", "$0", "--ref", str(8.0 / 3.0))
    assert code == 0 and json.loads(out)[0]["pass"] is True


def test_cover_finite(capsys):
    code, out, _ = run(capsys, "cover", CHAIN, "--count", "2")
    assert code == 0
    rows = [json.loads(line) for line in out.strip().split("\n")]
    assert rows[0]["index"] == 0
    assert rows[0]["mass"] == 2.0
    assert rows[0]["piece"] == {"points": [0, 1]}

    code, out, _ = run(capsys, "cover", CHAIN, "--point", "1")
    rec = json.loads(out)
    assert rec["point"] == 1 and isinstance(rec["index"], int)
    assert main(["cover", CHAIN, "--point", "7"]) == 4
    assert main(["cover", CHAIN, "--point", "{bad"]) == 4


def test_cover_real(capsys):
    code, out, _ = run(capsys, "cover", NORMAL, "--count", "3")
    assert code == 0
    rows = [json.loads(line) for line in out.strip().split("\n")]
    for row in rows:
        assert "box" in row["piece"]
        assert row["mass"] > 0
    code, out, _ = run(capsys, "cover", NORMAL, "--point", "-3.7")
    rec = json.loads(out)
    assert rec["point"] == -3.7


def test_export_dot(capsys, tmp_path):
    code, out, _ = run(capsys, "export-dot", CHAIN)
    assert code == 0
    assert out.startswith("digraph")
    assert '"b1" [shape=box, label="b1:flip"];' in out

    f = tmp_path / "chain.dot"
    code, piped, _ = run(capsys, "export-dot", CHAIN, "--out", str(f))
    assert code == 0 and piped == ""
    assert f.read_text() == out


def test_input_flag(capsys):
    code, _, err = run(capsys, "sample", INPUTS, "--n", "1")
    assert code == 4 and "pass --input" in err
    code, out, _ = run(capsys, "sample", INPUTS, "--n", "200", "--seed", "0",
                       "--input", "1")
    assert code == 0
    ones = sum(json.loads(l)["output"] for l in out.strip().split("\n"))
    assert 0.6 < ones / 200 < 0.8
    assert main(["sample", INPUTS, "--n", "1", "--input", "{bad"]) == 3
    assert main(["sample", INPUTS, "--n", "1", "--input", "0.5"]) == 4


def test_logpdf_with_input(capsys, tmp_path):
    t = tmp_path / "t.jsonl"
    t.write_text('{"trace": {"g": 1}}\n')
    code, out, _ = run(capsys, "logpdf", INPUTS, "--trace", str(t),
                       "--input", "1")
    assert code == 0
    assert float(out) == pytest.approx(math.log(0.7), abs=1e-12)
    code, out, _ = run(capsys, "logpdf", INPUTS, "--trace", str(t),
                       "--input", "0")
    assert float(out) == pytest.approx(math.log(0.2), abs=1e-12)


def test_subprocess_byte_identical(capsys):
    cmd = [sys.executable, "-m", "jointkern", "sample", CHAIN,
           "--n", "3", "--seed", "5"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.returncode == 0 and a.stdout == b.stdout
    code, out, _ = run(capsys, "sample", CHAIN, "--n", "3", "--seed", "5")
    assert out.encode() == a.stdout
