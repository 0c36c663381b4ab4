import csv
import io
import json
import os
import subprocess
import sys
import warnings

import numpy as np
import pytest

from zipfsurrogate import sample_corpus_path
from zipfsurrogate.cli import main
from zipfsurrogate.seqmodel import FrequencyTable
from zipfsurrogate.surrogate import generate_surrogate

CORPUS = str(sample_corpus_path())


def run(*argv):
    return main([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def analyzed(tmp_path_factory):
    out = tmp_path_factory.mktemp("analyze")
    assert run("analyze", CORPUS, "--out", out) == 0
    return out


@pytest.fixture(scope="module")
def matched(tmp_path_factory):
    out = tmp_path_factory.mktemp("surrogate")
    assert run("surrogate", CORPUS, "--match-input", "--out", out) == 0
    return out


def test_analyze_outputs(analyzed):
    assert {p.name for p in analyzed.iterdir()} == {"zipf.csv", "dfa.csv", "summary.json", "manifest.json"}
    zipf = read_csv(analyzed / "zipf.csv")
    assert list(zipf[0]) == ["rank", "symbol", "count", "freq"]
    counts = [int(r["count"]) for r in zipf]
    assert counts == sorted(counts, reverse=True)
    summary = read_json(analyzed / "summary.json")
    assert sum(counts) == summary["N"] and len(zipf) == summary["V"]
    for key in ("alpha", "stderr", "r2", "fit_lo", "fit_hi", "manifest"):
        assert key in summary
    assert 0.6 <= summary["alpha"] <= 0.8
    dfa = read_csv(analyzed / "dfa.csv")
    assert list(dfa[0]) == ["L", "F"] and len(dfa) == len(summary["dfa_config"]["window_sizes"])


def test_manifest_contents(analyzed):
    m = read_json(analyzed / "manifest.json")
    assert m["command"] == "analyze"
    assert m["inputs"][0]["bytes"] == os.path.getsize(CORPUS)
    assert len(m["inputs"][0]["sha256"]) == 64
    for key in ("order", "windows", "fit_range", "segmentation", "format", "encoding"):
        assert key in m["config"]
    assert m["tool_version"]


def test_replay_is_byte_identical(analyzed, tmp_path):
    assert run("--replay", analyzed / "manifest.json", "--out", tmp_path) == 0
    for name in ("zipf.csv", "dfa.csv", "summary.json", "manifest.json"):
        assert (tmp_path / name).read_bytes() == (analyzed / name).read_bytes(), name


def test_surrogate_match_input(matched, analyzed):
    summary = read_json(matched / "summary.json")
    assert summary["converged"] and summary["frequencies_preserved"]
    assert abs(summary["achieved_alpha"] - summary["input_alpha"]) < summary["epsilon"]
    assert summary["trace"] and summary["iterations"] == len(summary["trace"])
    rows = read_csv(matched / "zipf_compare.csv")
    assert all(r["count_input"] == r["count_surrogate"] for r in rows)
    lines = (matched / "surrogate.txt").read_text().splitlines()
    assert len(lines) == summary["N"]


def test_analyze_of_surrogate_reproduces_table_and_alpha(matched, analyzed, tmp_path):
    assert run("analyze", matched / "surrogate.txt", "--out", tmp_path) == 0
    before, after = read_csv(analyzed / "zipf.csv"), read_csv(tmp_path / "zipf.csv")
    assert [r["count"] for r in before] == [r["count"] for r in after]
    assert {r["symbol"]: r["count"] for r in before} == {r["symbol"]: r["count"] for r in after}
    a0 = read_json(analyzed / "summary.json")["alpha"]
    a1 = read_json(tmp_path / "summary.json")["alpha"]
    assert abs(a1 - a0) < 0.01


def test_surrogate_target_07_checked_by_analyze(tmp_path):
    out = tmp_path / "s"
    assert run("surrogate", CORPUS, "--target-alpha", 0.7, "--eps", 0.01, "--emit", "ranks", "--out", out) == 0
    summary = read_json(out / "summary.json")
    assert summary["converged"] and abs(summary["achieved_alpha"] - 0.7) < 0.01
    ranks = np.loadtxt(out / "surrogate.txt")
    (tmp_path / "ranks.txt").write_text("\n".join(str(int(r)) for r in ranks) + "\n")
    # the rank series is exactly what the search measured
    assert run("dfa", tmp_path / "ranks.txt", "--out", tmp_path / "d") == 0
    assert read_json(tmp_path / "d" / "summary.json")["alpha"] == pytest.approx(summary["achieved_alpha"], abs=1e-12)


def _write_dna(path, n, seed, alpha0):
    # long-range correlated DNA, itself a surrogate of a uniform composition
    table = FrequencyTable.from_counts(list("ACGT"), [n // 4 + n % 4, n // 4, n // 4, n // 4])
    body = "".join(generate_surrogate(table, alpha0, seed).labels())
    path.write_text(">chr test\n" + "\n".join(body[i : i + 70] for i in range(0, n, 70)) + "\n")


def test_fasta_analyze_and_surrogate(tmp_path):
    fa = tmp_path / "x.fa"
    _write_dna(fa, 60_000, 0, alpha0=0.8)
    assert run("analyze", fa, "--format", "fasta", "--windows", 12, "--out", tmp_path / "a") == 0
    s = read_json(tmp_path / "a" / "summary.json")
    assert s["encoding"] == "ry" and s["N"] == 60_000
    assert [int(r["L"]) for r in read_csv(tmp_path / "a" / "dfa.csv")] == s["dfa_config"]["window_sizes"]
    assert run("surrogate", fa, "--format", "fasta", "--match-input", "--out", tmp_path / "s") == 0
    s2 = read_json(tmp_path / "s" / "summary.json")
    assert s2["converged"] and s2["frequencies_preserved"]
    lines = (tmp_path / "s" / "surrogate.txt").read_text().split()
    comp = {b: lines.count(b) / len(lines) for b in "ACGT"}
    assert comp == pytest.approx(s2["composition"], abs=0)


def test_fgn_then_dfa_white_noise(tmp_path):
    assert run("fgn", "--n", 2**16, "--alpha0", 0.5, "--seed", 3, "--out", tmp_path / "t") == 0
    assert run("fgn", "--n", 2**16, "--alpha0", 0.5, "--seed", 3, "--binary", "--out", tmp_path / "b") == 0
    text = np.loadtxt(tmp_path / "t" / "series.txt")
    binary = np.fromfile(tmp_path / "b" / "series.f64", dtype="<f8")
    assert np.array_equal(text, binary)
    for src in (tmp_path / "t" / "series.txt", tmp_path / "b" / "series.f64"):
        out = tmp_path / ("d_" + src.parent.name)
        assert run("dfa", src, "--out", out) == 0
        s = read_json(out / "summary.json")
        assert 0.47 <= s["alpha"] <= 0.53
        assert list(read_csv(out / "dfa.csv")[0]) == ["L", "F", "log10L", "log10F"]
        assert set(s) >= {"alpha", "stderr", "r2", "fit_lo", "fit_hi"}


def test_dfa_reads_stdin(tmp_path, monkeypatch):
    x = np.random.default_rng(0).normal(size=5000)
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO("\n".join(map(repr, x.tolist())).encode())))
    assert run("dfa", "-", "--fit-range", "10:500", "--out", tmp_path) == 0
    s = read_json(tmp_path / "summary.json")
    assert s["fit_lo"] >= 10 and s["fit_hi"] <= 500


def test_shuffle_words_then_analyze(tmp_path):
    assert run("shuffle", CORPUS, "--level", "words", "--seed", 1, "--out", tmp_path / "w") == 0
    assert run("analyze", tmp_path / "w" / "shuffled.txt", "--out", tmp_path / "a") == 0
    assert 0.47 <= read_json(tmp_path / "a" / "summary.json")["alpha"] <= 0.53


def test_shuffle_levels(tmp_path):
    src = tmp_path / "t.txt"
    src.write_text("One two. Three four! Five six?")
    for level in ("chars", "words", "sentences"):
        assert run("shuffle", src, "--level", level, "--out", tmp_path / level) == 0
    assert sorted((tmp_path / "chars" / "shuffled.txt").read_text()) == sorted(src.read_text())
    assert sorted((tmp_path / "words" / "shuffled.txt").read_text().split()) == ["five", "four", "one", "six", "three", "two"]


def test_exit_codes(tmp_path, capsys):
    assert run("surrogate", CORPUS, "--target-alpha", 0.3, "--out", tmp_path) == 2
    assert run("analyze", tmp_path / "missing.txt", "--out", tmp_path) == 4
    empty = tmp_path / "empty.txt"
    empty.write_text("  \n")
    assert run("analyze", empty, "--out", tmp_path) == 2
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"ok \xff")
    assert run("analyze", bad, "--out", tmp_path) == 2
    assert "byte offset 3" in capsys.readouterr().err
    assert run("surrogate", CORPUS, "--target-alpha", 0.9, "--bracket", "0.5:0.55", "--out", tmp_path) == 2
    assert "unreachable" in capsys.readouterr().err
    assert run("fgn", "--n", 10, "--alpha0", 1.5, "--out", tmp_path) == 2
    no_bases = tmp_path / "n.fa"
    no_bases.write_text(">x\nNNNN\n")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert run("analyze", no_bases, "--format", "fasta", "--out", tmp_path) == 2
    assert "empty corpus" in capsys.readouterr().err


def test_non_convergence_writes_partial_result(tmp_path):
    out = tmp_path / "nc"
    code = run("surrogate", CORPUS, "--target-alpha", 0.75, "--eps", 1e-9, "--max-iters", 3, "--out", out)
    assert code == 3
    s = read_json(out / "summary.json")
    assert s["converged"] is False and s["iterations"] == 3
    assert (out / "surrogate.txt").exists() and (out / "manifest.json").exists()


def test_out_placement_and_env(tmp_path, monkeypatch):
    assert run("fgn", "--n", 16, "--alpha0", 0.6, "--out", tmp_path / "after") == 0
    assert run("--out", tmp_path / "before", "fgn", "--n", 16, "--alpha0", 0.6) == 0
    monkeypatch.setenv("ZIPFSURROGATE_OUT", str(tmp_path / "env"))
    assert run("fgn", "--n", 16, "--alpha0", 0.6) == 0
    ref = (tmp_path / "after" / "series.txt").read_bytes()
    assert (tmp_path / "before" / "series.txt").read_bytes() == ref
    assert (tmp_path / "env" / "series.txt").read_bytes() == ref


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "zipfsurrogate", "fgn", "--n", "8", "--alpha0", "0.7", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert len((tmp_path / "series.txt").read_text().split()) == 8
