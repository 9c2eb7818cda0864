import json
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.stats import chisquare

from morpho_hebb.cli import main
from morpho_hebb.corpus import NormalizedStream, normalize_text, split_batches, uniform_random_string
from morpho_hebb.embedding import EmbeddingStore, learn_words
from morpho_hebb.exceptions import DocumentError, VersionError
from morpho_hebb.persistence import atomic_write, dumps, load_hierarchy, load_store, save_hierarchy, save_store

from conftest import RUN_SENTENCE


class TestNormalize:
    def test_my_name(self):
        assert normalize_text("My name").tokens == ("m", "y", None, "n", "a", "m", "e")

    def test_alice_bang(self):
        assert normalize_text("Alice!").text == "alice "

    def test_dash_only(self):
        assert normalize_text("\u2014").tokens == (None,)

    def test_no_double_separators(self):
        assert "  " not in normalize_text("a,, - b\n\nc").text

    def test_idempotent(self):
        raw = "It was the best -- of TIMES; 1859!"
        s = normalize_text(raw)
        assert normalize_text(s.render()) == s

    def test_batches_cut_at_separators(self):
        s = normalize_text("one two three four five six seven")
        parts = split_batches(s, 3)
        assert "".join(p.text for p in parts) == s.text
        assert all(p.text.endswith(" ") for p in parts[:-1])


class TestUniformString:
    def test_chi_square(self):
        s = uniform_random_string(10000, 42)
        counts = [s.count(c) for c in "abcdefghijklmnopqrstuvwxyz"]
        assert chisquare(counts).pvalue > 0.001

    def test_length_one(self):
        assert len(uniform_random_string(1, 0)) == 1

    def test_deterministic(self):
        assert uniform_random_string(50, 3) == uniform_random_string(50, 3)


class TestPersistence:
    def test_hierarchy_bytes(self, tmp_path, run_h):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_hierarchy(run_h, a)
        save_hierarchy(load_hierarchy(a), b)
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().endswith("\n")

    def test_store_bytes(self, tmp_path, run_h):
        s = learn_words(EmbeddingStore(), run_h, ["run", "they"])
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_store(s, a)
        save_store(load_store(a), b)
        assert a.read_bytes() == b.read_bytes()

    def test_truncated(self, tmp_path, run_h):
        p = tmp_path / "h.json"
        save_hierarchy(run_h, p)
        p.write_text(p.read_text()[:40])
        with pytest.raises(DocumentError, match="line 1, column"):
            load_hierarchy(p)

    def test_version(self, tmp_path, run_h):
        doc = run_h.to_document()
        doc["version"] = 99
        p = tmp_path / "h.json"
        p.write_text(json.dumps(doc))
        with pytest.raises(VersionError):
            load_hierarchy(p)

    def test_atomic_failure_keeps_target(self, tmp_path, monkeypatch):
        p = tmp_path / "x.json"
        atomic_write(p, "old\n")

        def boom(*a, **k):
            raise OSError("disk full")

        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(OSError):
            atomic_write(p, "new\n")
        assert p.read_text() == "old\n"
        assert [f.name for f in tmp_path.iterdir()] == ["x.json"]

    def test_large_roundtrip_fast(self, tmp_path, alice_h):
        import time

        p = tmp_path / "alice.json"
        t0 = time.perf_counter()
        save_hierarchy(alice_h, p)
        back = load_hierarchy(p)
        assert time.perf_counter() - t0 < 1.0
        assert back == alice_h

    def test_canonical(self):
        assert dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}\n'


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCLI:
    def test_train_tokenize(self, tmp_path, capsys):
        txt = tmp_path / "t.txt"
        txt.write_text(RUN_SENTENCE)
        h = tmp_path / "h.json"
        code, _, err = run(["train", "--input", txt, "--eps", "0", "--out", h], capsys)
        assert code == 0
        summary = json.loads(err.strip().splitlines()[-1])
        assert summary["tokens"] == 15
        code, out, _ = run(["tokenize", "--hierarchy", h, "--string", "runhe"], capsys)
        assert code == 0
        assert out == "run|he\nunique: yes\n"

    def test_full_pipeline(self, tmp_path, capsys):
        h, v, s, st = tmp_path / "r.json", tmp_path / "v.txt", tmp_path / "s.json", tmp_path / "stats"
        assert run(["grow-random", "--eps", ".7,.85,.45", "--seed", 7, "--max-level", 10, "--out", h], capsys)[0] == 0
        assert run(["generate-vocab", "--hierarchy", h, "--count", 300, "--seed", 1, "--out", v], capsys)[0] == 0
        assert len(v.read_text().splitlines()) == 300
        code, out, _ = run(["replay", "--hierarchy", h, "--count", 20, "--seed", 2, "--out", s], capsys)
        assert code == 0 and len(out.splitlines()) == 20
        code, out, _ = run(["compress", "--hierarchy", h, "--store", s], capsys)
        assert code == 0 and out.startswith("word\tN_alpha\tmeasured_cost\tcost_gamma\n")
        assert all("compressed" in e for e in json.loads(s.read_text())["embeddings"])
        word = load_store(s).get(0).word
        code, out, _ = run(["recognize", "--hierarchy", h, "--store", s, "--fragment", word], capsys)
        assert code == 0 and out.split("\t")[0] == word
        code, _, _ = run(["stats", "--input", v, "--out", st, "--types"], capsys)
        assert code == 0
        assert {p.name for p in st.iterdir()} == {"histogram.csv", "rankfreq.csv", "fit.csv"}
        assert (st / "fit.csv").read_text().splitlines()[0] == "mu,sigma,N,residual"

    def test_decode(self, tmp_path, capsys, run_h):
        h = tmp_path / "h.json"
        save_hierarchy(run_h, h)
        code, out, _ = run(["decode", "--hierarchy", h, "--token", "4:1"], capsys)
        assert code == 0 and out == "t h e y\n"
        assert run(["decode", "--hierarchy", h, "--token", "9:0"], capsys)[0] == 1

    def test_exit_codes(self, tmp_path, capsys, run_h):
        h = tmp_path / "h.json"
        save_hierarchy(run_h, h)
        assert run(["nonsense"], capsys)[0] == 2
        assert run(["tokenize", "--hierarchy", h], capsys)[0] == 2
        assert run(["tokenize", "--hierarchy", h, "--string", "AB"], capsys)[0] == 2
        assert run(["grow-random", "--eps", "a,b", "--seed", 1, "--out", h], capsys)[0] == 2
        bad = tmp_path / "bad.json"
        bad.write_text("{\"version\": 1, \"alph")
        assert run(["tokenize", "--hierarchy", bad, "--string", "ab"], capsys)[0] == 1

    def test_threads_env(self, tmp_path, capsys, run_h, monkeypatch):
        h = tmp_path / "h.json"
        save_hierarchy(run_h, h)
        monkeypatch.setenv("MORPHO_HEBB_THREADS", "1")
        a = run(["generate-vocab", "--hierarchy", h, "--count", 50, "--seed", 4], capsys)[1]
        monkeypatch.setenv("MORPHO_HEBB_THREADS", "3")
        b = run(["generate-vocab", "--hierarchy", h, "--count", 50, "--seed", 4], capsys)[1]
        assert a == b and len(a.splitlines()) == 50

    def test_console_script(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "morpho_hebb.cli", "stats"], capture_output=True, text=True)
        assert proc.returncode == 2
