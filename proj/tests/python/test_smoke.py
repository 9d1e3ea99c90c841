import json
import math
import os
import subprocess

import pytest

import provkit


def test_metrics():
    a, b = provkit.tokenize("a b c"), provkit.tokenize("a c")
    assert a == ["a", "b", "c"]
    assert provkit.levenshtein(a, b) == 1
    assert provkit.normalized_levenshtein(a, b) == pytest.approx(1 / 3)
    assert provkit.jaccard_distance(["the", "cat", "sat"], ["the", "dog", "sat"]) == 0.5
    assert provkit.tokenize("你好", provkit.TokenMode.char) == ["你", "好"]
    pr = provkit.polish_ratio("a b c", "a c")
    assert pr["levenshtein_norm"] == pytest.approx(1 / 3)


def test_eval_metrics():
    assert provkit.auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)
    assert provkit.accuracy([1, 0, 1, 1], [1, 1, 1, 0]) == 0.5
    assert provkit.mae([0.2, 0.6], [0.0, 1.0]) == pytest.approx(0.3)
    assert provkit.interpret_pr(0.1) == "human_consistent"
    assert provkit.interpret_pr(0.5) == "polished"
    assert provkit.interpret_pr(0.65) == "mostly_generated"
    pr = provkit.precision_recall([1, 1, 0, 0], [1, 0, 0, 0])
    assert pr[1]["precision"] == 0.5 and pr[1]["recall"] == 1.0
    with pytest.raises(ValueError):
        provkit.auroc([0.1, 0.2], [1, 1])


def test_features_and_loss():
    v = provkit.featurize("hello world")
    assert len(v) == 768
    assert math.isclose(sum(x * x for x in v), 1.0)
    assert provkit.featurize("") == [0.0] * 768
    assert provkit.loss(provkit.LossKind.mse, 0.5, 0.3) == pytest.approx(0.04)
    assert provkit.loss(provkit.LossKind.smooth_l1, 0.0, 0.3, 0.1, provkit.SmoothL1Mode.paper_literal) == pytest.approx(0.25)


def test_gltr():
    lm = provkit.NGramLM(["a b a b"], order=2)
    dist = lm.next_distribution(["a"])
    assert sum(dist) == pytest.approx(1.0, abs=1e-9)
    assert dist[lm.vocab.index("b")] > dist[lm.vocab.index("a")]
    stats = lm.token_stats("a b a")
    assert provkit.bucket_histogram(stats)["le10"] == 3


def test_corpus_roundtrip():
    data = provkit.synthesize_jsonl(40, [0.2, 0.5], seed=1)
    split = provkit.split_jsonl(data, "6:3:1", 3)
    rows = [json.loads(line) for line in split.splitlines()]
    assert len(rows) == 40
    assert sorted({r["split"] for r in rows}) == ["test", "train", "val"]
    assert provkit.label_jsonl(split) == split


def test_cli_and_model(tmp_path):
    data = tmp_path / "d.jsonl"
    model = tmp_path / "m.json"
    assert provkit.run_cli(["synth", "--pairs", "60", "--out", str(data)])[0] == 0
    assert provkit.run_cli(["split", "--dataset", str(data)])[0] == 0
    code, out, err = provkit.run_cli(
        ["train", "--task", "pr", "--dataset", str(data), "--epochs", "2", "--hidden", "8", "--out", str(model)]
    )
    assert code == 0, err
    m = provkit.Model.load(str(model))
    assert m.task == provkit.Task.pr_regress
    assert 0.0 < m.score_text("some words here") < 1.0
    assert provkit.run_cli(["bogus"])[0] == 2

    exe = os.environ.get("PROVKIT_CLI")
    if exe:
        res = subprocess.run([exe, "diff", "--original", "a b", "--polished", "a c"], capture_output=True, text=True)
        assert res.returncode == 0
        assert "{+c+}" in res.stdout
