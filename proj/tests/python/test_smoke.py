"""Smoke tests for the harcore extension module."""

import json
import math
import tempfile

import pytest

harcore = pytest.importorskip("harcore")


def test_wasserstein_known_values():
    assert harcore.wasserstein_1d([0.0, 1.0, 2.0], [0.0, 1.0, 5.0]) == pytest.approx(1.0)
    assert harcore.wasserstein_1d([1.0, 2.0], [1.0, 2.0, 3.0]) == pytest.approx(0.5)
    assert harcore.wasserstein_1d([3.0, 1.0], [1.0, 3.0]) == 0.0


def test_loss_values():
    # Softmax cross-entropy of logits (2, 0) against class 0.
    assert harcore.classification_loss([[2.0, 0.0]], [0]) == pytest.approx(
        0.12692801104297263
    )
    assert harcore.recon_loss([[1.0, 2.0], [3.0, 4.0]], [[0.0, 0.0], [0.0, 0.0]]) == (
        pytest.approx((1.0 + 4.0 + 9.0 + 16.0) / 4.0)
    )
    assert harcore.discrimination_loss([0.5, 0.5], [1, 0]) == pytest.approx(
        -math.log(0.5)
    )
    # Same-subject pairs contribute nothing to the adversarial objective.
    base = harcore.adversarial_loss([0.25, 0.75], [0, 0])
    assert harcore.adversarial_loss([0.25, 0.75, 0.9], [0, 0, 1]) == base


def test_pair_invariants():
    y = [i % 3 for i in range(90)]
    s = [1 + (i // 30) for i in range(90)]
    pairs = harcore.build_pairs(y, s, per_class_target=20, seed=7)
    assert len(pairs) == 40
    assert sum(p["g"] for p in pairs) == 20
    for p in pairs:
        assert y[p["a"]] == y[p["b"]] == p["y"]
        assert (p["g"] == 1) == (s[p["a"]] == s[p["b"]])


def test_loso_splits_partition():
    subjects = [1, 2, 3, 4, 5]
    folds = harcore.loso_splits(subjects, n_val=1, seed=99)
    assert [f["test_subject"] for f in folds] == subjects
    for f in folds:
        members = [f["test_subject"]] + f["val_subjects"] + f["train_subjects"]
        assert sorted(members) == subjects
        assert len(f["val_subjects"]) == 1


def test_metrics():
    m = harcore.metrics_from_predictions([0, 0, 1, 2], [0, 1, 1, 2], K=3)
    assert m["accuracy"] == pytest.approx(0.75)
    assert m["macro_f1"] == pytest.approx(7.0 / 9.0)
    assert m["confusion"] == [1, 1, 0, 0, 1, 0, 0, 0, 1]


def test_generate_synthetic_shapes():
    recs = harcore.generate_synthetic(
        n_subjects=3, n_activities=2, duration_s=8.0, sample_rate_hz=25.0, channels=4
    )
    assert [r["subject"] for r in recs] == [1, 2, 3]
    for r in recs:
        assert r["n_timesteps"] == 200
        assert r["n_channels"] == 4
        assert len(r["labels"]) == 200
        assert len(r["x"]) == 200 * 4
    # Deterministic in the seed.
    again = harcore.generate_synthetic(
        n_subjects=3, n_activities=2, duration_s=8.0, sample_rate_hz=25.0, channels=4
    )
    assert again[0]["x"] == recs[0]["x"]


def test_run_experiment_end_to_end():
    out_dir = tempfile.mkdtemp(prefix="harcore_smoke_")
    config = {
        "dataset": "synthetic",
        "synthetic": {
            "n_subjects": 4,
            "n_activities": 2,
            "duration_s": 16.0,
            "sample_rate_hz": 50.0,
            "c": 3,
            "seed": 5,
        },
        "model": {"d_latent": 8, "width_scale": 0.25},
        "window_size": 16,
        "pairs_per_class": 12,
        "train": {"epochs_step1": 1, "epochs_step2": 1, "epochs_step3": 1},
        "seeds": [17],
        "n_val_subjects": 1,
        "deterministic": True,
        "out_dir": out_dir,
    }
    result = harcore.run_experiment(json.dumps(config))
    assert result["stats"]["n_folds"] == 4
    records = [json.loads(r) for r in result["records"]]
    assert len(records) == 4
    assert {r["fold_test_subject"] for r in records} == {1, 2, 3, 4}
    for r in records:
        assert 0.0 <= r["accuracy"] <= 1.0
        assert r["mode"] == "full"
