import json

import numpy as np
import pytest

from eegrid.config import ExperimentConfig
from eegrid.mlcore import wilcoxon_test
from eegrid import oracles
from eegrid.pipeline import (extract_samples, fold_plan_for, load_or_extract, run_compare, run_experiment,
                             run_extract, samples_path)
from eegrid.recording import (LabelSet, RawRecording, Task, default_montage, save_labels, save_recording)
from eegrid.synthetic import SyntheticSpec, synthetic_dataset

from conftest import planted_config

RECORD_FIELDS = {"fold", "accuracy", "f1", "tp", "fn", "fp", "tn", "p_value", "config_hash"}


def small(model=1, **changes):
    base = dict(source="synthetic", model=model, features="energy", synthetic_subjects=16,
                synthetic_seconds=20.0, folds=4, data_dir=".")
    base.update(changes)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def deap_dir(tmp_path_factory):
    """Eight DEAP-style subjects with two videos each, 63 s at 256 Hz, as files."""
    root = tmp_path_factory.mktemp("deap")
    (root / "recordings").mkdir()
    mont = default_montage(32)
    rng = np.random.default_rng(0)
    ratings = {}
    for s in range(8):
        for v in range(2):
            rec = RawRecording(f"P{s}", f"V{v}", 256.0, tuple(mont.names), rng.normal(size=(32, 63 * 256)))
            save_recording(rec, root / "recordings" / f"P{s}_V{v}.f32")
            ratings[(f"P{s}", f"V{v}")] = float(rng.choice([2.0, 7.5]) if (s + v) % 3 else 5.0)
    save_labels(LabelSet(Task.VALENCE, ratings, "rating"), root / "labels.csv")
    return root


def test_sad_model1_energy_samples():
    ss = extract_samples(small(1, synthetic_subjects=4))
    assert ss.X.shape == (4 * 4, 34, 5)
    assert [int(v) for v in ss.windows[:4]] == [0, 1, 2, 3]
    assert ss.X.dtype == np.float64
    np.testing.assert_array_equal(ss.X, ss.X.astype(np.float32))


def test_deap_model2_samples_from_files(deap_dir):
    cfg = ExperimentConfig(task="Valence", model=2, mode="dependent", data_dir=str(deap_dir))
    ss = extract_samples(cfg)
    assert ss.X.shape[1:] == (15, 15, 8)
    assert len(ss) == 16 * 29
    labels = dict(zip(zip(ss.subjects, ss.trials), ss.labels))
    assert labels[("P0", "V0")] == 1  # rating 5.0 meets the threshold


def test_deap_dependent_experiment(deap_dir, tmp_path):
    cfg = ExperimentConfig(task="Valence", model=1, mode="dependent", folds=4, data_dir=str(deap_dir),
                           output_dir=str(tmp_path))
    report = run_experiment(cfg)
    assert len(report.records) == 5
    assert all(r["leakage_checked"] for r in report.records)
    # no subject voting: windows are scored individually
    assert sum(r["tp"] + r["fn"] + r["fp"] + r["tn"] for r in report.records[:-1]) == 16 * 29
    for f in range(4):
        split = report.plan.split(f)
        assert all(isinstance(u, tuple) for u in split.test_units)


def test_missing_inputs_are_reported(tmp_path):
    with pytest.raises(FileNotFoundError, match="recording directory"):
        extract_samples(ExperimentConfig(data_dir=str(tmp_path)))


def test_extract_is_idempotent(tmp_path):
    cfg = small(2, output_dir=str(tmp_path))
    p1 = run_extract(cfg)
    first = p1.read_bytes()
    p2 = run_extract(cfg)
    assert p1 == p2 == samples_path(cfg)
    assert p2.read_bytes() == first


def test_extract_then_experiment_equals_fused_run(tmp_path):
    cfg = small(1, output_dir=str(tmp_path))
    fused = run_experiment(cfg, extract_samples(cfg))
    run_extract(cfg)
    staged = run_experiment(cfg)
    assert staged.to_jsonl() == fused.to_jsonl()
    np.testing.assert_array_equal(load_or_extract(cfg).X, extract_samples(cfg).X)


def test_report_layout(tmp_path):
    cfg = small(1, folds=8, output_dir=str(tmp_path))
    report = run_experiment(cfg)
    assert len(report.records) == 9
    lines = [json.loads(l) for l in report.to_jsonl().splitlines()]
    assert [l["fold"] for l in lines] == list(range(8)) + ["aggregate"]
    for l in lines:
        assert RECORD_FIELDS <= set(l)
        assert l["config_hash"] == cfg.config_hash()
    agg = lines[-1]
    assert agg["tp"] + agg["fn"] + agg["fp"] + agg["tn"] == 16
    assert agg["seed"] == 0
    path = report.write()
    summary = json.loads(path.read_text())
    assert summary["config_hash"] == cfg.config_hash() and len(summary["records"]) == 9


def test_same_seed_same_report_and_parallel_matches(tmp_path):
    cfg = small(2, output_dir=str(tmp_path))
    a = run_experiment(cfg).to_jsonl()
    assert run_experiment(cfg).to_jsonl() == a
    assert run_experiment(cfg.replace(jobs=2)).to_jsonl() == a


def test_augmentation_only_grows_training_folds():
    cfg = small(2)
    ss = extract_samples(cfg)
    plain = run_experiment(cfg, ss).records
    aug = run_experiment(cfg.replace(augment="default"), ss).records
    for p, a in zip(plain[:-1], aug[:-1]):
        assert a["n_train"] == 5 * p["n_train"]
        assert a["n_test"] == p["n_test"]


def test_model_mismatch_rejected():
    with pytest.raises(ValueError, match="model"):
        run_experiment(small(2), extract_samples(small(1)))


def test_svm_classifier_runs():
    cfg = small(1, classifier="svm", svm_C=(1.0,), svm_sigma=(0.4, 0.8))
    report = run_experiment(cfg)
    assert all(r["sigma"] in (0.4, 0.8) for r in report.records[:-1])
    assert 0 <= report.aggregate["accuracy"] <= 1


def test_cnn_classifier_runs_on_both_models():
    for model in (1, 2):
        cfg = small(model, classifier="cnn", cnn_epochs=2, cnn_patience=1, synthetic_subjects=8,
                    synthetic_seconds=10.0)
        report = run_experiment(cfg)
        assert len(report.records) == 5
        # 34 x 5 matrices are too small for valid convolutions
        assert {r["padding"] for r in report.records[:-1]} == ({"same"} if model == 1 else {"valid"})


def test_model2_at_least_model1_on_planted_task(planted_samples):
    acc = {m: run_experiment(planted_config(m), planted_samples[m]).aggregate["accuracy"] for m in (1, 2)}
    assert acc[2] >= acc[1]


def test_compare_against_itself_has_no_nonzero_pairs():
    cfg = small(1)
    ss = extract_samples(cfg)
    with pytest.raises(ValueError, match="no nonzero pairs"):
        run_compare(cfg, cfg, (ss, ss))


def test_compare_rejects_different_fold_plans():
    a, b = small(1), small(1, folds=5)
    with pytest.raises(ValueError, match="fold plans differ"):
        run_compare(a, b)


def test_compare_planted_task_sixteen_folds(planted_samples):
    cfg1, cfg2 = planted_config(1, folds=16), planted_config(2, folds=16)
    report = run_compare(cfg1, cfg2, (planted_samples[1], planted_samples[2]))
    a1 = report.reports[0].fold_accuracies
    a2 = report.reports[1].fold_accuracies
    assert report.p_value < 0.05
    assert report.p_value == pytest.approx(oracles.wilcoxon_enumeration(a2, a1), abs=1e-12)
    assert report.p_value == wilcoxon_test(a2, a1).p_value
    recs = report.records
    assert len(recs) == 17
    assert all(r["config_hashes"] == [cfg1.config_hash(), cfg2.config_hash()] for r in recs)
    assert recs[-1]["alternative"] == "arm2 > arm1"


def test_fold_plan_shared_across_models(planted_samples):
    p1 = fold_plan_for(planted_samples[1], planted_config(1))
    p2 = fold_plan_for(planted_samples[2], planted_config(2))
    assert p1.canonical() == p2.canonical()
    assert p1.fold_sizes() == [8] * 8


def test_synthetic_generator_is_seeded():
    spec = SyntheticSpec(n_subjects=4, duration_seconds=5, seed=3)
    a, la, _ = synthetic_dataset(spec)
    b, lb, _ = synthetic_dataset(spec)
    assert all(np.array_equal(x.data, y.data) for x, y in zip(a, b))
    assert la.values == lb.values
    assert sorted(la.values.values()) == [0, 0, 1, 1]
