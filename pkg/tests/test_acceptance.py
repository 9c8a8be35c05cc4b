"""Acceptance criteria A1-A10; each test prints one PASS/FAIL line."""
import time

import numpy as np

from eegrid import oracles
from eegrid.augment import AugmentPlan
from eegrid.cnn import (BatchNorm, Conv2d, Dense, Dropout, Flatten, MaxPool, Network, Relu, Softmax,
                        build_preset)
from eegrid.cnn.gradcheck import check_layer, check_network
from eegrid.config import ExperimentConfig
from eegrid.features import relative_energies, wavelet_entropy
from eegrid.mlcore import (ConfusionMatrix, KNNClassifier, kkt_violations, make_folds, svm_train,
                           wilcoxon_test)
from eegrid import pipeline
from eegrid.pipeline import extract_samples, run_experiment
from eegrid.recording import default_montage
from eegrid.samples import SampleSet
from eegrid.topomap import idw_interpolate, project_montage
from eegrid.wavelet import frequency_order, make_db4, wpd_decompose

from conftest import planted_config, record_criterion


def test_a1_wavelet_energy_conservation():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        x = rng.normal(size=16 * int(rng.integers(4, 65)))
        e = np.sum(wpd_decompose(x).data ** 2)
        worst = max(worst, abs(e - x @ x) / (x @ x))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 5
    record_criterion("A1", ok, f"max relative energy error {worst:.1e} over 1000 windows in {elapsed:.2f}s")
    assert ok


def test_a2_frequency_ordering():
    t0 = time.perf_counter()
    h = make_db4().lowpass
    order = frequency_order(4)
    n = 1024
    t = np.arange(n)
    shares, argmax_ok, oracle_gap = [], True, 0.0
    for b in range(16):
        f = 4 * b + 2  # centre of the b-th 4 Hz bin
        x = np.cos(2 * np.pi * f * t / 128.0)
        assert oracles.fft_band_energy(x, 128.0, 4 * b, 4 * b + 4) > 0.999999
        e = np.sum(wpd_decompose(x).data ** 2, axis=-1) / (x @ x)
        shares.append(e[order[b]])
        argmax_ok &= int(np.argmax(e)) == int(order[b])
        oracle_gap = max(oracle_gap, float(np.max(np.abs(e - oracles.leaf_energy_fractions(f, 128.0, h)))))
    elapsed = time.perf_counter() - t0
    worst = min(shares)
    ok = worst >= 0.95 and elapsed < 5
    record_criterion("A2", ok, f"lowest in-leaf share {worst:.4f} (bin {int(np.argmin(shares))}), "
                               f"peak leaf as predicted: {argmax_ok}, oracle gap {oracle_gap:.1e}, {elapsed:.2f}s")
    assert argmax_ok and oracle_gap < 1e-10
    assert ok


def test_a3_feature_identities():
    rng = np.random.default_rng(3)
    worst_sum, bad_edges, edge_cases = 0.0, 0, 0
    for i in range(10_000):
        b = int(rng.integers(1, 11))
        e = rng.exponential(size=b) * (rng.random(b) > 0.4)
        if i % 10 == 0:
            e = np.zeros(b)
            e[rng.integers(b)] = rng.exponential()
        if not e.any():
            e[0] = 1.0
        q = relative_energies(e)
        w = wavelet_entropy(q)
        worst_sum = max(worst_sum, abs(q.sum() - 1))
        edge = (q == 0) | (q == 1)
        edge_cases += int(edge.sum())
        bad_edges += int(np.count_nonzero(w[edge]))
    ok = worst_sum <= 1e-12 and bad_edges == 0 and edge_cases > 0
    record_criterion("A3", ok, f"max |sum q - 1| {worst_sum:.1e}; nonzero w at q in {{0,1}}: "
                               f"{bad_edges} of {edge_cases}")
    assert ok


def test_a4_interpolation_exactness_and_bounds():
    rng = np.random.default_rng(4)
    proj = project_montage(default_montage(34), 15)
    r, c = proj.pixels.T
    inexact = out_of_bounds = 0
    for _ in range(1000):
        v = rng.normal(size=34) * rng.exponential()
        grid = idw_interpolate(v, proj)
        inexact += int(np.count_nonzero(grid[r, c] != v))
        out_of_bounds += int(np.count_nonzero((grid < v.min()) | (grid > v.max())))
    ok = inexact == 0 and out_of_bounds == 0
    record_criterion("A4", ok, f"{inexact} inexact sensor pixels, {out_of_bounds} out-of-range pixels "
                               f"over 1000 assignments")
    assert ok


def test_a5_model2_advantage_on_planted_signal():
    t0 = time.perf_counter()
    acc = {}
    for m in (1, 2):
        cfg = planted_config(m)
        acc[m] = run_experiment(cfg, extract_samples(cfg)).aggregate["accuracy"]
    elapsed = time.perf_counter() - t0
    gain = acc[2] - acc[1]
    ok = acc[2] >= 0.90 and gain >= 0.05 and elapsed < 120
    record_criterion("A5", ok, f"subject accuracy model 1 {100 * acc[1]:.2f}%, model 2 {100 * acc[2]:.2f}%, "
                               f"gain {100 * gain:.2f} points, {elapsed:.1f}s")
    assert ok


def test_a6_metric_arithmetic():
    a = ConfusionMatrix(tp=26, fn=6, fp=6, tn=26)
    b = ConfusionMatrix(tp=29, fn=3, fp=4, tn=28)
    got = [round(100 * v, 2) for v in (a.accuracy, a.f1, b.accuracy, b.f1)]
    ok = got == [81.25, 81.25, 89.06, 89.23]
    record_criterion("A6", ok, f"accuracy/F1 {got[0]}%/{got[1]}% and {got[2]}%/{got[3]}%")
    assert ok


def test_a7_cnn_gradient_check():
    t0 = time.perf_counter()
    errors = {}
    layers = [(Conv2d(2, 3), (4, 4, 2)), (Conv2d(2, 3, padding="same"), (4, 4, 2)), (MaxPool(2), (4, 4, 2)),
              (Relu(), (6,)), (BatchNorm(), (4, 4, 2)), (Dropout(0.3), (6,)), (Flatten(), (2, 2, 2)),
              (Dense(3), (4,)), (Softmax(), (3,))]
    for layer, shape in layers:
        errors[repr(layer)] = max(check_layer(layer, shape).values())
    tiny = Network([BatchNorm(), Conv2d(2, 3), BatchNorm(), Relu(), Flatten(), Dense(2), Softmax()], (4, 4, 2))
    rng = np.random.default_rng(0)
    errors["tiny net"] = max(check_network(tiny, rng.normal(size=(4, 4, 4, 2)), [0, 1, 1, 0]).values())
    for name, shape in (("SAD_NET", (7, 7, 3)), ("DEAP_NET", (12, 12, 2))):
        net = Network.from_spec(build_preset(name, shape), seed=0)
        x = np.random.default_rng(0).normal(size=(4, *shape))
        errors[name] = max(check_network(net, x, [0, 1, 0, 1], max_coords=30).values())
    elapsed = time.perf_counter() - t0
    worst_name = max(errors, key=errors.get)
    ok = errors[worst_name] < 1e-4 and elapsed < 60
    record_criterion("A7", ok, f"max relative error {errors[worst_name]:.1e} ({worst_name}) across "
                               f"{len(errors)} checks in {elapsed:.1f}s")
    assert ok


def test_a8_classifier_oracles():
    rng = np.random.default_rng(8)
    knn_bad = 0
    for _ in range(100):
        X = np.round(rng.normal(size=(30, 3)) * 2)
        y = rng.integers(0, 2, 30)
        q = np.round(rng.normal(size=3) * 2)
        k = int(rng.choice([3, 5]))
        knn_bad += int(KNNClassifier(k).fit(X, y).predict(q[None])[0] != oracles.knn_bruteforce(X, y, q, k))

    def disk(centre, n):
        r = 0.5 * np.sqrt(rng.random(n))
        a = rng.uniform(0, 2 * np.pi, n)
        return np.c_[centre + r * np.cos(a), r * np.sin(a)]

    # closest points of the two blobs are 2 apart: geometric margin 1
    X = np.vstack([disk(-1.5, 30), disk(1.5, 30)])
    y = np.repeat([0, 1], 30)
    tol = 1e-3
    model = svm_train(X, y, sigma=1.0, C=10.0, tol=tol)
    svm_acc = float(np.mean(model.predict(X) == y))
    kkt = float(kkt_violations(model, X, y).max())

    wil_gap = 0.0
    for n in range(5, 11):
        for _ in range(5):
            a, b = rng.normal(size=n), rng.normal(size=n)
            wil_gap = max(wil_gap, abs(wilcoxon_test(a, b).p_value - oracles.wilcoxon_enumeration(a, b)))
    ok = knn_bad == 0 and svm_acc == 1.0 and kkt <= tol and wil_gap < 1e-12
    record_criterion("A8", ok, f"kNN disagreements {knn_bad}/100; SVM accuracy {svm_acc:.2f}, max KKT residual "
                               f"{kkt:.1e}; Wilcoxon max gap {wil_gap:.1e} for n=5..10")
    assert ok


def test_a9_protocol_integrity(monkeypatch):
    rng = np.random.default_rng(9)
    violations = 0
    for i in range(50):
        mode = "independent" if i % 2 == 0 else "dependent"
        n_subj = int(rng.integers(8, 40))
        if mode == "independent":
            units = [f"S{j}" for j in range(n_subj)]
        else:
            units = [(f"S{j}", f"V{v}") for j in range(n_subj) for v in range(int(rng.integers(2, 5)))]
        labels = rng.integers(0, 2, len(units))
        labels[:2] = [0, 1]
        plan = make_folds(units, labels, int(rng.integers(4, 9)), mode, int(rng.integers(1 << 30)))
        # units are subjects (independent) or (subject, video) pairs (dependent)
        for s in plan.splits():
            violations += len(s.train_units & s.test_units) + len(s.train_units & s.valid_units)
            violations += len(s.valid_units & s.test_units)

    # spy on the augmentation call inside the fold loop
    seen = []
    real = pipeline.expand_training_set

    def spy(ss, plan):
        seen.append(set(ss.subjects))
        return real(ss, plan)

    monkeypatch.setattr(pipeline, "expand_training_set", spy)
    n = 32
    X = rng.normal(size=(n * 3, 5, 5, 2))
    subjects = tuple(f"S{j}" for j in range(n) for _ in range(3))
    ss = SampleSet(X, np.array([int(s[1:]) % 2 for s in subjects]), subjects, ("rest",) * (3 * n),
                   np.tile(np.arange(3), n), ("a", "b"), 2)
    cfg = ExperimentConfig(model=2, augment="extended", classifier="svm", svm_C=(1.0,), svm_sigma=(1.0,),
                           data_dir=".")
    plan = pipeline.fold_plan_for(ss, cfg)
    touched = 0
    for f in range(cfg.folds):
        rec = pipeline.evaluate_fold(ss, plan, f, cfg)
        split = plan.split(f)
        touched += len(seen[-1] & (split.valid_units | split.test_units))
        assert rec["n_train"] == len(AugmentPlan.named("extended", 2).shifts) * 3 * len(split.train_units)
    ok = violations == 0 and touched == 0 and len(seen) == cfg.folds
    record_criterion("A9", ok, f"{violations} leakage violations over 50 plans; augmentation touched "
                               f"{touched} validation/test units in {len(seen)} folds")
    assert ok


def test_a10_determinism(tmp_path):
    outputs = []
    for _ in range(2):
        cfg = ExperimentConfig(source="synthetic", model=2, synthetic_subjects=16, synthetic_seconds=20.0,
                               folds=8, seed=5, data_dir=".", output_dir=str(tmp_path))
        report = run_experiment(cfg)
        outputs.append((report.to_jsonl().encode(), report.write().read_bytes()))
    ok = outputs[0] == outputs[1]
    record_criterion("A10", ok, f"metric stream {len(outputs[0][0])} bytes and summary {len(outputs[0][1])} "
                                f"bytes identical across two runs: {ok}")
    assert ok
