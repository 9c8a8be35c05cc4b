"""Quick oracle checks of the numerical core, one PASS/FAIL line each."""
from __future__ import annotations

import sys
import time

import numpy as np

from . import oracles
from .cnn import BatchNorm, Conv2d, Dense, Dropout, Flatten, MaxPool, Network, Relu, Softmax
from .cnn.gradcheck import check_layer, check_network
from .features import relative_energies, wavelet_entropy
from .mlcore import ConfusionMatrix, KNNClassifier, kkt_violations, svm_train, wilcoxon_test
from .recording import default_montage
from .topomap import idw_interpolate, project_montage
from .wavelet import frequency_order, make_db4, wpd_decompose


def check_wavelet_energy(rng):
    worst = 0.0
    for _ in range(50):
        x = rng.normal(size=16 * int(rng.integers(4, 65)))
        e = np.sum(wpd_decompose(x).data ** 2)
        worst = max(worst, abs(e - np.sum(x**2)) / np.sum(x**2))
    return worst < 1e-9, f"max relative energy error {worst:.1e}"


def check_tone_leaves(rng):
    h = make_db4().lowpass
    t = np.arange(1024)
    order = frequency_order(4)
    worst_oracle, argmax_ok = 0.0, True
    for b in range(16):
        f = 4 * b + 2
        x = np.cos(2 * np.pi * f * t / 128.0)
        e = np.sum(wpd_decompose(x).data ** 2, axis=-1) / np.sum(x**2)
        worst_oracle = max(worst_oracle, float(np.max(np.abs(e - oracles.leaf_energy_fractions(f, 128.0, h)))))
        argmax_ok &= int(np.argmax(e)) == int(order[b])
    return argmax_ok and worst_oracle < 1e-10, f"peak leaf as predicted: {argmax_ok}; oracle gap {worst_oracle:.1e}"


def check_features(rng):
    worst = 0.0
    for _ in range(200):
        e = rng.random(5) * (rng.random(5) > 0.3)
        if not e.any():
            continue
        q_ref, w_ref = oracles.relative_energy_entropy(e)
        q = relative_energies(e)
        worst = max(worst, float(np.max(np.abs(q - q_ref))), float(np.max(np.abs(wavelet_entropy(q) - w_ref))))
    return worst < 1e-12, f"max deviation {worst:.1e}"


def check_idw(rng):
    proj = project_montage(default_montage(34), 15)
    worst = 0.0
    for _ in range(5):
        v = rng.normal(size=34)
        ref = oracles.idw_grid(v, proj.pixels, 15, 3.0)
        worst = max(worst, float(np.max(np.abs(idw_interpolate(v, proj) - ref))))
    return worst < 1e-12, f"max deviation from per-pixel loop {worst:.1e}"


def check_knn(rng):
    bad = 0
    for _ in range(20):
        X = rng.normal(size=(40, 3))
        y = rng.integers(0, 2, 40)
        clf = KNNClassifier(3).fit(X, y)
        Q = rng.normal(size=(10, 3))
        bad += int(np.sum(clf.predict(Q) != [oracles.knn_bruteforce(X, y, q, 3) for q in Q]))
    return bad == 0, f"{bad} disagreements in 200 queries"


def check_svm(rng):
    X = np.vstack([rng.normal(-2, 0.3, (20, 2)), rng.normal(2, 0.3, (20, 2))])
    y = np.repeat([0, 1], 20)
    model = svm_train(X, y, sigma=1.0, C=10.0, tol=1e-3)
    acc = float(np.mean(model.predict(X) == y))
    viol = float(np.max(kkt_violations(model, X, y)))
    return acc == 1.0 and viol <= 1e-3, f"train accuracy {acc:.2f}, max KKT violation {viol:.1e}"


def check_wilcoxon(rng):
    worst = 0.0
    for n in range(5, 11):
        a, b = rng.normal(size=n), rng.normal(size=n)
        worst = max(worst, abs(wilcoxon_test(a, b).p_value - oracles.wilcoxon_enumeration(a, b)))
    return worst < 1e-12, f"max p-value gap vs enumeration {worst:.1e}"


def check_metrics(rng):
    a = ConfusionMatrix(26, 6, 6, 26)
    b = ConfusionMatrix(29, 3, 4, 28)
    got = [round(100 * v, 2) for v in (a.accuracy, a.f1, b.accuracy, b.f1)]
    return got == [81.25, 81.25, 89.06, 89.23], f"accuracy/F1 {got}"


def check_gradients(rng):
    worst = 0.0
    for layer, shape in ((Conv2d(2, 3), (4, 4, 2)), (MaxPool(2), (4, 4, 2)), (Relu(), (5,)),
                         (BatchNorm(), (4, 4, 2)), (Dropout(0.3), (5,)), (Flatten(), (2, 2, 2)),
                         (Dense(3), (4,)), (Softmax(), (3,))):
        worst = max(worst, max(check_layer(layer, shape).values()))
    net = Network([BatchNorm(), Conv2d(2, 3), BatchNorm(), Relu(), MaxPool(2), Flatten(), Dense(3),
                   Dropout(0.3), Dense(2), Softmax()], (6, 6, 2), seed=1)
    x = rng.normal(size=(4, 6, 6, 2))
    worst = max(worst, max(check_network(net, x, [0, 1, 1, 0]).values()))
    return worst < 1e-4, f"max relative gradient error {worst:.1e}"


CHECKS = [
    ("wavelet energy conservation", check_wavelet_energy),
    ("tone lands in predicted leaf", check_tone_leaves),
    ("relative energy and entropy", check_features),
    ("IDW matches per-pixel loop", check_idw),
    ("kNN matches exhaustive scan", check_knn),
    ("SVM separates blobs within KKT tol", check_svm),
    ("Wilcoxon exact matches enumeration", check_wilcoxon),
    ("confusion-matrix metrics", check_metrics),
    ("CNN finite-difference gradients", check_gradients),
]


def run(stream=sys.stdout, seed: int = 0) -> bool:
    ok_all = True
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(np.random.default_rng(seed))
        except Exception as e:  # a crash is a failure, keep going
            ok, detail = False, f"{type(e).__name__}: {e}"
        ok_all &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail} ({time.perf_counter() - t0:.2f}s)", file=stream)
    return ok_all
