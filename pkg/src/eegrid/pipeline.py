"""End-to-end extraction, cross-validated experiments and paired comparisons."""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .augment import AugmentPlan, expand_training_set
from .config import ExperimentConfig
from .features import model1_matrix
from .mlcore import (ConfusionMatrix, FoldPlan, KNNClassifier, LeakageError, Standardizer, check_no_leakage,
                     grid_search, make_folds, metrics, subject_vote, svm_train, unit_labels, wilcoxon_test)
from .preprocess import prepare, segment
from .recording import (Montage, apply_labels, default_montage, find_recordings, load_labels, load_montage,
                        load_recording)
from .samples import SampleSet
from .synthetic import SyntheticSpec, synthetic_dataset
from .topomap import InterpConfig, model2_tensor, project_montage
from .wavelet import bands_for_task


# ---------------------------------------------------------------------------
# data and extraction


def load_dataset(cfg: ExperimentConfig) -> tuple[list, Montage]:
    """Labelled recordings ``[(rec, label)]`` and the montage to project them with."""
    if cfg.source == "synthetic":
        spec = SyntheticSpec(n_subjects=cfg.synthetic_subjects, duration_seconds=cfg.synthetic_seconds,
                             alpha_gain=cfg.synthetic_gain, seed=cfg.seed)
        recs, labels, montage = synthetic_dataset(spec)
        return apply_labels(recs, labels, cfg.label_threshold), montage
    rec_dir = cfg.resolve(cfg.recordings)
    if not rec_dir.is_dir():
        raise FileNotFoundError(f"recording directory not found: {rec_dir}")
    paths = find_recordings(rec_dir)
    if not paths:
        raise FileNotFoundError(f"no .csv or .f32 recordings in {rec_dir}")
    recs = [load_recording(p) for p in paths]
    labels = load_labels(cfg.resolve(cfg.labels), cfg.task)
    if cfg.montage:
        montage = load_montage(cfg.resolve(cfg.montage))
    else:
        montage = default_montage(recs[0].n_channels)
    for r in recs:
        montage.check_covers(r.channels)
    return apply_labels(recs, labels, cfg.label_threshold), montage


def extract_samples(cfg: ExperimentConfig, labelled=None, montage: Montage | None = None) -> SampleSet:
    """Window, featurize and (for model 2) interpolate every labelled recording.

    Values are rounded to float32, the precision of sample files, so an
    in-memory run and a run from an extracted file see identical inputs.
    """
    if labelled is None:
        labelled, montage = load_dataset(cfg)
    bands = bands_for_task(cfg.task)
    proj = interp = None
    if cfg.model == 2:
        channels = labelled[0][0].channels
        proj = project_montage(montage, cfg.grid_size, channels)
        interp = InterpConfig(cfg.interp_method, cfg.d_max, cfg.idw_power)
    samples = []
    for rec, label in labelled:
        rec = prepare(rec, cfg.task, cfg.target_rate_hz)
        for w in segment(rec, cfg.window_seconds, cfg.shift_seconds, cfg.baseline_trim_seconds, label):
            fm = model1_matrix(w, bands, cfg.include_entropy)
            samples.append(fm if cfg.model == 1 else model2_tensor(fm, proj, interp))
    ss = SampleSet.from_samples(samples, labelled[0][0].channels)
    X = ss.X.astype(np.float32).astype(np.float64)
    return SampleSet(X, ss.labels, ss.subjects, ss.trials, ss.windows, ss.feature_layout, ss.model, ss.channels)


def samples_path(cfg: ExperimentConfig) -> Path:
    return Path(cfg.output_dir) / f"samples-{cfg.extraction_hash()}.f32"


def run_extract(cfg: ExperimentConfig) -> Path:
    """Write the sample file for ``cfg``; the bytes depend only on the config."""
    ss = extract_samples(cfg)
    path = samples_path(cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    ss.save(path, {"extraction_hash": cfg.extraction_hash()})
    return path


def load_or_extract(cfg: ExperimentConfig) -> SampleSet:
    path = samples_path(cfg)
    if path.exists():
        ss, extra = SampleSet.load(path)
        if extra.get("extraction_hash") == cfg.extraction_hash():
            return ss
    return extract_samples(cfg)


# ---------------------------------------------------------------------------
# one fold


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def _cnn_predict(cfg, train_ss, valid_ss, X_test, seed):
    from .cnn import Network, TrainConfig, build_preset, train

    def as_image(X):
        return X[..., None] if X.ndim == 3 else X

    Xtr, Xva, Xte = as_image(train_ss.X), as_image(valid_ss.X), as_image(X_test)
    preset = "SAD_NET" if cfg.task == "SAD" else "DEAP_NET"
    paddings = ("valid", "same") if cfg.cnn_padding == "auto" else (cfg.cnn_padding,)
    for i, padding in enumerate(paddings):
        try:
            spec = build_preset(preset, Xtr.shape[1:], padding)
            break
        except ValueError:
            if i == len(paddings) - 1:
                raise
    net = Network.from_spec(spec, seed=seed)
    tc = TrainConfig(cfg.cnn_batch, cfg.cnn_lr, cfg.cnn_epochs, cfg.cnn_patience, cfg.cnn_optimizer, seed)
    net, hist = train(net, Xtr, train_ss.labels, Xva, valid_ss.labels, tc)
    return net.predict(Xte), {"padding": padding, "best_epoch": hist.best_epoch}


def evaluate_fold(ss: SampleSet, plan: FoldPlan, fold: int, cfg: ExperimentConfig) -> dict:
    """Train on the training folds of ``fold`` and score its test fold."""
    split = plan.split(fold)
    units = ss.units(cfg.mode)
    needs_validation = cfg.classifier in ("svm", "cnn")
    train_units = split.train_units if needs_validation else split.train_units | split.valid_units
    valid_units = split.valid_units if needs_validation else frozenset()
    tr = np.array([u in train_units for u in units])
    va = np.array([u in valid_units for u in units])
    te = np.array([u in split.test_units for u in units])
    check_no_leakage({units[i] for i in np.flatnonzero(tr)}, {units[i] for i in np.flatnonzero(va)},
                     {units[i] for i in np.flatnonzero(te)})
    if np.any(tr & te) or np.any(va & te) or np.any(tr & va):
        raise LeakageError("a sample is assigned to two roles")

    seed = fold_seed(cfg.seed, fold)
    train_ss, valid_ss, test_ss = ss.subset(np.flatnonzero(tr)), ss.subset(np.flatnonzero(va)), ss.subset(np.flatnonzero(te))
    aug = AugmentPlan.named(cfg.augment, cfg.model)
    if aug is not None:
        train_ss = expand_training_set(train_ss, aug)

    info: dict = {}
    if cfg.classifier == "cnn":
        pred, info = _cnn_predict(cfg, train_ss, valid_ss, test_ss.X, seed)
    else:
        scaler = Standardizer().fit(train_ss.X)
        Xtr, Xte = scaler.transform(train_ss.X), scaler.transform(test_ss.X)
        if cfg.classifier in ("knn3", "knn5"):
            pred = KNNClassifier(int(cfg.classifier[-1])).fit(Xtr, train_ss.labels).predict(Xte)
        else:
            Xva = scaler.transform(valid_ss.X)
            C, sigma, _ = grid_search(Xtr, train_ss.labels, Xva, valid_ss.labels, cfg.svm_C, cfg.svm_sigma,
                                      cfg.svm_tol)
            pred = svm_train(Xtr, train_ss.labels, sigma=sigma, C=C, tol=cfg.svm_tol).predict(Xte)
            info = {"C": C, "sigma": sigma}

    if cfg.subject_voting:
        subjects = sorted(set(test_ss.subjects))
        subj = np.array(test_ss.subjects)
        y_true = [int(test_ss.labels[subj == s][0]) for s in subjects]
        y_pred = [subject_vote(pred[subj == s]) for s in subjects]
    else:
        y_true, y_pred = test_ss.labels, pred
    cm = ConfusionMatrix.from_predictions(y_true, y_pred)
    return {"fold": fold, "seed": seed, "cm": cm, "n_train": len(train_ss), "n_test": len(test_ss), **info}


# ---------------------------------------------------------------------------
# experiments


def _clean(v):
    if isinstance(v, float):
        return None if math.isnan(v) else v
    return v


def _metric_record(cm: ConfusionMatrix) -> dict:
    m = metrics(cm)
    return {"accuracy": m["accuracy"], "f1": m["f1"], "tp": cm.tp, "fn": cm.fn, "fp": cm.fp, "tn": cm.tn}


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    plan: FoldPlan
    records: list[dict]

    @property
    def fold_accuracies(self) -> list[float]:
        return [r["accuracy"] for r in self.records if r["fold"] != "aggregate"]

    @property
    def aggregate(self) -> dict:
        return self.records[-1]

    def to_jsonl(self) -> str:
        return "".join(json.dumps({k: _clean(v) for k, v in r.items()}, sort_keys=True) + "\n"
                       for r in self.records)

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "config_hash": self.config.config_hash(),
            "fold_plan": [[u if isinstance(u, str) else list(u), f] for u, f in
                          sorted(self.plan.assignment.items(), key=lambda t: (t[1], repr(t[0])))],
            "records": self.records,
        }

    def write(self, directory=None) -> Path:
        directory = Path(directory or self.config.output_dir)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"report-{self.config.config_hash()}.json"
        path.write_text(json.dumps(self.summary(), sort_keys=True, indent=1) + "\n")
        return path


def fold_plan_for(ss: SampleSet, cfg: ExperimentConfig) -> FoldPlan:
    units, labels = unit_labels(ss.units(cfg.mode), ss.labels)
    return make_folds(units, labels, cfg.folds, cfg.mode, cfg.seed)


def _evaluate_star(args):
    return evaluate_fold(*args)


def run_experiment(cfg: ExperimentConfig, samples: SampleSet | None = None) -> ExperimentReport:
    """k-fold cross-validation; one record per fold plus a pooled aggregate."""
    ss = samples if samples is not None else load_or_extract(cfg)
    if ss.model != cfg.model:
        raise ValueError(f"samples are model {ss.model} but the config asks for model {cfg.model}")
    plan = fold_plan_for(ss, cfg)
    jobs = [(ss, plan, f, cfg) for f in range(cfg.folds)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(_evaluate_star, jobs))
    else:
        results = [_evaluate_star(j) for j in jobs]

    h = cfg.config_hash()
    records, total = [], ConfusionMatrix()
    for r in results:
        cm = r.pop("cm")
        total = total + cm
        records.append({"fold": r.pop("fold"), **_metric_record(cm), "p_value": None, "config_hash": h,
                        "leakage_checked": True, **r})
    accs = [rec["accuracy"] for rec in records]
    records.append({"fold": "aggregate", **_metric_record(total), "p_value": None, "config_hash": h,
                    "seed": cfg.seed, "mean_fold_accuracy": float(np.mean(accs)),
                    "leakage_checked": True})
    return ExperimentReport(cfg, plan, records)


@dataclass
class CompareReport:
    configs: tuple[ExperimentConfig, ExperimentConfig]
    reports: tuple[ExperimentReport, ExperimentReport]
    p_value: float
    statistic: float
    n_pairs: int
    method: str

    @property
    def records(self) -> list[dict]:
        h1, h2 = (c.config_hash() for c in self.configs)
        out = [{"fold": f, "accuracy_arm1": a, "accuracy_arm2": b, "config_hashes": [h1, h2]}
               for f, (a, b) in enumerate(zip(self.reports[0].fold_accuracies, self.reports[1].fold_accuracies))]
        out.append({"fold": "comparison", "p_value": self.p_value, "statistic": self.statistic,
                    "n_pairs": self.n_pairs, "method": self.method, "alternative": "arm2 > arm1",
                    "accuracy_arm1": self.reports[0].aggregate["accuracy"],
                    "accuracy_arm2": self.reports[1].aggregate["accuracy"], "config_hashes": [h1, h2]})
        return out

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    def write(self, directory=None) -> Path:
        directory = Path(directory or self.configs[0].output_dir)
        directory.mkdir(parents=True, exist_ok=True)
        hashes = "-".join(c.config_hash() for c in self.configs)
        path = directory / f"compare-{hashes}.json"
        path.write_text(json.dumps({"configs": [c.to_dict() for c in self.configs], "records": self.records},
                                   sort_keys=True, indent=1) + "\n")
        return path


def run_compare(cfg1: ExperimentConfig, cfg2: ExperimentConfig, samples=(None, None)) -> CompareReport:
    """Paired per-fold accuracies and a one-sided signed-rank test of arm 2 > arm 1."""
    r1 = run_experiment(cfg1, samples[0])
    r2 = run_experiment(cfg2, samples[1])
    if r1.plan.k != r2.plan.k or r1.plan.canonical() != r2.plan.canonical():
        raise ValueError("fold plans differ between arms; use the same seed, folds, mode and subjects")
    res = wilcoxon_test(r2.fold_accuracies, r1.fold_accuracies)
    return CompareReport((cfg1, cfg2), (r1, r2), res.p_value, res.statistic, res.n, res.method)
