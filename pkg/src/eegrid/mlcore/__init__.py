"""Splitting, classical classifiers, metrics and significance testing."""
from .folds import FoldMode, FoldPlan, LeakageError, Split, check_no_leakage, make_folds, unit_labels
from .knn import KNNClassifier, knn_classify
from .metrics import ConfusionMatrix, metrics, subject_vote
from .scaling import Standardizer
from .svm import ConvergenceError, SvmModel, grid_search, kkt_violations, rbf_kernel, svm_train
from .wilcoxon import WilcoxonResult, wilcoxon_signed_rank, wilcoxon_test

__all__ = [
    "ConfusionMatrix", "ConvergenceError", "FoldMode", "FoldPlan", "KNNClassifier", "LeakageError",
    "Split", "Standardizer", "SvmModel", "WilcoxonResult", "check_no_leakage", "grid_search", "kkt_violations",
    "knn_classify", "make_folds", "metrics", "rbf_kernel", "subject_vote", "svm_train",
    "unit_labels", "wilcoxon_signed_rank", "wilcoxon_test",
]
