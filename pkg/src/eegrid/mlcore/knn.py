"""k-nearest-neighbour classification on flattened feature vectors."""
from __future__ import annotations

import numpy as np


def _flatten(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return X.reshape(len(X), -1)


class KNNClassifier:
    """Majority vote of the ``k`` Euclidean-nearest training samples.

    Equal distances are resolved in favour of the lower training index.
    """

    def __init__(self, k: int = 3):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k

    def fit(self, X, y) -> "KNNClassifier":
        X = _flatten(X)
        if len(X) == 0:
            raise ValueError("empty training set")
        if self.k > len(X):
            raise ValueError(f"k={self.k} exceeds training size {len(X)}")
        self.X_ = X
        self.y_ = np.asarray(y, dtype=int)
        return self

    def neighbours(self, query) -> np.ndarray:
        q = np.asarray(query, dtype=np.float64).ravel()
        diff = self.X_ - q
        d2 = np.einsum("ij,ij->i", diff, diff)
        return np.argsort(d2, kind="stable")[: self.k]

    def predict(self, Q) -> np.ndarray:
        Q = _flatten(Q)
        out = np.empty(len(Q), dtype=int)
        n_classes = int(self.y_.max()) + 1
        for i, q in enumerate(Q):
            votes = np.bincount(self.y_[self.neighbours(q)], minlength=n_classes)
            out[i] = int(np.argmax(votes))
        return out


def knn_classify(train_X, train_y, query, k: int = 3) -> int:
    return int(KNNClassifier(k).fit(train_X, train_y).predict(np.asarray(query)[None])[0])
