"""Mini-batch training with early stopping on validation loss."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import Network, cross_entropy


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    learning_rate: float = 1e-3
    max_epochs: int = 50
    patience: int = 5
    optimizer: str = "adam"
    seed: int = 0

    def __post_init__(self):
        if min(self.batch_size, self.max_epochs, self.patience) < 1 or self.learning_rate <= 0:
            raise ValueError("batch size, epochs, patience and learning rate must be positive")
        if self.patience >= self.max_epochs:
            raise ValueError("patience must be smaller than max_epochs")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError("optimizer must be 'adam' or 'sgd'")


class SGD:
    def __init__(self, lr: float):
        self.lr = lr

    def step(self, net: Network, grads):
        for i, name, _ in net.parameters():
            net.layers[i].params[name] = net.layers[i].params[name] - self.lr * grads[i][name]


class Adam:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict = {}
        self.v: dict = {}

    def step(self, net: Network, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for i, name, p in net.parameters():
            g = grads[i][name]
            key = (i, name)
            m = self.m.get(key, np.zeros_like(p))
            v = self.v.get(key, np.zeros_like(p))
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            self.m[key], self.v[key] = m, v
            m_hat = m / (1 - b1**self.t)
            v_hat = v / (1 - b2**self.t)
            net.layers[i].params[name] = p - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = 0      # 1-based
    stopped_epoch: int = 0   # last epoch run


def _batches(n: int, batch_size: int, rng: np.random.Generator) -> list[np.ndarray]:
    order = rng.permutation(n)
    parts = [order[i:i + batch_size] for i in range(0, n, batch_size)]
    # batch norm cannot train on a single sample; fold a lone tail into its neighbour
    if len(parts) > 1 and len(parts[-1]) == 1:
        parts[-2] = np.concatenate([parts[-2], parts.pop()])
    return parts


def evaluate(net: Network, X, y) -> tuple[float, float]:
    probs = net.predict_proba(X)
    y = np.asarray(y, dtype=int)
    return cross_entropy(probs, y), float(np.mean(np.argmax(probs, axis=1) == y))


def train(net: Network, X_train, y_train, X_val, y_val, cfg: TrainConfig = TrainConfig()) -> tuple[Network, History]:
    """Train until validation loss stalls for ``cfg.patience`` epochs.

    The network is left holding the parameters (and batch-norm statistics) of
    its best validation epoch.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=int)
    if len(X_train) < 2 or len(X_val) == 0:
        raise ValueError("training needs >= 2 training samples and a non-empty validation set")
    rng = np.random.default_rng(cfg.seed)
    opt = Adam(cfg.learning_rate) if cfg.optimizer == "adam" else SGD(cfg.learning_rate)
    hist = History()
    best_loss, best_state, stale = np.inf, net.get_state(), 0
    for epoch in range(1, cfg.max_epochs + 1):
        losses = []
        for idx in _batches(len(X_train), cfg.batch_size, rng):
            probs = net.forward(X_train[idx], train=True, rng=rng)
            losses.append(cross_entropy(probs, y_train[idx]) * len(idx))
            opt.step(net, net.backward(y_train[idx]))
        hist.train_loss.append(float(np.sum(losses) / len(X_train)))
        vl, va = evaluate(net, X_val, y_val)
        hist.val_loss.append(vl)
        hist.val_accuracy.append(va)
        hist.stopped_epoch = epoch
        if vl < best_loss:
            best_loss, best_state, stale = vl, net.get_state(), 0
            hist.best_epoch = epoch
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    net.set_state(best_state)
    return net, hist
