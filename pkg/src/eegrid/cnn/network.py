"""Sequential network container, presets and cross-entropy loss."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .layers import (BatchNorm, Conv2d, Dense, Dropout, Flatten, Layer, MaxPool, Relu, Softmax,
                     layer_from_spec)

N_CLASSES = 2
PRESETS = ("SAD_NET", "DEAP_NET")


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    input_shape: tuple[int, ...]
    layers: tuple[dict, ...] = field(default_factory=tuple)


def _conv_block(filters: int, padding: str) -> list[dict]:
    # conv -> batchnorm -> relu
    return [{"kind": "conv2d", "filters": filters, "kernel_h": 3, "kernel_w": 3, "padding": padding},
            {"kind": "batchnorm"}, {"kind": "relu"}]


def build_preset(name: str, input_shape=(15, 15, 10), padding: str = "valid") -> NetworkSpec:
    """The two published architectures, each preceded by input batch normalization."""
    bn = [{"kind": "batchnorm"}]
    if name == "SAD_NET":
        layers = (bn + _conv_block(64, padding) + _conv_block(64, padding)
                  + [{"kind": "maxpool", "size": 2}, {"kind": "dropout", "rate": 0.25}, {"kind": "flatten"},
                     {"kind": "dense", "units": 128}, {"kind": "relu"}, {"kind": "dropout", "rate": 0.2},
                     {"kind": "dense", "units": N_CLASSES}, {"kind": "softmax"}])
    elif name == "DEAP_NET":
        layers = (bn + _conv_block(32, padding) + [{"kind": "maxpool", "size": 2}]
                  + _conv_block(64, padding)
                  + [{"kind": "maxpool", "size": 2}, {"kind": "dropout", "rate": 0.45}, {"kind": "flatten"},
                     {"kind": "dense", "units": 64}, {"kind": "relu"}, {"kind": "dropout", "rate": 0.25},
                     {"kind": "dense", "units": N_CLASSES}, {"kind": "softmax"}])
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    spec = NetworkSpec(name, tuple(int(d) for d in input_shape), tuple(layers))
    Network.from_spec(spec)  # shape check
    return spec


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    p = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(p, 1e-300))))


class Network:
    """Ordered layers ending in a 2-way softmax; shapes checked at construction."""

    def __init__(self, layers: list[Layer], input_shape, seed: int = 0, name: str = "custom",
                 require_softmax: bool = True):
        self.layers = list(layers)
        self.input_shape = tuple(int(d) for d in input_shape)
        self.name = name
        rng = np.random.default_rng(seed)
        shape = self.input_shape
        self.shape_trace = [shape]
        for layer in self.layers:
            shape = layer.build(shape, rng)
            self.shape_trace.append(shape)
        if require_softmax:
            if not self.layers or not isinstance(self.layers[-1], Softmax):
                raise ValueError("network must end with a softmax layer")
            if shape != (N_CLASSES,):
                raise ValueError(f"network output must have {N_CLASSES} classes, got {shape}")
        self._dropout_rng = np.random.default_rng(seed + 1)
        self._cached = False

    @classmethod
    def from_spec(cls, spec: NetworkSpec, seed: int = 0) -> "Network":
        return cls([layer_from_spec(s) for s in spec.layers], spec.input_shape, seed, spec.name)

    def spec(self) -> NetworkSpec:
        return NetworkSpec(self.name, self.input_shape, tuple(l.spec() for l in self.layers))

    def forward(self, x, train: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.input_shape:
            raise ValueError(f"batch shape {x.shape[1:]} does not match network input {self.input_shape}")
        rng = rng if rng is not None else self._dropout_rng
        for layer in self.layers:
            x = layer.forward(x, train, rng)
        self._cached = True
        return x

    def predict_proba(self, x, batch_size: int = 256) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.concatenate([self.forward(x[i:i + batch_size]) for i in range(0, len(x), batch_size)])

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1)

    def backward(self, labels) -> list[dict[str, np.ndarray]]:
        """Gradients of the mean cross-entropy of the last forward pass, per layer."""
        if not self._cached:
            raise RuntimeError("backward called without a cached forward pass")
        labels = np.asarray(labels, dtype=int)
        probs = self.layers[-1]._p
        if len(labels) != len(probs):
            raise ValueError("label count does not match cached batch")
        # softmax and cross-entropy combined: d/dlogits = (p - onehot) / N
        g = probs.copy()
        g[np.arange(len(labels)), labels] -= 1.0
        g /= len(labels)
        for layer in reversed(self.layers[:-1]):
            g = layer.backward(g)
        return [dict(layer.grads) for layer in self.layers]

    def parameters(self):
        """(layer index, name, array) for every trainable tensor."""
        return [(i, k, v) for i, layer in enumerate(self.layers) for k, v in layer.params.items()]

    def get_state(self) -> list[dict]:
        return [copy.deepcopy({"params": l.params, "buffers": l.buffers}) for l in self.layers]

    def set_state(self, state: list[dict]) -> None:
        for layer, s in zip(self.layers, state):
            layer.params = copy.deepcopy(s["params"])
            layer.buffers = copy.deepcopy(s["buffers"])
