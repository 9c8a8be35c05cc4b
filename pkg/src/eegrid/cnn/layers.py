"""Sequential network layers with hand-written backward passes.

Tensors are channels-last: images are (N, H, W, C), vectors (N, D).
Every layer caches what its backward pass needs during ``forward``.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BN_EPS = 1e-5
BN_MOMENTUM = 0.9


class Layer:
    kind = "layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}
        self.input_shape: tuple | None = None
        self.output_shape: tuple | None = None

    def build(self, input_shape: tuple, rng: np.random.Generator) -> tuple:
        self.input_shape = tuple(input_shape)
        self.output_shape = self._output_shape(self.input_shape)
        self._init_params(rng)
        return self.output_shape

    def _output_shape(self, shape):
        return shape

    def _init_params(self, rng):
        pass

    def forward(self, x: np.ndarray, train: bool, rng: np.random.Generator | None = None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def config(self) -> dict:
        return {}

    def spec(self) -> dict:
        return {"kind": self.kind, **self.config()}

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.config().items())
        return f"{type(self).__name__}({args})"


class Conv2d(Layer):
    """Stride-1 2-D convolution (cross-correlation), 'valid' or 'same' padding."""

    kind = "conv2d"

    def __init__(self, filters: int, kernel_h: int = 3, kernel_w: int | None = None, padding: str = "valid"):
        super().__init__()
        self.filters = filters
        self.kernel_h = kernel_h
        self.kernel_w = kernel_h if kernel_w is None else kernel_w
        if min(filters, self.kernel_h, self.kernel_w) < 1:
            raise ValueError("filters and kernel sizes must be >= 1")
        if padding not in ("valid", "same"):
            raise ValueError("padding must be 'valid' or 'same'")
        self.padding = padding

    def config(self):
        return {"filters": self.filters, "kernel_h": self.kernel_h, "kernel_w": self.kernel_w,
                "padding": self.padding}

    def _pads(self):
        if self.padding == "valid":
            return (0, 0), (0, 0)
        ph, pw = self.kernel_h - 1, self.kernel_w - 1
        return (ph // 2, ph - ph // 2), (pw // 2, pw - pw // 2)

    def _output_shape(self, shape):
        if len(shape) != 3:
            raise ValueError(f"conv2d needs (H, W, C) input, got {shape}")
        h, w, _ = shape
        (pt, pb), (pl, pr) = self._pads()
        ho, wo = h + pt + pb - self.kernel_h + 1, w + pl + pr - self.kernel_w + 1
        if ho < 1 or wo < 1:
            raise ValueError(f"{self.kernel_h}x{self.kernel_w} kernel does not fit input {shape}")
        return (ho, wo, self.filters)

    def _init_params(self, rng):
        c = self.input_shape[2]
        fan_in = self.kernel_h * self.kernel_w * c
        self.params["W"] = rng.normal(0.0, np.sqrt(2.0 / fan_in), (self.kernel_h, self.kernel_w, c, self.filters))
        self.params["b"] = np.zeros(self.filters)

    def forward(self, x, train, rng=None):
        (pt, pb), (pl, pr) = self._pads()
        if pt or pb or pl or pr:
            x = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0)))
        patches = sliding_window_view(x, (self.kernel_h, self.kernel_w), axis=(1, 2))  # N,Ho,Wo,C,kh,kw
        self._xp_shape = x.shape
        self._patches = patches
        W = self.params["W"].transpose(2, 0, 1, 3)  # C,kh,kw,F
        return np.tensordot(patches, W, axes=([3, 4, 5], [0, 1, 2])) + self.params["b"]

    def backward(self, dy):
        W = self.params["W"]
        dW = np.tensordot(self._patches, dy, axes=([0, 1, 2], [0, 1, 2]))  # C,kh,kw,F
        self.grads["W"] = dW.transpose(1, 2, 0, 3)
        self.grads["b"] = dy.sum(axis=(0, 1, 2))
        dxp = np.zeros(self._xp_shape)
        ho, wo = dy.shape[1], dy.shape[2]
        for i in range(self.kernel_h):
            for j in range(self.kernel_w):
                dxp[:, i:i + ho, j:j + wo, :] += dy @ W[i, j].T
        (pt, pb), (pl, pr) = self._pads()
        return dxp[:, pt:dxp.shape[1] - pb, pl:dxp.shape[2] - pr, :]


class MaxPool(Layer):
    """Non-overlapping ``size x size`` max pooling; trailing rows/cols that do not fill a window are dropped."""

    kind = "maxpool"

    def __init__(self, size: int = 2):
        super().__init__()
        if size < 1:
            raise ValueError("pool size must be >= 1")
        self.size = size

    def config(self):
        return {"size": self.size}

    def _output_shape(self, shape):
        if len(shape) != 3:
            raise ValueError(f"maxpool needs (H, W, C) input, got {shape}")
        h, w, c = shape
        if h // self.size < 1 or w // self.size < 1:
            raise ValueError(f"pool {self.size} does not fit input {shape}")
        return (h // self.size, w // self.size, c)

    def forward(self, x, train, rng=None):
        s = self.size
        n, h, w, c = x.shape
        ho, wo = h // s, w // s
        self._in_shape = x.shape
        blocks = x[:, :ho * s, :wo * s, :].reshape(n, ho, s, wo, s, c).transpose(0, 1, 3, 5, 2, 4)
        blocks = blocks.reshape(n, ho, wo, c, s * s)
        self._argmax = np.argmax(blocks, axis=-1)  # first maximum on ties
        return np.take_along_axis(blocks, self._argmax[..., None], axis=-1)[..., 0]

    def backward(self, dy):
        s = self.size
        n, h, w, c = self._in_shape
        ho, wo = h // s, w // s
        blocks = np.zeros((n, ho, wo, c, s * s))
        np.put_along_axis(blocks, self._argmax[..., None], dy[..., None], axis=-1)
        blocks = blocks.reshape(n, ho, wo, c, s, s).transpose(0, 1, 4, 2, 5, 3).reshape(n, ho * s, wo * s, c)
        dx = np.zeros(self._in_shape)
        dx[:, :ho * s, :wo * s, :] = blocks
        return dx


class Relu(Layer):
    kind = "relu"

    def forward(self, x, train, rng=None):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dy):
        return np.where(self._mask, dy, 0.0)


class BatchNorm(Layer):
    """Normalizes each channel (images) or feature (vectors) over the batch.

    Train mode uses batch statistics and updates the running estimates;
    eval mode uses the running estimates.
    """

    kind = "batchnorm"

    def __init__(self, momentum: float = BN_MOMENTUM, eps: float = BN_EPS):
        super().__init__()
        self.momentum = momentum
        self.eps = eps

    def config(self):
        return {"momentum": self.momentum, "eps": self.eps}

    def _init_params(self, rng):
        c = self.input_shape[-1]
        self.params["gamma"] = np.ones(c)
        self.params["beta"] = np.zeros(c)
        self.buffers["running_mean"] = np.zeros(c)
        self.buffers["running_var"] = np.ones(c)

    def forward(self, x, train, rng=None):
        axes = tuple(range(x.ndim - 1))
        if train:
            count = int(np.prod([x.shape[a] for a in axes]))
            if x.shape[0] < 2:
                raise ValueError("batch norm in train mode needs a batch of at least 2")
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.buffers["running_mean"] = m * self.buffers["running_mean"] + (1 - m) * mean
            self.buffers["running_var"] = m * self.buffers["running_var"] + (1 - m) * var
            self._count = count
        else:
            mean, var = self.buffers["running_mean"], self.buffers["running_var"]
        self._train = train
        self._inv_std = 1.0 / np.sqrt(var + self.eps)
        self._xhat = (x - mean) * self._inv_std
        return self.params["gamma"] * self._xhat + self.params["beta"]

    def backward(self, dy):
        axes = tuple(range(dy.ndim - 1))
        gamma = self.params["gamma"]
        self.grads["gamma"] = np.sum(dy * self._xhat, axis=axes)
        self.grads["beta"] = np.sum(dy, axis=axes)
        dxhat = dy * gamma
        if not self._train:
            return dxhat * self._inv_std
        n = self._count
        return (self._inv_std / n) * (
            n * dxhat - dxhat.sum(axis=axes) - self._xhat * np.sum(dxhat * self._xhat, axis=axes)
        )


class Dropout(Layer):
    """Inverted dropout: survivors are scaled by ``1 / (1 - rate)`` so eval is the identity."""

    kind = "dropout"

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate

    def config(self):
        return {"rate": self.rate}

    def forward(self, x, train, rng=None):
        if not train or self.rate == 0.0:
            self._scale = None
            return x
        if rng is None:
            raise ValueError("dropout in train mode needs a random generator")
        keep = rng.random(x.shape) >= self.rate
        self._scale = keep / (1.0 - self.rate)
        return x * self._scale

    def backward(self, dy):
        return dy if self._scale is None else dy * self._scale


class Flatten(Layer):
    kind = "flatten"

    def _output_shape(self, shape):
        return (int(np.prod(shape)),)

    def forward(self, x, train, rng=None):
        self._in_shape = x.shape
        return x.reshape(len(x), -1)

    def backward(self, dy):
        return dy.reshape(self._in_shape)


class Dense(Layer):
    kind = "dense"

    def __init__(self, units: int):
        super().__init__()
        if units < 1:
            raise ValueError("dense layer needs >= 1 unit")
        self.units = units

    def config(self):
        return {"units": self.units}

    def _output_shape(self, shape):
        if len(shape) != 1:
            raise ValueError(f"dense layer needs flat input, got {shape}")
        return (self.units,)

    def _init_params(self, rng):
        d = self.input_shape[0]
        self.params["W"] = rng.normal(0.0, np.sqrt(2.0 / d), (d, self.units))
        self.params["b"] = np.zeros(self.units)

    def forward(self, x, train, rng=None):
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dy):
        self.grads["W"] = self._x.T @ dy
        self.grads["b"] = dy.sum(axis=0)
        return dy @ self.params["W"].T


class Softmax(Layer):
    kind = "softmax"

    def _output_shape(self, shape):
        if len(shape) != 1:
            raise ValueError(f"softmax needs flat input, got {shape}")
        return shape

    def forward(self, x, train, rng=None):
        z = x - x.max(axis=1, keepdims=True)
        e = np.exp(z)
        self._p = e / e.sum(axis=1, keepdims=True)
        return self._p

    def backward(self, dy):
        p = self._p
        return p * (dy - np.sum(dy * p, axis=1, keepdims=True))


LAYER_TYPES = {cls.kind: cls for cls in (Conv2d, MaxPool, Relu, BatchNorm, Dropout, Flatten, Dense, Softmax)}


def layer_from_spec(spec: dict) -> Layer:
    spec = dict(spec)
    kind = spec.pop("kind")
    try:
        return LAYER_TYPES[kind](**spec)
    except KeyError:
        raise ValueError(f"unknown layer kind {kind!r}") from None
