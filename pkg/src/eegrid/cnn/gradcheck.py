"""Central finite-difference checks of the hand-written backward passes.

Errors are per tensor: ``|a - n| / max(|a|, |n|, floor)`` with Euclidean
norms over the checked coordinates. Central differences at ``EPS`` carry
round-off of about 1e-10, so gradients below the floor cannot be resolved
to 1e-4 relative accuracy; the floor turns the test for them into an
absolute one. That matters for structurally zero gradients, such as a bias
feeding straight into batch norm.

ReLU and max-pool are not differentiable at their kinks; a perturbation that
crosses one gives a meaningless difference quotient, so checks should use
inputs whose pre-activations stay clear of them.
"""
from __future__ import annotations

import numpy as np

from .layers import Layer
from .network import Network, cross_entropy

EPS = 1e-5
FLOOR = 1e-5


def relative_error(analytic, numeric, floor: float = FLOOR) -> float:
    a = np.asarray(analytic, dtype=float).ravel()
    n = np.asarray(numeric, dtype=float).ravel()
    return float(np.linalg.norm(a - n) / max(np.linalg.norm(a), np.linalg.norm(n), floor))


def _coords(shape, max_coords, rng):
    size = int(np.prod(shape))
    if max_coords is None or size <= max_coords:
        return np.arange(size)
    return np.sort(rng.choice(size, max_coords, replace=False))


def _fd(f, arr: np.ndarray, coords, eps: float) -> np.ndarray:
    flat = arr.reshape(-1)
    out = np.empty(len(coords))
    for j, c in enumerate(coords):
        old = flat[c]
        flat[c] = old + eps
        up = f()
        flat[c] = old - eps
        down = f()
        flat[c] = old
        out[j] = (up - down) / (2 * eps)
    return out


def check_network(net: Network, x, labels, eps: float = EPS, max_coords: int | None = None,
                  seed: int = 0) -> dict:
    """Train-mode gradient check of every parameter tensor of ``net``.

    Dropout masks are frozen by re-seeding the generator for each forward
    pass; train-mode outputs ignore the running statistics, which are
    restored afterwards. Returns ``{(layer index, name): relative error}``.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    state = net.get_state()

    def loss():
        return cross_entropy(net.forward(x, train=True, rng=np.random.default_rng(seed)), labels)

    net.forward(x, train=True, rng=np.random.default_rng(seed))
    grads = net.backward(labels)
    rng = np.random.default_rng(seed + 1)
    out = {}
    for i, name, arr in net.parameters():
        coords = _coords(arr.shape, max_coords, rng)
        numeric = _fd(loss, arr, coords, eps)
        out[(i, name)] = relative_error(grads[i][name].reshape(-1)[coords], numeric)
    net.set_state(state)
    return out


def check_layer(layer: Layer, input_shape, batch: int = 3, train: bool = True, eps: float = EPS,
                seed: int = 0) -> dict:
    """Gradient check of one layer under the loss ``sum(R * layer(x))``.

    Covers the input gradient (key ``"x"``) and every parameter.
    """
    rng = np.random.default_rng(seed)
    layer.build(tuple(input_shape), rng)
    x = rng.normal(size=(batch, *input_shape))
    y = layer.forward(x, train, np.random.default_rng(seed))
    R = rng.normal(size=y.shape)

    def loss():
        return float(np.sum(R * layer.forward(x, train, np.random.default_rng(seed))))

    layer.forward(x, train, np.random.default_rng(seed))
    dx = layer.backward(R)
    grads = {k: v.copy() for k, v in layer.grads.items()}
    buffers = {k: v.copy() for k, v in layer.buffers.items()}
    out = {"x": relative_error(dx, _fd(loss, x, np.arange(x.size), eps))}
    for name, arr in layer.params.items():
        out[name] = relative_error(grads[name], _fd(loss, arr, np.arange(arr.size), eps))
    layer.buffers = buffers
    return out
