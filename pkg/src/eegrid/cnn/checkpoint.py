"""Versioned checkpoint files for trained networks.

Stored in the EEGRID01 container: the metadata block lists the layer specs
and every tensor's (layer, name, shape); values are the tensors concatenated
in that order as little-endian float32.
"""
from __future__ import annotations

import numpy as np

from ..recording import FormatError, read_container, write_container
from .network import Network, NetworkSpec

CHECKPOINT_VERSION = 1


def save_checkpoint(net: Network, path) -> None:
    tensors, index = [], []
    for i, layer in enumerate(net.layers):
        for group in ("params", "buffers"):
            for name, arr in getattr(layer, group).items():
                index.append({"layer": i, "group": group, "name": name, "shape": list(arr.shape)})
                tensors.append(np.asarray(arr).ravel())
    meta = {
        "kind": "cnn_checkpoint",
        "checkpoint_version": CHECKPOINT_VERSION,
        "name": net.name,
        "input_shape": list(net.input_shape),
        "layers": [l.spec() for l in net.layers],
        "tensors": index,
    }
    flat = np.concatenate(tensors) if tensors else np.zeros(0)
    write_container(path, meta, flat)


def load_checkpoint(path) -> Network:
    meta, values = read_container(path)
    if meta.get("kind") != "cnn_checkpoint":
        raise FormatError(f"container holds {meta.get('kind')!r}, not a checkpoint", path)
    if meta.get("checkpoint_version") != CHECKPOINT_VERSION:
        raise FormatError(f"unsupported checkpoint version {meta.get('checkpoint_version')}", path)
    spec = NetworkSpec(meta["name"], tuple(meta["input_shape"]), tuple(meta["layers"]))
    net = Network.from_spec(spec)
    values = values.astype(np.float64).ravel()
    offset = 0
    for entry in meta["tensors"]:
        size = int(np.prod(entry["shape"])) if entry["shape"] else 1
        arr = values[offset:offset + size].reshape(entry["shape"])
        offset += size
        layer = net.layers[entry["layer"]]
        target = getattr(layer, entry["group"])
        if entry["name"] not in target or target[entry["name"]].shape != arr.shape:
            raise FormatError(f"tensor {entry['name']} of layer {entry['layer']} does not match architecture", path)
        target[entry["name"]] = arr
    if offset != len(values):
        raise FormatError("checkpoint holds more values than its tensor index", path)
    return net
