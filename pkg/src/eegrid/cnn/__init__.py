"""Small numpy convolutional network with exact backpropagation."""
from .checkpoint import load_checkpoint, save_checkpoint
from .layers import BatchNorm, Conv2d, Dense, Dropout, Flatten, Layer, MaxPool, Relu, Softmax
from .network import Network, NetworkSpec, build_preset, cross_entropy
from .training import History, TrainConfig, evaluate, train

__all__ = [
    "BatchNorm", "Conv2d", "Dense", "Dropout", "Flatten", "History", "Layer", "MaxPool", "Network",
    "NetworkSpec", "Relu", "Softmax", "TrainConfig", "build_preset", "cross_entropy", "evaluate",
    "load_checkpoint", "save_checkpoint", "train",
]
