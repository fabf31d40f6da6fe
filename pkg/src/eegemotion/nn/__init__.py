from .layers import LSTM, Conv2D, Dense, Dropout, Flatten, Layer, MaxPool2D, ReLU, RepeatVector, Softmax
from .network import (ForwardCache, ModelConfig, Network, NonFiniteError, ShapeError,
                      StaleCacheError, as_input, backward, build_network, forward, loss_ce,
                      one_hot, predict, predict_proba)
from .optim import Adam
from .serialize import FingerprintMismatch, WeightFormatError, load_weights, save_weights
from .train import EpochStats, TrainConfig, TrainHistory, stratified_split, train

__all__ = [
    "LSTM", "Adam", "Conv2D", "Dense", "Dropout", "EpochStats", "FingerprintMismatch", "Flatten",
    "ForwardCache", "Layer", "MaxPool2D", "ModelConfig", "Network", "NonFiniteError", "ReLU",
    "RepeatVector", "ShapeError", "Softmax", "StaleCacheError", "TrainConfig", "TrainHistory",
    "WeightFormatError", "as_input", "backward", "build_network", "forward", "load_weights",
    "loss_ce", "one_hot", "predict", "predict_proba", "save_weights", "stratified_split", "train",
]
