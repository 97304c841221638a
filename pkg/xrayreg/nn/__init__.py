# xrayreg/nn/__init__.py
"""
Minimal deterministic CNN: layers, forward/backward, MSE loss, SGD, Xavier init, persistence.
"""
from .layers import Conv2D, Dense, Flatten, MaxPool2D, ReLU
from .network import Network, NetworkSpec, forward, xavier_init, flatten_params, load_flat_params
from .losses import mse_loss, backward, batch_gradient
from .optim import TrainConfig, lr_schedule, sgd_step, zero_velocity
from .trainer import TrainResult, train
from .labels import LabelScaler
from .model_io import save_model, load_model, write_weights, read_weights

__all__ = [
    "Conv2D",
    "Dense",
    "Flatten",
    "MaxPool2D",
    "ReLU",
    "Network",
    "NetworkSpec",
    "forward",
    "xavier_init",
    "flatten_params",
    "load_flat_params",
    "mse_loss",
    "backward",
    "batch_gradient",
    "TrainConfig",
    "lr_schedule",
    "sgd_step",
    "zero_velocity",
    "TrainResult",
    "train",
    "LabelScaler",
    "save_model",
    "load_model",
    "write_weights",
    "read_weights",
]
