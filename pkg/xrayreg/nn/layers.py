# xrayreg/nn/layers.py
"""
Layer set of the regression CNN. Layers are stateless apart from their
parameters: forward returns (output, cache) and backward consumes the cache, so
several micro-batches can run through one network concurrently.
"""
from typing import Dict, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from xrayreg.common.errors import ShapeError

Grads = Dict[str, np.ndarray]


class Layer:
    name: str = "layer"

    def params(self) -> Dict[str, np.ndarray]:
        return {}

    def output_shape(self, in_shape: Tuple[int, ...]) -> Tuple[int, ...]:
        return in_shape

    def forward(self, x: np.ndarray):
        raise NotImplementedError

    def backward(self, dy: np.ndarray, cache) -> Tuple[np.ndarray, Grads]:
        raise NotImplementedError


class Conv2D(Layer):
    """Valid (unpadded) cross-correlation, stride 1. Input (N, C, H, W)."""

    def __init__(self, name: str, in_channels: int, out_channels: int, kernel: int):
        self.name = name
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.weight = np.zeros((out_channels, in_channels, kernel, kernel))
        self.bias = np.zeros(out_channels)

    def params(self):
        return {f"{self.name}.weight": self.weight, f"{self.name}.bias": self.bias}

    def fan(self) -> Tuple[int, int]:
        k2 = self.kernel * self.kernel
        return self.in_channels * k2, self.out_channels * k2

    def output_shape(self, in_shape):
        c, h, w = in_shape
        if c != self.in_channels:
            raise ShapeError(self.name, f"expected {self.in_channels} channels, got {c}")
        if h < self.kernel or w < self.kernel:
            raise ShapeError(self.name, f"input {h}x{w} is smaller than the {self.kernel}x{self.kernel} kernel")
        return (self.out_channels, h - self.kernel + 1, w - self.kernel + 1)

    def forward(self, x):
        n = x.shape[0]
        _, ho, wo = self.output_shape(x.shape[1:])
        k = self.kernel
        windows = sliding_window_view(x, (k, k), axis=(2, 3))  # (N, C, Ho, Wo, k, k)
        cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * ho * wo, self.in_channels * k * k)
        y = cols @ self.weight.reshape(self.out_channels, -1).T + self.bias
        y = y.reshape(n, ho, wo, self.out_channels).transpose(0, 3, 1, 2)
        return np.ascontiguousarray(y), (x.shape, cols)

    def backward(self, dy, cache):
        x_shape, cols = cache
        n, c, h, w = x_shape
        k = self.kernel
        ho, wo = dy.shape[2], dy.shape[3]
        dyf = dy.transpose(0, 2, 3, 1).reshape(-1, self.out_channels)
        grads = {
            f"{self.name}.weight": (dyf.T @ cols).reshape(self.weight.shape),
            f"{self.name}.bias": dyf.sum(axis=0),
        }
        dcols = (dyf @ self.weight.reshape(self.out_channels, -1)).reshape(n, ho, wo, c, k, k)
        dx = np.zeros(x_shape)
        for i in range(k):
            for j in range(k):
                dx[:, :, i: i + ho, j: j + wo] += dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        return dx, grads


class ReLU(Layer):
    def __init__(self, name: str):
        self.name = name

    def forward(self, x):
        return np.maximum(x, 0.0), x > 0

    def backward(self, dy, cache):
        return dy * cache, {}


class MaxPool2D(Layer):
    """2x2 max pooling, stride 2; odd trailing rows/cols are dropped."""

    def __init__(self, name: str, size: int = 2):
        self.name = name
        self.size = size

    def output_shape(self, in_shape):
        c, h, w = in_shape
        if h < self.size or w < self.size:
            raise ShapeError(self.name, f"input {h}x{w} is smaller than the pooling window")
        return (c, h // self.size, w // self.size)

    def forward(self, x):
        s = self.size
        n, c, h, w = x.shape
        ho, wo = h // s, w // s
        blocks = x[:, :, : ho * s, : wo * s].reshape(n, c, ho, s, wo, s).transpose(0, 1, 2, 4, 3, 5)
        blocks = blocks.reshape(n, c, ho, wo, s * s)
        # first maximum wins on ties, so every window routes to exactly one input
        arg = blocks.argmax(axis=-1)
        y = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]
        return y, (x.shape, arg)

    def backward(self, dy, cache):
        x_shape, arg = cache
        s = self.size
        n, c, h, w = x_shape
        ho, wo = arg.shape[2], arg.shape[3]
        routed = np.zeros((n, c, ho, wo, s * s))
        np.put_along_axis(routed, arg[..., None], dy[..., None], axis=-1)
        routed = routed.reshape(n, c, ho, wo, s, s).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, ho * s, wo * s)
        dx = np.zeros(x_shape)
        dx[:, :, : ho * s, : wo * s] = routed
        return dx, {}


class Flatten(Layer):
    def __init__(self, name: str):
        self.name = name

    def output_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, dy, cache):
        return dy.reshape(cache), {}


class Dense(Layer):
    def __init__(self, name: str, in_features: int, out_features: int):
        self.name = name
        self.in_features = in_features
        self.out_features = out_features
        self.weight = np.zeros((out_features, in_features))
        self.bias = np.zeros(out_features)

    def params(self):
        return {f"{self.name}.weight": self.weight, f"{self.name}.bias": self.bias}

    def fan(self) -> Tuple[int, int]:
        return self.in_features, self.out_features

    def output_shape(self, in_shape):
        if in_shape != (self.in_features,):
            raise ShapeError(self.name, f"expected {self.in_features} inputs, got {in_shape}")
        return (self.out_features,)

    def forward(self, x):
        self.output_shape(x.shape[1:])
        return x @ self.weight.T + self.bias, x

    def backward(self, dy, cache):
        x = cache
        grads = {f"{self.name}.weight": dy.T @ x, f"{self.name}.bias": dy.sum(axis=0)}
        return dy @ self.weight, grads
