# xrayreg/nn/network.py
"""
Regression CNN: Conv(k×k, c1) → ReLU → MaxPool(2) → Conv(k×k, c2) → ReLU →
MaxPool(2) → Dense(hidden) → ReLU → Dense(n_out).

Parameter (and weight-blob) order: conv1.weight, conv1.bias, conv2.weight,
conv2.bias, fc1.weight, fc1.bias, fc2.weight, fc2.bias, each C-ordered.
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from xrayreg.common.errors import InvalidParameterError, ShapeError
from .layers import Conv2D, Dense, Flatten, Layer, MaxPool2D, ReLU

FULL_SIZE_SHAPE_CHAIN = [(152, 296), (76, 148), (72, 144), (36, 72)]


@dataclass(frozen=True)
class NetworkSpec:
    input_rows: int = 156
    input_cols: int = 300
    c1: int = 6
    c2: int = 16
    kernel: int = 5
    hidden: int = 250
    n_out: int = 3
    conv_relu: bool = True

    def __post_init__(self):
        if min(self.input_rows, self.input_cols, self.c1, self.c2, self.kernel, self.hidden, self.n_out) < 1:
            raise InvalidParameterError(f"network sizes must be positive: {self}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "NetworkSpec":
        return cls(**doc)


class Network:
    def __init__(self, spec: NetworkSpec):
        self.spec = spec
        layers: List[Layer] = [Conv2D("conv1", 1, spec.c1, spec.kernel)]
        if spec.conv_relu:
            layers.append(ReLU("relu1"))
        layers += [MaxPool2D("pool1"), Conv2D("conv2", spec.c1, spec.c2, spec.kernel)]
        if spec.conv_relu:
            layers.append(ReLU("relu2"))
        layers += [MaxPool2D("pool2"), Flatten("flatten")]
        self.layers = layers
        self.shapes = self._shape_chain()
        flat = self.shapes[-1][0]
        self.layers += [Dense("fc1", flat, spec.hidden), ReLU("relu3"), Dense("fc2", spec.hidden, spec.n_out)]
        self.shapes = self._shape_chain()
        if (spec.input_rows, spec.input_cols, spec.kernel) == (156, 300, 5):
            chain = self.spatial_chain()
            if chain != FULL_SIZE_SHAPE_CHAIN:
                raise ShapeError("conv1", f"unexpected shape chain {chain}")

    def _shape_chain(self) -> List[Tuple[int, ...]]:
        shape: Tuple[int, ...] = (1, self.spec.input_rows, self.spec.input_cols)
        shapes = []
        for layer in self.layers:
            shape = layer.output_shape(shape)
            shapes.append(shape)
        return shapes

    def spatial_chain(self) -> List[Tuple[int, int]]:
        """Spatial output size of each conv and pooling layer, in order."""
        return [
            tuple(shape[1:])
            for layer, shape in zip(self.layers, self.shapes)
            if isinstance(layer, (Conv2D, MaxPool2D))
        ]

    @property
    def input_shape(self) -> Tuple[int, int]:
        return (self.spec.input_rows, self.spec.input_cols)

    def parameters(self) -> Dict[str, np.ndarray]:
        params: Dict[str, np.ndarray] = {}
        for layer in self.layers:
            params.update(layer.params())
        return params

    def n_params(self) -> int:
        return int(sum(p.size for p in self.parameters().values()))

    def weighted_layers(self) -> List[Layer]:
        return [layer for layer in self.layers if layer.params()]

    def _as_batch(self, x) -> np.ndarray:
        x = np.asarray(getattr(x, "values", x), dtype=np.float64)
        if x.ndim == 2:
            x = x[None]
        if x.ndim != 3 or x.shape[1:] != self.input_shape:
            raise ShapeError("input", f"expected (N, {self.input_shape[0]}, {self.input_shape[1]}), got {x.shape}")
        return x[:, None, :, :]

    def forward_with_caches(self, x) -> Tuple[np.ndarray, list]:
        h = self._as_batch(x)
        caches = []
        for layer in self.layers:
            h, cache = layer.forward(h)
            caches.append(cache)
        return h, caches

    def backward_from(self, dout: np.ndarray, caches: list) -> Dict[str, np.ndarray]:
        grads: Dict[str, np.ndarray] = {}
        d = dout
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            d, g = layer.backward(d, cache)
            grads.update(g)
        return grads


def forward(net: Network, x) -> np.ndarray:
    """Outputs in normalized label units: (n_out,) for one input, (N, n_out) for a batch."""
    x_arr = np.asarray(getattr(x, "values", x))
    out, _ = net.forward_with_caches(x_arr)
    return out[0] if x_arr.ndim == 2 else out


def xavier_init(net: Network, seed: int) -> Network:
    """Weights ~ U(±sqrt(6/(fan_in+fan_out))), biases 0; layers drawn in order from one seeded stream."""
    rng = np.random.default_rng(seed)
    for layer in net.weighted_layers():
        fan_in, fan_out = layer.fan()
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        layer.weight[...] = rng.uniform(-bound, bound, size=layer.weight.shape)
        layer.bias[...] = 0.0
    return net


def flatten_params(net: Network) -> np.ndarray:
    return np.concatenate([p.ravel() for p in net.parameters().values()])


def load_flat_params(net: Network, flat: np.ndarray) -> None:
    flat = np.asarray(flat, dtype=np.float64)
    if flat.size != net.n_params():
        raise ShapeError("weights", f"expected {net.n_params()} values, got {flat.size}")
    offset = 0
    for p in net.parameters().values():
        p[...] = flat[offset: offset + p.size].reshape(p.shape)
        offset += p.size
