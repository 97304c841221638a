# xrayreg/nn/optim.py
"""
Mini-batch SGD with momentum and weight decay, and the per-iteration learning-rate decay.
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from xrayreg.common.errors import InvalidParameterError


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    momentum: float = 0.9
    weight_decay: float = 0.0001
    lr_base: float = 0.0025
    lr_decay_a: float = 0.0001
    lr_decay_pow: float = 0.75
    epochs: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 1:
            raise InvalidParameterError("batch_size and epochs must be >= 1")
        for name in ("momentum", "weight_decay", "lr_base", "lr_decay_a", "lr_decay_pow"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0")
        if self.lr_base <= 0:
            raise InvalidParameterError("lr_base must be > 0")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "TrainConfig":
        return cls(**doc)


def lr_schedule(i: int, config: Optional[TrainConfig] = None) -> float:
    """κ_i = lr_base · (1 + a·i)^(−pow); 0.0025·(1 + 0.0001·i)^(−0.75) by default."""
    if i < 0:
        raise InvalidParameterError(f"iteration index must be >= 0, got {i}")
    c = config or TrainConfig()
    return c.lr_base * (1.0 + c.lr_decay_a * i) ** (-c.lr_decay_pow)


def zero_velocity(params: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    return {name: np.zeros_like(p) for name, p in params.items()}


def sgd_step(net, grads: Dict[str, np.ndarray], velocity: Dict[str, np.ndarray], config: TrainConfig, i: int):
    """
    v ← m·v − κ_i·(g + d·W);  W ← W + v.  Decay applies to weights only, not biases.
    Parameters and velocity are updated in place and returned.
    """
    rate = lr_schedule(i, config)
    for name, w in net.parameters().items():
        g = grads[name]
        if g.shape != w.shape:
            raise InvalidParameterError(f"gradient shape {g.shape} does not match {name} {w.shape}")
        if name.endswith(".weight") and config.weight_decay:
            g = g + config.weight_decay * w
        v = velocity[name]
        v *= config.momentum
        v -= rate * g
        w += v
    return net, velocity
