# xrayreg/nn/trainer.py
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from loguru import logger

from xrayreg.common import config as env
from xrayreg.common.errors import DivergenceError, InvalidParameterError, ShapeError
from .losses import batch_gradient
from .network import Network
from .optim import TrainConfig, sgd_step, zero_velocity


@dataclass
class TrainResult:
    net: Network
    loss_trace: List[float] = field(default_factory=list)
    iterations: int = 0


def train(
    net: Network,
    features: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
    micro_batch: Optional[int] = None,
    threads: int = 1,
    context: str = "",
) -> TrainResult:
    """
    Mini-batch SGD over (features, labels); reshuffled every epoch from a
    stream seeded by config.seed. The last batch of an epoch may be partial.
    Returns the mean training loss of each epoch.
    """
    features = np.asarray(features)
    labels = np.asarray(labels, dtype=np.float64)
    n = features.shape[0]
    if labels.ndim == 1 and net.spec.n_out == 1:
        labels = labels[:, None]
    if n == 0:
        raise InvalidParameterError("empty training set")
    if labels.shape != (n, net.spec.n_out):
        raise ShapeError("fc2", f"labels {labels.shape} do not match {n} samples x {net.spec.n_out} outputs")
    micro_batch = micro_batch or env.MICRO_BATCH
    rng = np.random.default_rng(config.seed)
    velocity = zero_velocity(net.parameters())
    result = TrainResult(net=net)
    i = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start: start + config.batch_size]
            loss, grads = batch_gradient(net, features[idx], labels[idx], micro_batch=micro_batch, threads=threads)
            if not np.isfinite(loss):
                raise DivergenceError(epoch, i, context)
            sgd_step(net, grads, velocity, config, i)
            total += loss * len(idx)
            i += 1
        result.loss_trace.append(total / n)
        logger.info("{}epoch {}/{} loss {:.6f}", f"[{context}] " if context else "", epoch, config.epochs, total / n)
    result.iterations = i
    return result
