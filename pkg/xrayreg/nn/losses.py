# xrayreg/nn/losses.py
from typing import Dict, Tuple

import numpy as np

from xrayreg.common.errors import InvalidParameterError, ShapeError
from xrayreg.common.parallel import gather_ordered


def _rows_like(a: np.ndarray, other: np.ndarray) -> np.ndarray:
    """A 1-D array matching a 2-D partner element for element takes its shape; otherwise it is one sample."""
    if a.ndim == 1 and other.ndim == 2 and a.size == other.size:
        return a.reshape(other.shape)
    return np.atleast_2d(a)


def mse_loss(outputs, targets) -> float:
    """Φ = (1/K) Σ_i ‖y_i − f_i‖²."""
    f_in = np.asarray(outputs, dtype=np.float64)
    y_in = np.asarray(targets, dtype=np.float64)
    f, y = _rows_like(f_in, y_in), _rows_like(y_in, f_in)
    if f.size == 0:
        raise InvalidParameterError("empty batch")
    if f.shape != y.shape:
        raise ShapeError("loss", f"outputs {f.shape} and targets {y.shape} differ")
    return float(np.mean(np.sum((y - f) ** 2, axis=1)))


def _sum_gradient(net, xs: np.ndarray, ys: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    """Loss sum Σ‖y − f‖² over xs and its gradient."""
    out, caches = net.forward_with_caches(xs)
    if out.shape != ys.shape:
        raise ShapeError("fc2", f"outputs {out.shape} and targets {ys.shape} differ")
    resid = out - ys
    grads = net.backward_from(2.0 * resid, caches)
    return float(np.sum(resid ** 2)), grads


def backward(net, x, target) -> Dict[str, np.ndarray]:
    """∂/∂W of the single-sample loss ‖y − f(x; W)‖²."""
    x = np.asarray(getattr(x, "values", x), dtype=np.float64)
    y = np.atleast_2d(np.asarray(target, dtype=np.float64))
    _, grads = _sum_gradient(net, x[None] if x.ndim == 2 else x, y)
    return grads


def batch_gradient(net, xs, ys, micro_batch: int = 8, threads: int = 1) -> Tuple[float, Dict[str, np.ndarray]]:
    """
    Φ and ∂Φ/∂W over a batch, evaluated in fixed-size micro-batches that are
    summed in order, so the result does not depend on the thread count.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    k = xs.shape[0]
    if k == 0:
        raise InvalidParameterError("empty batch")
    if ys.ndim == 1:
        # one label per sample for single-output nets
        if ys.size % k:
            raise ShapeError("loss", f"{ys.size} label values for {k} samples")
        ys = ys.reshape(k, -1)
    bounds = [(s, min(s + micro_batch, k)) for s in range(0, k, max(1, micro_batch))]
    parts = gather_ordered(lambda b: _sum_gradient(net, xs[b[0]: b[1]], ys[b[0]: b[1]]), bounds, threads)
    loss = 0.0
    grads = {name: np.zeros_like(p) for name, p in net.parameters().items()}
    for part_loss, part_grads in parts:
        loss += part_loss
        for name, g in part_grads.items():
            grads[name] += g
    for g in grads.values():
        g /= k
    return loss / k, grads
