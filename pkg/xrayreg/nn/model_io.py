# xrayreg/nn/model_io.py
"""
Single-model persistence: <name>.model.json manifest plus a raw little-endian
float64 blob in Network parameter order.
"""
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
from loguru import logger

from xrayreg.common.errors import FormatError, InvalidParameterError, ShapeError
from xrayreg.common.fileio import read_blob, read_json, require, write_blob, write_json
from .network import Network, NetworkSpec, flatten_params, load_flat_params

LAYER_ORDER = ["conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias", "fc1.weight", "fc1.bias", "fc2.weight", "fc2.bias"]


def write_weights(net: Network, path) -> None:
    write_blob(path, flatten_params(net), "f64le")


def read_weights(spec: NetworkSpec, path) -> Network:
    net = Network(spec)
    try:
        flat = read_blob(path, "f64le", net.n_params(), field="weights_file")
        load_flat_params(net, flat)
    except ShapeError as e:
        raise FormatError("weights_file", str(e)) from e
    return net


def save_model(net: Network, path, meta: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    name = path.name
    stem = name[: -len(".model.json")] if name.endswith(".model.json") else path.stem
    blob = path.with_name(stem + ".f64")
    write_weights(net, blob)
    doc = {
        "architecture": net.spec.to_dict(),
        "layer_order": LAYER_ORDER,
        "n_params": net.n_params(),
        "dtype": "f64le",
        "weights_file": blob.name,
    }
    doc.update(meta or {})
    write_json(path, doc)
    logger.debug("Saved model {} ({} parameters)", path, net.n_params())
    return path


def load_model(path) -> Tuple[Network, Dict[str, Any]]:
    path = Path(path)
    doc = read_json(path)
    try:
        spec = NetworkSpec.from_dict(require(doc, "architecture", dict))
    except (TypeError, InvalidParameterError) as e:
        raise FormatError("architecture", str(e)) from e
    if require(doc, "dtype", str) != "f64le":
        raise FormatError("dtype", f"unsupported dtype {doc['dtype']!r}")
    net = read_weights(spec, path.parent / require(doc, "weights_file", str))
    if doc.get("n_params", net.n_params()) != net.n_params():
        raise FormatError("n_params", f"manifest says {doc['n_params']}, architecture has {net.n_params()}")
    return net, doc
