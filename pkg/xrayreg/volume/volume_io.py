# xrayreg/volume/volume_io.py
"""
<name>.vol.json header + raw little-endian float32 data, x-fastest.
"""
from pathlib import Path

import numpy as np
from loguru import logger

from xrayreg.common.errors import FormatError, InvalidParameterError
from xrayreg.common.fileio import read_blob, read_json, require, write_blob, write_json
from .volume import Volume

NUMBER = (int, float)


def _data_path(header_path: Path) -> Path:
    name = header_path.name
    stem = name[: -len(".vol.json")] if name.endswith(".vol.json") else header_path.stem
    return header_path.with_name(stem + ".raw")


def save_volume(vol: Volume, path) -> Path:
    path = Path(path)
    data_path = _data_path(path)
    write_blob(data_path, vol.data.ravel(), "f32le")
    write_json(path, {
        "dims": list(vol.dims),
        "spacing_mm": list(vol.spacing),
        "origin_mm": list(vol.origin),
        "dtype": "f32le",
        "data_file": data_path.name,
    })
    logger.info("Saved volume {} ({}x{}x{})", path, *vol.dims)
    return path


def load_volume(path) -> Volume:
    path = Path(path)
    doc = read_json(path)
    dims = require(doc, "dims", int, 3)
    spacing = require(doc, "spacing_mm", NUMBER, 3)
    origin = require(doc, "origin_mm", NUMBER, 3)
    dtype = require(doc, "dtype", str)
    data_file = require(doc, "data_file", str)
    if dtype != "f32le":
        raise FormatError("dtype", f"unsupported dtype {dtype!r}")
    if min(dims) < 1:
        raise FormatError("dims", f"all dims must be >= 1, got {dims}")
    if any(not np.isfinite(s) or s <= 0 for s in spacing):
        raise FormatError("spacing_mm", f"all spacings must be > 0, got {spacing}")
    count = int(np.prod(dims))
    data = read_blob(path.parent / data_file, dtype, count)
    try:
        return Volume(dims=tuple(dims), spacing=tuple(spacing), origin=tuple(origin), data=data)
    except InvalidParameterError as e:
        raise FormatError("data_file", str(e)) from e
