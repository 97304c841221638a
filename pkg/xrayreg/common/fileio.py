# xrayreg/common/fileio.py
"""
Manifest and raw-blob helpers shared by the volume, image, model and dataset formats.
"""
import hashlib
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import orjson

from .errors import FormatError

PathLike = Union[str, Path]

DTYPES = {"f32le": np.dtype("<f4"), "f64le": np.dtype("<f8")}


def write_json(path: PathLike, doc: Dict[str, Any]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(
        orjson.dumps(doc, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)
    )


def read_json(path: PathLike) -> Dict[str, Any]:
    try:
        doc = orjson.loads(Path(path).read_bytes())
    except orjson.JSONDecodeError as e:
        raise FormatError("header", f"malformed JSON in {path}: {e}") from e
    if not isinstance(doc, dict):
        raise FormatError("header", f"{path} does not hold a JSON object")
    return doc


def config_hash(doc: Dict[str, Any]) -> str:
    return hashlib.sha256(orjson.dumps(doc, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)).hexdigest()


def write_blob(path: PathLike, values: np.ndarray, dtype: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.ascontiguousarray(values, dtype=DTYPES[dtype]).tofile(str(path))


def read_blob(path: PathLike, dtype: str, count: int, field: str = "data_file") -> np.ndarray:
    if dtype not in DTYPES:
        raise FormatError("dtype", f"unknown dtype {dtype!r}")
    if not Path(path).exists():
        raise FormatError(field, f"missing file {path}")
    values = np.fromfile(str(path), dtype=DTYPES[dtype])
    if values.size != count:
        raise FormatError(field, f"expected {count} values, found {values.size}")
    return values


def require(doc: Dict[str, Any], field: str, kind=None, length: int = None):
    """Fetch a manifest field, checking presence, type and (for lists) length."""
    if field not in doc:
        raise FormatError(field, "missing")
    value = doc[field]
    if length is not None:
        if not isinstance(value, list) or len(value) != length:
            raise FormatError(field, f"expected a list of {length} values")
        if kind is not None and not all(isinstance(v, kind) and not isinstance(v, bool) for v in value):
            raise FormatError(field, f"expected {kind} entries")
    elif kind is not None and not isinstance(value, kind):
        raise FormatError(field, f"expected {kind}")
    return value
