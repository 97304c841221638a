# xrayreg/drr/image.py
"""
Detector images (DRRs, synthetic X-rays, features) and their file formats.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from xrayreg.common.errors import FormatError, InvalidParameterError
from xrayreg.common.fileio import read_blob, read_json, require, write_blob, write_json

PROVENANCE = ("drr", "synthetic-xray", "loaded", "feature", "patch")


@dataclass(frozen=True)
class PixelRegion:
    """Rectangle of detector pixels: top-left (col0, row0) plus width x height."""

    col0: int
    row0: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidParameterError(f"empty pixel region {self}")

    def within(self, det_width: int, det_height: int) -> bool:
        return (
            self.col0 >= 0
            and self.row0 >= 0
            and self.col0 + self.width <= det_width
            and self.row0 + self.height <= det_height
        )


@dataclass(frozen=True, eq=False)
class Image:
    values: np.ndarray
    pixel_spacing: float
    provenance: str = "drr"
    offset_px: Tuple[int, int] = (0, 0)
    detector_px: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or min(values.shape) < 1:
            raise InvalidParameterError(f"image must be a non-empty 2-D grid, got shape {values.shape}")
        if self.provenance not in PROVENANCE:
            raise InvalidParameterError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "offset_px", (int(self.offset_px[0]), int(self.offset_px[1])))
        if self.detector_px is None:
            object.__setattr__(self, "detector_px", (values.shape[1], values.shape[0]))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def crop(self, region: PixelRegion) -> np.ndarray:
        c = region.col0 - self.offset_px[0]
        r = region.row0 - self.offset_px[1]
        if c < 0 or r < 0 or c + region.width > self.width or r + region.height > self.height:
            raise InvalidParameterError(f"region {region} is not covered by this image")
        return self.values[r: r + region.height, c: c + region.width]


def save_image(img: Image, path) -> Path:
    path = Path(path)
    name = path.name
    stem = name[: -len(".img.json")] if name.endswith(".img.json") else path.stem
    data_path = path.with_name(stem + ".raw")
    write_blob(data_path, img.values.ravel(), "f32le")
    write_json(path, {
        "width": img.width,
        "height": img.height,
        "pixel_spacing_mm": img.pixel_spacing,
        "dtype": "f32le",
        "data_file": data_path.name,
        "provenance": img.provenance,
        "offset_px": list(img.offset_px),
        "detector_px": list(img.detector_px),
    })
    logger.debug("Saved {} image {} ({}x{})", img.provenance, path, img.width, img.height)
    return path


def load_image(path) -> Image:
    path = Path(path)
    doc = read_json(path)
    width = require(doc, "width", int)
    height = require(doc, "height", int)
    spacing = require(doc, "pixel_spacing_mm", (int, float))
    dtype = require(doc, "dtype", str)
    if width < 1 or height < 1:
        raise FormatError("width", f"image must be at least 1x1, got {width}x{height}")
    if spacing <= 0:
        raise FormatError("pixel_spacing_mm", f"must be > 0, got {spacing}")
    if dtype != "f32le":
        raise FormatError("dtype", f"unsupported dtype {dtype!r}")
    values = read_blob(path.parent / require(doc, "data_file", str), dtype, width * height)
    offset = doc.get("offset_px", [0, 0])
    detector = doc.get("detector_px", [width, height])
    return Image(
        values=values.reshape(height, width).astype(np.float64),
        pixel_spacing=float(spacing),
        provenance=doc.get("provenance", "loaded"),
        offset_px=tuple(offset),
        detector_px=tuple(detector),
    )


def export_pgm(img: Image, path) -> Path:
    """8-bit binary PGM, min-max windowed, for eyeballing."""
    v = img.values
    lo, hi = float(v.min()), float(v.max())
    scaled = np.zeros_like(v) if hi <= lo else (v - lo) / (hi - lo) * 255.0
    pixels = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(f"P5\n{img.width} {img.height}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())
    return path
