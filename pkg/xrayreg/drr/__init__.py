# xrayreg/drr/__init__.py
from .image import Image, PixelRegion, save_image, load_image, export_pgm
from .renderer import render_drr, default_step

__all__ = ["Image", "PixelRegion", "save_image", "load_image", "export_pgm", "render_drr", "default_step"]
