"""Grayscale image I/O: binary PGM (P5, 8-bit) read/write, other formats via Pillow."""

from __future__ import annotations

import os
import re
from pathlib import Path
from typing import Union

import numpy as np

PathLike = Union[str, "os.PathLike[str]"]

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def _header_tokens(data: bytes, count: int):
    pos = 2
    out = []
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise ValueError("truncated PGM header")
        out.append(int(m.group(1)))
        pos = m.end()
    # exactly one whitespace byte separates the header from the raster
    return out, pos + 1


def read_pgm(path: PathLike) -> np.ndarray:
    """Read an 8-bit binary PGM into a ``uint8`` array of shape ``(height, width)``."""
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    (width, height, maxval), start = _header_tokens(data, 3)
    if not 0 < maxval < 256:
        raise ValueError(f"{path}: only 8-bit PGM is supported (maxval={maxval})")
    raster = data[start:start + width * height]
    if len(raster) != width * height:
        raise ValueError(f"{path}: truncated raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path: PathLike, image) -> None:
    """Write ``image`` as 8-bit binary PGM, rounding and clamping to [0, 255]."""
    a = to_uint8(image)
    h, w = a.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(a.tobytes())


def to_uint8(image) -> np.ndarray:
    a = np.asarray(image)
    if a.ndim != 2:
        raise ValueError("expected a 2D grayscale image")
    if a.dtype == np.uint8:
        return a
    return np.clip(np.rint(a), 0, 255).astype(np.uint8)


def luma(rgb) -> np.ndarray:
    """BT.601 luma of an RGB array (float64, same value range as the input)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    return rgb[..., 0] * 0.299 + rgb[..., 1] * 0.587 + rgb[..., 2] * 0.114


def read_image(path: PathLike) -> np.ndarray:
    """Load an image as a float64 grayscale grid in [0, 255].

    PGM is read natively; everything else (PNG, TIFF, BMP...) goes through
    Pillow. Color images are reduced to BT.601 luma.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"P5":
        return read_pgm(path).astype(np.float64)
    from PIL import Image

    with Image.open(path) as im:
        if im.mode in ("L", "P", "1"):
            a = np.asarray(im.convert("L"), dtype=np.float64)
        elif im.mode in ("I;16", "I;16B", "I"):
            a = np.asarray(im, dtype=np.float64)
            if a.max() > 255:
                a = a * (255.0 / 65535.0)
        else:
            a = luma(np.asarray(im.convert("RGB")))
    return a


DATA_ENV = "FSEXTRAP_DATA"
IMAGE_ALIASES = {"baboon": ("baboon", "mandrill"), "lena": ("lena", "lenna"),
                 "peppers": ("peppers",)}
_EXTENSIONS = (".pgm", ".png", ".tif", ".tiff", ".bmp")


def find_image(name: str, search=None):
    """Locate a named test image, or return ``None``.

    Directories are searched in order: ``search`` (if given), the directory
    named by ``$FSEXTRAP_DATA``, then ``data/`` next to the source tree.
    """
    dirs = []
    if search is not None:
        dirs.append(Path(search))
    if os.environ.get(DATA_ENV):
        dirs.append(Path(os.environ[DATA_ENV]))
    dirs.append(Path(__file__).resolve().parents[2] / "data")
    for d in dirs:
        for stem in IMAGE_ALIASES.get(name, (name,)):
            for ext in _EXTENSIONS:
                candidate = d / f"{stem}{ext}"
                if candidate.is_file():
                    return candidate
    return None
