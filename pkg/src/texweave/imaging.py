"""Raster helpers: grayscale I/O, padding and overlays.

A raster is a 2-D ``float64`` numpy array. Files are read as PNG (via
Pillow) or binary PGM (P5, parsed here so that arbitrary ``maxval`` is
honoured) and normalized to [0, 1].
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Literal

import numpy as np
from PIL import Image

PaddingMode = Literal["reflect", "wrap", "zero"]
PADDING_MODES: tuple[str, ...] = ("reflect", "wrap", "zero")

_LUMA = np.array([0.299, 0.587, 0.114])
_PGM_HEADER = re.compile(rb"\AP5(?:\s+|#[^\n]*\n)+?(\d+)(?:\s+|#[^\n]*\n)+?(\d+)(?:\s+|#[^\n]*\n)+?(\d+)\s")


class ImageFormatError(ValueError):
    """Raised for image files that are readable but not a supported format."""


def as_raster(values, *, copy: bool = False) -> np.ndarray:
    """Validate ``values`` as a raster and return it as a float64 array."""
    arr = np.array(values, dtype=np.float64) if copy else np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"raster must be a non-empty 2-D array, got shape {arr.shape}")
    return arr


def _read_pgm(data: bytes) -> np.ndarray:
    m = _PGM_HEADER.match(data)
    if m is None:
        raise ImageFormatError("not a binary PGM (P5) file")
    width, height, maxval = (int(g) for g in m.groups())
    if not 0 < maxval < 65536 or width < 1 or height < 1:
        raise ImageFormatError(f"bad PGM header: {width}x{height} maxval={maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    if len(data) - m.end() < count * dtype.itemsize:
        raise ImageFormatError("truncated PGM pixel data")
    body = np.frombuffer(data, dtype=dtype, count=count, offset=m.end())
    return body.reshape(height, width).astype(np.float64) / maxval


def _read_png(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        if im.format != "PNG":
            raise ImageFormatError(f"{path}: unsupported format {im.format}")
        mode = im.mode
        if mode in ("I;16", "I;16B", "I;16L", "I"):
            return np.asarray(im, dtype=np.float64) / 65535.0
        if mode == "L":
            return np.asarray(im, dtype=np.float64) / 255.0
        if mode == "LA":
            return np.asarray(im.getchannel("L"), dtype=np.float64) / 255.0
        if mode == "1":
            return np.asarray(im.convert("L"), dtype=np.float64) / 255.0
        rgb = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return rgb @ _LUMA


def load_grayscale(path) -> np.ndarray:
    """Load a PNG or binary PGM file as a raster with values in [0, 1].

    RGB input is reduced with luma weights 0.299, 0.587, 0.114. Raises
    ``OSError`` when the file cannot be read and :class:`ImageFormatError`
    for anything that is not PNG or P5 PGM.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(b"P5"):
        return _read_pgm(path.read_bytes())
    if head.startswith(b"\x89PNG"):
        return np.clip(_read_png(path), 0.0, 1.0)
    raise ImageFormatError(f"{path}: expected PNG or binary PGM")


def to_uint8(img) -> np.ndarray:
    """Quantize to 8 bits with ``round(v * 255)`` clamped to [0, 255]."""
    return np.clip(np.rint(as_raster(img) * 255.0), 0, 255).astype(np.uint8)


def _write(arr: np.ndarray, path: Path) -> None:
    if path.suffix.lower() == ".pgm":
        if arr.ndim != 2:
            raise ValueError("PGM output must be single-channel")
        header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(arr).tobytes())
    else:
        Image.fromarray(arr).save(path, format="PNG")


def save_grayscale(img, path) -> None:
    """Write a raster as 8-bit grayscale PNG (or PGM for a ``.pgm`` suffix)."""
    _write(to_uint8(img), Path(path))


def minmax_normalize(img) -> np.ndarray:
    img = as_raster(img)
    lo, hi = float(img.min()), float(img.max())
    if hi <= lo:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)


def overlay(base, mask) -> np.ndarray:
    """Return an RGB uint8 image of ``base`` with mask pixels painted white."""
    base = as_raster(base)
    mask = np.asarray(mask)
    if mask.shape != base.shape:
        raise ValueError(f"mask shape {mask.shape} does not match base {base.shape}")
    rgb = np.repeat(to_uint8(base)[:, :, None], 3, axis=2)
    rgb[mask.astype(bool)] = 255
    return rgb


def save_overlay(base, mask, path) -> None:
    _write(overlay(base, mask), Path(path))


def pad(img, top: int, bottom: int, left: int, right: int, mode: PaddingMode = "reflect") -> np.ndarray:
    """Pad a raster on each side.

    ``reflect`` mirrors without repeating the edge pixel (so every pad
    amount must be smaller than the matching dimension), ``wrap`` treats
    the image as a torus and ``zero`` fills with 0.0.
    """
    img = as_raster(img)
    amounts = (top, bottom, left, right)
    if any(int(a) != a or a < 0 for a in amounts):
        raise ValueError(f"pad amounts must be non-negative integers, got {amounts}")
    m, n = img.shape
    widths = ((int(top), int(bottom)), (int(left), int(right)))
    if mode == "reflect":
        if max(top, bottom) >= m or max(left, right) >= n:
            raise ValueError(f"reflect padding {amounts} needs pads smaller than image size {img.shape}")
        return np.pad(img, widths, mode="reflect")
    if mode == "wrap":
        return np.pad(img, widths, mode="wrap")
    if mode == "zero":
        return np.pad(img, widths, mode="constant", constant_values=0.0)
    raise ValueError(f"unknown padding mode {mode!r}; expected one of {PADDING_MODES}")
