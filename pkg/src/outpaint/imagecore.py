"""Pixel containers, masking algebra and image file I/O.

Images are plain ``numpy`` arrays of shape ``(H, W, C)`` with ``C`` in
``{1, 3}`` and float64 intensities in ``[0, 1]``.  Masks are ``(H, W)``
float64 arrays holding only 0 (known) and 1 (missing).
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "ImageIOError",
    "ImageNotFoundError",
    "UnsupportedFormatError",
    "CorruptImageError",
    "ImageWriteError",
    "ShapeMismatchError",
    "as_image",
    "as_mask",
    "load_image",
    "save_image",
    "to_grayscale",
    "apply_mask",
    "compose_masked",
    "quantize",
]

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class ImageIOError(Exception):
    """Base class for image reading and writing failures."""


class ImageNotFoundError(ImageIOError, FileNotFoundError):
    pass


class UnsupportedFormatError(ImageIOError):
    pass


class CorruptImageError(ImageIOError):
    pass


class ImageWriteError(ImageIOError, OSError):
    pass


class ShapeMismatchError(ValueError):
    pass


def as_image(data) -> np.ndarray:
    """Validate and normalise *data* into an ``(H, W, C)`` float64 image.

    Two-dimensional input is treated as a single-channel image.
    """
    img = np.asarray(data, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"expected (H, W, 1|3) image, got shape {img.shape}")
    if img.size == 0:
        raise ValueError("image has no pixels")
    if not np.all((img >= 0.0) & (img <= 1.0)):
        raise ValueError("intensities must lie in [0, 1]")
    return img


def as_mask(data) -> np.ndarray:
    m = np.asarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"mask must be (H, W), got shape {m.shape}")
    if not np.all((m == 0.0) | (m == 1.0)):
        raise ValueError("mask values must be 0 or 1")
    return m


# -- file I/O ---------------------------------------------------------------

def _read_pnm_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise CorruptImageError("truncated PNM header")
    return buf[start:pos], pos


def _parse_pnm(buf: bytes, path) -> np.ndarray:
    magic = buf[:2]
    channels = 3 if magic == b"P6" else 1
    pos = 2
    fields = []
    try:
        for _ in range(3):
            tok, pos = _read_pnm_token(buf, pos)
            fields.append(int(tok))
    except ValueError as exc:
        raise CorruptImageError(f"{path}: bad PNM header field") from exc
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise CorruptImageError(f"{path}: non-positive PNM dimensions")
    if maxval != 255:
        raise UnsupportedFormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(buf) or not buf[pos:pos + 1].isspace():
        raise CorruptImageError(f"{path}: missing raster separator")
    pos += 1
    expected = width * height * channels
    raster = buf[pos:pos + expected]
    if len(raster) != expected:
        raise CorruptImageError(
            f"{path}: raster has {len(raster)} bytes, header implies {expected}")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels)
    return arr


def _read_png(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("1", "L", "I;16", "I", "F", "LA"):
                im = im.convert("L")
            else:
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"{path}: unreadable PNG ({exc})") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr


def load_image(path) -> np.ndarray:
    """Read a PNG or binary PPM/PGM file into a unit-range image.

    Grayscale sources give one channel, everything else three.  Raises
    :class:`ImageNotFoundError`, :class:`UnsupportedFormatError` or
    :class:`CorruptImageError` depending on what went wrong.
    """
    path = Path(path)
    if not path.is_file():
        raise ImageNotFoundError(f"no such image file: {path}")
    buf = path.read_bytes()
    if buf.startswith(_PNG_MAGIC):
        arr = _read_png(path)
    elif buf[:2] in (b"P5", b"P6"):
        arr = _parse_pnm(buf, path)
    else:
        raise UnsupportedFormatError(f"{path}: not a PNG or binary PPM/PGM file")
    return arr.astype(np.float64) / 255.0


def quantize(img) -> np.ndarray:
    """Map unit-range intensities to bytes with ``round(i * 255)``.

    Rounding is half-up, so 0.5 maps to 128.
    """
    img = np.asarray(img, dtype=np.float64)
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(img, path) -> None:
    """Write *img* as 8-bit PNG, PPM or PGM according to the file extension."""
    img = as_image(img)
    path = Path(path)
    ext = path.suffix.lower()
    data = quantize(img)
    h, w, c = data.shape
    if ext == ".png":
        mode_arr = data[:, :, 0] if c == 1 else data
        try:
            Image.fromarray(mode_arr).save(path, format="PNG")
        except OSError as exc:
            raise ImageWriteError(f"cannot write {path}: {exc}") from exc
        return
    if ext == ".pgm":
        if c != 1:
            raise ValueError("PGM output needs a single-channel image")
        header = b"P5\n%d %d\n255\n" % (w, h)
    elif ext == ".ppm":
        if c != 3:
            raise ValueError("PPM output needs a three-channel image")
        header = b"P6\n%d %d\n255\n" % (w, h)
    else:
        raise UnsupportedFormatError(f"cannot infer output format from {path.name!r}")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(data.tobytes())
    except OSError as exc:
        raise ImageWriteError(f"cannot write {path}: {exc}") from exc


def is_image_file(name) -> bool:
    return os.path.splitext(str(name))[1].lower() in (".png", ".ppm", ".pgm")


# -- pixel algebra ----------------------------------------------------------

def to_grayscale(img) -> np.ndarray:
    """BT.601 luma ``0.299 R + 0.587 G + 0.114 B`` as a one-channel image."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"to_grayscale needs a 3-channel image, got shape {img.shape}")
    y = img @ LUMA_WEIGHTS
    # the weights sum to one, but rounding can overshoot by an ulp
    return np.clip(y, 0.0, 1.0)[:, :, None]


def _spatial_mask(img: np.ndarray, m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.shape != img.shape[:2]:
        raise ShapeMismatchError(
            f"mask shape {m.shape} does not match image shape {img.shape[:2]}")
    return m[:, :, None] if img.ndim == 3 else m


def apply_mask(img, m) -> np.ndarray:
    """Zero the missing region: ``img * (1 - M)``, broadcast over channels."""
    img = np.asarray(img, dtype=np.float64)
    return img * (1.0 - _spatial_mask(img, m))


def compose_masked(a, b, m) -> np.ndarray:
    """Take *a* on known pixels and *b* on missing ones: ``a(1-M) + bM``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shapes differ: {a.shape} vs {b.shape}")
    mm = _spatial_mask(a, m)
    return a * (1.0 - mm) + b * mm


def to_nchw(img) -> np.ndarray:
    """``(H, W, C)`` image to a ``(1, C, H, W)`` network tensor."""
    return np.ascontiguousarray(np.asarray(img, dtype=np.float64).transpose(2, 0, 1)[None])


def from_nchw(x) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(x)[0].transpose(1, 2, 0))
