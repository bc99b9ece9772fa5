"""Raster image helpers.

Encoding uses a minimal, fully pinned PNG writer (8-bit RGBA, no
interlace, filter type 0 on every scanline, zlib level 6) so identical
pixels always produce identical bytes; library encoders tune their
filter heuristics between releases, which would break golden tests.

Decoding goes through Pillow and accepts PNG and JPEG only.
"""

from __future__ import annotations

import io
import struct
import zlib
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_ZLIB_LEVEL = 6

SUPPORTED_FORMATS = ("PNG", "JPEG")


class UnsupportedImageError(ValueError):
    """Raised when bytes are not a decodable PNG or JPEG raster."""


def _chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def encode_png_rgba(pixels: np.ndarray) -> bytes:
    """Encode an (H, W, 4) uint8 array as deterministic PNG bytes."""
    if pixels.ndim != 3 or pixels.shape[2] != 4 or pixels.dtype != np.uint8:
        raise ValueError(f"expected (H, W, 4) uint8 array, got {pixels.shape} {pixels.dtype}")
    height, width = pixels.shape[:2]
    if height < 1 or width < 1:
        raise ValueError("image dimensions must be positive")

    # One 0x00 filter byte per scanline, then raw RGBA.
    rows = np.zeros((height, width * 4 + 1), dtype=np.uint8)
    rows[:, 1:] = pixels.reshape(height, width * 4)
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 6, 0, 0, 0)
    idat = zlib.compress(rows.tobytes(), _ZLIB_LEVEL)
    return _PNG_SIGNATURE + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", idat) + _chunk(b"IEND", b"")


def decode_image_rgba(data: bytes, *, source: str = "<bytes>") -> np.ndarray:
    """Decode PNG/JPEG bytes into an (H, W, 4) uint8 array."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.format not in SUPPORTED_FORMATS:
                raise UnsupportedImageError(f"{source}: unsupported format {img.format!r}")
            return np.asarray(img.convert("RGBA"), dtype=np.uint8)
    except UnsupportedImageError:
        raise
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise UnsupportedImageError(f"{source}: not a decodable raster image ({exc})") from exc


def probe_image(data: bytes, *, source: str = "<bytes>") -> tuple[int, int]:
    """Fully decode to verify integrity; return (width, height).

    Raises UnsupportedImageError for anything that is not a sound
    PNG or JPEG.
    """
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.format not in SUPPORTED_FORMATS:
                raise UnsupportedImageError(f"{source}: unsupported format {img.format!r}")
            img.load()
            return img.size
    except UnsupportedImageError:
        raise
    except (UnidentifiedImageError, OSError, ValueError, SyntaxError) as exc:
        raise UnsupportedImageError(f"{source}: not a decodable raster image ({exc})") from exc


def load_image_rgba(path: Path | str) -> np.ndarray:
    return decode_image_rgba(Path(path).read_bytes(), source=str(path))


def _procedural_rgba(width: int, height: int, seed: int, alpha: int = 255) -> np.ndarray:
    """Deterministic test-card style pattern; no RNG involved."""
    ys, xs = np.mgrid[0:height, 0:width]
    r = (xs * 7 + seed * 31) % 256
    g = (ys * 5 + seed * 17) % 256
    b = (xs * 3 + ys * 11 + seed * 53) % 256
    a = np.full_like(r, alpha)
    return np.stack([r, g, b, a], axis=-1).astype(np.uint8)


def default_icon_png() -> bytes:
    """Bundled 32x32 fallback icon for layers authored without one."""
    icon = _procedural_rgba(32, 32, seed=5)
    icon[0, :] = icon[-1, :] = icon[:, 0] = icon[:, -1] = (40, 40, 40, 255)
    return encode_png_rgba(icon)


def placeholder_basemap_png() -> bytes:
    """Bundled 128x96 placeholder basemap used by freshly scaffolded projects."""
    base = _procedural_rgba(128, 96, seed=2)
    base[::16, :] = (90, 90, 90, 255)
    base[:, ::16] = (90, 90, 90, 255)
    return encode_png_rgba(base)
