"""Deterministic raster composition of a draw list.

Entries composite in order over an opaque black canvas using
source-over blending on straight (non-premultiplied) alpha. All math is
IEEE float64; each entry rounds back to 8 bits (half away from zero)
before the next entry blends. Geometry: an entry's image is stretched
over the full canvas, scaled about the canvas center by (sx, sy), then
translated by (dx*width, dy*height); sampling is bilinear with the 2x2
taps clamped to the image edge, and regions outside the source image
contribute nothing.

The exact formulas here are mirrored by the brute-force per-pixel
oracle in the test suite; any change must keep the two bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import pngio
from .projectio import LoadedProject
from .state import DrawList, ElementTransform, PresenterState, resolve_draw_list

AssetResolver = Callable[[str], np.ndarray]


class CompositeError(RuntimeError):
    """An entry's image failed to resolve or decode."""

    def __init__(self, index: int, image: str, cause: Exception):
        super().__init__(f"draw list entry {index} ({image!r}): {cause}")
        self.index = index
        self.image = image


@dataclass(frozen=True, slots=True)
class Canvas:
    """Row-major RGBA8 pixel buffer."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("canvas dimensions must be positive")
        if len(self.pixels) != self.width * self.height * 4:
            raise ValueError(
                f"pixel buffer is {len(self.pixels)} bytes, expected {self.width * self.height * 4}")

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Canvas":
        height, width = array.shape[:2]
        return cls(width=width, height=height, pixels=array.tobytes())

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width, 4)


def blend_entry(
    dst: np.ndarray,
    image: np.ndarray,
    opacity: float,
    transform: ElementTransform,
) -> None:
    """Blend one entry into dst (H, W, 4) uint8 in place."""
    height, width = dst.shape[:2]
    ih, iw = image.shape[:2]

    half_w = width / 2.0
    half_h = height / 2.0
    tx = transform.dx * width
    ty = transform.dy * height

    # Inverse-map each output pixel center into pre-transform canvas units.
    cx = np.arange(width, dtype=np.float64) + 0.5
    cy = np.arange(height, dtype=np.float64) + 0.5
    ux = (cx - half_w - tx) / transform.sx + half_w
    uy = (cy - half_h - ty) / transform.sy + half_h

    cover_x = (ux >= 0.0) & (ux <= float(width))
    cover_y = (uy >= 0.0) & (uy <= float(height))
    if not cover_x.any() or not cover_y.any():
        return

    # Canvas units -> source pixel-center coordinates.
    kx = iw / width
    ky = ih / height
    su = ux * kx - 0.5
    sv = uy * ky - 0.5

    x0 = np.floor(su)
    y0 = np.floor(sv)
    fx = su - x0
    fy = sv - y0
    x0i = x0.astype(np.int64)
    y0i = y0.astype(np.int64)
    x0c = np.clip(x0i, 0, iw - 1)
    x1c = np.clip(x0i + 1, 0, iw - 1)
    y0c = np.clip(y0i, 0, ih - 1)
    y1c = np.clip(y0i + 1, 0, ih - 1)

    p00 = image[np.ix_(y0c, x0c)].astype(np.float64)
    p10 = image[np.ix_(y0c, x1c)].astype(np.float64)
    p01 = image[np.ix_(y1c, x0c)].astype(np.float64)
    p11 = image[np.ix_(y1c, x1c)].astype(np.float64)

    fx2 = fx[None, :, None]
    fy2 = fy[:, None, None]
    top = p00 * (1.0 - fx2) + p10 * fx2
    bot = p01 * (1.0 - fx2) + p11 * fx2
    src = top * (1.0 - fy2) + bot * fy2

    alpha = (src[..., 3] / 255.0) * opacity
    inv = 1.0 - alpha
    dstf = dst.astype(np.float64)
    out = np.empty_like(dstf)
    out[..., 0] = src[..., 0] * alpha + dstf[..., 0] * inv
    out[..., 1] = src[..., 1] * alpha + dstf[..., 1] * inv
    out[..., 2] = src[..., 2] * alpha + dstf[..., 2] * inv
    out[..., 3] = 255.0 * alpha + dstf[..., 3] * inv

    rounded = np.floor(out + 0.5).astype(np.uint8)
    mask = cover_y[:, None] & cover_x[None, :]
    dst[mask] = rounded[mask]


def composite(draw_list: DrawList, assets: AssetResolver, width: int, height: int) -> Canvas:
    """Composite the draw list over opaque black at the given size."""
    if width < 1 or height < 1:
        raise ValueError("output dimensions must be positive")
    dst = np.zeros((height, width, 4), dtype=np.uint8)
    dst[..., 3] = 255
    for index, entry in enumerate(draw_list):
        try:
            image = assets(entry.image)
        except Exception as exc:
            raise CompositeError(index, entry.image, exc) from exc
        blend_entry(dst, image, entry.opacity, entry.transform)
    return Canvas.from_array(dst)


def project_resolver(project: LoadedProject) -> AssetResolver:
    """Asset resolver over a loaded project folder, with decode caching."""
    cache: dict[str, np.ndarray] = {}

    def resolve(relpath: str) -> np.ndarray:
        cached = cache.get(relpath)
        if cached is None:
            path = project.asset_path(relpath)
            if not path.is_file():
                raise FileNotFoundError(f"asset not found: {relpath}")
            cached = pngio.load_image_rgba(path)
            cached.flags.writeable = False
            cache[relpath] = cached
        return cached

    return resolve


def render_to_file(
    project: LoadedProject,
    state: PresenterState,
    width: int,
    height: int,
    out: Path | str,
) -> Path:
    """Resolve the state's draw list, composite, and write a deterministic PNG."""
    out = Path(out)
    canvas = composite(resolve_draw_list(state, project), project_resolver(project), width, height)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(pngio.encode_png_rgba(canvas.to_array()))
    return out
