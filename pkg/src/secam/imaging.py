"""Image primitives: PNG load/save, sRGB to CIELAB, bilinear resize, boxes.

Images are plain numpy arrays. sRGB images are uint8 of shape (H, W, 3);
CIELAB images are float64 of the same shape with L in [0, 100].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ArgumentError, FormatError, IoError

# sRGB -> XYZ under D65, 2 degree observer (IEC 61966-2-1 primaries)
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE_D65 = np.array([0.95047, 1.0, 1.08883])

# Pillow modes that decode to 8 bits per channel and convert losslessly to RGB
_ACCEPTED_MODES = {"RGB", "RGBA", "L", "LA", "P", "PA"}


def load_png(path) -> np.ndarray:
    """Decode an 8-bit PNG to an (H, W, 3) uint8 array, dropping alpha."""
    try:
        with Image.open(path) as img:
            if img.format != "PNG":
                raise FormatError(f"{path}: not a PNG file (format={img.format})")
            if img.mode not in _ACCEPTED_MODES:
                raise FormatError(f"{path}: unsupported PNG mode {img.mode}")
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except UnidentifiedImageError as e:
        raise FormatError(f"{path}: cannot decode ({e})") from e
    except OSError as e:
        raise IoError(f"{path}: {e}") from e


def save_png(image: np.ndarray, path) -> None:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ArgumentError(f"expected (H, W, 3) uint8 image, got {image.shape} {image.dtype}")
    try:
        Image.fromarray(image, mode="RGB").save(path, format="PNG")
    except OSError as e:
        raise IoError(f"{path}: {e}") from e


def srgb_to_lab(image: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) uint8 sRGB image to CIELAB, per pixel.

    Standard piecewise gamma (0.04045 knee), the D65 linear-RGB to XYZ
    matrix, then the CIE L*a*b* functions with the 2 degree D65 white point.
    """
    rgb = np.asarray(image, dtype=np.float64) / 255.0
    linear = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _RGB_TO_XYZ.T / _WHITE_D65

    delta = 6.0 / 29.0
    f = np.where(xyz > delta**3, np.cbrt(xyz), xyz / (3 * delta**2) + 4.0 / 29.0)

    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def bilinear_resize(grid: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize a 2-D float grid with bilinear interpolation, align-corners.

    Corner samples map onto corner samples, so the output never leaves the
    [min, max] range of the input and the identity size is a no-op.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise ArgumentError(f"expected a 2-D grid, got shape {grid.shape}")
    if out_h < 1 or out_w < 1:
        raise ArgumentError(f"target size must be positive, got {out_h} x {out_w}")
    h, w = grid.shape

    def positions(n_src, n_dst):
        if n_dst == 1 or n_src == 1:
            return np.zeros(n_dst)
        return np.arange(n_dst) * ((n_src - 1) / (n_dst - 1))

    ys = positions(h, out_h)
    xs = positions(w, out_w)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]

    top = grid[np.ix_(y0, x0)] * (1 - wx) + grid[np.ix_(y0, x1)] * wx
    bottom = grid[np.ix_(y1, x0)] * (1 - wx) + grid[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bottom * wy


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel box, inclusive-exclusive: [x_min, x_max) x [y_min, y_max)."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ArgumentError(f"degenerate box {self}")

    @property
    def area(self) -> int:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def intersection_area(self, other: "BBox") -> int:
        dx = min(self.x_max, other.x_max) - max(self.x_min, other.x_min)
        dy = min(self.y_max, other.y_max) - max(self.y_min, other.y_min)
        return max(0, dx) * max(0, dy)

    def clipped(self, width: int, height: int) -> "BBox":
        return BBox(
            max(0, self.x_min),
            max(0, self.y_min),
            min(width, self.x_max),
            min(height, self.y_max),
        )
