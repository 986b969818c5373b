"""Visual outputs: segment boundaries, heatmap overlays, masked images.

Every function returns a fresh buffer and never touches its inputs. The
colormap is a frozen 256-entry jet-style table so rendered fixtures are
identical on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cam import IMAGE, CamMap
from .errors import ArgumentError, ShapeError
from .secam import SecamExplanation
from .slic import SegmentLabels

BOUNDARIES = "boundaries"
HEATMAP = "heatmap"
MASKED = "masked"

# classic jet ramp (blue -> cyan -> yellow -> red), 256 x RGB, frozen bytes
_JET_HEX = (
    "00008000008400008800008c00009000009300009800009c0000a00000a30000a80000ac0000b00000b30000b80000bc"
    "0000c00000c30000c80000cc0000d00000d30000d80000dc0000e00000e30000e80000ec0000f00000f30000f80000fc"
    "0000ff0005ff0008ff000dff0010ff0015ff0018ff001dff0020ff0025ff0028ff002dff0030ff0035ff0038ff003dff"
    "0040ff0045ff0048ff004dff0050ff0055ff0058ff005dff0060ff0065ff0068ff006dff0070ff0075ff0078ff007dff"
    "0080ff0084ff0089ff008cff0090ff0094ff0099ff009cff00a0ff00a4ff00a9ff00acff00b0ff00b4ff00b9ff00bcff"
    "00c0ff00c4ff00c9ff00ccff00d0ff00d4ff00d9ff00dcff00e0ff00e4ff00e9ff00ecff00f0ff00f4ff00f9ff00fcff"
    "01fffe05fffa0afff50efff211ffee15ffea1affe51effe221ffde25ffda2affd52effd231ffce35ffca3affc53effc2"
    "42ffbe45ffba4affb54effb252ffae55ffaa5affa55effa262ff9e65ff9a6aff956eff9272ff8e75ff8a7aff857eff82"
    "82ff7e85ff7a89ff768dff7292ff6d96ff699aff659eff62a2ff5ea5ff5aa9ff56adff52b2ff4db6ff49baff45beff42"
    "c2ff3ec5ff3ac9ff36cdff32d2ff2dd6ff29daff25deff21e2ff1ee5ff1ae9ff16edff12f2ff0df6ff09faff05feff01"
    "fffc00fff900fff500fff100ffec00ffe800ffe400ffe000ffdc00ffd900ffd500ffd100ffcc00ffc800ffc400ffc000"
    "ffbc00ffb900ffb500ffb100ffac00ffa800ffa400ffa000ff9c00ff9900ff9500ff9100ff8c00ff8800ff8400ff8000"
    "ff7d00ff7900ff7500ff7100ff6c00ff6800ff6400ff6000ff5d00ff5900ff5500ff5100ff4c00ff4800ff4400ff4000"
    "ff3d00ff3900ff3500ff3100ff2c00ff2800ff2400ff2000ff1d00ff1900ff1500ff1100ff0c00ff0800ff0400ff0000"
    "fc0000f80000f40000f00000eb0000e70000e30000e00000dc0000d80000d40000d00000cb0000c70000c30000c00000"
    "bc0000b80000b40000b00000ab0000a70000a30000a000009c00009800009400009000008b0000870000840000800000"
)
JET = np.frombuffer(bytes.fromhex(_JET_HEX), dtype=np.uint8).reshape(256, 3)


@dataclass(frozen=True)
class RenderStyle:
    mode: str = MASKED
    alpha: float = 0.5
    dim_factor: float = 0.0
    boundary_color: tuple = (255, 255, 0)

    def __post_init__(self):
        if self.mode not in (BOUNDARIES, HEATMAP, MASKED):
            raise ArgumentError(f"unknown render mode {self.mode!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ArgumentError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.dim_factor <= 1.0:
            raise ArgumentError(f"dim_factor must be in [0, 1], got {self.dim_factor}")


def _check_dims(image: np.ndarray, shape) -> None:
    if image.shape[:2] != tuple(shape):
        raise ShapeError(f"image shape {image.shape[:2]} != {tuple(shape)}")


def draw_boundaries(
    image: np.ndarray, segments: SegmentLabels, color=(255, 255, 0)
) -> np.ndarray:
    """Recolor pixels whose 4-neighborhood crosses a region border."""
    _check_dims(image, segments.labels.shape)
    labels = segments.labels
    edge = np.zeros(labels.shape, dtype=bool)
    edge[:, 1:] |= labels[:, 1:] != labels[:, :-1]
    edge[:, :-1] |= labels[:, 1:] != labels[:, :-1]
    edge[1:, :] |= labels[1:, :] != labels[:-1, :]
    edge[:-1, :] |= labels[1:, :] != labels[:-1, :]
    out = image.copy()
    out[edge] = np.asarray(color, dtype=np.uint8)
    return out


def overlay_heatmap(image: np.ndarray, cam: CamMap, alpha: float) -> np.ndarray:
    """Blend the colormapped activation map over the image.

    The map is min-max normalized per image; a constant map normalizes to
    zero and renders as the lowest colormap entry.
    """
    if cam.resolution != IMAGE:
        raise ArgumentError("overlay needs an image-resolution map")
    _check_dims(image, cam.values.shape)
    if not 0.0 <= alpha <= 1.0:
        raise ArgumentError(f"alpha must be in [0, 1], got {alpha}")
    values = cam.values
    span = values.max() - values.min()
    norm = np.zeros_like(values) if span == 0 else (values - values.min()) / span
    colors = JET[np.rint(norm * 255).astype(np.intp)]
    blended = alpha * colors.astype(np.float64) + (1.0 - alpha) * image.astype(np.float64)
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def render_masked(
    image: np.ndarray, explanation: SecamExplanation, dim_factor: float = 0.0
) -> np.ndarray:
    """Keep selected regions untouched and darken everything else."""
    _check_dims(image, explanation.mask.shape)
    if not 0.0 <= dim_factor <= 1.0:
        raise ArgumentError(f"dim_factor must be in [0, 1], got {dim_factor}")
    out = image.copy()
    dimmed = np.rint(image.astype(np.float64) * dim_factor).astype(np.uint8)
    out[~explanation.mask] = dimmed[~explanation.mask]
    return out
