"""Class activation maps from exported features and weights.

The map is M(x, y) = sum_k w_k(x, y) * f_k(x, y); summing it over all
positions recovers the class logit (no bias term). Channel-mode weights
broadcast one scalar per feature map, spatial-mode weights (the gradient
route) match the feature maps elementwise. Accumulation is float64 so the
score identity survives thousands of channels of float32 input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ShapeError
from .imaging import bilinear_resize
from .tensor_io import CHANNEL, ExplanationInputs

FEATURE = "feature"
IMAGE = "image"


@dataclass(frozen=True)
class CamMap:
    """2-D activation map plus the class it scores and which resolution it
    lives at ('feature' before upsampling, 'image' after)."""

    values: np.ndarray
    class_id: int
    resolution: str = FEATURE

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ShapeError(f"map must be 2-D, got shape {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise ArgumentError("map contains NaN or Inf")
        if self.resolution not in (FEATURE, IMAGE):
            raise ArgumentError(f"resolution must be '{FEATURE}' or '{IMAGE}'")


def compute_cam(inputs: ExplanationInputs) -> CamMap:
    """Weighted sum of feature maps over the channel axis, at feature resolution."""
    features = inputs.features.astype(np.float64)
    weights = inputs.weight_spec.values.astype(np.float64)
    if inputs.weight_spec.mode == CHANNEL:
        values = np.tensordot(weights, features, axes=(0, 0))
    else:
        values = (weights * features).sum(axis=0)
    return CamMap(values=values, class_id=inputs.class_id, resolution=FEATURE)


def class_score(cam: CamMap) -> float:
    """Sum of all map values; equals the pre-softmax class score. Only valid
    at feature resolution, since upsampling does not preserve the sum."""
    if cam.resolution != FEATURE:
        raise ArgumentError("class_score requires a feature-resolution map")
    return float(cam.values.sum())


def softmax(scores: np.ndarray) -> np.ndarray:
    """Probabilities exp(s_c) / sum(exp), stabilized by max subtraction."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ArgumentError(f"scores must be a non-empty vector, got shape {scores.shape}")
    if not np.isfinite(scores).all():
        raise ArgumentError("scores contain NaN or Inf")
    e = np.exp(scores - scores.max())
    return e / e.sum()


def relu_inplace(cam: CamMap) -> CamMap:
    """Clamp negative values to zero, mutating the map. Used on the gradient
    route, where only positive evidence is meaningful."""
    np.maximum(cam.values, 0.0, out=cam.values)
    return cam


def upsample_to_image(cam: CamMap, height: int, width: int) -> CamMap:
    """Bilinearly resize a feature-resolution map to image resolution."""
    if cam.resolution != FEATURE:
        raise ArgumentError("map is already at image resolution")
    values = bilinear_resize(cam.values, height, width)
    return CamMap(values=values, class_id=cam.class_id, resolution=IMAGE)
