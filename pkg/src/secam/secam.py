"""Region-averaged activation maps and region selection.

Each superpixel gets the mean of the image-resolution activation map over
its pixels, which makes regions of different sizes comparable. The most
influential regions are then picked either as a fixed count (top_n) or as
everything at or above a fraction of the maximum region value (threshold).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .cam import CamMap, compute_cam, relu_inplace, upsample_to_image
from .errors import ArgumentError, ShapeError
from .slic import SegmentLabels
from .tensor_io import SPATIAL, ExplanationInputs

TOP_N = "top_n"
THRESHOLD = "threshold"


@dataclass(frozen=True)
class SelectionRule:
    """top_n keeps the n highest-valued regions (ties to the lower id);
    threshold keeps every region with value >= t * max over regions,
    t in (0, 1]."""

    kind: str
    n: int | None = None
    t: float | None = None

    def __post_init__(self):
        if self.kind == TOP_N:
            if self.n is None or self.n < 1:
                raise ArgumentError(f"top_n needs n >= 1, got {self.n}")
            if self.t is not None:
                raise ArgumentError("top_n rule does not take t")
        elif self.kind == THRESHOLD:
            if self.t is None or not 0.0 < self.t <= 1.0:
                raise ArgumentError(f"threshold needs t in (0, 1], got {self.t}")
            if self.n is not None:
                raise ArgumentError("threshold rule does not take n")
        else:
            raise ArgumentError(f"rule kind must be '{TOP_N}' or '{THRESHOLD}'")

    def to_json(self) -> dict:
        if self.kind == TOP_N:
            return {"kind": self.kind, "n": self.n}
        return {"kind": self.kind, "t": self.t}


@dataclass(frozen=True)
class SecamExplanation:
    """Per-region values (indexed by region id), the selected region ids,
    and the pixel mask they cover."""

    region_values: np.ndarray
    selected: frozenset
    mask: np.ndarray
    class_id: int
    selection: SelectionRule


def region_average(cam: CamMap, segments: SegmentLabels) -> np.ndarray:
    """Mean map value per region, as an array indexed by region id."""
    if cam.values.shape != segments.labels.shape:
        raise ShapeError(
            f"map shape {cam.values.shape} != labels shape {segments.labels.shape}"
        )
    flat = segments.labels.ravel()
    totals = np.bincount(flat, weights=cam.values.ravel(), minlength=segments.region_count)
    return totals / segments.sizes()


def select_regions(values: np.ndarray, rule: SelectionRule) -> frozenset:
    """Apply a selection rule to per-region values; returns region ids."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ArgumentError("no regions to select from")
    if rule.kind == TOP_N:
        order = np.lexsort((np.arange(values.size), -values))
        return frozenset(int(i) for i in order[: rule.n])
    cutoff = rule.t * values.max()
    return frozenset(int(i) for i in np.flatnonzero(values >= cutoff))


def explain(
    inputs: ExplanationInputs, segments: SegmentLabels, rule: SelectionRule
) -> SecamExplanation:
    """End-to-end: activation map, ReLU on the gradient route, upsample to
    the segmentation's resolution, average per region, select."""
    cam = compute_cam(inputs)
    if inputs.weight_spec.mode == SPATIAL:
        relu_inplace(cam)
    h, w = segments.labels.shape
    cam = upsample_to_image(cam, h, w)
    values = region_average(cam, segments)
    selected = select_regions(values, rule)
    mask = np.isin(segments.labels, sorted(selected))
    return SecamExplanation(
        region_values=values,
        selected=selected,
        mask=mask,
        class_id=inputs.class_id,
        selection=rule,
    )


def explanation_json(
    explanation: SecamExplanation,
    class_name: str = "",
    image_id: str = "",
    mask_path: str = "",
) -> str:
    """Serialize an explanation deterministically (region values sorted by id)."""
    payload = {
        "image_id": image_id,
        "method": "secam",
        "class_id": explanation.class_id,
        "class_name": class_name,
        "rule": explanation.selection.to_json(),
        "region_values": [
            [int(i), float(v)] for i, v in enumerate(explanation.region_values)
        ],
        "selected": sorted(int(i) for i in explanation.selected),
        "mask_path": mask_path,
    }
    return json.dumps(payload, indent=2, sort_keys=True)
