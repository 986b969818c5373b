"""Box- and mask-based scoring of explanations against ground truth.

IOU compares the explanation's bounding box to the annotated box. The
pointing-game energy score (EBPG) works on the raw pixel mask instead:
the fraction of explanation pixels that fall inside the truth region.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError, EmptyMaskError, ManifestError
from .imaging import BBox
from .secam import SecamExplanation


@dataclass(frozen=True)
class GroundTruth:
    image_id: str
    class_id: int
    boxes: list[BBox]

    def __post_init__(self):
        if not self.boxes:
            raise ArgumentError(f"ground truth for {self.image_id!r} has no boxes")


@dataclass(frozen=True)
class MetricReport:
    image_id: str
    iou: float
    ebpg: float
    region_count: int
    selected_count: int
    mask_pixels: int
    runtime_ms: float | None = None
    method: str = "secam"

    def csv_row(self) -> str:
        rt = "" if self.runtime_ms is None else f"{self.runtime_ms:.3f}"
        return f"{self.image_id},{self.method},{self.iou:.6f},{self.ebpg:.6f},{rt}"

    def to_json(self) -> dict:
        return {
            "image_id": self.image_id,
            "method": self.method,
            "iou": self.iou,
            "ebpg": self.ebpg,
            "region_count": self.region_count,
            "selected_count": self.selected_count,
            "mask_pixels": self.mask_pixels,
            "runtime_ms": self.runtime_ms,
        }


CSV_HEADER = "image_id,method,iou,ebpg,runtime_ms"


def bbox_of_mask(mask: np.ndarray) -> BBox:
    """Tightest box containing every true pixel."""
    mask = np.asarray(mask, dtype=bool)
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        raise EmptyMaskError("mask has no set pixels")
    return BBox(int(cols[0]), int(rows[0]), int(cols[-1]) + 1, int(rows[-1]) + 1)


def iou(a: BBox, b: BBox) -> float:
    inter = a.intersection_area(b)
    union = a.area + b.area - inter
    return inter / union


def _truth_mask(boxes: list[BBox], height: int, width: int) -> np.ndarray:
    out = np.zeros((height, width), dtype=bool)
    for box in boxes:
        x0 = max(0, box.x_min)
        y0 = max(0, box.y_min)
        x1 = min(width, box.x_max)
        y1 = min(height, box.y_max)
        if x0 < x1 and y0 < y1:
            out[y0:y1, x0:x1] = True
    return out


def ebpg(explanation, truth: BBox) -> float:
    """Fraction of the explanation inside the truth box.

    Accepts either a boolean mask (pixel counts) or a BBox (area ratio).
    """
    if isinstance(explanation, BBox):
        return explanation.intersection_area(truth) / explanation.area
    mask = np.asarray(explanation, dtype=bool)
    total = int(mask.sum())
    if total == 0:
        raise EmptyMaskError("explanation mask has no set pixels")
    h, w = mask.shape
    inside = int((mask & _truth_mask([truth], h, w)).sum())
    return inside / total


def evaluate(
    explanation: SecamExplanation,
    truth: GroundTruth,
    runtime_ms: float | None = None,
) -> MetricReport:
    """IOU of the mask's bounding box against the best-matching truth box,
    and mask-level EBPG against the union of all truth boxes."""
    mask = explanation.mask
    box = bbox_of_mask(mask)
    best_iou = max(iou(box, g) for g in truth.boxes)

    h, w = mask.shape
    total = int(mask.sum())
    inside = int((mask & _truth_mask(truth.boxes, h, w)).sum())
    return MetricReport(
        image_id=truth.image_id,
        iou=best_iou,
        ebpg=inside / total,
        region_count=len(explanation.region_values),
        selected_count=len(explanation.selected),
        mask_pixels=total,
        runtime_ms=runtime_ms,
    )


def load_ground_truth(path) -> GroundTruth:
    """Read a truth sidecar: {image_id, class_id, boxes: [[x0,y0,x1,y1], ...]}."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError(f"{path}: {e}") from e
    for key in ("image_id", "class_id", "boxes"):
        if key not in data:
            raise ManifestError(f"{path}: missing key {key!r}")
    boxes = [BBox(*map(int, b)) for b in data["boxes"]]
    return GroundTruth(image_id=str(data["image_id"]), class_id=int(data["class_id"]), boxes=boxes)


def save_ground_truth(truth: GroundTruth, path) -> None:
    payload = {
        "image_id": truth.image_id,
        "class_id": truth.class_id,
        "boxes": [[b.x_min, b.y_min, b.x_max, b.y_max] for b in truth.boxes],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))
