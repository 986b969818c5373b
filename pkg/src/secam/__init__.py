"""Superpixel-averaged class activation maps.

Segments an image into SLIC superpixels, computes a class activation map
from exported feature maps and class weights (or gradients), averages the
map per region, selects the most influential regions, and scores the
result against ground-truth boxes.
"""

from .cam import CamMap, class_score, compute_cam, relu_inplace, softmax, upsample_to_image
from .imaging import BBox, bilinear_resize, load_png, save_png, srgb_to_lab
from .metrics import GroundTruth, MetricReport, bbox_of_mask, ebpg, evaluate, iou
from .secam import SecamExplanation, SelectionRule, explain, region_average, select_regions
from .slic import SegmentLabels, SlicParams, enforce_connectivity, segment
from .tensor_io import ExplanationInputs, WeightSpec, read_bundle, read_tensor, write_tensor

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "CamMap",
    "ExplanationInputs",
    "GroundTruth",
    "MetricReport",
    "SecamExplanation",
    "SegmentLabels",
    "SelectionRule",
    "SlicParams",
    "WeightSpec",
    "bbox_of_mask",
    "bilinear_resize",
    "class_score",
    "compute_cam",
    "ebpg",
    "enforce_connectivity",
    "evaluate",
    "explain",
    "iou",
    "load_png",
    "read_bundle",
    "read_tensor",
    "region_average",
    "relu_inplace",
    "save_png",
    "segment",
    "select_regions",
    "softmax",
    "srgb_to_lab",
    "upsample_to_image",
    "write_tensor",
]
