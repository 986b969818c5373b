"""Exports CNN activations, class weights or gradients, and logits into
the bundle folder format the explanation toolkit consumes."""

from .bundle import write_bundle_dir
from .synthetic import direct_cam, export_synthetic

__version__ = "0.1.0"

__all__ = ["direct_cam", "export_synthetic", "write_bundle_dir"]
