"""Writing the on-disk bundle contract.

A bundle is a folder: NPY v1.0 tensors (float32), an 8-bit PNG of the image
the activations came from, and manifest.json tying them together with
weight_mode, class_id and free-form metadata. Everything is relative to the
folder so it can be copied or committed wholesale.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image


def write_bundle_dir(
    out_dir,
    features: np.ndarray,
    weights: np.ndarray,
    weight_mode: str,
    class_id: int,
    image: np.ndarray,
    logits: np.ndarray | None = None,
    class_name: str = "",
    metadata: dict | None = None,
    extra_tensors: dict | None = None,
) -> Path:
    """Write tensors, image and manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    np.save(out_dir / "features.npy", np.ascontiguousarray(features, dtype=np.float32))
    np.save(out_dir / "weights.npy", np.ascontiguousarray(weights, dtype=np.float32))
    Image.fromarray(image, mode="RGB").save(out_dir / "input.png", format="PNG")

    manifest = {
        "features": "features.npy",
        "weights": "weights.npy",
        "weight_mode": weight_mode,
        "class_id": int(class_id),
        "class_name": class_name,
        "image": "input.png",
        "metadata": {str(k): str(v) for k, v in (metadata or {}).items()},
    }
    if logits is not None:
        np.save(out_dir / "logits.npy", np.ascontiguousarray(logits, dtype=np.float32))
        manifest["logits"] = "logits.npy"
    for name, tensor in (extra_tensors or {}).items():
        np.save(out_dir / f"{name}.npy", tensor)

    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
