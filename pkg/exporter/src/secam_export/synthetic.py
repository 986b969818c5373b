"""Framework-free synthetic bundles for CI and oracle tests.

Features and weights are seeded random draws; the expected activation map
is computed here by direct triple-loop summation and saved alongside, so a
consumer can check its own map computation against an independent pass.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .bundle import write_bundle_dir


def direct_cam(features: np.ndarray, weights: np.ndarray, weight_mode: str) -> np.ndarray:
    """Naive summation oracle, one term at a time in float64."""
    k, h, w = features.shape
    out = np.zeros((h, w), dtype=np.float64)
    for ki in range(k):
        for y in range(h):
            for x in range(w):
                wv = weights[ki] if weight_mode == "channel" else weights[ki, y, x]
                out[y, x] += float(wv) * float(features[ki, y, x])
    return out


def export_synthetic(
    out_dir,
    seed: int = 0,
    k: int = 4,
    h: int = 7,
    w: int = 7,
    weight_mode: str = "channel",
    image_side: int = 64,
    identity_weights: bool = False,
) -> Path:
    """Deterministic bundle: same arguments always produce the same bytes.

    identity_weights forces all-ones channel weights, so the expected map
    equals the (summed) feature maps themselves.
    """
    if weight_mode not in ("channel", "spatial"):
        raise ValueError(f"weight_mode must be channel or spatial, got {weight_mode!r}")
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((k, h, w)).astype(np.float32)
    if identity_weights:
        if weight_mode != "channel":
            raise ValueError("identity weights only make sense in channel mode")
        weights = np.ones(k, dtype=np.float32)
    elif weight_mode == "channel":
        weights = rng.standard_normal(k).astype(np.float32)
    else:
        weights = rng.standard_normal((k, h, w)).astype(np.float32)

    # logits: a small fake head where the target class logit is the true
    # pooled forward value, so score checks have something to match
    pooled = features.astype(np.float64).mean(axis=(1, 2))
    class_id = 0
    n_classes = 10
    logits = rng.standard_normal(n_classes).astype(np.float32)
    if weight_mode == "channel":
        logits[class_id] = np.float32(pooled @ weights.astype(np.float64))

    image = rng.integers(0, 256, size=(image_side, image_side, 3)).astype(np.uint8)
    expected = direct_cam(features, weights, weight_mode)

    return write_bundle_dir(
        out_dir,
        features=features,
        weights=weights,
        weight_mode=weight_mode,
        class_id=class_id,
        image=image,
        logits=logits,
        class_name="synthetic",
        metadata={
            "generator": "synthetic",
            "seed": seed,
            "fc_bias": "0.0",
            "note": "expected_cam.npy holds the direct-summation map",
        },
        extra_tensors={"expected_cam": expected},
    )
