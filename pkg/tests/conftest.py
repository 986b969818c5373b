import json

import numpy as np
import pytest

from secam.imaging import save_png
from secam.tensor_io import write_tensor


def smooth_image(height, width, seed=0):
    """Deterministic blobby test image: a few low-frequency sinusoids per
    channel, so SLIC sees natural-looking color structure."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.zeros((height, width, 3))
    for c in range(3):
        for _ in range(4):
            fx, fy = rng.uniform(0.5, 3.0, 2)
            px, py = rng.uniform(0.0, 2.0 * np.pi, 2)
            img[..., c] += rng.uniform(0.3, 1.0) * np.sin(
                2 * np.pi * fx * xx / width + px
            ) * np.sin(2 * np.pi * fy * yy / height + py)
    img -= img.min()
    img /= img.max()
    return (img * 255).astype(np.uint8)


def write_bundle(
    directory,
    features,
    weights,
    weight_mode,
    class_id=0,
    image=None,
    logits=None,
    class_name="",
):
    """Assemble a bundle folder (tensors, optional PNG, manifest) and return
    the manifest path."""
    directory.mkdir(parents=True, exist_ok=True)
    write_tensor(features, directory / "features.npy")
    write_tensor(weights, directory / "weights.npy")
    manifest = {
        "features": "features.npy",
        "weights": "weights.npy",
        "weight_mode": weight_mode,
        "class_id": class_id,
        "image": "input.png",
    }
    if class_name:
        manifest["class_name"] = class_name
    if logits is not None:
        write_tensor(logits, directory / "logits.npy")
        manifest["logits"] = "logits.npy"
    if image is not None:
        save_png(image, directory / "input.png")
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


def five_d_kmeans_oracle(lab, centers, max_iters, eps):
    """Brute-force k-means in (l, a, b, x, y): euclidean distances, mean
    updates, lowest-index ties, same stopping rule as slic.cluster. Kept
    deliberately naive so it stays independent of the implementation."""
    h, w = lab.shape[:2]
    pts = np.concatenate(
        [
            lab.reshape(-1, 3),
            np.stack(np.meshgrid(np.arange(w), np.arange(h)), axis=-1).reshape(-1, 2),
        ],
        axis=1,
    ).astype(np.float64)
    centers = centers.copy()
    labels = None
    for _ in range(max_iters):
        d = np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2)
        labels = np.argmin(d, axis=1)  # argmin takes the first (lowest) index
        new = centers.copy()
        for i in range(len(centers)):
            members = pts[labels == i]
            if len(members):
                new[i] = members.mean(axis=0)
        movement = np.sqrt(((new - centers) ** 2).sum(axis=1)).sum()
        centers = new
        if movement < eps:
            break
    return labels.reshape(h, w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
