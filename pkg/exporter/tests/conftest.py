import subprocess
import sys

import numpy as np
import pytest
from PIL import Image, ImageDraw


def run_secam(*args):
    """Invoke the explanation toolkit's CLI, the interface bundles target."""
    return subprocess.run(
        [sys.executable, "-m", "secam.cli", *map(str, args)],
        capture_output=True,
        text=True,
    )


def torch_available() -> bool:
    try:
        import torch  # noqa: F401

        return True
    except ImportError:
        return False


def draw_bird_scene(side=500):
    """Crude but recognizable bird on a plain sky: brown body and head,
    orange beak, a branch. Returns (uint8 image, object box as x0,y0,x1,y1)."""
    img = Image.new("RGB", (side, side), (135, 206, 235))
    d = ImageDraw.Draw(img)
    cx, cy = side // 2, side // 2
    d.line([(0, cy + side // 5), (side, cy + side // 10)], fill=(90, 60, 30), width=side // 40)
    body = (cx - side // 5, cy - side // 10, cx + side // 6, cy + side // 5)
    d.ellipse(body, fill=(120, 80, 40), outline=(80, 50, 20))
    head = (cx + side // 12, cy - side // 4, cx + side // 4, cy - side // 12)
    d.ellipse(head, fill=(140, 95, 50), outline=(80, 50, 20))
    beak = [(cx + side // 4, cy - side // 6), (cx + side // 3, cy - side // 7),
            (cx + side // 4, cy - side // 8)]
    d.polygon(beak, fill=(230, 140, 30))
    d.ellipse((cx + side // 6, cy - side // 5, cx + side // 5, cy - side // 6), fill=(10, 10, 10))
    wing = (cx - side // 7, cy - side // 12, cx + side // 12, cy + side // 8)
    d.ellipse(wing, fill=(100, 65, 30))
    box = (cx - side // 5, cy - side // 4, cx + side // 3, cy + side // 5)
    return np.asarray(img, dtype=np.uint8), box


@pytest.fixture
def rng():
    return np.random.default_rng(777)
