"""Bundle export from torchvision classifiers.

resnet50 and inception_v3 end in global average pooling plus one fully
connected layer, so the class row of that layer is exported directly as
channel weights. vgg16 has a multi-layer head instead; there the weights
are the gradient of the class logit with respect to the last conv
activations (taken after its ReLU), exported as a spatial map.

--weights random builds an untrained net from a fixed seed. That keeps the
export runnable offline; the score identity still holds architecturally,
only the semantics of the explanation need trained weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .bundle import write_bundle_dir

# model name -> (input side, feature node) recorded at export time
MODEL_INPUT_SIDE = {"resnet50": 224, "inception_v3": 299, "vgg16": 224}
GAP_MODELS = ("resnet50", "inception_v3")


@dataclass(frozen=True)
class ExportSpec:
    model: str
    image: str
    out_dir: str
    class_id: int | None = None  # None: use the top-1 prediction
    weights_src: str = "pretrained"

    def __post_init__(self):
        if self.model not in MODEL_INPUT_SIDE:
            raise ValueError(f"unsupported model {self.model!r}, pick one of {sorted(MODEL_INPUT_SIDE)}")
        if self.weights_src not in ("pretrained", "random"):
            raise ValueError("weights_src must be 'pretrained' or 'random'")


def _load_model(name: str, weights_src: str):
    import torch
    import torchvision.models as tvm

    torch.manual_seed(0)  # fixed init so random exports are reproducible
    builders = {
        "resnet50": (tvm.resnet50, getattr(tvm, "ResNet50_Weights", None)),
        "inception_v3": (tvm.inception_v3, getattr(tvm, "Inception_V3_Weights", None)),
        "vgg16": (tvm.vgg16, getattr(tvm, "VGG16_Weights", None)),
    }
    builder, weights_enum = builders[name]
    categories = None
    if weights_src == "pretrained":
        weights = weights_enum.DEFAULT
        model = builder(weights=weights)
        categories = weights.meta.get("categories")
    elif name == "inception_v3":
        model = builder(weights=None, init_weights=True)
    else:
        model = builder(weights=None)
    model.eval()
    return model, categories


def _preprocess(image_path: str, side: int):
    """Resize so the short edge is side*256/224, center-crop to side.
    Returns the normalized tensor and the cropped uint8 image for the PNG."""
    import torch

    with Image.open(image_path) as img:
        img = img.convert("RGB")
        scale = side * 256 // 224
        w, h = img.size
        if w < h:
            img = img.resize((scale, max(1, round(h * scale / w))), Image.BILINEAR)
        else:
            img = img.resize((max(1, round(w * scale / h)), scale), Image.BILINEAR)
        left = (img.width - side) // 2
        top = (img.height - side) // 2
        img = img.crop((left, top, left + side, top + side))
        display = np.asarray(img, dtype=np.uint8)

    x = torch.from_numpy(display.astype(np.float32) / 255.0).permute(2, 0, 1)
    mean = torch.tensor([0.485, 0.456, 0.406]).view(3, 1, 1)
    std = torch.tensor([0.229, 0.224, 0.225]).view(3, 1, 1)
    return ((x - mean) / std).unsqueeze(0), display


def _feature_module(model, name: str):
    if name == "resnet50":
        return model.layer4
    if name == "inception_v3":
        return model.Mixed_7c
    return model.features[29]  # vgg16: ReLU after the last conv, before pooling


def export_bundle(spec: ExportSpec) -> Path:
    """Run one image through the model and write the bundle folder."""
    import torch

    model, categories = _load_model(spec.model, spec.weights_src)
    side = MODEL_INPUT_SIDE[spec.model]
    x, display = _preprocess(spec.image, side)

    grabbed = {}

    def hook(_module, _inputs, output):
        grabbed["features"] = output

    handle = _feature_module(model, spec.model).register_forward_hook(hook)
    try:
        needs_grad = spec.model not in GAP_MODELS
        with torch.set_grad_enabled(needs_grad):
            logits = model(x)
            if needs_grad:
                grabbed["features"].retain_grad()
        logits_np = logits.detach().numpy()[0].astype(np.float32)
        class_id = int(np.argmax(logits_np)) if spec.class_id is None else spec.class_id
        features = grabbed["features"].detach().numpy()[0].astype(np.float32)
        h, w = features.shape[1:]

        metadata = {
            "model": spec.model,
            "input_size": side,
            "weights_src": spec.weights_src,
        }
        if spec.model in GAP_MODELS:
            # mean pooling spreads the FC weight over h*w positions, so the
            # per-position weight is the row divided by h*w; with that, the
            # summed map reproduces the class logit minus the bias
            weight_mode = "channel"
            row = model.fc.weight[class_id].detach().numpy().astype(np.float64)
            weights = (row / (h * w)).astype(np.float32)
            metadata["fc_bias"] = float(model.fc.bias[class_id].detach())
            metadata["weight_scale"] = f"fc_row / {h * w}"
        else:
            weight_mode = "spatial"
            model.zero_grad()
            logits[0, class_id].backward()
            weights = grabbed["features"].grad[0].detach().numpy().astype(np.float32)
    finally:
        handle.remove()

    class_name = categories[class_id] if categories else f"class_{class_id}"
    return write_bundle_dir(
        spec.out_dir,
        features=features,
        weights=weights,
        weight_mode=weight_mode,
        class_id=class_id,
        image=display,
        logits=logits_np,
        class_name=class_name,
        metadata=metadata,
    )


def pretrained_available(model: str = "resnet50") -> bool:
    """True when the pretrained checkpoint can be loaded (cached or fetchable)."""
    try:
        _load_model(model, "pretrained")
        return True
    except Exception:
        return False
