"""Tensor interchange on disk: NPY v1.0 files and JSON bundle manifests.

This is the boundary between the explanation core and whatever framework
produced the activations. Only NPY version 1.0 is accepted, C order, with
dtypes float32, float64 or uint8. Anything else is rejected loudly rather
than silently cast, so a bundle either loads bit-exactly or not at all.
"""

from __future__ import annotations

import ast
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, IoError, ManifestError, ShapeError, UnsupportedError

MAGIC = b"\x93NUMPY"

# dtype descr strings we accept, mapped to numpy dtypes
_SUPPORTED_DESCRS = {
    "<f4": np.dtype(np.float32),
    "<f8": np.dtype(np.float64),
    "|u1": np.dtype(np.uint8),
}
_DESCR_FOR_DTYPE = {v: k for k, v in _SUPPORTED_DESCRS.items()}

CHANNEL = "channel"
SPATIAL = "spatial"


def _check_tensor(arr: np.ndarray) -> np.ndarray:
    """Validate that an array is a supported tensor; returns it C-contiguous."""
    if arr.dtype not in _DESCR_FOR_DTYPE:
        raise UnsupportedError(f"unsupported dtype {arr.dtype}; use float32, float64 or uint8")
    if arr.ndim == 0:
        raise UnsupportedError("zero-dimensional tensors are not supported")
    if any(d < 1 for d in arr.shape):
        raise UnsupportedError(f"every dimension must be >= 1, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def read_tensor(path) -> np.ndarray:
    """Read one NPY v1.0 file into a C-contiguous array, bit-exactly.

    Raises FormatError for malformed or truncated files and UnsupportedError
    for Fortran order, non-1.0 versions, or dtypes outside the supported set.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e

    if len(raw) < 10 or raw[:6] != MAGIC:
        raise FormatError(f"{path}: missing NPY magic")
    major, minor = raw[6], raw[7]
    if (major, minor) != (1, 0):
        raise UnsupportedError(f"{path}: NPY version {major}.{minor}, only 1.0 is supported")
    (hlen,) = struct.unpack("<H", raw[8:10])
    header_end = 10 + hlen
    if len(raw) < header_end:
        raise FormatError(f"{path}: truncated header")
    try:
        header = ast.literal_eval(raw[10:header_end].decode("latin1"))
    except (ValueError, SyntaxError) as e:
        raise FormatError(f"{path}: unparseable header") from e
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError(f"{path}: header keys {sorted(header) if isinstance(header, dict) else header!r}")

    if header["fortran_order"]:
        raise UnsupportedError(f"{path}: Fortran-order arrays are not supported")
    descr = header["descr"]
    if descr not in _SUPPORTED_DESCRS:
        raise UnsupportedError(f"{path}: dtype {descr!r} not in supported set {sorted(_SUPPORTED_DESCRS)}")
    shape = header["shape"]
    if (
        not isinstance(shape, tuple)
        or not shape
        or not all(isinstance(d, int) and d >= 1 for d in shape)
    ):
        raise UnsupportedError(f"{path}: shape {shape!r} outside the supported contract")

    dtype = _SUPPORTED_DESCRS[descr]
    count = int(np.prod(shape))
    payload = raw[header_end:]
    if len(payload) != count * dtype.itemsize:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, expected {count * dtype.itemsize}"
        )
    arr = np.frombuffer(payload, dtype=dtype).reshape(shape)
    # frombuffer yields a read-only view over `raw`; hand back an owned copy
    return arr.copy()


def write_tensor(arr: np.ndarray, path) -> None:
    """Write an array as NPY v1.0 so that read_tensor reproduces it exactly."""
    arr = _check_tensor(np.asarray(arr))
    descr = _DESCR_FOR_DTYPE[arr.dtype]
    header = "{'descr': '%s', 'fortran_order': False, 'shape': %s, }" % (
        descr,
        str(tuple(arr.shape)),
    )
    # pad so the payload starts on a 64-byte boundary, trailing newline included
    unpadded = len(MAGIC) + 2 + 2 + len(header) + 1
    header = header + " " * (-unpadded % 64)
    blob = MAGIC + b"\x01\x00" + struct.pack("<H", len(header) + 1) + header.encode("latin1") + b"\n"
    try:
        with open(path, "wb") as f:
            f.write(blob)
            f.write(arr.tobytes())
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


@dataclass(frozen=True)
class WeightSpec:
    """Class weights for the activation map: one scalar per channel for
    pooled-head models, or a full per-position map for the gradient route."""

    mode: str
    values: np.ndarray

    def __post_init__(self):
        if self.mode not in (CHANNEL, SPATIAL):
            raise ManifestError(f"weight_mode must be '{CHANNEL}' or '{SPATIAL}', got {self.mode!r}")
        expected = 1 if self.mode == CHANNEL else 3
        if self.values.ndim != expected:
            raise ShapeError(
                f"{self.mode} weights must be {expected}-D, got shape {self.values.shape}"
            )


@dataclass(frozen=True)
class ExplanationInputs:
    """Everything needed to explain one prediction: K feature maps of h x w,
    a matching WeightSpec, the target class, and the source image path."""

    features: np.ndarray
    weight_spec: WeightSpec
    class_id: int
    class_name: str = ""
    logit_scores: np.ndarray | None = None
    image_path: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.features.ndim != 3:
            raise ShapeError(f"features must be K x h x w, got shape {self.features.shape}")
        k = self.features.shape[0]
        w = self.weight_spec
        if w.mode == CHANNEL and w.values.shape != (k,):
            raise ShapeError(
                f"channel weights length {w.values.shape[0]} != feature channels {k}"
            )
        if w.mode == SPATIAL and w.values.shape != self.features.shape:
            raise ShapeError(
                f"spatial weights shape {w.values.shape} != features shape {self.features.shape}"
            )
        if self.class_id < 0:
            raise ManifestError(f"class_id must be non-negative, got {self.class_id}")
        if self.logit_scores is not None:
            if self.logit_scores.ndim != 1:
                raise ShapeError(f"logits must be 1-D, got shape {self.logit_scores.shape}")
            if self.class_id >= self.logit_scores.shape[0]:
                raise ManifestError(
                    f"class_id {self.class_id} out of range for {self.logit_scores.shape[0]} logits"
                )


_MANDATORY_KEYS = ("features", "weights", "weight_mode", "class_id", "image")


def read_bundle(manifest_path) -> ExplanationInputs:
    """Load a bundle manifest plus its referenced tensors.

    Relative tensor and image paths resolve against the manifest's directory,
    so a bundle stays valid when the folder is copied around.
    """
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except OSError as e:
        raise IoError(f"cannot read {manifest_path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ManifestError(f"{manifest_path}: not valid JSON ({e})") from e
    if not isinstance(manifest, dict):
        raise ManifestError(f"{manifest_path}: manifest must be a JSON object")
    for key in _MANDATORY_KEYS:
        if key not in manifest:
            raise ManifestError(f"{manifest_path}: missing mandatory key {key!r}")

    base = manifest_path.parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    features = read_tensor(resolve(manifest["features"]))
    weights = read_tensor(resolve(manifest["weights"]))
    spec = WeightSpec(mode=manifest["weight_mode"], values=weights)

    logits = None
    if manifest.get("logits") is not None:
        logits = read_tensor(resolve(manifest["logits"]))

    class_id = manifest["class_id"]
    if not isinstance(class_id, int):
        raise ManifestError(f"{manifest_path}: class_id must be an integer")

    metadata = manifest.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ManifestError(f"{manifest_path}: metadata must be an object")

    return ExplanationInputs(
        features=features,
        weight_spec=spec,
        class_id=class_id,
        class_name=str(manifest.get("class_name", "")),
        logit_scores=logits,
        image_path=str(resolve(manifest["image"])),
        metadata={str(k): str(v) for k, v in metadata.items()},
    )
