"""Command-line pipeline: segment, cam, explain, render, eval, convert-truth.

Exit codes: 0 success, 1 internal failure, 2 bad input or usage,
3 nothing to evaluate. All outputs land under --out-dir; inputs are never
modified. Stage timings are always written next to the explanation, and
printed when --timing is passed, so runs are comparable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
from PIL import Image

from . import cam as cam_mod
from . import metrics as metrics_mod
from . import render as render_mod
from . import secam as secam_mod
from .errors import ArgumentError, InputError, ManifestError
from .imaging import BBox, load_png, save_png
from .slic import SegmentLabels, SlicParams, segment
from .tensor_io import read_bundle, write_tensor


def _slic_params(args) -> SlicParams:
    return SlicParams(
        k=args.k, m=args.m, max_iters=args.max_iters, eps=args.eps, search_mode=args.search
    )


def _selection_rule(args) -> secam_mod.SelectionRule:
    if args.rule == "topn":
        return secam_mod.SelectionRule(kind=secam_mod.TOP_N, n=args.n)
    if args.t is None:
        raise ArgumentError("threshold rule requires --t")
    return secam_mod.SelectionRule(kind=secam_mod.THRESHOLD, t=args.t)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _save_labels_png(segments: SegmentLabels, path: Path) -> None:
    if segments.region_count > 65535:
        raise ArgumentError("more than 65535 regions cannot go into a 16-bit label image")
    Image.fromarray(segments.labels.astype(np.uint16)).save(path, format="PNG")


def _save_mask_png(mask: np.ndarray, path: Path) -> None:
    Image.fromarray((mask.astype(np.uint8) * 255)).convert("1").save(path, format="PNG")


def _load_mask_png(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("1"), dtype=bool)


def cmd_segment(args) -> int:
    out = _out_dir(args)
    image = load_png(args.image)
    segments = segment(image, _slic_params(args))
    stem = Path(args.image).stem
    _save_labels_png(segments, out / f"{stem}_labels.png")
    np.save(out / f"{stem}_labels.npy", segments.labels.astype(np.int32))
    save_png(render_mod.draw_boundaries(image, segments), out / f"{stem}_boundaries.png")
    print(f"{stem}: {segments.region_count} regions")
    return 0


def cmd_cam(args) -> int:
    out = _out_dir(args)
    inputs = read_bundle(args.bundle)
    cam = cam_mod.compute_cam(inputs)
    if inputs.weight_spec.mode == "spatial":
        cam_mod.relu_inplace(cam)
    stem = Path(args.bundle).parent.name or Path(args.bundle).stem
    write_tensor(cam.values.astype(np.float32), out / f"{stem}_cam.npy")
    if args.image:
        image = load_png(args.image)
        h, w = image.shape[:2]
        upsampled = cam_mod.upsample_to_image(cam, h, w)
        overlay = render_mod.overlay_heatmap(image, upsampled, args.alpha)
        save_png(overlay, out / f"{stem}_heatmap_a{int(round(args.alpha * 100)):02d}.png")
    return 0


def _timed(fn, *fn_args):
    start = time.perf_counter()
    result = fn(*fn_args)
    return result, (time.perf_counter() - start) * 1000.0


def cmd_explain(args) -> int:
    out = _out_dir(args)
    inputs = read_bundle(args.bundle)
    image_path = args.image or inputs.image_path
    image = load_png(image_path)
    rule = _selection_rule(args)

    segments, segment_ms = _timed(segment, image, _slic_params(args))

    def _cam_stage():
        cam = cam_mod.compute_cam(inputs)
        if inputs.weight_spec.mode == "spatial":
            cam_mod.relu_inplace(cam)
        h, w = image.shape[:2]
        return cam_mod.upsample_to_image(cam, h, w)

    cam, cam_ms = _timed(_cam_stage)

    def _select_stage():
        values = secam_mod.region_average(cam, segments)
        selected = secam_mod.select_regions(values, rule)
        mask = np.isin(segments.labels, sorted(selected))
        return secam_mod.SecamExplanation(
            region_values=values,
            selected=selected,
            mask=mask,
            class_id=inputs.class_id,
            selection=rule,
        )

    explanation, select_ms = _timed(_select_stage)

    stem = Path(image_path).stem
    mask_name = f"{stem}_mask.png"
    _save_mask_png(explanation.mask, out / mask_name)
    save_png(render_mod.render_masked(image, explanation, args.dim), out / f"{stem}_masked.png")
    (out / f"{stem}_explanation.json").write_text(
        secam_mod.explanation_json(
            explanation, class_name=inputs.class_name, image_id=stem, mask_path=mask_name
        )
    )
    timing = {
        "segment_ms": segment_ms,
        "cam_ms": cam_ms,
        "average_select_ms": select_ms,
        "total_ms": segment_ms + cam_ms + select_ms,
    }
    (out / f"{stem}_timing.json").write_text(json.dumps(timing, indent=2))
    if args.timing:
        for key, value in timing.items():
            print(f"{key:>18}: {value:9.2f}")
    print(f"{stem}: selected regions {sorted(explanation.selected)}")
    return 0


def cmd_render(args) -> int:
    out = _out_dir(args)
    image = load_png(args.image)
    stem = Path(args.image).stem
    if args.style == render_mod.BOUNDARIES:
        if not args.labels:
            raise ArgumentError("--style boundaries requires --labels")
        labels = np.load(args.labels)
        segments = SegmentLabels(labels=labels, region_count=int(labels.max()) + 1)
        result = render_mod.draw_boundaries(image, segments)
        name = f"{stem}_boundaries.png"
    elif args.style == render_mod.HEATMAP:
        if not args.cam:
            raise ArgumentError("--style heatmap requires --cam")
        from .tensor_io import read_tensor

        values = read_tensor(args.cam).astype(np.float64)
        cam = cam_mod.CamMap(values=values, class_id=-1 if args.class_id is None else args.class_id)
        h, w = image.shape[:2]
        cam = cam_mod.upsample_to_image(cam, h, w)
        result = render_mod.overlay_heatmap(image, cam, args.alpha)
        name = f"{stem}_heatmap_a{int(round(args.alpha * 100)):02d}.png"
    else:
        if not args.mask:
            raise ArgumentError("--style masked requires --mask")
        mask = _load_mask_png(args.mask)
        if mask.shape != image.shape[:2]:
            raise ArgumentError(f"mask shape {mask.shape} != image shape {image.shape[:2]}")
        out_img = image.copy()
        dimmed = np.rint(image.astype(np.float64) * args.dim).astype(np.uint8)
        out_img[~mask] = dimmed[~mask]
        result = out_img
        name = f"{stem}_masked_d{int(round(args.dim * 100)):02d}.png"
    save_png(result, out / name)
    print(out / name)
    return 0


def _load_truths(path: Path) -> dict:
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    truths = {}
    for f in files:
        truth = metrics_mod.load_ground_truth(f)
        truths[truth.image_id] = truth
    return truths


def cmd_eval(args) -> int:
    out = _out_dir(args)
    exp_dir = Path(args.explanations)
    exp_files = sorted(exp_dir.glob("*_explanation.json"))
    if not exp_files:
        print(f"no *_explanation.json files under {exp_dir}", file=sys.stderr)
        return 3
    truths = _load_truths(Path(args.truth))

    reports = []
    unmatched = []
    for exp_file in exp_files:
        data = json.loads(exp_file.read_text())
        image_id = data["image_id"]
        if image_id not in truths:
            unmatched.append(image_id)
            continue
        mask = _load_mask_png(exp_file.parent / data["mask_path"])
        rule_json = data["rule"]
        rule = secam_mod.SelectionRule(
            kind=rule_json["kind"], n=rule_json.get("n"), t=rule_json.get("t")
        )
        explanation = secam_mod.SecamExplanation(
            region_values=np.array([v for _, v in data["region_values"]]),
            selected=frozenset(data["selected"]),
            mask=mask,
            class_id=data["class_id"],
            selection=rule,
        )
        runtime_ms = None
        timing_file = exp_file.with_name(exp_file.name.replace("_explanation.json", "_timing.json"))
        if timing_file.exists():
            runtime_ms = json.loads(timing_file.read_text()).get("total_ms")
        reports.append(metrics_mod.evaluate(explanation, truths[image_id], runtime_ms=runtime_ms))

    for image_id in unmatched:
        print(f"no ground truth for {image_id}", file=sys.stderr)
    if not reports:
        print("no explanation matched any ground truth", file=sys.stderr)
        return 3

    csv_lines = [metrics_mod.CSV_HEADER] + [r.csv_row() for r in reports]
    (out / "report.csv").write_text("\n".join(csv_lines) + "\n")
    (out / "report.json").write_text(
        json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True)
    )
    print("\n".join(csv_lines))
    return 0


def cmd_convert_truth(args) -> int:
    """PASCAL-VOC XML to the JSON sidecar format. VOC coordinates are
    1-based inclusive; they come out 0-based half-open."""
    out = _out_dir(args)
    src = Path(args.xml)
    files = sorted(src.glob("*.xml")) if src.is_dir() else [src]
    if not files:
        raise ArgumentError(f"no XML files at {src}")
    for f in files:
        try:
            root = ET.parse(f).getroot()
        except ET.ParseError as e:
            raise ManifestError(f"{f}: {e}") from e
        image_id = root.findtext("filename", default=f.stem)
        image_id = Path(image_id).stem
        boxes = []
        for obj in root.iter("object"):
            bnd = obj.find("bndbox")
            if bnd is None:
                continue
            xmin = int(float(bnd.findtext("xmin")))
            ymin = int(float(bnd.findtext("ymin")))
            xmax = int(float(bnd.findtext("xmax")))
            ymax = int(float(bnd.findtext("ymax")))
            boxes.append(BBox(xmin - 1, ymin - 1, xmax, ymax))
        if not boxes:
            print(f"{f}: no objects, skipped", file=sys.stderr)
            continue
        truth = metrics_mod.GroundTruth(image_id=image_id, class_id=args.class_id, boxes=boxes)
        metrics_mod.save_ground_truth(truth, out / f"{f.stem}_truth.json")
    return 0


def _add_slic_flags(p):
    p.add_argument("--k", type=int, default=49, help="requested superpixel count")
    p.add_argument("--m", type=float, default=10.0, help="compactness, in [1, 20]")
    p.add_argument("--max-iters", type=int, default=10)
    p.add_argument("--eps", type=float, default=1.0, help="center-movement stop threshold")
    p.add_argument("--search", choices=["windowed", "full"], default="windowed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="superpixel segmentation of a PNG")
    p.add_argument("--image", required=True)
    _add_slic_flags(p)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("cam", help="activation map from an exported bundle")
    p.add_argument("--bundle", required=True, help="bundle manifest JSON")
    p.add_argument("--image", help="also write a heatmap overlay for this PNG")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_cam)

    p = sub.add_parser("explain", help="full pipeline: segment + cam + region selection")
    p.add_argument("--bundle", required=True)
    p.add_argument("--image", help="defaults to the image recorded in the bundle")
    _add_slic_flags(p)
    p.add_argument("--rule", choices=["topn", "threshold"], default="topn")
    p.add_argument("--n", type=int, default=3, help="regions to keep (topn)")
    p.add_argument("--t", type=float, help="fraction of max region value (threshold)")
    p.add_argument("--dim", type=float, default=0.0, help="brightness of unselected regions")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--timing", action="store_true", help="print per-stage milliseconds")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("render", help="draw boundaries, heatmap, or masked image")
    p.add_argument("--style", choices=["boundaries", "heatmap", "masked"], required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--labels", help="labels .npy (boundaries)")
    p.add_argument("--cam", help="feature-resolution cam .npy (heatmap)")
    p.add_argument("--mask", help="mask .png (masked)")
    p.add_argument("--class-id", type=int)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--dim", type=float, default=0.0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="score explanations against ground-truth boxes")
    p.add_argument("--explanations", required=True, help="directory of *_explanation.json")
    p.add_argument("--truth", required=True, help="truth JSON file or directory")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("convert-truth", help="PASCAL-VOC XML to truth JSON")
    p.add_argument("--xml", required=True, help="XML file or directory")
    p.add_argument("--class-id", type=int, default=-1)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_convert_truth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
