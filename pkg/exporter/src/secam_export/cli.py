"""secam-export: produce explanation bundles.

Two sources: `model` runs a torchvision classifier on an image (needs the
models extra installed), `synthetic` writes a seeded framework-free bundle
with a direct-summation expected map for oracle tests.
"""

from __future__ import annotations

import argparse
import sys


def cmd_model(args) -> int:
    from .models import ExportSpec, export_bundle

    spec = ExportSpec(
        model=args.model,
        image=args.image,
        out_dir=args.out_dir,
        class_id=args.class_id,
        weights_src=args.weights,
    )
    manifest = export_bundle(spec)
    print(manifest)
    return 0


def cmd_synthetic(args) -> int:
    from .synthetic import export_synthetic

    manifest = export_synthetic(
        args.out_dir,
        seed=args.seed,
        k=args.k,
        h=args.height,
        w=args.width,
        weight_mode=args.mode,
        image_side=args.image_side,
        identity_weights=args.identity_weights,
    )
    print(manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secam-export", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="export from a torchvision classifier")
    p.add_argument("--model", choices=["resnet50", "inception_v3", "vgg16"], required=True)
    p.add_argument("--image", required=True, help="input photo (any PIL-readable format)")
    p.add_argument("--class-id", type=int, help="target class; defaults to the top-1 prediction")
    p.add_argument("--weights", choices=["pretrained", "random"], default="pretrained")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("synthetic", help="seeded framework-free bundle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--height", type=int, default=7)
    p.add_argument("--width", type=int, default=7)
    p.add_argument("--mode", choices=["channel", "spatial"], default="channel")
    p.add_argument("--image-side", type=int, default=64)
    p.add_argument("--identity-weights", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synthetic)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
