"""Command-line entry point for batch feature extraction."""

import argparse
import sys

from .backbones import get_backbone
from .extract import extract
from .manifest import (
    ManifestError, check_against_vocabulary, read_entity_names, read_manifest,
)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mans-extract",
        description="Map entity images through a pretrained encoder, mean-pool "
                    "per entity, and write an MMKF feature file",
    )
    parser.add_argument("--manifest", required=True,
                        help="TSV of entity<TAB>image_path rows")
    parser.add_argument("--out", required=True, help="MMKF output path")
    parser.add_argument("--d-v", type=int, default=4096,
                        help="feature dimension (default: 4096)")
    parser.add_argument("--backbone", choices=("vgg16", "vector"), default="vgg16")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--entities",
                        help="optional engine vocabulary sidecar to validate names against")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        images = read_manifest(args.manifest)
        if args.entities:
            check_against_vocabulary(images, read_entity_names(args.entities))
        backbone = get_backbone(args.backbone, args.d_v, device=args.device)
        stats = extract(images, args.out, args.d_v, backbone,
                        batch_size=args.batch_size)
    except (ManifestError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"{stats.entities_written} entities written to {args.out} "
          f"({stats.images_used} images used, {stats.images_skipped} skipped, "
          f"{stats.entities_omitted} entities omitted)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
