"""Command-line entry points for the adapter."""

from __future__ import annotations

import argparse
import sys

from .backends import ModelUnavailableError
from .export import AdapterConfig, export_perceptual_table, export_scene, load_frames


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="gfm-adapter",
        description="Run a geometry reconstruction backend on a video or "
                    "frame directory and export the interchange scene format.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="export depth/poses/intrinsics")
    p.add_argument("input", help="video file or frame directory")
    p.add_argument("output", help="scene directory to write")
    p.add_argument("--model", default="flat")
    p.add_argument("--frames", type=int, default=10)
    p.add_argument("--device", default="cpu")
    p.add_argument("--scene-id", default="")

    p = sub.add_parser("perceptual",
                       help="per-frame perceptual distances between two "
                            "frame directories")
    p.add_argument("frames", help="original frame directory")
    p.add_argument("reprojections", help="reprojected frame directory")
    p.add_argument("out", help="table file to write")
    p.add_argument("--backend", default="pyramid")
    p.add_argument("--device", default="cpu")

    args = parser.parse_args(argv)
    try:
        if args.command == "export":
            config = AdapterConfig(model=args.model, input_path=args.input,
                                   output_path=args.output,
                                   frame_count=args.frames,
                                   device=args.device, scene_id=args.scene_id)
            out = export_scene(config)
            print(f"exported scene to {out}")
        else:
            export_perceptual_table(load_frames(args.frames),
                                    load_frames(args.reprojections),
                                    args.out, backend=args.backend,
                                    device=args.device)
            print(f"wrote perceptual table to {args.out}")
    except (FileNotFoundError, ValueError, RuntimeError,
            ModelUnavailableError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
