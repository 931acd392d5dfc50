"""Scene and perceptual-table export.

export_scene runs a geometry backend over sampled video frames and writes
the interchange directory the scoring toolkit validates on read.  Model
outputs are post-processed minimally: rotations are projected onto the
nearest true rotation (so the consumer's 1e-6 orthonormality check always
passes) and non-finite depth entries become 0, the invalid-pixel marker.
No smoothing is applied; the downstream score reflects the model's raw
geometry.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .backends import (load_geometry_backend, load_perceptual_backend,
                       nearest_rotation)
from .interchange import write_scene_directory

_IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".webp")


@dataclass(frozen=True)
class AdapterConfig:
    model: str = "flat"
    input_path: str = ""
    output_path: str = ""
    frame_count: int = 10
    device: str = "cpu"
    scene_id: str = ""


def load_frames(input_path):
    """Read a frame directory (sorted image files) or a video file."""
    if os.path.isdir(input_path):
        names = sorted(n for n in os.listdir(input_path)
                       if n.lower().endswith(_IMAGE_EXTENSIONS))
        if not names:
            raise FileNotFoundError(f"no image files in {input_path}")
        return [np.asarray(Image.open(os.path.join(input_path, n))
                           .convert("RGB"))
                for n in names]
    if os.path.isfile(input_path):
        try:
            import imageio.v3 as iio
        except ImportError as e:
            raise RuntimeError(
                f"reading video files needs the 'video' extra (imageio): {e}")
        return [np.asarray(frame)[:, :, :3]
                for frame in iio.imiter(input_path)]
    raise FileNotFoundError(f"input not found: {input_path}")


def sample_uniform(n_total, count):
    """Evenly spaced indices including both endpoints (rounded linspace)."""
    count = min(count, n_total)
    if count < 2:
        raise ValueError(f"need at least 2 frames, got {n_total}")
    return [int(i) for i in np.rint(np.linspace(0, n_total - 1, count))]


def postprocess_pose(r, t):
    """Nearest-rotation projection; translations pass through."""
    return nearest_rotation(r), np.asarray(t, dtype=np.float64).reshape(3)


def postprocess_depth(depth):
    """float32 depth with non-finite entries mapped to 0 (invalid)."""
    depth = np.asarray(depth, dtype=np.float32).copy()
    depth[~np.isfinite(depth)] = 0.0
    return depth


def export_scene(config: AdapterConfig):
    """Run the geometry backend and write the interchange directory."""
    frames = load_frames(config.input_path)
    indices = sample_uniform(len(frames), config.frame_count)
    sampled = [frames[i] for i in indices]

    backend = load_geometry_backend(config.model, device=config.device)
    depths, poses, intrinsics = backend.infer(sampled)

    depths = [postprocess_depth(d) for d in depths]
    poses = [postprocess_pose(r, t) for r, t in poses]
    scene_id = config.scene_id or os.path.basename(
        os.path.normpath(config.input_path))

    write_scene_directory(config.output_path, sampled, depths, poses,
                          intrinsics, scene_id)
    return config.output_path


def export_perceptual_table(frames, reprojections, path,
                            backend="pyramid", device="cpu"):
    """Per-frame perceptual distances as `frame_index<TAB>distance` lines."""
    frames = list(frames)
    reprojections = list(reprojections)
    if len(frames) != len(reprojections):
        raise ValueError(f"{len(frames)} frames vs {len(reprojections)} "
                         f"reprojections")
    metric = load_perceptual_backend(backend, device=device)
    with open(path, "w", encoding="utf-8") as f:
        for i, (a, b) in enumerate(zip(frames, reprojections)):
            a = np.asarray(a, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if a.max() > 1.5:  # uint8 input
                a = a / 255.0
            if b.max() > 1.5:
                b = b / 255.0
            f.write(f"{i}\t{metric.distance(a, b):.10g}\n")
    return path
