"""Writers for the scene interchange layout.

The byte contract (shared with the scoring toolkit, which validates it on
read):

    meta.txt      `key value` lines: width, height, num_frames, fx, fy,
                  cx, cy, scene_id
    frames/       0000.png ... zero-padded 8-bit RGB PNGs
    depth/        0000.pfm ... single-channel little-endian float32 PFM,
                  scale header -1.0, rows bottom-up
    poses.txt     per frame: 9 row-major rotation entries + 3 translation
                  entries, camera-to-world, repr()-formatted floats

This module writes only; reading and validation live on the consumer
side.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image


def write_pfm(values, path):
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"PFM writer expects HxW, got {arr.shape}")
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.flipud(arr).astype("<f4").tobytes())


def write_scene_directory(path, frames_u8, depths, poses, intrinsics,
                          scene_id):
    """Write one scene.

    frames_u8: list of HxWx3 uint8 arrays
    depths:    list of HxW float32 arrays (<= 0 marks invalid pixels)
    poses:     list of (R, t) with R 3x3 row-major camera-to-world
    intrinsics: dict with fx, fy, cx, cy
    """
    h, w = frames_u8[0].shape[:2]
    os.makedirs(os.path.join(path, "frames"), exist_ok=True)
    os.makedirs(os.path.join(path, "depth"), exist_ok=True)

    with open(os.path.join(path, "meta.txt"), "w", encoding="utf-8") as f:
        f.write(f"width {w}\n")
        f.write(f"height {h}\n")
        f.write(f"num_frames {len(frames_u8)}\n")
        for key in ("fx", "fy", "cx", "cy"):
            f.write(f"{key} {float(intrinsics[key])!r}\n")
        f.write(f"scene_id {scene_id}\n")

    with open(os.path.join(path, "poses.txt"), "w", encoding="utf-8") as f:
        for r, t in poses:
            nums = [*np.asarray(r, dtype=np.float64).reshape(-1),
                    *np.asarray(t, dtype=np.float64).reshape(-1)]
            f.write(" ".join(repr(float(x)) for x in nums) + "\n")

    for i, (frame, depth) in enumerate(zip(frames_u8, depths)):
        Image.fromarray(frame, mode="RGB").save(
            os.path.join(path, "frames", f"{i:04d}.png"))
        write_pfm(depth, os.path.join(path, "depth", f"{i:04d}.pfm"))
