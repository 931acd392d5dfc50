"""On-disk scene interchange format.

One directory per sequence:

    meta.txt      key/value lines: width, height, num_frames,
                  fx, fy, cx, cy, scene_id
    frames/       0000.png ... zero-padded 4-digit 8-bit RGB PNGs
    depth/        0000.pfm ... single-channel little-endian 32-bit PFM,
                  scale header -1.0
    poses.txt     one line per frame: 9 row-major rotation entries followed
                  by the 3 translation entries, camera-to-world

Floats in the text files are written with repr() so parsing returns the
exact same float64; depth stays float32 end to end, so write/read
round-trips are bit-exact.  Reading fully validates the sequence and maps
each failure mode to a distinct error code: missing_file,
dimension_mismatch, non_rotation, non_finite_depth, bad_meta, bad_poses.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .camera import CameraPose, Intrinsics
from .errors import SceneIOError, ValidationError
from .scoring import SceneSequence

META_NAME = "meta.txt"
POSES_NAME = "poses.txt"
FRAMES_DIR = "frames"
DEPTH_DIR = "depth"

_META_KEYS = ("width", "height", "num_frames", "fx", "fy", "cx", "cy")


def write_pfm(values, path):
    """Single-channel little-endian PFM (scale header -1.0).

    PFM stores rows bottom-up; values are float32.
    """
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim != 2:
        raise ValidationError(f"PFM writer expects HxW, got {arr.shape}",
                              code="dimension_mismatch")
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.flipud(arr).astype("<f4").tobytes())


def read_pfm(path):
    """Read a single-channel PFM written by write_pfm (or any standard one)."""
    try:
        with open(path, "rb") as f:
            header = f.readline().rstrip()
            if header != b"Pf":
                raise ValidationError(
                    f"{path}: expected single-channel PFM header 'Pf', "
                    f"got {header!r}", code="bad_pfm")
            dims = f.readline().split()
            if len(dims) != 2:
                raise ValidationError(f"{path}: malformed PFM dimensions",
                                      code="bad_pfm")
            w, h = int(dims[0]), int(dims[1])
            scale = float(f.readline().rstrip())
            endian = "<" if scale < 0 else ">"
            data = np.frombuffer(f.read(4 * w * h), dtype=endian + "f4")
    except OSError as e:
        raise SceneIOError(f"cannot read {path}: {e}", code="missing_file")
    if data.size != w * h:
        raise ValidationError(f"{path}: truncated PFM payload", code="bad_pfm")
    return np.flipud(data.reshape(h, w)).copy()


def write_scene(seq: SceneSequence, path):
    """Write a sequence in the interchange layout; deterministic bytes."""
    path = str(path)
    try:
        os.makedirs(path, exist_ok=True)
        os.makedirs(os.path.join(path, FRAMES_DIR), exist_ok=True)
        os.makedirs(os.path.join(path, DEPTH_DIR), exist_ok=True)
    except OSError as e:
        raise SceneIOError(f"cannot create scene directory {path}: {e}",
                           code="unwritable")

    k = seq.intrinsics
    with open(os.path.join(path, META_NAME), "w", encoding="utf-8") as f:
        f.write(f"width {k.width}\n")
        f.write(f"height {k.height}\n")
        f.write(f"num_frames {len(seq)}\n")
        f.write(f"fx {float(k.fx)!r}\n")
        f.write(f"fy {float(k.fy)!r}\n")
        f.write(f"cx {float(k.cx)!r}\n")
        f.write(f"cy {float(k.cy)!r}\n")
        f.write(f"scene_id {seq.scene_id}\n")

    with open(os.path.join(path, POSES_NAME), "w", encoding="utf-8") as f:
        for pose in seq.poses:
            nums = [*pose.r.reshape(-1), *pose.t]
            f.write(" ".join(repr(float(x)) for x in nums) + "\n")

    for i, (frame, depth) in enumerate(zip(seq.frames, seq.depths)):
        img8 = np.round(np.asarray(frame) * 255.0).astype(np.uint8)
        Image.fromarray(img8, mode="RGB").save(
            os.path.join(path, FRAMES_DIR, f"{i:04d}.png"))
        write_pfm(np.asarray(depth, dtype=np.float32),
                  os.path.join(path, DEPTH_DIR, f"{i:04d}.pfm"))


def _read_meta(path):
    meta_path = os.path.join(path, META_NAME)
    if not os.path.isfile(meta_path):
        raise SceneIOError(f"missing {meta_path}", code="missing_file")
    raw = {}
    with open(meta_path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            key, _, value = line.partition(" ")
            raw[key] = value
    missing = [k for k in _META_KEYS if k not in raw]
    if missing:
        raise ValidationError(f"{meta_path}: missing keys {missing}",
                              code="bad_meta")
    try:
        meta = {
            "width": int(raw["width"]),
            "height": int(raw["height"]),
            "num_frames": int(raw["num_frames"]),
            "fx": float(raw["fx"]),
            "fy": float(raw["fy"]),
            "cx": float(raw["cx"]),
            "cy": float(raw["cy"]),
            "scene_id": raw.get("scene_id", ""),
        }
    except ValueError as e:
        raise ValidationError(f"{meta_path}: {e}", code="bad_meta")
    return meta


def _read_poses(path, num_frames):
    poses_path = os.path.join(path, POSES_NAME)
    if not os.path.isfile(poses_path):
        raise SceneIOError(f"missing {poses_path}", code="missing_file")
    poses = []
    with open(poses_path, "r", encoding="utf-8") as f:
        lines = [ln for ln in (l.strip() for l in f) if ln]
    if len(lines) != num_frames:
        raise ValidationError(
            f"{poses_path}: {len(lines)} pose lines for {num_frames} frames",
            code="bad_poses")
    for n, line in enumerate(lines):
        parts = line.split()
        if len(parts) != 12:
            raise ValidationError(
                f"{poses_path}: line {n + 1} has {len(parts)} numbers, "
                f"expected 12", code="bad_poses")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            raise ValidationError(f"{poses_path}: line {n + 1} unparseable",
                                  code="bad_poses")
        r = np.array(nums[:9]).reshape(3, 3)
        t = np.array(nums[9:])
        try:
            poses.append(CameraPose(r, t))
        except ValidationError as e:
            raise ValidationError(
                f"{poses_path}: frame {n}: {e}", code="non_rotation")
    return poses


def read_scene(path) -> SceneSequence:
    """Read and fully validate a scene directory.

    Distinct error codes: missing_file (directory or any file absent),
    dimension_mismatch (frame/depth size disagrees with meta),
    non_rotation (pose fails the SO(3) invariant), non_finite_depth
    (NaN/inf depth entries), bad_meta / bad_poses / bad_pfm (parse
    failures).
    """
    path = str(path)
    if not os.path.isdir(path):
        raise SceneIOError(f"scene directory not found: {path}",
                           code="missing_file")
    meta = _read_meta(path)
    n = meta["num_frames"]
    k = Intrinsics(meta["fx"], meta["fy"], meta["cx"], meta["cy"],
                   meta["width"], meta["height"])
    poses = _read_poses(path, n)

    frames, depths = [], []
    for i in range(n):
        frame_path = os.path.join(path, FRAMES_DIR, f"{i:04d}.png")
        depth_path = os.path.join(path, DEPTH_DIR, f"{i:04d}.pfm")
        if not os.path.isfile(frame_path):
            raise SceneIOError(f"missing {frame_path}", code="missing_file")
        if not os.path.isfile(depth_path):
            raise SceneIOError(f"missing {depth_path}", code="missing_file")

        img = np.asarray(Image.open(frame_path).convert("RGB"),
                         dtype=np.float64) / 255.0
        if img.shape[:2] != (k.height, k.width):
            raise ValidationError(
                f"{frame_path}: image is {img.shape[1]}x{img.shape[0]}, "
                f"meta says {k.width}x{k.height}", code="dimension_mismatch")

        depth = read_pfm(depth_path)
        if depth.shape != (k.height, k.width):
            raise ValidationError(
                f"{depth_path}: depth is {depth.shape[1]}x{depth.shape[0]}, "
                f"meta says {k.width}x{k.height}", code="dimension_mismatch")
        if not np.all(np.isfinite(depth)):
            raise ValidationError(f"{depth_path}: non-finite depth values",
                                  code="non_finite_depth")
        frames.append(img)
        depths.append(depth.astype(np.float32))

    return SceneSequence(frames, depths, poses, k, scene_id=meta["scene_id"])
