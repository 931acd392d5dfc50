"""Scene-level 3D consistency scoring via point-cloud fusion and reprojection.

A SceneSequence bundles frames, per-frame depth maps, camera-to-world poses
and shared intrinsics.  Scoring uniformly samples T frames, fuses their
back-projections into one colored world point cloud, reprojects that cloud
into every sampled frame, and averages per-frame reconstruction error:

    e_recon = mean over sampled frames of (MSE + perceptual distance)

computed over reprojection-covered pixels.  Geometrically coherent
sequences admit one 3D explanation and score low; frozen frames, pose
drift or texture instability raise the error.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .camera import (CameraPose, ColoredPointCloud, Intrinsics, backproject,
                     reproject, validate_depth, validate_image)
from .errors import ValidationError
from .metrics import PerceptualMetric, mse, perceptual_distance, structural_surrogate

DEFAULT_FRAME_COUNT = 10


@dataclass(frozen=True)
class SceneSequence:
    """Frames + depths + poses + intrinsics for one video."""

    frames: list
    depths: list
    poses: list
    intrinsics: Intrinsics
    scene_id: str = ""

    def __post_init__(self):
        n = len(self.frames)
        if n < 2:
            raise ValidationError(f"sequence needs >= 2 frames, got {n}")
        if not (len(self.depths) == len(self.poses) == n):
            raise ValidationError(
                f"frames/depths/poses lengths differ: "
                f"{n}/{len(self.depths)}/{len(self.poses)}",
                code="dimension_mismatch",
            )
        frames = [validate_image(f, self.intrinsics, name=f"frame {i}")
                  for i, f in enumerate(self.frames)]
        depths = [validate_depth(d, self.intrinsics, name=f"depth {i}")
                  for i, d in enumerate(self.depths)]
        for i, p in enumerate(self.poses):
            if not isinstance(p, CameraPose):
                raise ValidationError(f"pose {i} is not a CameraPose")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "depths", depths)
        object.__setattr__(self, "poses", list(self.poses))

    def __len__(self):
        return len(self.frames)


@dataclass(frozen=True)
class FrameScore:
    frame_index: int
    mse: float
    perceptual: float
    coverage_fraction: float


@dataclass(frozen=True)
class ConsistencyReport:
    """Per-frame and aggregate reconstruction errors for one sequence."""

    scene_id: str
    per_frame: list
    e_recon: float
    t_used: int
    coverage_mean: float

    def to_dict(self):
        return {
            "scene_id": self.scene_id,
            "t_used": self.t_used,
            "e_recon": self.e_recon,
            "coverage_mean": self.coverage_mean,
            "per_frame": [
                {
                    "frame_index": fs.frame_index,
                    "mse": fs.mse,
                    "perceptual": fs.perceptual,
                    "coverage_fraction": fs.coverage_fraction,
                }
                for fs in self.per_frame
            ],
        }


def sample_frames(n_total, t):
    """Evenly spaced frame indices including both endpoints.

    Rounds linspace(0, n_total - 1, t); strictly increasing for t <= n_total.
    """
    if t < 2:
        raise ValidationError(f"frame sample count must be >= 2, got {t}")
    if t > n_total:
        raise ValidationError(
            f"cannot sample {t} frames from a {n_total}-frame sequence")
    idx = np.rint(np.linspace(0, n_total - 1, t)).astype(int)
    return [int(i) for i in idx]


def fuse(seq: SceneSequence, indices, stride=1):
    """Back-project the selected frames and concatenate, in frame order."""
    for i in indices:
        if not (0 <= i < len(seq)):
            raise ValidationError(f"frame index {i} out of range 0..{len(seq) - 1}")
    clouds = [
        backproject(seq.depths[i], seq.intrinsics, seq.poses[i], seq.frames[i],
                    i, stride=stride)
        for i in indices
    ]
    return ColoredPointCloud.concatenate(clouds)


def _score_frame(seq, cloud, metric, frame_index, leave_one_out):
    if leave_one_out:
        keep = cloud.source_frame != frame_index
        if not keep.any():
            rendered = np.zeros_like(seq.frames[frame_index])
            coverage = np.zeros(rendered.shape[:2], dtype=bool)
        else:
            sub = ColoredPointCloud(cloud.points[keep], cloud.colors[keep],
                                    cloud.source_frame[keep])
            rendered, coverage, _ = reproject(sub, seq.intrinsics,
                                              seq.poses[frame_index])
    else:
        rendered, coverage, _ = reproject(cloud, seq.intrinsics,
                                          seq.poses[frame_index])

    original = seq.frames[frame_index]
    m = mse(rendered, original, coverage)
    # Windowed metrics have no exact masked form; compositing uncovered
    # pixels from the original makes them contribute zero difference.
    composite = np.where(coverage[:, :, None], rendered, original)
    p = perceptual_distance(metric, composite, original, frame_index)
    return FrameScore(frame_index, m, p, float(coverage.mean()))


def score(seq: SceneSequence, t=DEFAULT_FRAME_COUNT,
          metric: PerceptualMetric | None = None, downsample=1,
          leave_one_out=False, jobs=1):
    """Score one sequence: sample, fuse, reproject, aggregate.

    ``downsample`` strides the pixel grid before back-projection to bound
    cloud size; metrics still run at full resolution.  Deterministic for
    identical inputs.
    """
    if metric is None:
        metric = structural_surrogate()
    if downsample < 1:
        raise ValidationError(f"downsample must be >= 1, got {downsample}")

    indices = sample_frames(len(seq), t)
    cloud = fuse(seq, indices, stride=downsample)
    if len(cloud) == 0:
        raise ValidationError("no valid depth pixels in the sampled frames",
                              code="empty_cloud")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_frame = list(
                pool.map(lambda i: _score_frame(seq, cloud, metric, i,
                                                leave_one_out), indices)
            )
    else:
        per_frame = [_score_frame(seq, cloud, metric, i, leave_one_out)
                     for i in indices]

    e_recon = float(np.mean([fs.mse + fs.perceptual for fs in per_frame]))
    coverage_mean = float(np.mean([fs.coverage_fraction for fs in per_frame]))
    return ConsistencyReport(seq.scene_id, per_frame, e_recon, t, coverage_mean)
