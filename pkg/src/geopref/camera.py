"""Pinhole camera model, pose algebra, back-projection and reprojection.

Conventions (right-handed, standard computer vision):
    Camera frame: x right, y down, z forward along the optical axis.
    Image frame:  u right, v down, pixel centers at integer coordinates.
    Poses are camera-to-world: X_world = R @ x_cam + t.

Back-projection of a pixel (u, v) with depth d > 0:
    x_cam = d * K^-1 @ [u, v, 1]^T      (depth is the camera-frame z)
    X     = R @ x_cam + t

Reprojection of a world point into a camera:
    x_cam  = R^T @ (X - t)
    (u, v) = perspective division of K @ x_cam

Rendering uses single-pixel splats with a nearest-wins z-buffer, which for
opaque points is equivalent to far-to-near painter's ordering.  Ties at
equal depth break toward the lower point index for determinism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Points closer than this to the camera plane are culled before the
# perspective division.
Z_NEAR = 1e-6

ROTATION_TOL = 1e-6


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics with zero skew.

    fx, fy are focal lengths in pixels, (cx, cy) the principal point,
    (width, height) the image size in pixels.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValidationError(
                f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}",
                code="bad_intrinsics",
            )
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValidationError(
                f"principal point ({self.cx}, {self.cy}) outside "
                f"{self.width}x{self.height} image",
                code="bad_intrinsics",
            )

    def matrix(self):
        """3x3 intrinsic matrix K."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    def inverse_matrix(self):
        """Closed-form K^-1 (valid because skew is zero)."""
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )


def _check_rotation(r, tol=ROTATION_TOL):
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValidationError(f"rotation must be 3x3, got {r.shape}", code="non_rotation")
    if not np.all(np.isfinite(r)):
        raise ValidationError("rotation contains non-finite entries", code="non_rotation")
    ortho_err = np.max(np.abs(r.T @ r - np.eye(3)))
    det = np.linalg.det(r)
    if ortho_err > tol or abs(det - 1.0) > tol:
        raise ValidationError(
            f"not a rotation: max |R^T R - I| = {ortho_err:.3e}, det = {det:.6f}",
            code="non_rotation",
        )
    return r


@dataclass(frozen=True)
class CameraPose:
    """Camera-to-world pose: R in SO(3), t in R^3."""

    r: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        r = _check_rotation(self.r)
        t = np.asarray(self.t, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(t)):
            raise ValidationError("translation contains non-finite entries",
                                  code="bad_pose")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)

    @staticmethod
    def identity():
        return CameraPose(np.eye(3), np.zeros(3))

    def world_to_camera(self, points):
        """Map Nx3 world points into this camera's frame: R^T (X - t)."""
        pts = np.asarray(points, dtype=np.float64)
        return (pts - self.t) @ self.r

    def camera_to_world(self, points):
        """Map Nx3 camera-frame points to world: R x + t."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.r.T + self.t


@dataclass(frozen=True)
class ColoredPointCloud:
    """Fused world-frame points with RGB colors in [0, 1].

    source_frame records the originating frame index of each point.
    """

    points: np.ndarray
    colors: np.ndarray
    source_frame: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        colors = np.asarray(self.colors, dtype=np.float64).reshape(-1, 3)
        source = np.asarray(self.source_frame, dtype=np.int32).reshape(-1)
        if not (len(points) == len(colors) == len(source)):
            raise ValidationError(
                f"points/colors/source_frame lengths differ: "
                f"{len(points)}/{len(colors)}/{len(source)}",
                code="dimension_mismatch",
            )
        if len(colors) and (colors.min() < 0.0 or colors.max() > 1.0):
            raise ValidationError("colors must lie in [0, 1]", code="bad_colors")
        for arr in (points, colors, source):
            arr.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "colors", colors)
        object.__setattr__(self, "source_frame", source)

    def __len__(self):
        return len(self.points)

    @staticmethod
    def concatenate(clouds):
        clouds = list(clouds)
        if not clouds:
            return ColoredPointCloud(np.zeros((0, 3)), np.zeros((0, 3)),
                                     np.zeros(0, dtype=np.int32))
        return ColoredPointCloud(
            np.concatenate([c.points for c in clouds]),
            np.concatenate([c.colors for c in clouds]),
            np.concatenate([c.source_frame for c in clouds]),
        )


def validate_image(pixels, k: Intrinsics | None = None, name="image"):
    """Check an HxWx3 float image with channel values in [0, 1]."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValidationError(f"{name} must be HxWx3, got {arr.shape}",
                              code="dimension_mismatch")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values", code="bad_image")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError(f"{name} values outside [0, 1]", code="bad_image")
    if k is not None and arr.shape[:2] != (k.height, k.width):
        raise ValidationError(
            f"{name} is {arr.shape[1]}x{arr.shape[0]}, intrinsics expect "
            f"{k.width}x{k.height}",
            code="dimension_mismatch",
        )
    return arr


def validate_depth(values, k: Intrinsics | None = None, name="depth"):
    """Check an HxW depth grid; entries <= 0 mark invalid pixels."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be HxW, got shape {arr.shape}",
                              code="dimension_mismatch")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values",
                              code="non_finite_depth")
    if k is not None and arr.shape != (k.height, k.width):
        raise ValidationError(
            f"{name} is {arr.shape[1]}x{arr.shape[0]}, intrinsics expect "
            f"{k.width}x{k.height}",
            code="dimension_mismatch",
        )
    return arr


def backproject(depth, k: Intrinsics, pose: CameraPose, frame, frame_index,
                stride=1):
    """Lift every valid depth pixel into a world-frame colored point.

    Pixels with depth <= 0 produce no point.  ``stride`` subsamples the
    pixel grid (stride 1 keeps every pixel); it bounds fused cloud sizes
    for large frames.
    """
    depth = validate_depth(depth, k)
    frame = validate_image(frame, k)
    if depth.shape != frame.shape[:2]:
        raise ValidationError(
            f"depth {depth.shape} does not match frame {frame.shape[:2]}",
            code="dimension_mismatch",
        )
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")

    us = np.arange(0, k.width, stride)
    vs = np.arange(0, k.height, stride)
    uu, vv = np.meshgrid(us, vs)
    d = depth[::stride, ::stride].astype(np.float64)
    valid = d > 0.0

    u = uu[valid].astype(np.float64)
    v = vv[valid].astype(np.float64)
    dv = d[valid]

    # d * K^-1 [u, v, 1]: closed form, z component is the depth itself.
    x_cam = np.stack(
        [dv * (u - k.cx) / k.fx, dv * (v - k.cy) / k.fy, dv], axis=1
    )
    points = pose.camera_to_world(x_cam)
    colors = frame[::stride, ::stride][valid]
    source = np.full(len(points), frame_index, dtype=np.int32)
    return ColoredPointCloud(points, colors, source)


def reproject(cloud: ColoredPointCloud, k: Intrinsics, pose: CameraPose,
              z_near=Z_NEAR):
    """Render a point cloud into a camera with a nearest-wins z-buffer.

    Returns (image, coverage, depth_buffer):
        image        HxWx3, black where no point lands
        coverage     HxW bool, True where at least one point landed
        depth_buffer HxW float, winning camera-frame z (+inf where empty)
    """
    if len(cloud) == 0:
        raise ValidationError("cannot reproject an empty cloud", code="empty_cloud")

    x_cam = pose.world_to_camera(cloud.points)
    z = x_cam[:, 2]
    keep = z > z_near

    u = k.fx * x_cam[keep, 0] / z[keep] + k.cx
    v = k.fy * x_cam[keep, 1] / z[keep] + k.cy
    ui = np.rint(u).astype(np.int64)
    vi = np.rint(v).astype(np.int64)
    zk = z[keep]
    idx = np.nonzero(keep)[0]

    inb = (ui >= 0) & (ui < k.width) & (vi >= 0) & (vi < k.height)
    ui, vi, zk, idx = ui[inb], vi[inb], zk[inb], idx[inb]

    image = np.zeros((k.height, k.width, 3))
    coverage = np.zeros((k.height, k.width), dtype=bool)
    depth_buffer = np.full((k.height, k.width), np.inf)
    if len(ui) == 0:
        return image, coverage, depth_buffer

    pix = vi * k.width + ui
    # Sort by pixel, then depth, then original index: the first entry per
    # pixel is the nearest point, ties broken by lowest index.  Depths are
    # compared at float32 granularity (the precision they are stored at),
    # so coplanar points whose float64 z differs only by rounding noise
    # are true ties and the winner is stable under rigid-gauge changes.
    order = np.lexsort((idx, zk.astype(np.float32), pix))
    pix_sorted = pix[order]
    first = np.ones(len(pix_sorted), dtype=bool)
    first[1:] = pix_sorted[1:] != pix_sorted[:-1]

    win_pix = pix_sorted[first]
    win_idx = idx[order][first]
    win_z = zk[order][first]

    image.reshape(-1, 3)[win_pix] = cloud.colors[win_idx]
    coverage.reshape(-1)[win_pix] = True
    depth_buffer.reshape(-1)[win_pix] = win_z
    return image, coverage, depth_buffer


def rotation_angle(r1, r2):
    """Relative rotation angle between two rotations, in [0, pi].

    arccos((trace(r2 r1^T) - 1) / 2), with the argument clamped to [-1, 1]
    to absorb numerical drift.
    """
    r1 = _check_rotation(r1)
    r2 = _check_rotation(r2)
    c = (np.trace(r2 @ r1.T) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def rotation_about_axis(axis, angle):
    """Rodrigues rotation matrix for a rotation of ``angle`` about ``axis``."""
    axis = np.asarray(axis, dtype=np.float64).reshape(3)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise ValidationError("rotation axis must be nonzero", code="bad_axis")
    x, y, z = axis / norm
    kx = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * kx + (1.0 - np.cos(angle)) * (kx @ kx)
