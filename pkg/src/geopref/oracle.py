"""Ground-truth scene generator and corruptor suite.

Scenes are textured infinite planes rendered along parameterized camera
trajectories: depth is the analytic ray/plane intersection distance along
the optical axis, so back-projection round-trips are exact up to pixel
quantization.  Textures are band-limited (bilinear value noise modulated
by a broad low-contrast checker) so that sub-pixel resampling between
views stays small while geometric corruption still produces measurable
color error.

Corruptors inject controlled geometric or photometric damage for
monotonicity testing; magnitude 0 is always the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .camera import CameraPose, Intrinsics, rotation_about_axis
from .epipolar import Correspondence
from .errors import DegenerateGeometryError, ValidationError
from .motion import motion_stats
from .scoring import SceneSequence

TRAJECTORIES = ("orbit", "dolly", "lateral", "static")
CORRUPTOR_KINDS = ("depth_noise", "pose_jitter", "frame_warp",
                   "brightness_flicker", "frozen_frame")


@dataclass(frozen=True)
class Plane:
    """Infinite textured plane: a point on it and a unit normal."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.point, dtype=np.float64).reshape(3)
        n = np.asarray(self.normal, dtype=np.float64).reshape(3)
        norm = np.linalg.norm(n)
        if norm == 0:
            raise ValidationError("plane normal must be nonzero")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "normal", n / norm)

    def basis(self):
        """Two orthonormal in-plane axes, deterministic per normal."""
        n = self.normal
        helper = np.array([1.0, 0.0, 0.0])
        if abs(n[0]) > 0.9:
            helper = np.array([0.0, 1.0, 0.0])
        e1 = np.cross(n, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        return e1, e2


@dataclass(frozen=True)
class OracleScene:
    """Parameterized ground-truth scene: plane + trajectory + texture seed."""

    trajectory: str = "dolly"
    n_frames: int = 10
    width: int = 64
    height: int = 64
    seed: int = 0
    plane: Plane = field(default_factory=lambda: Plane((0.0, 0.0, 5.0),
                                                       (0.0, 0.0, -1.0)))
    step: float = 0.1
    texture_cells: int = 6
    checker_contrast: float = 0.08

    def __post_init__(self):
        if self.trajectory not in TRAJECTORIES:
            raise ValidationError(f"unknown trajectory {self.trajectory!r}, "
                                  f"expected one of {TRAJECTORIES}")
        if self.n_frames < 2:
            raise ValidationError("scene needs >= 2 frames")

    def intrinsics(self):
        # ~53 degree horizontal FOV; focal length = width keeps orbit rays
        # well away from grazing the plane.
        return Intrinsics(fx=float(self.width), fy=float(self.width),
                          cx=(self.width - 1) / 2.0, cy=(self.height - 1) / 2.0,
                          width=self.width, height=self.height)

    def poses(self):
        """Camera-to-world pose per frame along the trajectory."""
        out = []
        for i in range(self.n_frames):
            if self.trajectory == "static":
                out.append(CameraPose.identity())
            elif self.trajectory == "dolly":
                out.append(CameraPose(np.eye(3), np.array([0.0, 0.0, i * self.step])))
            elif self.trajectory == "lateral":
                out.append(CameraPose(np.eye(3), np.array([i * self.step, 0.0, 0.0])))
            else:  # orbit around the plane anchor point
                center = self.plane.point
                radius = np.linalg.norm(center)
                if radius == 0:
                    raise DegenerateGeometryError("orbit needs a nonzero anchor")
                theta = (i - (self.n_frames - 1) / 2.0) * self.step / radius
                eye = center + radius * np.array(
                    [-np.sin(theta), 0.0, -np.cos(theta)])
                out.append(_look_at(eye, center))
        return out


def _look_at(eye, target):
    """Camera-to-world pose with +z toward target (y stays world-down)."""
    eye = np.asarray(eye, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - eye
    norm = np.linalg.norm(forward)
    if norm == 0:
        raise DegenerateGeometryError("look-at target coincides with the eye")
    forward = forward / norm
    down = np.array([0.0, 1.0, 0.0])
    right = np.cross(down, forward)
    rnorm = np.linalg.norm(right)
    if rnorm < 1e-12:
        raise DegenerateGeometryError("look-at direction parallel to world down")
    right /= rnorm
    down = np.cross(forward, right)
    r = np.column_stack([right, down, forward])
    return CameraPose(r, eye)


class _ValueNoiseTexture:
    """Smooth procedural texture over plane coordinates.

    Bilinear interpolation of a seeded random RGB lattice, modulated by a
    low-contrast checkerboard.  Band-limited by construction: the color
    gradient is bounded by (lattice range) / cell_size.
    """

    def __init__(self, seed, cell_size, checker_contrast):
        rng = np.random.default_rng(seed)
        self.lattice = rng.uniform(0.25, 0.75, size=(64, 64, 3))
        self.cell = float(cell_size)
        self.checker = float(checker_contrast)

    def sample(self, a, b):
        """RGB at plane coordinates (a, b); arrays of any shape."""
        fa = np.asarray(a, dtype=np.float64) / self.cell
        fb = np.asarray(b, dtype=np.float64) / self.cell
        ia = np.floor(fa).astype(np.int64)
        ib = np.floor(fb).astype(np.int64)
        ta = (fa - ia)[..., None]
        tb = (fb - ib)[..., None]
        n = self.lattice.shape[0]
        i00 = self.lattice[ia % n, ib % n]
        i10 = self.lattice[(ia + 1) % n, ib % n]
        i01 = self.lattice[ia % n, (ib + 1) % n]
        i11 = self.lattice[(ia + 1) % n, (ib + 1) % n]
        base = (i00 * (1 - ta) * (1 - tb) + i10 * ta * (1 - tb)
                + i01 * (1 - ta) * tb + i11 * ta * tb)
        # Broad checker (4x the noise cell) at low contrast.
        parity = (np.floor(fa / 4.0) + np.floor(fb / 4.0)) % 2
        return np.clip(base + self.checker * (parity[..., None] - 0.5), 0.0, 1.0)


def render_depth_f64(scene: OracleScene, frame_index):
    """Analytic per-pixel depth for one frame, in float64.

    Depth is the camera-frame z of the ray/plane intersection.  Raises if
    any pixel's ray misses the plane in front of the camera.
    """
    k = scene.intrinsics()
    pose = scene.poses()[frame_index]
    depth, _ = _intersect(scene, k, pose)
    return depth


def _intersect(scene, k, pose):
    """Ray/plane intersection for every pixel: (depth_f64, world points)."""
    uu, vv = np.meshgrid(np.arange(k.width, dtype=np.float64),
                         np.arange(k.height, dtype=np.float64))
    # Ray directions with camera-frame z = 1, so the parameter s along the
    # world ray equals the camera-frame depth.
    dirs_cam = np.stack(
        [(uu - k.cx) / k.fx, (vv - k.cy) / k.fy, np.ones_like(uu)], axis=-1)
    dirs_world = dirs_cam @ pose.r.T
    origin = pose.t

    plane = scene.plane
    denom = dirs_world @ plane.normal
    numer = (plane.point - origin) @ plane.normal
    with np.errstate(divide="ignore", invalid="ignore"):
        s = numer / denom
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise DegenerateGeometryError(
            f"trajectory {scene.trajectory!r} leaves the plane behind the "
            f"camera for some pixels", code="degenerate_scene")
    points = origin + s[..., None] * dirs_world
    return s, points


def render_scene(scene: OracleScene) -> SceneSequence:
    """Render frames, analytic depth maps and poses for the scene.

    Frames are quantized to 8-bit levels and depth to float32, matching
    the interchange formats exactly so write/read round-trips are
    lossless.  Deterministic per seed.
    """
    k = scene.intrinsics()
    poses = scene.poses()
    texture = _ValueNoiseTexture(scene.seed, scene.step * scene.texture_cells,
                                 scene.checker_contrast)
    e1, e2 = scene.plane.basis()

    frames, depths = [], []
    for pose in poses:
        depth, points = _intersect(scene, k, pose)
        rel = points - scene.plane.point
        img = texture.sample(rel @ e1, rel @ e2)
        frames.append(np.round(img * 255.0) / 255.0)
        depths.append(depth.astype(np.float32))
    return SceneSequence(frames, depths, poses, k,
                         scene_id=f"oracle-{scene.trajectory}-{scene.seed}")


@dataclass(frozen=True)
class Corruptor:
    """Controlled damage injector; magnitude 0 is the identity."""

    kind: str
    magnitude: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CORRUPTOR_KINDS:
            raise ValidationError(f"unknown corruptor kind {self.kind!r}, "
                                  f"expected one of {CORRUPTOR_KINDS}")
        if self.magnitude < 0:
            raise ValidationError("corruptor magnitude must be >= 0")


def corrupt(seq: SceneSequence, c: Corruptor) -> SceneSequence:
    """Apply one corruptor to a sequence; deterministic per (seq, corruptor)."""
    if c.magnitude == 0.0:
        return seq
    rng = np.random.default_rng(c.seed)
    frames = [f.copy() for f in seq.frames]
    depths = [d.copy() for d in seq.depths]
    poses = list(seq.poses)
    n = len(seq)

    if c.kind == "depth_noise":
        valid = np.concatenate([d[d > 0].ravel() for d in depths])
        sigma = c.magnitude * float(valid.mean()) if len(valid) else 0.0
        depths = [
            (d + rng.normal(0.0, sigma, size=d.shape).astype(np.float32))
            .astype(np.float32)
            for d in depths
        ]
    elif c.kind == "pose_jitter":
        stats = motion_stats(poses)
        t_sigma = c.magnitude * stats.s_trans
        angle = c.magnitude * 0.05
        new_poses = []
        for p in poses:
            t = p.t + rng.normal(0.0, t_sigma, size=3)
            axis = rng.normal(size=3)
            r = p.r @ rotation_about_axis(axis, angle)
            new_poses.append(CameraPose(r, t))
        poses = new_poses
    elif c.kind == "frame_warp":
        # Image-only affine shift of one middle frame; depth and pose stay
        # untouched, simulating generation drift.
        mid = n // 2
        theta = rng.uniform(0.0, 2.0 * np.pi)
        dx = c.magnitude * 5.0 * np.cos(theta)
        dy = c.magnitude * 5.0 * np.sin(theta)
        warped = ndimage.shift(frames[mid], (dy, dx, 0.0), order=1,
                               mode="nearest")
        frames[mid] = np.clip(warped, 0.0, 1.0)
    elif c.kind == "brightness_flicker":
        for i in range(n):
            offset = c.magnitude * rng.choice([-1.0, 1.0])
            frames[i] = np.clip(frames[i] + offset, 0.0, 1.0)
    elif c.kind == "frozen_frame":
        # Replace round(2 * magnitude) frames after k with frame k while
        # poses keep advancing; magnitude 1.0 freezes k..k+2.
        span = int(round(2.0 * c.magnitude))
        kk = max(0, n // 2 - 1)
        for i in range(kk + 1, min(kk + span + 1, n)):
            frames[i] = frames[kk].copy()

    return SceneSequence(frames, depths, poses, seq.intrinsics,
                         scene_id=seq.scene_id)


def projected_matches(seq: SceneSequence, i, j, n_matches, rng, noise_px=0.0):
    """Correspondences from true geometry: lift pixels of frame i, project
    into frame j.  Optional Gaussian pixel noise models matcher error."""
    k = seq.intrinsics
    depth = np.asarray(seq.depths[i], dtype=np.float64)
    vs, us = np.nonzero(depth > 0)
    if len(us) == 0:
        raise ValidationError(f"frame {i} has no valid depth")
    pick = rng.choice(len(us), size=min(n_matches * 4, len(us)), replace=False)

    u1 = us[pick].astype(np.float64)
    v1 = vs[pick].astype(np.float64)
    d = depth[vs[pick], us[pick]]
    x_cam = np.stack([d * (u1 - k.cx) / k.fx, d * (v1 - k.cy) / k.fy, d], axis=1)
    world = seq.poses[i].camera_to_world(x_cam)
    cam_j = seq.poses[j].world_to_camera(world)

    front = cam_j[:, 2] > 1e-9
    u2 = k.fx * cam_j[front, 0] / cam_j[front, 2] + k.cx
    v2 = k.fy * cam_j[front, 1] / cam_j[front, 2] + k.cy
    u1, v1 = u1[front], v1[front]

    inb = (u2 >= -1) & (u2 <= k.width) & (v2 >= -1) & (v2 <= k.height)
    u1, v1, u2, v2 = u1[inb], v1[inb], u2[inb], v2[inb]
    if len(u1) < n_matches:
        raise ValidationError(
            f"only {len(u1)} of {n_matches} requested matches are visible "
            f"in frame {j}")
    u1, v1, u2, v2 = u1[:n_matches], v1[:n_matches], u2[:n_matches], v2[:n_matches]
    if noise_px > 0:
        u1 = u1 + rng.normal(0.0, noise_px, size=len(u1))
        v1 = v1 + rng.normal(0.0, noise_px, size=len(v1))
        u2 = u2 + rng.normal(0.0, noise_px, size=len(u2))
        v2 = v2 + rng.normal(0.0, noise_px, size=len(v2))
    return [Correspondence(*m) for m in zip(u1, v1, u2, v2)]


def identity_matches(seq: SceneSequence, n_matches, rng):
    """Correspondences a matcher would report between two byte-identical
    frames: every feature maps to its own coordinates."""
    k = seq.intrinsics
    u = rng.uniform(1.0, k.width - 2.0, size=n_matches)
    v = rng.uniform(1.0, k.height - 2.0, size=n_matches)
    return [Correspondence(uu, vv, uu, vv) for uu, vv in zip(u, v)]
