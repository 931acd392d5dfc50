"""Geometry and perceptual backends.

A geometry backend maps a list of RGB frames to per-frame depth maps,
camera-to-world poses, and shared intrinsics.  The real feed-forward
reconstruction networks are heavyweight optional dependencies loaded
lazily by name; the built-in `flat` backend produces simple valid
geometry (constant-depth plane, lateral camera track) so the export
pipeline runs end to end without model weights.

Perceptual backends map image pairs to a non-negative distance.  The
built-in `pyramid` backend is a Gaussian-pyramid L1 distance; `lpips`
wires the learned network when its package is installed.
"""

from __future__ import annotations

import numpy as np


class ModelUnavailableError(RuntimeError):
    """Requested backend needs an optional dependency that is missing."""


def nearest_rotation(m):
    """Project a near-rotation onto SO(3) (closest in Frobenius norm)."""
    u, _, vt = np.linalg.svd(np.asarray(m, dtype=np.float64))
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


class FlatPlaneBackend:
    """Deterministic weight-free geometry: constant depth, lateral track.

    Stands in for a learned reconstruction model where only the output
    format matters (contract tests, dry runs, CI).
    """

    name = "flat"

    def __init__(self, device="cpu", depth=4.0, step=0.05):
        self.depth = float(depth)
        self.step = float(step)

    def infer(self, frames):
        h, w = frames[0].shape[:2]
        depths = [np.full((h, w), self.depth, dtype=np.float32)
                  for _ in frames]
        poses = [(np.eye(3), np.array([self.step * i, 0.0, 0.0]))
                 for i in range(len(frames))]
        intrinsics = {"fx": 0.9 * w, "fy": 0.9 * w,
                      "cx": (w - 1) / 2.0, "cy": (h - 1) / 2.0}
        return depths, poses, intrinsics


class VggtBackend:
    """Feed-forward multi-view geometry network (optional dependency)."""

    name = "vggt"

    def __init__(self, device="cpu"):
        try:
            import torch  # noqa: F401
            import vggt  # noqa: F401
        except ImportError as e:
            raise ModelUnavailableError(
                f"the 'vggt' backend needs torch and the vggt package: {e}")
        self.device = device

    def infer(self, frames):  # pragma: no cover - needs model weights
        raise ModelUnavailableError(
            "vggt inference requires downloaded model weights")


_GEOMETRY_BACKENDS = {
    FlatPlaneBackend.name: FlatPlaneBackend,
    VggtBackend.name: VggtBackend,
}


def load_geometry_backend(model_id, device="cpu"):
    if model_id not in _GEOMETRY_BACKENDS:
        raise ValueError(f"unknown geometry backend {model_id!r}, "
                         f"expected one of {sorted(_GEOMETRY_BACKENDS)}")
    return _GEOMETRY_BACKENDS[model_id](device=device)


def _blur_downsample(img):
    kernel = np.array([1.0, 4.0, 6.0, 4.0, 1.0])
    kernel /= kernel.sum()
    out = np.apply_along_axis(
        lambda row: np.convolve(row, kernel, mode="same"), 1, img)
    out = np.apply_along_axis(
        lambda col: np.convolve(col, kernel, mode="same"), 0, out)
    return out[::2, ::2]


class PyramidPerceptual:
    """Gaussian-pyramid mean absolute difference; zero on identical images."""

    name = "pyramid"

    def __init__(self, device="cpu", levels=3):
        self.levels = levels

    def distance(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        total = 0.0
        for _ in range(self.levels):
            total += float(np.abs(a - b).mean())
            if min(a.shape[0], a.shape[1]) < 8:
                break
            a = np.stack([_blur_downsample(a[:, :, c]) for c in range(3)],
                         axis=-1)
            b = np.stack([_blur_downsample(b[:, :, c]) for c in range(3)],
                         axis=-1)
        return total / self.levels


class LpipsPerceptual:
    """Learned perceptual distance (optional dependency)."""

    name = "lpips"

    def __init__(self, device="cpu"):
        try:
            import lpips
            import torch
        except ImportError as e:
            raise ModelUnavailableError(
                f"the 'lpips' backend needs torch and the lpips package: {e}")
        self._torch = torch
        self._net = lpips.LPIPS(net="alex").to(device)
        self.device = device

    def distance(self, a, b):  # pragma: no cover - needs model weights
        torch = self._torch
        to_tensor = lambda x: torch.from_numpy(
            np.asarray(x, dtype=np.float32).transpose(2, 0, 1) * 2.0 - 1.0
        )[None].to(self.device)
        with torch.no_grad():
            return float(self._net(to_tensor(a), to_tensor(b)).item())


_PERCEPTUAL_BACKENDS = {
    PyramidPerceptual.name: PyramidPerceptual,
    LpipsPerceptual.name: LpipsPerceptual,
}


def load_perceptual_backend(name, device="cpu"):
    if name not in _PERCEPTUAL_BACKENDS:
        raise ValueError(f"unknown perceptual backend {name!r}, "
                         f"expected one of {sorted(_PERCEPTUAL_BACKENDS)}")
    return _PERCEPTUAL_BACKENDS[name](device=device)
