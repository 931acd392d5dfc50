"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import functools

import numpy as np
import pytest

from geopref.camera import CameraPose, Intrinsics
from geopref.oracle import OracleScene, render_scene
from geopref.scoring import SceneSequence


@functools.lru_cache(maxsize=64)
def oracle_seq(trajectory="dolly", seed=0, n_frames=10, size=64, step=0.1):
    """Cached deterministic oracle sequence; treat as read-only."""
    return render_scene(OracleScene(trajectory=trajectory, n_frames=n_frames,
                                    width=size, height=size, seed=seed,
                                    step=step))


def identity_intrinsics(width, height, f=1.0):
    return Intrinsics(fx=f, fy=f, cx=0.0, cy=0.0, width=width, height=height)


def tiny_sequence(n_frames=2, size=16, depth_value=5.0, seed=0):
    """Hand-built flat sequence: constant depth, identity-ish poses,
    random smooth-ish frames."""
    rng = np.random.default_rng(seed)
    k = Intrinsics(fx=float(size), fy=float(size), cx=(size - 1) / 2.0,
                   cy=(size - 1) / 2.0, width=size, height=size)
    frames = [np.round(rng.uniform(0.2, 0.8, (size, size, 3)) * 255) / 255
              for _ in range(n_frames)]
    depths = [np.full((size, size), depth_value, dtype=np.float32)
              for _ in range(n_frames)]
    poses = [CameraPose(np.eye(3), np.array([0.01 * i, 0.0, 0.0]))
             for i in range(n_frames)]
    return SceneSequence(frames, depths, poses, k, scene_id=f"tiny-{seed}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
