"""Sampson epipolar error baseline.

Local pairwise geometric consistency: given point correspondences between
two frames and a fundamental matrix (closed-form from known poses, or
estimated with the normalized 8-point algorithm under RANSAC), the Sampson
error measures first-order distance to the epipolar constraint
x2^T F x1 = 0.

This is the classic local metric the scene-level consistency score is
compared against: duplicated frames yield identity correspondences that
satisfy an epipolar constraint exactly, so the local metric reports a
false positive where the reprojection score does not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraPose, Intrinsics
from .errors import DegenerateGeometryError, SceneIOError, ValidationError

RANSAC_ITERATIONS = 500
RANSAC_THRESHOLD = 1.0
RANSAC_SEED = 0

_MIN_BASELINE = 1e-12


@dataclass(frozen=True)
class Correspondence:
    """One matched point pair: (u1, v1) in frame i, (u2, v2) in frame j."""

    u1: float
    v1: float
    u2: float
    v2: float

    def __post_init__(self):
        for name in ("u1", "v1", "u2", "v2"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValidationError(f"correspondence {name} is not finite")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class FundamentalMatrix:
    """Rank-2, Frobenius-normalized fundamental matrix."""

    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=np.float64)
        if f.shape != (3, 3):
            raise ValidationError(f"F must be 3x3, got {f.shape}")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)


def _skew(t):
    return np.array([
        [0.0, -t[2], t[1]],
        [t[2], 0.0, -t[0]],
        [-t[1], t[0], 0.0],
    ])


def _finalize(f):
    """Enforce rank 2 by zeroing the smallest singular value, then
    normalize to unit Frobenius norm."""
    u, s, vt = np.linalg.svd(f)
    s = s.copy()
    s[2] = 0.0
    f = u @ np.diag(s) @ vt
    norm = np.linalg.norm(f)
    if norm == 0:
        raise DegenerateGeometryError("fundamental matrix collapsed to zero")
    return FundamentalMatrix(f / norm)


def fundamental_from_poses(k: Intrinsics, pose_i: CameraPose, pose_j: CameraPose):
    """Closed-form F from camera-to-world poses, satisfying x_j^T F x_i = 0.

    Relative motion maps camera-i coordinates into camera-j coordinates:
        R_rel = R_j^T R_i,  t_rel = R_j^T (t_i - t_j)
    and F = K^-T [t_rel]_x R_rel K^-1, Frobenius-normalized.
    """
    r_rel = pose_j.r.T @ pose_i.r
    t_rel = pose_j.r.T @ (pose_i.t - pose_j.t)
    if np.linalg.norm(t_rel) < _MIN_BASELINE:
        raise DegenerateGeometryError(
            "zero baseline between views: fundamental matrix undefined",
            code="zero_baseline",
        )
    e = _skew(t_rel) @ r_rel
    k_inv = k.inverse_matrix()
    return _finalize(k_inv.T @ e @ k_inv)


def _homogeneous(matches):
    m = np.asarray([[c.u1, c.v1, c.u2, c.v2] for c in matches], dtype=np.float64)
    ones = np.ones((len(m), 1))
    x1 = np.hstack([m[:, 0:2], ones])
    x2 = np.hstack([m[:, 2:4], ones])
    return x1, x2


def _normalize_points(x):
    """Hartley normalization: centroid to origin, mean distance sqrt(2)."""
    centroid = x[:, :2].mean(axis=0)
    dist = np.sqrt(((x[:, :2] - centroid) ** 2).sum(axis=1)).mean()
    scale = np.sqrt(2.0) / max(dist, 1e-12)
    t = np.array([
        [scale, 0.0, -scale * centroid[0]],
        [0.0, scale, -scale * centroid[1]],
        [0.0, 0.0, 1.0],
    ])
    return x @ t.T, t


def _collinear(x):
    """True if all points lie on one line (degenerate for the 8-point solve)."""
    centered = x[:, :2] - x[:, :2].mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    return s[1] < 1e-9 * max(s[0], 1.0)


def _eight_point(x1, x2):
    n1, t1 = _normalize_points(x1)
    n2, t2 = _normalize_points(x2)
    a = np.column_stack([
        n2[:, 0] * n1[:, 0], n2[:, 0] * n1[:, 1], n2[:, 0],
        n2[:, 1] * n1[:, 0], n2[:, 1] * n1[:, 1], n2[:, 1],
        n1[:, 0], n1[:, 1], np.ones(len(n1)),
    ])
    _, _, vt = np.linalg.svd(a)
    f_hat = vt[-1].reshape(3, 3)
    return _finalize(t2.T @ f_hat @ t1)


def _sampson_per_match(x1, x2, f):
    fx1 = x1 @ f.T
    ftx2 = x2 @ f
    numer = np.sum(x2 * fx1, axis=1) ** 2
    denom = fx1[:, 0] ** 2 + fx1[:, 1] ** 2 + ftx2[:, 0] ** 2 + ftx2[:, 1] ** 2
    return numer, denom


def estimate_fundamental(matches, seed=RANSAC_SEED):
    """Normalized 8-point estimate; RANSAC wrapper when > 8 matches.

    RANSAC runs 500 iterations at inlier threshold 1.0 in Sampson units
    with a fixed seed, then refits on the inlier set.
    """
    matches = list(matches)
    if len(matches) < 8:
        raise ValidationError(f"need >= 8 matches, got {len(matches)}")
    x1, x2 = _homogeneous(matches)
    if _collinear(x1) or _collinear(x2):
        raise DegenerateGeometryError(
            "all correspondences collinear: 8-point solve is degenerate",
            code="collinear_matches",
        )

    if len(matches) == 8:
        return _eight_point(x1, x2)

    rng = np.random.default_rng(seed)
    best_inliers = None
    for _ in range(RANSAC_ITERATIONS):
        pick = rng.choice(len(matches), size=8, replace=False)
        if _collinear(x1[pick]) or _collinear(x2[pick]):
            continue
        try:
            f = _eight_point(x1[pick], x2[pick])
        except DegenerateGeometryError:
            continue
        numer, denom = _sampson_per_match(x1, x2, f.f)
        with np.errstate(divide="ignore", invalid="ignore"):
            err = np.where(denom > 0, numer / np.where(denom > 0, denom, 1.0),
                           np.inf)
        inliers = err < RANSAC_THRESHOLD
        if best_inliers is None or inliers.sum() > best_inliers.sum():
            best_inliers = inliers
    if best_inliers is None or best_inliers.sum() < 8:
        raise DegenerateGeometryError(
            "RANSAC found no 8-match consensus", code="no_consensus")
    return _eight_point(x1[best_inliers], x2[best_inliers])


def ransac_inliers(matches, f: FundamentalMatrix, threshold=RANSAC_THRESHOLD):
    """Boolean inlier mask under a fundamental matrix at a Sampson threshold."""
    x1, x2 = _homogeneous(matches)
    numer, denom = _sampson_per_match(x1, x2, f.f)
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.where(denom > 0, numer / np.where(denom > 0, denom, 1.0), np.inf)
    return err < threshold


def sampson_error(matches, f: FundamentalMatrix):
    """Mean first-order epipolar distance over the matches.

    Per match: (x2^T F x1)^2 / ((Fx1)_1^2 + (Fx1)_2^2 + (F^T x2)_1^2 + (F^T x2)_2^2).
    Matches whose denominator vanishes (points at the epipoles) are
    excluded; if every denominator vanishes the geometry is degenerate.
    """
    matches = list(matches)
    if not matches:
        raise ValidationError("sampson_error needs at least one match")
    x1, x2 = _homogeneous(matches)
    numer, denom = _sampson_per_match(x1, x2, f.f)
    ok = denom > 0
    if not ok.any():
        raise DegenerateGeometryError(
            "all Sampson denominators vanish", code="degenerate_sampson")
    return float((numer[ok] / denom[ok]).mean())


def load_correspondences(path):
    """Read `frame_i frame_j u1 v1 u2 v2` lines into a dict keyed by
    (frame_i, frame_j)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        raise SceneIOError(f"cannot read correspondence file {path}: {e}",
                           code="missing_file")
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ValidationError(
                f"{path}:{n}: expected 'frame_i frame_j u1 v1 u2 v2', "
                f"got {line!r}", code="bad_match_line")
        try:
            fi, fj = int(parts[0]), int(parts[1])
            vals = [float(p) for p in parts[2:]]
        except ValueError:
            raise ValidationError(f"{path}:{n}: unparseable entry {line!r}",
                                  code="bad_match_line")
        out.setdefault((fi, fj), []).append(Correspondence(*vals))
    return out


def write_correspondences(corr, path):
    """Inverse of load_correspondences."""
    with open(path, "w", encoding="utf-8") as fh:
        for (fi, fj), matches in sorted(corr.items()):
            for c in matches:
                fh.write(f"{fi} {fj} {c.u1!r} {c.v1!r} {c.u2!r} {c.v2!r}\n")
