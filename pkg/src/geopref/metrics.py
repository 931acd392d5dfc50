"""Image quality metrics: MSE, PSNR, SSIM, and a pluggable perceptual distance.

All metrics operate on HxWx3 float images with channel values in [0, 1].
MSE and PSNR accept an optional boolean coverage mask restricting the pixel
domain.  SSIM uses the standard 11x11 Gaussian window (sigma 1.5) with
C1 = 0.01^2 and C2 = 0.03^2, averaged over channels.

The perceptual distance is either a structural surrogate, (1 - SSIM) / 2,
or a table of externally computed per-frame distances (e.g. from a learned
perceptual network run out-of-process).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .camera import validate_image
from .errors import SceneIOError, ValidationError

# Masked MSE over [0,1] images can never exceed 1.0; a zero-coverage frame
# must rank as worst, so it reports this sentinel instead of looking perfect.
EMPTY_MASK_MSE = 4.0

# PSNR of identical images is reported as this cap instead of +inf.
PSNR_CAP_DB = 100.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2


def _check_pair(a, b, mask=None):
    a = validate_image(a, name="first image")
    b = validate_image(b, name="second image")
    if a.shape != b.shape:
        raise ValidationError(
            f"image shapes differ: {a.shape} vs {b.shape}",
            code="dimension_mismatch",
        )
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != a.shape[:2]:
            raise ValidationError(
                f"mask shape {mask.shape} does not match image {a.shape[:2]}",
                code="dimension_mismatch",
            )
    return a, b, mask


def mse(a, b, mask=None):
    """Mean squared channel difference over masked (or all) pixels.

    A mask covering zero pixels returns EMPTY_MASK_MSE so degenerate
    reconstructions rank as worst rather than perfect.
    """
    a, b, mask = _check_pair(a, b, mask)
    sq = (a - b) ** 2
    if mask is None:
        return float(sq.mean())
    if not mask.any():
        return EMPTY_MASK_MSE
    return float(sq[mask].mean())


def psnr(a, b, mask=None):
    """Peak signal-to-noise ratio in dB on the [0, 1] range, capped at 100."""
    m = mse(a, b, mask)
    if m == 0.0:
        return PSNR_CAP_DB
    return float(min(PSNR_CAP_DB, 10.0 * np.log10(1.0 / m)))


def gaussian_kernel(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    """Normalized 2D Gaussian window."""
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def ssim(a, b):
    """Mean local structural similarity over valid 11x11 windows.

    Gaussian-weighted moments per window:
        mu_x = w * x          sigma_x^2 = w * x^2 - mu_x^2
        sigma_xy = w * (x y) - mu_x mu_y
    SSIM per window:
        ((2 mu_x mu_y + C1)(2 sigma_xy + C2)) /
        ((mu_x^2 + mu_y^2 + C1)(sigma_x^2 + sigma_y^2 + C2))
    averaged over all windows and the three channels.
    """
    a, b, _ = _check_pair(a, b)
    h, w = a.shape[:2]
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise ValidationError(
            f"ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW} images, got {w}x{h}",
            code="image_too_small",
        )
    kernel = gaussian_kernel()

    def filt(x):
        return convolve2d(x, kernel, mode="valid")

    vals = []
    for c in range(3):
        x, y = a[:, :, c], b[:, :, c]
        mu_x = filt(x)
        mu_y = filt(y)
        var_x = filt(x * x) - mu_x ** 2
        var_y = filt(y * y) - mu_y ** 2
        cov = filt(x * y) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * cov + SSIM_C2)
        den = (mu_x ** 2 + mu_y ** 2 + SSIM_C1) * (var_x + var_y + SSIM_C2)
        vals.append(np.mean(num / den))
    return float(np.mean(vals))


STRUCTURAL_SURROGATE = "structural_surrogate"
PRECOMPUTED_EXTERNAL = "precomputed_external"


@dataclass(frozen=True)
class PerceptualMetric:
    """Configuration for the perceptual term of the consistency score."""

    kind: str
    table: dict | None = None

    def __post_init__(self):
        if self.kind not in (STRUCTURAL_SURROGATE, PRECOMPUTED_EXTERNAL):
            raise ValidationError(f"unknown perceptual metric kind: {self.kind}",
                                  code="bad_metric")
        if self.kind == PRECOMPUTED_EXTERNAL:
            if self.table is None:
                raise ValidationError(
                    "precomputed_external needs a frame_index -> distance table",
                    code="bad_metric",
                )
            for k, v in self.table.items():
                if v < 0:
                    raise ValidationError(
                        f"perceptual distance for frame {k} is negative ({v})",
                        code="bad_metric",
                    )


def structural_surrogate():
    return PerceptualMetric(STRUCTURAL_SURROGATE)


def precomputed_external(table):
    return PerceptualMetric(PRECOMPUTED_EXTERNAL, dict(table))


def perceptual_distance(metric: PerceptualMetric, a, b, frame_index):
    """Perceptual distance between two images for one frame.

    structural_surrogate maps SSIM onto [0, 1] via (1 - ssim) / 2;
    precomputed_external looks the frame up in its table.
    """
    if metric.kind == STRUCTURAL_SURROGATE:
        return (1.0 - ssim(a, b)) / 2.0
    if frame_index not in metric.table:
        raise ValidationError(
            f"no precomputed perceptual distance for frame {frame_index}",
            code="missing_perceptual_entry",
        )
    return float(metric.table[frame_index])


def load_perceptual_table(path):
    """Parse a text file of ``frame_index<TAB>distance`` lines."""
    table = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as e:
        raise SceneIOError(f"cannot read perceptual table {path}: {e}",
                           code="missing_file")
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValidationError(
                f"{path}:{n}: expected 'frame_index<TAB>distance', got {line!r}",
                code="bad_table_line",
            )
        try:
            idx, dist = int(parts[0]), float(parts[1])
        except ValueError:
            raise ValidationError(f"{path}:{n}: unparseable entry {line!r}",
                                  code="bad_table_line")
        if dist < 0 or not np.isfinite(dist):
            raise ValidationError(f"{path}:{n}: distance must be finite and >= 0",
                                  code="bad_table_line")
        table[idx] = dist
    return table


def write_perceptual_table(table, path):
    """Write a frame_index -> distance mapping in the table text format."""
    with open(path, "w", encoding="utf-8") as f:
        for idx in sorted(table):
            f.write(f"{idx}\t{table[idx]:.10g}\n")
