"""Feature warping: rigid box-to-image transform, bilinear sampling, pooling.

A rotated RoI is divided into k x k bins; each bin is averaged over an
n x n grid of sample points expressed in the box's local frame, mapped
into image coordinates by the rigid transform, and read off the feature
grid with bilinear interpolation. The position-sensitive variant reads
bin (i, j) from its own channel slice (R-FCN layout); the plain variant
pools every channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ShapeError
from .geometry import OrientedBox, _as_box

__all__ = [
    "FeatureTensor",
    "PooledFeature",
    "transform_point",
    "bilinear_sample",
    "rps_roi_align",
    "roi_align",
]


@dataclass(frozen=True)
class FeatureTensor:
    """Dense scalar grid indexed (y, x, channel).

    The array is shared, not copied; callers must not mutate it while a
    pooling call is reading it.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeError(f"feature data must be (H, W, C), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ShapeError(f"all feature dimensions must be >= 1, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ShapeError("feature data contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class PooledFeature:
    """Pooled bin grid indexed (i, j, c) with square spatial shape (k, k)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"pooled data must be (k, k, c), got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ShapeError("pooled data contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def k(self) -> int:
        return self.data.shape[0]

    @property
    def channels_out(self) -> int:
        return self.data.shape[2]

    def flatten(self) -> np.ndarray:
        """Row-major (i, j, c) flattening, the learner's feature layout."""
        return self.data.reshape(-1).copy()


def transform_point(rroi, x: float, y: float) -> tuple[float, float]:
    """Map a point from the box's local frame to image coordinates.

    Local (0, 0) is the box's top-left corner, (w, h) the opposite one;
    the local frame is first centered, then rotated by theta, then moved
    to the box center.
    """
    b = _as_box(rroi)
    c, s = math.cos(b.theta), math.sin(b.theta)
    lx, ly = x - b.w / 2.0, y - b.h / 2.0
    return (b.cx + c * lx - s * ly, b.cy + s * lx + c * ly)


def bilinear_sample(feature: FeatureTensor, x: float, y: float, c: int) -> float:
    """Bilinear interpolation with pixel centers at integer coordinates.

    Grid points outside the feature extent contribute 0, so samples fade
    to zero across the half-open border band and are exactly 0 beyond
    [-1, W] x [-1, H].
    """
    if not (0 <= c < feature.channels):
        raise ShapeError(f"channel {c} out of range for C={feature.channels}")
    h, w = feature.height, feature.width
    if x <= -1.0 or x >= w or y <= -1.0 or y >= h:
        return 0.0
    data = feature.data
    x0, y0 = math.floor(x), math.floor(y)
    fx, fy = x - x0, y - y0

    def at(yy: int, xx: int) -> float:
        if 0 <= yy < h and 0 <= xx < w:
            return float(data[yy, xx, c])
        return 0.0

    # lerp form: exact when the four corner values coincide, so constant
    # fields pool with zero error
    top = at(y0, x0) + fx * (at(y0, x0 + 1) - at(y0, x0))
    bottom = at(y0 + 1, x0) + fx * (at(y0 + 1, x0 + 1) - at(y0 + 1, x0))
    return top + fy * (bottom - top)


def _bin_samples(box: OrientedBox, i: int, j: int, k: int, n: int):
    """Image-space sample points for bin (i, j): i runs along w, j along h."""
    c, s = math.cos(box.theta), math.sin(box.theta)
    points = []
    for sx in range(n):
        x = (i + (sx + 0.5) / n) * box.w / k
        lx = x - box.w / 2.0
        for sy in range(n):
            y = (j + (sy + 0.5) / n) * box.h / k
            ly = y - box.h / 2.0
            points.append((box.cx + c * lx - s * ly, box.cy + s * lx + c * ly))
    return points


def _validate_grid(k: int, n: int):
    if k < 1 or n < 1:
        raise InvalidArgumentError(f"k and samples_per_bin_side must be >= 1, got {k}, {n}")


def rps_roi_align(
    feature: FeatureTensor,
    rroi,
    k: int = 7,
    samples_per_bin_side: int = 2,
) -> PooledFeature:
    """Position-sensitive rotated RoI align.

    Output bin (i, j), channel c is the mean over the bin's n x n sample
    points of input channel (i*k + j)*C_out + c, where C_out = C / k^2.

    Raises:
        ShapeError: when the channel count is not divisible by k^2.
    """
    _validate_grid(k, samples_per_bin_side)
    box = _as_box(rroi)
    n = samples_per_bin_side
    if feature.channels % (k * k) != 0:
        raise ShapeError(
            f"channels {feature.channels} not divisible by k*k = {k * k}"
        )
    c_out = feature.channels // (k * k)
    out = np.empty((k, k, c_out), dtype=np.float64)
    inv = 1.0 / (n * n)
    for i in range(k):
        for j in range(k):
            points = _bin_samples(box, i, j, k, n)
            base = (i * k + j) * c_out
            for c in range(c_out):
                values = [bilinear_sample(feature, px, py, base + c) for px, py in points]
                out[i, j, c] = math.fsum(values) * inv
    return PooledFeature(out)


def roi_align(
    feature: FeatureTensor,
    rroi,
    k: int = 7,
    samples_per_bin_side: int = 2,
) -> PooledFeature:
    """Plain rotated RoI align: every output channel pools its own channel."""
    _validate_grid(k, samples_per_bin_side)
    box = _as_box(rroi)
    n = samples_per_bin_side
    channels = feature.channels
    out = np.empty((k, k, channels), dtype=np.float64)
    inv = 1.0 / (n * n)
    for i in range(k):
        for j in range(k):
            points = _bin_samples(box, i, j, k, n)
            for c in range(channels):
                values = [bilinear_sample(feature, px, py, c) for px, py in points]
                out[i, j, c] = math.fsum(values) * inv
    return PooledFeature(out)
