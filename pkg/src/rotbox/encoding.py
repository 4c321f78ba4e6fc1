"""Offset encoding and decoding between anchor boxes and targets.

The offset vector (tx, ty, tw, th, ttheta) expresses a target rectangle
relative to an anchor rectangle's own frame: translations are measured
along the anchor's axes and normalized by its sides, scales are log
ratios, and the angle difference is wrapped into [0, 2pi) and expressed
in turns. Identical relative placements therefore produce identical
offsets regardless of where the pair sits in the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InvalidArgumentError
from .geometry import AlignedBox, OrientedBox, _as_box, canonicalize

__all__ = [
    "OffsetVector",
    "encode",
    "decode",
    "encode_horizontal",
    "lift_aligned",
    "enlarge_context",
    "encode_batch",
    "decode_batch",
]

_TWO_PI = 2.0 * math.pi

# log side ratios are clipped to this magnitude before exponentiation so a
# wild regressor cannot overflow the decoded box
LOG_RATIO_CLIP = 4.0


@dataclass(frozen=True)
class OffsetVector:
    """Anchor-relative box offsets (tx, ty, tw, th, ttheta).

    tx, ty are dimensionless translations in the anchor frame, tw and th
    are log side ratios, ttheta is the angle difference in turns. Encoded
    vectors always have ttheta in [0, 1).
    """

    tx: float
    ty: float
    tw: float
    th: float
    ttheta: float

    def __post_init__(self):
        for name in ("tx", "ty", "tw", "th", "ttheta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    def astuple(self) -> tuple[float, float, float, float, float]:
        return (self.tx, self.ty, self.tw, self.th, self.ttheta)


OffsetLike = Union[OffsetVector, Sequence[float]]


def _as_offsets(offsets: OffsetLike) -> OffsetVector:
    if isinstance(offsets, OffsetVector):
        return offsets
    return OffsetVector(*offsets)


def encode(anchor, target) -> OffsetVector:
    """Offsets that carry the anchor onto the target.

    The translation is the target center expressed in the anchor's rotated
    frame and divided by the anchor sides; scales are log ratios; the angle
    term is ((theta* - theta_r) mod 2pi) / 2pi.
    """
    a, t = _as_box(anchor), _as_box(target)
    c, s = math.cos(a.theta), math.sin(a.theta)
    dx, dy = t.cx - a.cx, t.cy - a.cy
    tx = (dx * c + dy * s) / a.w
    ty = (dy * c - dx * s) / a.h
    tw = math.log(t.w / a.w)
    th = math.log(t.h / a.h)
    ttheta = ((t.theta - a.theta) % _TWO_PI) / _TWO_PI
    if ttheta >= 1.0:
        # float mod of a tiny negative difference can round up to 2pi
        ttheta = 0.0
    return OffsetVector(tx, ty, tw, th, ttheta)


def decode(anchor, offsets: OffsetLike) -> OrientedBox:
    """Algebraic inverse of :func:`encode`, canonicalized.

    tw and th are clipped to [-LOG_RATIO_CLIP, LOG_RATIO_CLIP] before
    exponentiation.
    """
    a = _as_box(anchor)
    o = _as_offsets(offsets)
    tw = min(LOG_RATIO_CLIP, max(-LOG_RATIO_CLIP, o.tw))
    th = min(LOG_RATIO_CLIP, max(-LOG_RATIO_CLIP, o.th))
    c, s = math.cos(a.theta), math.sin(a.theta)
    dx_local = o.tx * a.w
    dy_local = o.ty * a.h
    return canonicalize(
        (
            a.cx + dx_local * c - dy_local * s,
            a.cy + dx_local * s + dy_local * c,
            a.w * math.exp(tw),
            a.h * math.exp(th),
            a.theta + _TWO_PI * o.ttheta,
        )
    )


def lift_aligned(box: AlignedBox) -> OrientedBox:
    """View an aligned box as an oriented box with theta = 0.

    w takes the x extent and h the y extent; no canonical swap is applied,
    so the lift is the identity on the geometry.
    """
    cx, cy = box.center
    return OrientedBox(cx, cy, box.width, box.height, 0.0)


def encode_horizontal(anchor: AlignedBox, target: AlignedBox) -> OffsetVector:
    """Offsets between two aligned boxes via the theta = 0 lift.

    Reduces to the classical (dx/w, dy/h, log ratios) targets; the ttheta
    component is exactly 0 because both lifts share the frame.
    """
    return encode(lift_aligned(anchor), lift_aligned(target))


def enlarge_context(box, long_factor: float = 1.2, short_factor: float = 1.4) -> OrientedBox:
    """Grow a box around its center to pull in surrounding context.

    long_factor scales the w side, short_factor the h side; center and
    theta are unchanged and the result is re-canonicalized (the side labels
    can swap when short_factor wins).
    """
    if not (long_factor >= 1.0 and short_factor >= 1.0):
        raise InvalidArgumentError(
            f"factors must be >= 1, got {long_factor!r}, {short_factor!r}"
        )
    b = _as_box(box)
    return canonicalize((b.cx, b.cy, b.w * long_factor, b.h * short_factor, b.theta))


def encode_batch(anchors: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Row-wise :func:`encode` over (N, 5) arrays, returned as (N, 5)."""
    anchors = np.asarray(anchors, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if anchors.shape != targets.shape or anchors.ndim != 2 or anchors.shape[1] != 5:
        raise InvalidArgumentError(
            f"expected matching (N, 5) arrays, got {anchors.shape} and {targets.shape}"
        )
    rows = [encode(a, t).astuple() for a, t in zip(anchors, targets)]
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), 5)


def decode_batch(anchors: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Row-wise :func:`decode` over (N, 5) arrays, returned as (N, 5)."""
    anchors = np.asarray(anchors, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.float64)
    if anchors.shape != offsets.shape or anchors.ndim != 2 or anchors.shape[1] != 5:
        raise InvalidArgumentError(
            f"expected matching (N, 5) arrays, got {anchors.shape} and {offsets.shape}"
        )
    rows = [decode(a, o).astuple() for a, o in zip(anchors, offsets)]
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), 5)
