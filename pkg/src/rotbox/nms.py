"""Greedy non-maximum suppression over rotated detections.

Selection walks detections in descending score order (ties broken by lower
input index) and keeps one iff its polygon IoU with every higher-scoring
kept detection of the same class stays at or below the threshold. The
per-class rule can be switched off for class-agnostic suppression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidArgumentError
from .geometry import OrientedBox, iou_oriented

__all__ = ["Detection", "rotated_nms", "score_filter"]


@dataclass(frozen=True)
class Detection:
    box: OrientedBox
    score: float
    class_id: int

    def __post_init__(self) -> None:
        if not isinstance(self.box, OrientedBox):
            raise InvalidArgumentError(f"box must be an OrientedBox, got {type(self.box).__name__}")
        if not math.isfinite(self.score) or not 0.0 <= self.score <= 1.0:
            raise InvalidArgumentError(f"score must be in [0, 1], got {self.score}")
        if self.class_id < 0:
            raise InvalidArgumentError(f"class_id must be >= 0, got {self.class_id}")


def rotated_nms(
    dets: Sequence[Detection],
    iou_thresh: float,
    class_agnostic: bool = False,
) -> list[int]:
    """Kept input indices, in descending score order."""
    iou_thresh = float(iou_thresh)
    if not 0.0 < iou_thresh <= 1.0:
        raise InvalidArgumentError(f"iou_thresh must be in (0, 1], got {iou_thresh}")
    dets = list(dets)
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    kept: list[int] = []
    for i in order:
        candidate = dets[i]
        suppressed = False
        for j in kept:
            if not class_agnostic and dets[j].class_id != candidate.class_id:
                continue
            if iou_oriented(dets[j].box, candidate.box) > iou_thresh:
                suppressed = True
                break
        if not suppressed:
            kept.append(i)
    return kept


def score_filter(dets: Sequence[Detection], min_score: float) -> list[Detection]:
    """Order-preserving filter keeping detections scoring at least min_score."""
    min_score = float(min_score)
    if not 0.0 <= min_score <= 1.0:
        raise InvalidArgumentError(f"min_score must be in [0, 1], got {min_score}")
    return [d for d in dets if d.score >= min_score]
