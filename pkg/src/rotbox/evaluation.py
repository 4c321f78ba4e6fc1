"""VOC-style average precision over oriented detections.

Matching is greedy in descending score order: a detection claims the
highest-IoU unclaimed ground truth of its class when that IoU exceeds the
threshold. Difficult ground truths never count toward recall and matching
one neither rewards nor penalizes a detection ("ignore"). AP integrates
the monotone precision envelope over all recall points; the VOC-2007
11-point variant is available behind a flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from .errors import InvalidArgumentError
from .geometry import OrientedBox, iou_oriented
from .nms import Detection

__all__ = [
    "TP",
    "FP",
    "IGNORE",
    "GroundTruth",
    "PRCurve",
    "match_detections",
    "average_precision",
    "evaluate",
    "mean_ap",
    "format_report",
]

TP = "tp"
FP = "fp"
IGNORE = "ignore"


@dataclass(frozen=True)
class GroundTruth:
    box: OrientedBox
    class_id: int
    difficult: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.box, OrientedBox):
            raise InvalidArgumentError(f"box must be an OrientedBox, got {type(self.box).__name__}")
        if self.class_id < 0:
            raise InvalidArgumentError(f"class_id must be >= 0, got {self.class_id}")


@dataclass(frozen=True)
class PRCurve:
    """One class's precision/recall trace and its integrated AP.

    n_gt == 0 marks an absent class: ap is pinned to 0 and the class is
    skipped by mean_ap.
    """

    recall: tuple[float, ...]
    precision: tuple[float, ...]
    ap: float
    n_gt: int

    def __post_init__(self) -> None:
        if len(self.recall) != len(self.precision):
            raise InvalidArgumentError("recall and precision must have equal length")
        if any(b < a for a, b in zip(self.recall, self.recall[1:])):
            raise InvalidArgumentError("recall must be nondecreasing")
        for seq in (self.recall, self.precision):
            if any(not 0.0 <= v <= 1.0 for v in seq):
                raise InvalidArgumentError("recall/precision values must be in [0, 1]")
        if not 0.0 <= self.ap <= 1.0:
            raise InvalidArgumentError(f"ap must be in [0, 1], got {self.ap}")
        if self.n_gt < 0:
            raise InvalidArgumentError("n_gt must be >= 0")

    @property
    def class_present(self) -> bool:
        return self.n_gt > 0


def match_detections(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruth],
    iou_thresh: float = 0.5,
) -> list[str]:
    """Flags (tp/fp/ignore), one per detection, in descending score order."""
    iou_thresh = float(iou_thresh)
    if not 0.0 < iou_thresh <= 1.0:
        raise InvalidArgumentError(f"iou_thresh must be in (0, 1], got {iou_thresh}")
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    claimed = [False] * len(gts)
    flags = []
    for i in order:
        det = dets[i]
        best_iou, best_j = 0.0, -1
        for j, gt in enumerate(gts):
            if gt.class_id != det.class_id or claimed[j]:
                continue
            iou = iou_oriented(det.box, gt.box)
            if iou > best_iou:
                best_iou, best_j = iou, j
        if best_j >= 0 and best_iou > iou_thresh:
            if gts[best_j].difficult:
                flags.append(IGNORE)  # matched but neither rewarded nor punished
            else:
                claimed[best_j] = True
                flags.append(TP)
        else:
            flags.append(FP)
    return flags


def _envelope_area(recall: list[float], precision: list[float]) -> float:
    # integrate max-precision-to-the-right over each recall step
    area = 0.0
    prev_r = 0.0
    for idx, r in enumerate(recall):
        if r <= prev_r:
            continue
        p = max(precision[idx:])
        area += (r - prev_r) * p
        prev_r = r
    return area


def _eleven_point(recall: list[float], precision: list[float]) -> float:
    total = 0.0
    for tenth in range(11):
        r = tenth / 10.0
        candidates = [p for rr, p in zip(recall, precision) if rr >= r - 1e-12]
        total += max(candidates) if candidates else 0.0
    return total / 11.0


def average_precision(flags: Sequence[str], n_gt: int, eleven_point: bool = False) -> PRCurve:
    """PR curve and AP from score-ordered match flags."""
    if n_gt < 0:
        raise InvalidArgumentError(f"n_gt must be >= 0, got {n_gt}")
    for flag in flags:
        if flag not in (TP, FP, IGNORE):
            raise InvalidArgumentError(f"unknown flag {flag!r}")
    recall: list[float] = []
    precision: list[float] = []
    tp = fp = 0
    for flag in flags:
        if flag == IGNORE:
            continue
        if flag == TP:
            tp += 1
        else:
            fp += 1
        recall.append(tp / n_gt if n_gt else 0.0)
        precision.append(tp / (tp + fp))
    if n_gt == 0:
        ap = 0.0
    elif eleven_point:
        ap = _eleven_point(recall, precision)
    else:
        ap = _envelope_area(recall, precision)
    return PRCurve(tuple(recall), tuple(precision), ap, n_gt)


def evaluate(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruth],
    iou_thresh: float = 0.5,
    eleven_point: bool = False,
    num_classes: Optional[int] = None,
) -> dict[int, PRCurve]:
    """Per-class PR curves over a whole detection/ground-truth set."""
    present = {gt.class_id for gt in gts} | {d.class_id for d in dets}
    if num_classes is not None:
        present |= set(range(num_classes))
    report = {}
    for class_id in sorted(present):
        class_dets = [d for d in dets if d.class_id == class_id]
        class_gts = [g for g in gts if g.class_id == class_id]
        flags = match_detections(class_dets, class_gts, iou_thresh)
        n_gt = sum(1 for g in class_gts if not g.difficult)
        report[class_id] = average_precision(flags, n_gt, eleven_point)
    return report


def mean_ap(per_class: Union[Mapping[int, PRCurve], Sequence[PRCurve]]) -> float:
    """Unweighted mean AP over classes that have ground truth."""
    curves = list(per_class.values()) if isinstance(per_class, Mapping) else list(per_class)
    present = [c.ap for c in curves if c.class_present]
    if not present:
        raise InvalidArgumentError("no class has ground truth; mAP is undefined")
    return math.fsum(present) / len(present)


def format_report(
    per_class: Mapping[int, PRCurve], category_names: Optional[Sequence[str]] = None
) -> str:
    """Plain-text summary: one AP row per class, mAP last."""
    lines = []
    for class_id in sorted(per_class):
        curve = per_class[class_id]
        if category_names is not None and class_id < len(category_names):
            label = category_names[class_id]
        else:
            label = f"class {class_id}"
        status = "" if curve.class_present else "  (no ground truth)"
        lines.append(f"{label:<20s} ap {curve.ap:.4f}  gts {curve.n_gt}{status}")
    lines.append(f"{'mAP':<20s} {mean_ap(per_class):.4f}")
    return "\n".join(lines) + "\n"
