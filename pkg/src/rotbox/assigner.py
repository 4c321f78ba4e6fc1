"""Matching proposals to ground truth and emitting regression targets.

Both detector stages share the same rule: each proposal is matched to its
argmax-IoU ground truth and labeled positive iff that IoU strictly exceeds
the threshold. The horizontal stage matches against axis-aligned hulls but
keeps the index of the original oriented ground truth, so regression
targets always point at the rotated box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .encoding import OffsetVector, encode, lift_aligned
from .errors import ContractViolationError, InvalidArgumentError
from .geometry import AlignedBox, OrientedBox, aligned_hull, iou_aligned, iou_matrix

__all__ = ["Assignment", "assign_rotated", "assign_horizontal", "build_targets"]


@dataclass(frozen=True)
class Assignment:
    """One proposal's match: gt_index is present exactly when positive."""

    proposal_index: int
    gt_index: Optional[int]
    positive: bool
    matched_iou: float

    def __post_init__(self) -> None:
        if self.proposal_index < 0:
            raise InvalidArgumentError("proposal_index must be >= 0")
        if self.positive != (self.gt_index is not None):
            raise InvalidArgumentError("positive must hold exactly when gt_index is present")
        if self.gt_index is not None and self.gt_index < 0:
            raise InvalidArgumentError("gt_index must be >= 0")
        if not math.isfinite(self.matched_iou) or not 0.0 <= self.matched_iou <= 1.0:
            raise InvalidArgumentError(f"matched_iou must be in [0, 1], got {self.matched_iou}")


def _validate_thresh(pos_thresh: float) -> float:
    pos_thresh = float(pos_thresh)
    if not 0.0 < pos_thresh < 1.0:
        raise InvalidArgumentError(f"pos_thresh must be in (0, 1), got {pos_thresh}")
    return pos_thresh


def _from_iou_rows(rows: np.ndarray, pos_thresh: float) -> list[Assignment]:
    out = []
    for i in range(rows.shape[0]):
        j = int(np.argmax(rows[i]))  # first maximum, so ties pick the lowest index
        iou = float(rows[i, j])
        if iou > pos_thresh:
            out.append(Assignment(i, j, True, iou))
        else:
            out.append(Assignment(i, None, False, iou))
    return out


def assign_rotated(
    proposals: Sequence[OrientedBox],
    gts: Sequence[OrientedBox],
    pos_thresh: float = 0.5,
) -> list[Assignment]:
    """Match oriented proposals to oriented ground truths by polygon IoU."""
    pos_thresh = _validate_thresh(pos_thresh)
    proposals = list(proposals)
    gts = list(gts)
    if not gts:
        return [Assignment(i, None, False, 0.0) for i in range(len(proposals))]
    return _from_iou_rows(iou_matrix(proposals, gts), pos_thresh)


def assign_horizontal(
    proposals: Sequence[AlignedBox],
    gts: Sequence[OrientedBox],
    pos_thresh: float = 0.5,
) -> list[Assignment]:
    """Match axis-aligned proposals against the hulls of oriented ground truths.

    The returned gt_index refers to the original oriented box, not its hull,
    so downstream target encoding sees the true angle.
    """
    pos_thresh = _validate_thresh(pos_thresh)
    proposals = list(proposals)
    gts = list(gts)
    if not gts:
        return [Assignment(i, None, False, 0.0) for i in range(len(proposals))]
    hulls = [aligned_hull(g) for g in gts]
    rows = np.empty((len(proposals), len(hulls)), dtype=np.float64)
    for i, p in enumerate(proposals):
        for j, h in enumerate(hulls):
            rows[i, j] = iou_aligned(p, h)
    return _from_iou_rows(rows, pos_thresh)


def build_targets(
    proposals: Sequence[Union[OrientedBox, AlignedBox]],
    assignments: Sequence[Assignment],
    gts: Sequence[OrientedBox],
) -> tuple[list[OffsetVector], list[bool]]:
    """Regression targets for the positives plus a per-proposal label list.

    Targets appear in proposal order, one per positive assignment. Aligned
    proposals are lifted to zero-angle oriented boxes before encoding.
    """
    proposals = list(proposals)
    assignments = list(assignments)
    gts = list(gts)
    if len(assignments) != len(proposals):
        raise ContractViolationError(
            f"{len(assignments)} assignments for {len(proposals)} proposals"
        )
    targets: list[OffsetVector] = []
    labels: list[bool] = []
    for pos, (proposal, a) in enumerate(zip(proposals, assignments)):
        if a.proposal_index != pos:
            raise ContractViolationError(
                f"assignment at position {pos} carries proposal_index {a.proposal_index}"
            )
        labels.append(a.positive)
        if not a.positive:
            continue
        if a.gt_index is None or a.gt_index >= len(gts):
            raise ContractViolationError(f"gt_index {a.gt_index} out of range for {len(gts)} gts")
        reference = lift_aligned(proposal) if isinstance(proposal, AlignedBox) else proposal
        targets.append(encode(reference, gts[a.gt_index]))
    return targets, labels
