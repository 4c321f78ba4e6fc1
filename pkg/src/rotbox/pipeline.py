"""Reproducible synthetic demo runs: proposals through refinement to mAP.

The demo wires the library end to end on generated scenes: horizontal
proposals are pooled and regressed into rotated candidates, optionally
deduplicated, refined once from their own rotated frame, and scored
against the scene ground truth. Every run is a pure function of
(config, seed) so manifests are byte-stable.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .dota import write_detections
from .encoding import OffsetVector, decode, encode, enlarge_context, lift_aligned
from .errors import InvalidArgumentError
from .evaluation import GroundTruth, PRCurve, evaluate, format_report, mean_ap
from .geometry import AlignedBox, OrientedBox, iou_oriented
from .learner import LinearRegressor, TrainConfig, predict, train
from .nms import Detection, rotated_nms, score_filter
from .roi_align import rps_roi_align
from .synthetic import (
    BASE_CHANNELS,
    SceneConfig,
    SyntheticScene,
    anchor_normalize,
    generate_scene,
    render_scene,
    synthesize_training_set,
)

__all__ = [
    "PipelineConfig",
    "DemoArtifacts",
    "run_demo",
    "save_config",
    "load_config",
    "category_names",
    "SCENE_CELL_STRIDE",
]

# eval scenes are laid out on a coordinate grid this far apart so a single
# corpus-level evaluation can never match a detection against another
# scene's ground truth
SCENE_CELL_STRIDE = 100000.0

_CONFIG_MAGIC = "rotbox-pipeline-v1"


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for a demo run; serializes losslessly to JSON."""

    k: int = 3
    samples_per_bin_side: int = 2
    channels_out: int = 7
    nms_thresh: float = 0.5
    score_thresh: float = 0.05
    pos_iou_thresh: float = 0.5
    context_long: float = 1.2
    context_short: float = 1.4
    rroi_nms_enabled: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("k", "samples_per_bin_side", "channels_out", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.k < 1 or self.samples_per_bin_side < 1 or self.channels_out < 1:
            raise InvalidArgumentError("grid sizes and channel count must be >= 1")
        if self.seed < 0:
            raise InvalidArgumentError(f"seed must be >= 0, got {self.seed}")
        for name in ("nms_thresh", "score_thresh", "pos_iou_thresh", "context_long", "context_short"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not 0.0 < self.nms_thresh <= 1.0:
            raise InvalidArgumentError(f"nms_thresh must be in (0, 1], got {self.nms_thresh}")
        if not 0.0 <= self.score_thresh <= 1.0:
            raise InvalidArgumentError(f"score_thresh must be in [0, 1], got {self.score_thresh}")
        if not 0.0 < self.pos_iou_thresh < 1.0:
            raise InvalidArgumentError(
                f"pos_iou_thresh must be in (0, 1), got {self.pos_iou_thresh}"
            )
        if self.context_long < 1.0 or self.context_short < 1.0:
            raise InvalidArgumentError("context factors must be >= 1")
        if not isinstance(self.rroi_nms_enabled, bool):
            raise InvalidArgumentError(
                f"rroi_nms_enabled must be a bool, got {self.rroi_nms_enabled!r}"
            )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, document: dict) -> "PipelineConfig":
        if not isinstance(document, dict):
            raise InvalidArgumentError(f"config document must be a mapping, got {document!r}")
        known = {field.name for field in dataclasses.fields(cls)}
        unknown = sorted(set(document) - known)
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**document)


def save_config(config: PipelineConfig, path: Union[str, os.PathLike]) -> None:
    document = {"format": _CONFIG_MAGIC, **config.to_dict()}
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_config(path: Union[str, os.PathLike]) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise InvalidArgumentError("config file must hold a JSON object")
    document.pop("format", None)
    return PipelineConfig.from_dict(document)


def category_names(num_classes: int) -> list[str]:
    return [f"class{i}" for i in range(num_classes)]


@dataclass(frozen=True)
class DemoArtifacts:
    """Everything a demo run produces, before any of it touches disk."""

    manifest: dict
    detections: tuple[Detection, ...]
    report: dict[int, PRCurve]
    detections_text: str
    report_text: str


def _shrunk_copy(hroi: AlignedBox, rng: np.random.Generator) -> AlignedBox:
    # a proposal shrunk toward its own center stays inside any region that
    # contained the original, so pooling margins keep holding
    fx = rng.uniform(0.9, 0.97)
    fy = rng.uniform(0.9, 0.97)
    cx, cy = hroi.center
    half_w = hroi.width * fx / 2.0
    half_h = hroi.height * fy / 2.0
    return AlignedBox(cx - half_w, cy - half_h, cx + half_w, cy + half_h)


def _pooled_class(pooled_data: np.ndarray, num_classes: int) -> int:
    raw = float(np.mean(pooled_data[:, :, BASE_CHANNELS - 1]))
    return max(0, min(num_classes - 1, int(round(raw))))


def _pooled_score(pooled_data: np.ndarray) -> float:
    return max(0.0, min(1.0, float(np.mean(pooled_data[:, :, 0]))))


def _shift_box(box: OrientedBox, dx: float) -> OrientedBox:
    return OrientedBox(box.cx + dx, box.cy, box.w, box.h, box.theta)


def run_demo(
    config: PipelineConfig = PipelineConfig(),
    out_dir: Union[str, os.PathLike, None] = None,
    oracle: bool = False,
    train_scene_count: int = 150,
    eval_scene_count: int = 40,
    proposals_per_object: int = 2,
    eval_iou_thresh: float = 0.5,
    train_epochs: int = 300,
) -> DemoArtifacts:
    """Run the synthetic two-stage demo and optionally write its artifacts.

    oracle=True feeds exact regression targets instead of a trained model,
    which pins the ceiling of the geometry path: every decoded box is the
    ground truth up to roundtrip error.

    Raises:
        InvalidArgumentError: bad counts or a config the scene family
            cannot satisfy.
        TrainingDivergedError: surfaced unchanged from the learner.
    """
    if config.channels_out != BASE_CHANNELS:
        raise InvalidArgumentError(
            f"synthetic scenes carry {BASE_CHANNELS} channels per bin, "
            f"got channels_out={config.channels_out}"
        )
    if train_scene_count < 1 or eval_scene_count < 1 or proposals_per_object < 1:
        raise InvalidArgumentError("scene and proposal counts must be >= 1")
    if not 0.0 < eval_iou_thresh <= 1.0:
        raise InvalidArgumentError(f"eval_iou_thresh must be in (0, 1], got {eval_iou_thresh}")

    scene_cfg = SceneConfig(
        ps_grid=config.k,
        samples_per_bin_side=config.samples_per_bin_side,
        pos_thresh=config.pos_iou_thresh,
    )
    rng = np.random.default_rng(config.seed)

    model: Optional[LinearRegressor] = None
    final_loss: Optional[float] = None
    train_pair_count = 0
    if not oracle:
        train_seed = int(rng.integers(0, 2**31))
        learner_seed = int(rng.integers(0, 2**31))
        training_set = synthesize_training_set(train_scene_count, train_seed, scene_cfg)
        train_pair_count = len(training_set.targets)
        result = train(
            training_set.pairs(),
            TrainConfig(epochs=train_epochs, batch_size=0, seed=learner_seed),
        )
        model = result.model
        final_loss = result.loss_trace[-1]

    scenes: list[SyntheticScene] = [
        generate_scene(rng, scene_cfg) for _ in range(eval_scene_count)
    ]

    all_detections: list[Detection] = []
    all_gts: list[GroundTruth] = []
    hull_ious: list[float] = []
    stage1_ious: list[float] = []
    final_ious: list[float] = []
    proposals_total = 0
    after_rroi_nms_total = 0

    for scene_index, scene in enumerate(scenes):
        tensor = render_scene(scene)
        shift = scene_index * SCENE_CELL_STRIDE

        proposals: list[tuple[AlignedBox, int]] = []
        for gt_index, hroi in enumerate(scene.hrois):
            proposals.append((hroi, gt_index))
            for _ in range(proposals_per_object - 1):
                proposals.append((_shrunk_copy(hroi, rng), gt_index))
        proposals_total += len(proposals)

        stage1: list[tuple[OrientedBox, float, int, int]] = []
        for hroi, gt_index in proposals:
            anchor = lift_aligned(hroi)
            pooled = rps_roi_align(
                tensor, anchor, k=config.k, samples_per_bin_side=config.samples_per_bin_side
            )
            normalized = anchor_normalize(pooled, anchor)
            gt_box = scene.gts[gt_index]
            hull_ious.append(iou_oriented(anchor, gt_box))
            offsets: OffsetVector
            if oracle:
                offsets = encode(anchor, gt_box)
            else:
                offsets = predict(model, normalized)
            rroi = decode(anchor, offsets)
            stage1_ious.append(iou_oriented(rroi, gt_box))
            stage1.append(
                (
                    rroi,
                    _pooled_score(normalized.data),
                    _pooled_class(normalized.data, scene_cfg.num_classes),
                    gt_index,
                )
            )

        if config.rroi_nms_enabled:
            candidates = [Detection(box, score, cls) for box, score, cls, _ in stage1]
            kept = rotated_nms(candidates, config.nms_thresh)
            stage1 = [stage1[i] for i in kept]
        after_rroi_nms_total += len(stage1)

        refined: list[Detection] = []
        for rroi, _score, _cls, gt_index in stage1:
            frame = enlarge_context(rroi, config.context_long, config.context_short)
            pooled = rps_roi_align(
                tensor, frame, k=config.k, samples_per_bin_side=config.samples_per_bin_side
            )
            normalized = anchor_normalize(pooled, frame)
            gt_box = scene.gts[gt_index]
            if oracle:
                offsets = encode(frame, gt_box)
            else:
                offsets = predict(model, normalized)
            final_box = decode(frame, offsets)
            final_ious.append(iou_oriented(final_box, gt_box))
            refined.append(
                Detection(
                    final_box,
                    _pooled_score(normalized.data),
                    _pooled_class(normalized.data, scene_cfg.num_classes),
                )
            )

        refined = score_filter(refined, config.score_thresh)
        kept = rotated_nms(refined, config.nms_thresh)
        for index in kept:
            det = refined[index]
            all_detections.append(Detection(_shift_box(det.box, shift), det.score, det.class_id))
        for gt_box, class_id in zip(scene.gts, scene.class_ids):
            all_gts.append(GroundTruth(_shift_box(gt_box, shift), class_id))

    report = evaluate(
        all_detections, all_gts, iou_thresh=eval_iou_thresh, num_classes=scene_cfg.num_classes
    )
    names = category_names(scene_cfg.num_classes)
    report_text = format_report(report, names)
    detections_text = write_detections(all_detections, names)

    manifest = {
        "format": "rotbox-demo-manifest-v1",
        "mode": "oracle" if oracle else "trained",
        "config": config.to_dict(),
        "scene_cell_stride": SCENE_CELL_STRIDE,
        "eval_iou_thresh": eval_iou_thresh,
        "counts": {
            "train_scenes": 0 if oracle else train_scene_count,
            "train_pairs": train_pair_count,
            "eval_scenes": eval_scene_count,
            "eval_objects": len(all_gts),
            "proposals": proposals_total,
            "proposals_after_rroi_nms": after_rroi_nms_total,
            "detections": len(all_detections),
        },
        "metrics": {
            "mean_hull_iou": float(np.mean(hull_ious)),
            "mean_rroi_iou": float(np.mean(stage1_ious)),
            "mean_final_iou": float(np.mean(final_ious)),
            "map": mean_ap(report),
            "per_class_ap": {names[cid]: curve.ap for cid, curve in sorted(report.items())},
            "final_train_loss": final_loss,
        },
        "artifacts": {
            "detections": "detections.txt",
            "report": "report.txt",
            "manifest": "manifest.json",
        },
    }

    artifacts = DemoArtifacts(
        manifest=manifest,
        detections=tuple(all_detections),
        report=report,
        detections_text=detections_text,
        report_text=report_text,
    )
    if out_dir is not None:
        _write_artifacts(artifacts, out_dir)
    return artifacts


def _write_artifacts(artifacts: DemoArtifacts, out_dir: Union[str, os.PathLike]) -> None:
    os.makedirs(out_dir, exist_ok=True)
    names = artifacts.manifest["artifacts"]
    with open(os.path.join(out_dir, names["detections"]), "w", encoding="utf-8") as handle:
        handle.write(artifacts.detections_text)
    with open(os.path.join(out_dir, names["report"]), "w", encoding="utf-8") as handle:
        handle.write(artifacts.report_text)
    with open(os.path.join(out_dir, names["manifest"]), "w", encoding="utf-8") as handle:
        json.dump(artifacts.manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
