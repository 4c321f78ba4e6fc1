"""Command-line front door: batch geometry ops and the synthetic demo.

Subcommands wrap the library with stable text formats so runs are easy to
script and to diff: annotation/detection files in the aerial-dataset text
layout, CSV for matrices, JSON for structured inputs and outputs. Exit
codes are 0 for success, 1 for data errors, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .dota import (
    parse_annotations,
    parse_detections,
    tile_windows,
    transfer_annotations,
    write_detections,
)
from .encoding import OffsetVector, decode, encode
from .errors import RotboxError
from .evaluation import GroundTruth, evaluate, format_report
from .geometry import OrientedBox, box_from_quad, iou_matrix
from .nms import Detection, rotated_nms, score_filter
from .pipeline import PipelineConfig, load_config, run_demo
from .roi_align import FeatureTensor, roi_align, rps_roi_align

__all__ = ["main"]


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _read_json(path: str) -> dict:
    text = sys.stdin.read() if path == "-" else _read_text(path)
    document = json.loads(text)
    if not isinstance(document, dict):
        raise ValueError("input must be a JSON object")
    return document


def _rows_to_boxes(rows, label: str) -> list[OrientedBox]:
    boxes = []
    for index, row in enumerate(rows):
        if len(row) != 5:
            raise ValueError(f"{label}[{index}] must have 5 numbers, got {len(row)}")
        try:
            boxes.append(OrientedBox(*[float(v) for v in row]))
        except (RotboxError, TypeError, ValueError) as exc:
            raise ValueError(f"{label}[{index}]: {exc}") from exc
    return boxes


def _category_order(objects) -> list[str]:
    names: list[str] = []
    for obj in objects:
        if obj.category not in names:
            names.append(obj.category)
    return names


def _detection_category_order(text: str) -> list[str]:
    # detections reference classes by name; first appearance fixes the ids
    names: list[str] = []
    for line in text.splitlines():
        tokens = line.split()
        if tokens and tokens[0] not in names:
            names.append(tokens[0])
    return names


# ------------------------------------------------------------ subcommands


def _cmd_iou(args: argparse.Namespace) -> int:
    if args.json:
        document = _read_json(args.file_a or "-")
        boxes_a = _rows_to_boxes(document["a"], "a")
        boxes_b = _rows_to_boxes(document["b"], "b")
    else:
        if args.file_a is None or args.file_b is None:
            print("iou needs two annotation files (or --json)", file=sys.stderr)
            return 2
        parsed = []
        for path in (args.file_a, args.file_b):
            try:
                parsed.append(parse_annotations(_read_text(path)))
            except (RotboxError, OSError) as exc:
                print(f"{path}: {exc}", file=sys.stderr)
                return 1
        boxes_a = [obj.obb for obj in parsed[0]]
        boxes_b = [obj.obb for obj in parsed[1]]
    matrix = iou_matrix(boxes_a, boxes_b)
    out = sys.stdout
    if args.sparse:
        out.write(f"{matrix.shape[0]},{matrix.shape[1]}\n")
        for i, j in zip(*np.nonzero(matrix)):
            out.write(f"{int(i)},{int(j)},{float(matrix[i, j])!r}\n")
    else:
        for row in matrix:
            out.write(",".join(repr(float(v)) for v in row) + "\n")
    return 0


def _cmd_nms(args: argparse.Namespace) -> int:
    if args.json:
        document = _read_json(args.detections or "-")
        boxes = _rows_to_boxes(document["boxes"], "boxes")
        scores = [float(v) for v in document["scores"]]
        class_ids = [int(v) for v in document.get("class_ids", [0] * len(boxes))]
        if not len(boxes) == len(scores) == len(class_ids):
            raise ValueError("boxes, scores, and class_ids must have the same length")
        dets = [Detection(b, s, c) for b, s, c in zip(boxes, scores, class_ids)]
        survivors = [
            i for i, d in enumerate(dets) if d.score >= args.score_thresh
        ]
        kept = rotated_nms(
            [dets[i] for i in survivors],
            args.iou_thresh,
            class_agnostic=args.class_agnostic,
        )
        json.dump({"kept": [survivors[i] for i in kept]}, sys.stdout)
        sys.stdout.write("\n")
        return 0
    if args.detections is None:
        print("nms needs a detections file (or --json)", file=sys.stderr)
        return 2
    try:
        text = _read_text(args.detections)
        names = args.classes.split(",") if args.classes else _detection_category_order(text)
        dets = parse_detections(text, names)
    except (RotboxError, OSError) as exc:
        print(f"{args.detections}: {exc}", file=sys.stderr)
        return 1
    dets = score_filter(dets, args.score_thresh)
    kept = rotated_nms(dets, args.iou_thresh, class_agnostic=args.class_agnostic)
    sys.stdout.write(write_detections([dets[i] for i in kept], names))
    return 0


def _cmd_tile(args: argparse.Namespace) -> int:
    offsets = tile_windows(args.width, args.height, args.window, args.stride)
    for x, y in offsets:
        sys.stdout.write(f"{x},{y}\n")
    if args.annotations is None:
        return 0
    if args.out_dir is None:
        print("--annotations requires --out-dir for the per-tile files", file=sys.stderr)
        return 2
    try:
        objects = parse_annotations(_read_text(args.annotations))
    except (RotboxError, OSError) as exc:
        print(f"{args.annotations}: {exc}", file=sys.stderr)
        return 1
    os.makedirs(args.out_dir, exist_ok=True)
    for x, y in offsets:
        tile = transfer_annotations(objects, (x, y, args.window, args.window))
        lines = []
        for obj in tile.contained:
            coords = " ".join(f"{v:.2f}" for pair in obj.quad for v in pair)
            lines.append(f"{coords} {obj.category} {int(obj.difficult)}")
        path = os.path.join(args.out_dir, f"tile_{x}_{y}.txt")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + ("\n" if lines else ""))
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    try:
        gt_objects = parse_annotations(_read_text(args.ground_truth))
    except (RotboxError, OSError) as exc:
        print(f"{args.ground_truth}: {exc}", file=sys.stderr)
        return 1
    names = args.classes.split(",") if args.classes else sorted(
        {obj.category for obj in gt_objects}
    )
    ids = {name: i for i, name in enumerate(names)}
    gts = []
    for obj in gt_objects:
        if obj.category not in ids:
            print(f"unknown ground-truth category {obj.category!r}", file=sys.stderr)
            return 1
        gts.append(GroundTruth(obj.obb, ids[obj.category], obj.difficult))
    try:
        dets = parse_detections(_read_text(args.detections), names)
    except (RotboxError, OSError) as exc:
        print(f"{args.detections}: {exc}", file=sys.stderr)
        return 1
    report = evaluate(
        dets, gts, iou_thresh=args.iou_thresh,
        eleven_point=args.eleven_point, num_classes=len(names),
    )
    sys.stdout.write(format_report(report, names))
    return 0


def _cmd_demo(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.score_thresh is not None:
        overrides["score_thresh"] = args.score_thresh
    if args.nms_thresh is not None:
        overrides["nms_thresh"] = args.nms_thresh
    if args.context_long is not None:
        overrides["context_long"] = args.context_long
    if args.context_short is not None:
        overrides["context_short"] = args.context_short
    if args.rroi_nms:
        overrides["rroi_nms_enabled"] = True
    if args.no_rroi_nms:
        overrides["rroi_nms_enabled"] = False
    if overrides:
        config = dataclasses.replace(config, **overrides)
    artifacts = run_demo(
        config,
        out_dir=args.out_dir,
        oracle=args.oracle,
        train_scene_count=args.train_scenes,
        eval_scene_count=args.eval_scenes,
        proposals_per_object=args.proposals_per_object,
        eval_iou_thresh=args.iou_thresh,
        train_epochs=args.train_epochs,
    )
    sys.stdout.write(artifacts.report_text)
    return 0


def _cmd_encode(args: argparse.Namespace) -> int:
    document = _read_json(args.input)
    anchors = _rows_to_boxes(document["anchors"], "anchors")
    targets = _rows_to_boxes(document["targets"], "targets")
    if len(anchors) != len(targets):
        raise ValueError("anchors and targets must have the same length")
    offsets = [list(encode(a, t).astuple()) for a, t in zip(anchors, targets)]
    json.dump({"offsets": offsets}, sys.stdout)
    sys.stdout.write("\n")
    return 0


def _cmd_decode(args: argparse.Namespace) -> int:
    document = _read_json(args.input)
    anchors = _rows_to_boxes(document["anchors"], "anchors")
    rows = document["offsets"]
    if len(anchors) != len(rows):
        raise ValueError("anchors and offsets must have the same length")
    boxes = []
    for index, (anchor, row) in enumerate(zip(anchors, rows)):
        if len(row) != 5:
            raise ValueError(f"offsets[{index}] must have 5 numbers, got {len(row)}")
        box = decode(anchor, OffsetVector(*[float(v) for v in row]))
        boxes.append([box.cx, box.cy, box.w, box.h, box.theta])
    json.dump({"boxes": boxes}, sys.stdout)
    sys.stdout.write("\n")
    return 0


def _cmd_align(args: argparse.Namespace) -> int:
    document = _read_json(args.input)
    height = int(document["height"])
    width = int(document["width"])
    channels = int(document["channels"])
    flat = np.asarray(document["data"], dtype=np.float64)
    if flat.size != height * width * channels:
        raise ValueError(
            f"data has {flat.size} values, expected height*width*channels = "
            f"{height * width * channels}"
        )
    tensor = FeatureTensor(flat.reshape(height, width, channels))
    boxes = _rows_to_boxes(document["boxes"], "boxes")
    k = int(document.get("k", 7))
    n = int(document.get("samples_per_bin_side", 2))
    position_sensitive = bool(document.get("position_sensitive", True))
    pool = rps_roi_align if position_sensitive else roi_align
    pooled = [pool(tensor, box, k=k, samples_per_bin_side=n) for box in boxes]
    json.dump(
        {
            "k": k,
            "channels_out": pooled[0].channels_out if pooled else None,
            "pooled": [p.data.reshape(-1).tolist() for p in pooled],
        },
        sys.stdout,
    )
    sys.stdout.write("\n")
    return 0


def _cmd_fromquad(args: argparse.Namespace) -> int:
    document = _read_json(args.input)
    boxes = []
    for index, row in enumerate(document["quads"]):
        if len(row) != 8:
            raise ValueError(f"quads[{index}] must have 8 numbers, got {len(row)}")
        values = [float(v) for v in row]
        quad = tuple((values[i], values[i + 1]) for i in range(0, 8, 2))
        try:
            box = box_from_quad(quad)
        except RotboxError as exc:
            raise ValueError(f"quads[{index}]: {exc}") from exc
        boxes.append([box.cx, box.cy, box.w, box.h, box.theta])
    json.dump({"boxes": boxes}, sys.stdout)
    sys.stdout.write("\n")
    return 0


# ----------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotbox",
        description="Oriented-box geometry, NMS, tiling, evaluation, and a synthetic demo.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("iou", help="pairwise IoU matrix between two annotation files")
    p.add_argument("file_a", nargs="?")
    p.add_argument("file_b", nargs="?")
    p.add_argument(
        "--sparse",
        action="store_true",
        help="emit 'N,M' then one 'i,j,value' line per nonzero entry",
    )
    p.add_argument(
        "--json",
        action="store_true",
        help="read {\"a\": [[cx,cy,w,h,theta],..], \"b\": [..]} from the first "
        "argument or stdin instead of annotation files",
    )
    p.set_defaults(func=_cmd_iou)

    p = sub.add_parser("nms", help="greedy rotated NMS over a detections file")
    p.add_argument("detections", nargs="?")
    p.add_argument("--iou-thresh", type=float, default=0.5)
    p.add_argument("--score-thresh", type=float, default=0.0)
    p.add_argument("--classes", help="comma-separated category names fixing class ids")
    p.add_argument("--class-agnostic", action="store_true")
    p.add_argument(
        "--json",
        action="store_true",
        help="read {\"boxes\": [[cx,cy,w,h,theta],..], \"scores\": [..], "
        "\"class_ids\": [..]} and print surviving input indices as JSON",
    )
    p.set_defaults(func=_cmd_nms)

    p = sub.add_parser("tile", help="tile window offsets, optionally with annotations")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--window", type=int, default=1024)
    p.add_argument("--stride", type=int, default=824)
    p.add_argument("--annotations", help="annotation file to transfer into each tile")
    p.add_argument("--out-dir", help="directory for per-tile annotation files")
    p.set_defaults(func=_cmd_tile)

    p = sub.add_parser("eval", help="PR/AP report for detections against ground truth")
    p.add_argument("detections")
    p.add_argument("ground_truth")
    p.add_argument("--iou-thresh", type=float, default=0.5)
    p.add_argument("--eleven-point", action="store_true")
    p.add_argument("--classes", help="comma-separated category names fixing class ids")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("demo", help="synthetic end-to-end run with a written manifest")
    p.add_argument("--config", help="JSON config file; flags below override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", help="where detections.txt, report.txt, manifest.json go")
    p.add_argument("--oracle", action="store_true", help="feed exact targets, skip training")
    p.add_argument("--iou-thresh", type=float, default=0.5, help="evaluation IoU threshold")
    p.add_argument("--score-thresh", type=float)
    p.add_argument("--nms-thresh", type=float)
    p.add_argument("--context-long", type=float)
    p.add_argument("--context-short", type=float)
    p.add_argument("--rroi-nms", action="store_true", help="deduplicate rotated candidates")
    p.add_argument("--no-rroi-nms", action="store_true", help="force deduplication off")
    p.add_argument("--train-scenes", type=int, default=150)
    p.add_argument("--eval-scenes", type=int, default=40)
    p.add_argument("--proposals-per-object", type=int, default=2)
    p.add_argument("--train-epochs", type=int, default=300)
    p.set_defaults(func=_cmd_demo)

    p = sub.add_parser("encode", help="anchor-relative offsets for box pairs (JSON)")
    p.add_argument("input", nargs="?", default="-", help="JSON file or - for stdin")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", help="apply offsets to anchors (JSON)")
    p.add_argument("input", nargs="?", default="-", help="JSON file or - for stdin")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("align", help="rotated RoI pooling over a feature tensor (JSON)")
    p.add_argument("input", nargs="?", default="-", help="JSON file or - for stdin")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("fromquad", help="minimum-area oriented boxes from corner quads (JSON)")
    p.add_argument("input", nargs="?", default="-", help="JSON file or - for stdin")
    p.set_defaults(func=_cmd_fromquad)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RotboxError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
