"""Regenerate the committed fixture corpus under fixtures/.

Every file is a deterministic function of the seeds below, with golden
outputs produced by the library itself. Clients in other languages compare
their results against these files, so regenerate only on purpose and
commit the diff.

Usage: python3 scripts/gen_fixtures.py [out_dir]
"""

from __future__ import annotations

import json
import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from rotbox.dota import parse_annotations, write_detections  # noqa: E402
from rotbox.encoding import OffsetVector, decode, encode  # noqa: E402
from rotbox.geometry import OrientedBox, box_from_quad, corners_of, iou_matrix  # noqa: E402
from rotbox.nms import Detection, rotated_nms  # noqa: E402
from rotbox.roi_align import FeatureTensor, roi_align, rps_roi_align  # noqa: E402

CATEGORIES = ("plane", "ship", "helipad")


def sample_box(rng: np.random.Generator, span: float) -> OrientedBox:
    return OrientedBox(
        float(rng.uniform(8, span - 8)),
        float(rng.uniform(8, span - 8)),
        float(rng.uniform(4, 14)),
        float(rng.uniform(2, 8)),
        float(rng.uniform(0, math.pi)),
    )


def box_row(box: OrientedBox) -> list[float]:
    return [box.cx, box.cy, box.w, box.h, box.theta]


def annotation_text(boxes, categories, difficult) -> str:
    lines = ["imagesource:GoogleEarth", "gsd:0.14"]
    for box, category, flag in zip(boxes, categories, difficult):
        coords = " ".join(f"{v:.2f}" for pair in corners_of(box).vertices for v in pair)
        lines.append(f"{coords} {category} {flag}")
    return "\n".join(lines) + "\n"


def dump_json(path: str, document: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=1, sort_keys=True)
        handle.write("\n")


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def gen_parser_files(out: str) -> None:
    rng = np.random.default_rng(1001)
    expect = {}

    boxes_a = [sample_box(rng, 200) for _ in range(20)]
    cats_a = [CATEGORIES[int(rng.integers(0, 3))] for _ in range(20)]
    diff_a = [int(rng.uniform() < 0.15) for _ in range(20)]
    write_text(os.path.join(out, "annotations_a.txt"), annotation_text(boxes_a, cats_a, diff_a))
    expect["annotations_a"] = len(boxes_a)

    boxes_b = [sample_box(rng, 200) for _ in range(18)]
    cats_b = [CATEGORIES[int(rng.integers(0, 3))] for _ in range(18)]
    diff_b = [0] * 18
    write_text(os.path.join(out, "annotations_b.txt"), annotation_text(boxes_b, cats_b, diff_b))
    expect["annotations_b"] = len(boxes_b)

    crlf_boxes = [sample_box(rng, 120) for _ in range(3)]
    crlf = annotation_text(crlf_boxes, ["plane", "ship", "plane"], [0, 1, 0])
    write_text(os.path.join(out, "parser_crlf.txt"), crlf.replace("\n", "\r\n"))
    expect["parser_crlf"] = 3

    malformed = (
        "imagesource:GoogleEarth\n"
        "10 10 20 10 20 20 10 20 plane 0\n"
        "\n"
        "30 30 40 30 40 40 30 40 ship nope\n"
    )
    write_text(os.path.join(out, "parser_malformed.txt"), malformed)
    expect["parser_malformed"] = {"line": 4, "column": len("30 30 40 30 40 40 30 40 ship ") + 1}

    parsed = parse_annotations(annotation_text(boxes_a, cats_a, diff_a))
    assert len(parsed) == 20
    dump_json(os.path.join(out, "parser_expect.json"), expect)


def gen_iou_cases(out: str) -> None:
    rng = np.random.default_rng(1002)
    boxes_a = [sample_box(rng, 60) for _ in range(12)]
    boxes_b = [sample_box(rng, 60) for _ in range(10)]
    matrix = iou_matrix(boxes_a, boxes_b)
    dump_json(
        os.path.join(out, "iou_cases.json"),
        {
            "a": [box_row(b) for b in boxes_a],
            "b": [box_row(b) for b in boxes_b],
            "matrix": [[float(v) for v in row] for row in matrix],
        },
    )


def gen_nms_cases(out: str) -> None:
    rng = np.random.default_rng(1003)
    boxes = []
    for cluster in range(5):
        center = 30.0 + 40.0 * cluster
        for _ in range(4):
            boxes.append(
                OrientedBox(
                    center + float(rng.uniform(-3, 3)),
                    30.0 + float(rng.uniform(-3, 3)),
                    float(rng.uniform(8, 14)),
                    float(rng.uniform(4, 8)),
                    float(rng.uniform(0, math.pi)),
                )
            )
    scores = [float(rng.uniform(0.05, 1.0)) for _ in boxes]
    class_ids = [int(rng.integers(0, 3)) for _ in boxes]
    dets = [Detection(b, s, c) for b, s, c in zip(boxes, scores, class_ids)]
    kept = rotated_nms(dets, 0.45)
    kept_agnostic = rotated_nms(dets, 0.45, class_agnostic=True)
    dump_json(
        os.path.join(out, "nms_cases.json"),
        {
            "boxes": [box_row(b) for b in boxes],
            "scores": scores,
            "class_ids": class_ids,
            "iou_thresh": 0.45,
            "kept": kept,
            "kept_class_agnostic": kept_agnostic,
        },
    )

    detections_text = write_detections(dets, CATEGORIES)
    write_text(os.path.join(out, "detections.txt"), detections_text)


def gen_encode_decode_cases(out: str) -> None:
    rng = np.random.default_rng(1004)
    anchors = [sample_box(rng, 80) for _ in range(10)]
    targets = [sample_box(rng, 80) for _ in range(10)]
    offsets = [list(encode(a, t).astuple()) for a, t in zip(anchors, targets)]
    dump_json(
        os.path.join(out, "encode_cases.json"),
        {
            "anchors": [box_row(b) for b in anchors],
            "targets": [box_row(b) for b in targets],
            "offsets": offsets,
        },
    )

    dec_anchors = [sample_box(rng, 80) for _ in range(8)]
    dec_offsets = [
        [
            float(rng.uniform(-0.4, 0.4)),
            float(rng.uniform(-0.4, 0.4)),
            float(rng.uniform(-0.5, 0.5)),
            float(rng.uniform(-0.5, 0.5)),
            float(rng.uniform(0, 1)),
        ]
        for _ in range(8)
    ]
    dec_offsets.append([0.25, 0.0, 0.0, 0.0, 0.0477464829275686])
    dec_anchors.append(OrientedBox(5.0, 5.0, 4.0, 2.0, 0.0))
    boxes = [
        box_row(decode(a, OffsetVector(*row)))
        for a, row in zip(dec_anchors, dec_offsets)
    ]
    dump_json(
        os.path.join(out, "decode_cases.json"),
        {
            "anchors": [box_row(b) for b in dec_anchors],
            "offsets": dec_offsets,
            "boxes": boxes,
        },
    )


def gen_align_cases(out: str) -> None:
    rng = np.random.default_rng(1005)
    height, width, channels = 6, 7, 12  # 12 = k*k*c_out for k=2, c_out=3
    data = rng.uniform(-2, 2, (height, width, channels))
    tensor = FeatureTensor(data)
    boxes = [
        OrientedBox(3.0, 2.5, 3.5, 2.0, 0.35),
        OrientedBox(4.2, 3.1, 2.4, 1.6, 2.0),
        OrientedBox(0.8, 0.9, 2.0, 1.5, 5.9),  # spills past the border
    ]
    k, n = 2, 2
    ps = [rps_roi_align(tensor, b, k=k, samples_per_bin_side=n) for b in boxes]
    plain = [roi_align(tensor, b, k=k, samples_per_bin_side=n) for b in boxes]
    dump_json(
        os.path.join(out, "align_cases.json"),
        {
            "height": height,
            "width": width,
            "channels": channels,
            "data": data.reshape(-1).tolist(),
            "boxes": [box_row(b) for b in boxes],
            "k": k,
            "samples_per_bin_side": n,
            "pooled_position_sensitive": [p.data.reshape(-1).tolist() for p in ps],
            "pooled_plain": [p.data.reshape(-1).tolist() for p in plain],
        },
    )


def gen_quad_cases(out: str) -> None:
    rng = np.random.default_rng(1006)
    quads = [[0.0, 0.0, 2.0, 0.0, 2.0, 2.0, 0.0, 2.0]]
    for _ in range(7):
        box = sample_box(rng, 60)
        quads.append([float(v) for pair in corners_of(box).vertices for v in pair])
    boxes = []
    for flat in quads:
        quad = tuple((flat[i], flat[i + 1]) for i in range(0, 8, 2))
        boxes.append(box_row(box_from_quad(quad)))
    dump_json(os.path.join(out, "quad_cases.json"), {"quads": quads, "boxes": boxes})


def main() -> None:
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "fixtures"
    )
    out = os.path.abspath(out)
    os.makedirs(out, exist_ok=True)
    gen_parser_files(out)
    gen_iou_cases(out)
    gen_nms_cases(out)
    gen_encode_decode_cases(out)
    gen_align_cases(out)
    gen_quad_cases(out)
    names = sorted(os.listdir(out))
    print(f"wrote {len(names)} files to {out}:")
    for name in names:
        print(f"  {name}")


if __name__ == "__main__":
    main()
