"""DOTA-style annotation text, detection emission, and image tiling.

Annotation lines follow the public convention:

    x1 y1 x2 y2 x3 y3 x4 y4 category difficult

with optional leading metadata ("imagesource:", "gsd:") and blank lines.
Detection output is a single multi-category stream, one detection per line:

    category score x1 y1 x2 y2 x3 y3 x4 y4

Corners are written with two decimals; lines are ordered by descending
score, then input index. Tiling follows the stride/clamp rule: windows at
stride multiples plus a final window flush with the far edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import AnnotationParseError, InvalidArgumentError, InvalidQuadError
from .geometry import ConvexPolygon, OrientedBox, box_from_quad, canonicalize, corners_of
from .nms import Detection

__all__ = [
    "AnnotatedObject",
    "TileWindow",
    "parse_annotations",
    "parse_detections",
    "write_detections",
    "tile_windows",
    "transfer_annotations",
    "scale_annotations",
    "rotate_annotations_90k",
]

_METADATA_PREFIXES = ("imagesource:", "gsd:")


@dataclass(frozen=True)
class AnnotatedObject:
    """A quad annotation with its derived oriented box.

    quad keeps the source vertex order. out_of_window marks objects that a
    tiling transfer kept (center inside) while some corner left the window.
    """

    quad: ConvexPolygon
    category: str
    difficult: bool
    obb: OrientedBox
    out_of_window: bool = False

    def __post_init__(self) -> None:
        if len(self.quad) != 4:
            raise InvalidArgumentError(f"quad must have 4 vertices, got {len(self.quad)}")
        if not self.category:
            raise InvalidArgumentError("category must be non-empty")
        if not isinstance(self.obb, OrientedBox):
            raise InvalidArgumentError("obb must be an OrientedBox")

    @classmethod
    def from_quad(
        cls, quad: ConvexPolygon, category: str, difficult: bool
    ) -> "AnnotatedObject":
        return cls(quad=quad, category=category, difficult=difficult, obb=box_from_quad(quad))


@dataclass(frozen=True)
class TileWindow:
    """A crop window and the annotations it owns, in window coordinates."""

    x0: int
    y0: int
    width: int
    height: int
    contained: tuple[AnnotatedObject, ...]

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError("window extent must be at least 1 pixel")


def _parse_line(line: str, line_number: int) -> AnnotatedObject:
    tokens = line.split()
    if len(tokens) != 10:
        raise AnnotationParseError(
            f"expected 10 tokens (8 coordinates, category, difficult), got {len(tokens)}",
            line_number,
        )

    def column_of(token_index: int) -> int:
        # 1-based character offset of the token's first character
        seen = 0
        pos = 0
        while seen < token_index:
            pos = line.index(tokens[seen], pos) + len(tokens[seen])
            seen += 1
        return line.index(tokens[token_index], pos) + 1

    coords = []
    for idx in range(8):
        try:
            value = float(tokens[idx])
        except ValueError:
            raise AnnotationParseError(
                f"coordinate {idx + 1} is not a number: {tokens[idx]!r}",
                line_number,
                column_of(idx),
            ) from None
        if not math.isfinite(value):
            raise AnnotationParseError(
                f"coordinate {idx + 1} is not finite: {tokens[idx]!r}",
                line_number,
                column_of(idx),
            )
        coords.append(value)

    category = tokens[8]
    if tokens[9] not in ("0", "1"):
        raise AnnotationParseError(
            f"difficult flag must be 0 or 1, got {tokens[9]!r}", line_number, column_of(9)
        )
    quad = ConvexPolygon(tuple((coords[i], coords[i + 1]) for i in range(0, 8, 2)))
    try:
        return AnnotatedObject.from_quad(quad, category, tokens[9] == "1")
    except InvalidQuadError as exc:
        raise AnnotationParseError(str(exc), line_number) from exc


def parse_annotations(text: str) -> list[AnnotatedObject]:
    """Parse annotation text; metadata and blank lines are skipped."""
    objects = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or any(line.lower().startswith(p) for p in _METADATA_PREFIXES):
            continue
        objects.append(_parse_line(line, line_number))
    return objects


def write_detections(dets: Sequence[Detection], category_names: Sequence[str]) -> str:
    """Emit the detection stream; see the module docstring for the format."""
    names = list(category_names)
    for d in dets:
        if d.class_id >= len(names):
            raise InvalidArgumentError(
                f"class_id {d.class_id} has no name; {len(names)} categories known"
            )
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    lines = []
    for i in order:
        d = dets[i]
        corner_text = " ".join(
            f"{v:.2f}" for corner in corners_of(d.box) for v in corner
        )
        lines.append(f"{names[d.class_id]} {d.score:.6f} {corner_text}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_detections(text: str, category_names: Sequence[str]) -> list[Detection]:
    """Relaxed reader for the write_detections format."""
    names = {name: idx for idx, name in enumerate(category_names)}
    dets = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 10:
            raise AnnotationParseError(
                f"expected 10 tokens (category, score, 8 coordinates), got {len(tokens)}",
                line_number,
            )
        if tokens[0] not in names:
            raise AnnotationParseError(f"unknown category {tokens[0]!r}", line_number)
        try:
            score = float(tokens[1])
            coords = [float(t) for t in tokens[2:]]
        except ValueError as exc:
            raise AnnotationParseError(str(exc), line_number) from None
        quad = ConvexPolygon(tuple((coords[i], coords[i + 1]) for i in range(0, 8, 2)))
        try:
            box = box_from_quad(quad)
        except InvalidQuadError as exc:
            raise AnnotationParseError(str(exc), line_number) from exc
        dets.append(Detection(box, score, names[tokens[0]]))
    return dets


def _axis_offsets(dim: int, window: int, stride: int) -> list[int]:
    if dim <= window:
        return [0]
    offsets = list(range(0, dim - window + 1, stride))
    if offsets[-1] != dim - window:
        offsets.append(dim - window)
    return offsets


def tile_windows(image_w: int, image_h: int, window: int, stride: int) -> list[tuple[int, int]]:
    """Window offsets covering the image; see the module docstring."""
    if window < 1:
        raise InvalidArgumentError(f"window must be >= 1, got {window}")
    if not 1 <= stride <= window:
        raise InvalidArgumentError(f"stride must be in [1, window], got {stride}")
    if image_w < 1 or image_h < 1:
        raise InvalidArgumentError("image extent must be at least 1 pixel")
    xs = _axis_offsets(image_w, window, stride)
    ys = _axis_offsets(image_h, window, stride)
    return [(x, y) for y in ys for x in xs]


def _shift_object(obj: AnnotatedObject, dx: float, dy: float, flagged: bool) -> AnnotatedObject:
    quad = ConvexPolygon(tuple((x + dx, y + dy) for x, y in obj.quad))
    obb = OrientedBox(obj.obb.cx + dx, obj.obb.cy + dy, obj.obb.w, obj.obb.h, obj.obb.theta)
    return AnnotatedObject(
        quad=quad,
        category=obj.category,
        difficult=obj.difficult,
        obb=obb,
        out_of_window=flagged,
    )


def transfer_annotations(
    objects: Sequence[AnnotatedObject],
    window: tuple[int, int, int, int],
) -> TileWindow:
    """Move annotations into a window's frame, keeping center-inside objects.

    window is (x0, y0, width, height). Ownership uses a closed interval so a
    center on a shared boundary belongs to both neighboring tiles. Retained
    objects are never clipped; out_of_window is set when any quad corner
    lands outside the window.
    """
    x0, y0, width, height = window
    if width < 1 or height < 1:
        raise InvalidArgumentError("window extent must be at least 1 pixel")
    kept = []
    for obj in objects:
        cx, cy = obj.obb.cx, obj.obb.cy
        if not (x0 <= cx <= x0 + width and y0 <= cy <= y0 + height):
            continue
        flagged = any(
            not (x0 <= x <= x0 + width and y0 <= y <= y0 + height) for x, y in obj.quad
        )
        kept.append(_shift_object(obj, -float(x0), -float(y0), flagged))
    return TileWindow(x0=x0, y0=y0, width=width, height=height, contained=tuple(kept))


def scale_annotations(objects: Sequence[AnnotatedObject], factor: float) -> list[AnnotatedObject]:
    """Multiply every coordinate by factor (multi-scale augmentation)."""
    if not factor > 0 or not math.isfinite(factor):
        raise InvalidArgumentError(f"factor must be finite and > 0, got {factor}")
    out = []
    for obj in objects:
        quad = ConvexPolygon(tuple((x * factor, y * factor) for x, y in obj.quad))
        b = obj.obb
        obb = OrientedBox(b.cx * factor, b.cy * factor, b.w * factor, b.h * factor, b.theta)
        out.append(replace(obj, quad=quad, obb=obb))
    return out


def rotate_annotations_90k(
    objects: Sequence[AnnotatedObject], k: int, image_w: float, image_h: float
) -> list[AnnotatedObject]:
    """Rotate annotations by k quarter turns of the image canvas.

    One turn maps (x, y) to (image_h - y, x) on a canvas whose sides swap,
    matching a rotation from +x toward +y. Boxes keep their sides and gain
    pi/2 per turn, re-canonicalized afterwards.
    """
    out = list(objects)
    w, h = float(image_w), float(image_h)
    for _ in range(k % 4):
        rotated = []
        for obj in out:
            quad = ConvexPolygon(tuple((h - y, x) for x, y in obj.quad))
            b = obj.obb
            obb = canonicalize(OrientedBox(h - b.cy, b.cx, b.w, b.h, b.theta + math.pi / 2.0))
            rotated.append(replace(obj, quad=quad, obb=obb))
        out = rotated
        w, h = h, w
    return out
