"""Oriented-rectangle geometry: canonical forms, corners, clipping, IoU."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InvalidArgumentError, InvalidBoxError, InvalidQuadError

__all__ = [
    "OrientedBox",
    "AlignedBox",
    "ConvexPolygon",
    "EMPTY_POLYGON",
    "canonicalize",
    "corners_of",
    "box_from_quad",
    "aligned_hull",
    "clip_convex",
    "polygon_area",
    "iou_oriented",
    "iou_aligned",
    "iou_matrix",
    "boxes_to_array",
    "boxes_from_array",
]

# On-edge classification band for clipping. Cross products within the band
# count as inside so shared edges do not flicker between sides.
_EDGE_EPS = 1e-9
# Clip outputs below this area collapse to the empty polygon.
_EMPTY_AREA = 1e-12

Point = tuple[float, float]


@dataclass(frozen=True)
class OrientedBox:
    """Rotated rectangle (cx, cy, w, h, theta) in image coordinates.

    The frame is +x right, +y down, theta in radians measured from +x
    toward +y. w and h are full side lengths, with w measured along the
    theta direction. Canonical form (see :func:`canonicalize`) has
    w >= h and theta in [0, pi); construction does not canonicalize.
    """

    cx: float
    cy: float
    w: float
    h: float
    theta: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h", "theta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidBoxError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.w <= 0.0 or self.h <= 0.0:
            raise InvalidBoxError(
                f"sides must be positive, got w={self.w!r} h={self.h!r}"
            )

    @property
    def area(self) -> float:
        return self.w * self.h

    def astuple(self) -> tuple[float, float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h, self.theta)


@dataclass(frozen=True)
class AlignedBox:
    """Axis-aligned rectangle in corner form (xmin, ymin, xmax, ymax)."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        for name in ("xmin", "ymin", "xmax", "ymax"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidBoxError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.xmax <= self.xmin or self.ymax <= self.ymin:
            raise InvalidBoxError(
                f"empty extent: ({self.xmin}, {self.ymin}, {self.xmax}, {self.ymax})"
            )

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def center(self) -> Point:
        return ((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)

    @property
    def area(self) -> float:
        return self.width * self.height

    def astuple(self) -> tuple[float, float, float, float]:
        return (self.xmin, self.ymin, self.xmax, self.ymax)


@dataclass(frozen=True)
class ConvexPolygon:
    """Vertex loop, counter-clockwise in the +y-down frame.

    Counter-clockwise here means nonnegative shoelace value; on screen
    (y growing downward) such a loop appears clockwise. The empty polygon
    has no vertices.
    """

    vertices: tuple[Point, ...] = ()

    def __post_init__(self):
        verts = []
        for vertex in self.vertices:
            x, y = vertex
            x, y = float(x), float(y)
            if not (math.isfinite(x) and math.isfinite(y)):
                raise InvalidArgumentError(f"vertex must be finite, got {vertex!r}")
            verts.append((x, y))
        object.__setattr__(self, "vertices", tuple(verts))

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    @property
    def is_empty(self) -> bool:
        return not self.vertices


EMPTY_POLYGON = ConvexPolygon(())

PolygonLike = Union[ConvexPolygon, Sequence[Point]]
BoxLike = Union[OrientedBox, Sequence[float]]


def _as_box(box: BoxLike) -> OrientedBox:
    if isinstance(box, OrientedBox):
        return box
    return OrientedBox(*box)


def _poly_vertices(poly: PolygonLike) -> tuple[Point, ...]:
    if isinstance(poly, ConvexPolygon):
        return poly.vertices
    return ConvexPolygon(tuple(poly)).vertices


def canonicalize(box: BoxLike) -> OrientedBox:
    """Return the same rectangle with w >= h and theta in [0, pi).

    Swapping the side labels rotates the frame a quarter turn, so pi/2 is
    added to theta before reduction mod pi. Idempotent.
    """
    b = _as_box(box)
    cx, cy, w, h, theta = b.astuple()
    if w < h:
        w, h = h, w
        theta += math.pi / 2.0
    theta = theta % math.pi
    if theta >= math.pi:
        # float mod of a tiny negative angle can round up to pi itself
        theta -= math.pi
    return OrientedBox(cx, cy, w, h, theta)


def corners_of(box: BoxLike) -> ConvexPolygon:
    """Corners of a box, counter-clockwise, starting at local (-w/2, -h/2).

    The centroid of the four vertices equals the box center.
    """
    b = _as_box(box)
    c, s = math.cos(b.theta), math.sin(b.theta)
    w2, h2 = b.w / 2.0, b.h / 2.0
    verts = []
    for lx, ly in ((-w2, -h2), (w2, -h2), (w2, h2), (-w2, h2)):
        verts.append((b.cx + c * lx - s * ly, b.cy + s * lx + c * ly))
    return ConvexPolygon(tuple(verts))


def _orientation(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(p1: Point, p2: Point, p3: Point, p4: Point) -> bool:
    """True when the open segments p1p2 and p3p4 intersect properly."""
    d1 = _orientation(p3, p4, p1)
    d2 = _orientation(p3, p4, p2)
    d3 = _orientation(p1, p2, p3)
    d4 = _orientation(p1, p2, p4)
    return (d1 * d2 < 0.0) and (d3 * d4 < 0.0)


def _convex_hull(points: Sequence[Point]) -> list[Point]:
    """Monotone-chain hull, counter-clockwise in the +y-down frame."""
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _orientation(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _orientation(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def box_from_quad(quad: PolygonLike) -> OrientedBox:
    """Minimum-area enclosing rotated rectangle of a 4-vertex quad.

    Uses rotating calipers over the convex hull: the optimal rectangle has
    one side collinear with a hull edge. The result is canonicalized. If
    the quad is already a rectangle its corner set is recovered exactly up
    to float error.

    Raises:
        InvalidQuadError: wrong vertex count, degenerate (zero area),
            or self-intersecting vertex order.
    """
    verts = _poly_vertices(quad)
    if len(verts) != 4:
        raise InvalidQuadError(f"expected 4 vertices, got {len(verts)}")
    if _segments_cross(verts[0], verts[1], verts[2], verts[3]) or _segments_cross(
        verts[1], verts[2], verts[3], verts[0]
    ):
        raise InvalidQuadError(f"self-intersecting quad: {verts!r}")
    hull = _convex_hull(verts)
    if len(hull) < 3 or _shoelace(hull) <= _EMPTY_AREA:
        raise InvalidQuadError(f"degenerate quad: {verts!r}")

    best = None
    n = len(hull)
    for i in range(n):
        ax, ay = hull[i]
        bx, by = hull[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        norm = math.hypot(ex, ey)
        if norm <= 0.0:
            continue
        c, s = ex / norm, ey / norm
        # rotate hull points into the edge frame and take the extent
        us = [c * x + s * y for x, y in hull]
        vs = [-s * x + c * y for x, y in hull]
        ulo, uhi = min(us), max(us)
        vlo, vhi = min(vs), max(vs)
        area = (uhi - ulo) * (vhi - vlo)
        if best is None or area < best[0]:
            uc, vc = (ulo + uhi) / 2.0, (vlo + vhi) / 2.0
            center = (c * uc - s * vc, s * uc + c * vc)
            best = (area, center, uhi - ulo, vhi - vlo, math.atan2(ey, ex))
    if best is None:
        raise InvalidQuadError(f"degenerate quad: {verts!r}")
    _, center, w, h, theta = best
    return canonicalize((center[0], center[1], w, h, theta))


def aligned_hull(box: BoxLike) -> AlignedBox:
    """Smallest axis-aligned box containing all four corners."""
    verts = corners_of(box).vertices
    xs = [x for x, _ in verts]
    ys = [y for _, y in verts]
    return AlignedBox(min(xs), min(ys), max(xs), max(ys))


def _shoelace(verts: Sequence[Point]) -> float:
    n = len(verts)
    if n < 3:
        return 0.0
    terms = []
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        terms.append(x0 * y1 - x1 * y0)
    return math.fsum(terms) / 2.0


def polygon_area(poly: PolygonLike) -> float:
    """Shoelace area, nonnegative; 0 for fewer than three vertices."""
    return abs(_shoelace(_poly_vertices(poly)))


def clip_convex(subject: PolygonLike, clip: PolygonLike) -> ConvexPolygon:
    """Intersection of two convex counter-clockwise polygons.

    Sutherland-Hodgman clipping. Vertices within the on-edge band count as
    inside so shared edges are kept. Outputs with area below 1e-12 collapse
    to the empty polygon, which also keeps IoU free of 0/0.
    """
    out = list(_poly_vertices(subject))
    cverts = _poly_vertices(clip)
    if len(out) < 3 or len(cverts) < 3:
        return EMPTY_POLYGON

    for i in range(len(cverts)):
        if not out:
            break
        ax, ay = cverts[i]
        bx, by = cverts[(i + 1) % len(cverts)]
        ex, ey = bx - ax, by - ay
        inp = out
        out = []
        # signed side of each vertex; interior lies on the positive side
        sides = [ex * (py - ay) - ey * (px - ax) for px, py in inp]
        m = len(inp)
        for j in range(m):
            cur, nxt = inp[j], inp[(j + 1) % m]
            cs, ns = sides[j], sides[(j + 1) % m]
            cur_in = cs >= -_EDGE_EPS
            nxt_in = ns >= -_EDGE_EPS
            if cur_in != nxt_in:
                # clamp so near-collinear edges cannot extrapolate the point
                t = min(1.0, max(0.0, cs / (cs - ns)))
                out.append((cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])))
            if nxt_in:
                out.append(nxt)

    deduped: list[Point] = []
    for p in out:
        if not deduped or _dist2(deduped[-1], p) > 1e-18:
            deduped.append(p)
    if len(deduped) >= 2 and _dist2(deduped[-1], deduped[0]) <= 1e-18:
        deduped.pop()
    if len(deduped) < 3 or _shoelace(deduped) < _EMPTY_AREA:
        return EMPTY_POLYGON
    return ConvexPolygon(tuple(deduped))


def _dist2(a: Point, b: Point) -> float:
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2


def iou_oriented(a: BoxLike, b: BoxLike) -> float:
    """Intersection over union of two rotated rectangles.

    The union is area(a) + area(b) - intersection. Touching (zero-area)
    overlap counts as 0.
    """
    box_a, box_b = _as_box(a), _as_box(b)
    inter = polygon_area(clip_convex(corners_of(box_a), corners_of(box_b)))
    if inter <= 0.0:
        return 0.0
    union = box_a.area + box_b.area - inter
    if union <= 0.0:
        return 0.0
    return max(0.0, min(1.0, inter / union))


def iou_aligned(a: AlignedBox, b: AlignedBox) -> float:
    """Intersection over union of two axis-aligned rectangles."""
    iw = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    ih = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return max(0.0, min(1.0, inter / union))


def boxes_to_array(boxes: Iterable[BoxLike]) -> np.ndarray:
    """Stack boxes into a float64 array of shape (N, 5)."""
    rows = [_as_box(b).astuple() for b in boxes]
    if not rows:
        return np.zeros((0, 5), dtype=np.float64)
    return np.asarray(rows, dtype=np.float64)


def boxes_from_array(arr: np.ndarray) -> list[OrientedBox]:
    """Inverse of :func:`boxes_to_array`; validates every row."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 5:
        raise InvalidArgumentError(f"expected an (N, 5) array, got shape {arr.shape}")
    return [OrientedBox(*row) for row in arr]


def _validate_box_array(arr: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 5:
        raise InvalidArgumentError(
            f"{name} must have shape (N, 5), got {arr.shape}"
        )
    if arr.size:
        if not np.isfinite(arr).all():
            raise InvalidBoxError(f"{name} contains non-finite values")
        if (arr[:, 2] <= 0).any() or (arr[:, 3] <= 0).any():
            raise InvalidBoxError(f"{name} contains non-positive sides")
    return arr


def _corner_array(arr: np.ndarray) -> np.ndarray:
    """Corners of each (N, 5) row as an (N, 4, 2) array, same order as corners_of."""
    c, s = np.cos(arr[:, 4]), np.sin(arr[:, 4])
    w2, h2 = arr[:, 2] / 2.0, arr[:, 3] / 2.0
    lx = np.array([-1.0, 1.0, 1.0, -1.0])
    ly = np.array([-1.0, -1.0, 1.0, 1.0])
    local_x = w2[:, None] * lx
    local_y = h2[:, None] * ly
    xs = arr[:, 0, None] + c[:, None] * local_x - s[:, None] * local_y
    ys = arr[:, 1, None] + s[:, None] * local_x + c[:, None] * local_y
    return np.stack((xs, ys), axis=-1)


def iou_matrix(boxes_a, boxes_b) -> np.ndarray:
    """Pairwise oriented IoU between two box sets as an (N, M) array.

    Accepts (N, 5) arrays or iterables of OrientedBox. Pairs whose aligned
    hulls do not overlap are exactly 0; the remaining pairs go through the
    same polygon clipping as :func:`iou_oriented`.
    """
    arr_a = _validate_box_array(
        boxes_a if isinstance(boxes_a, np.ndarray) else boxes_to_array(boxes_a), "boxes_a"
    )
    arr_b = _validate_box_array(
        boxes_b if isinstance(boxes_b, np.ndarray) else boxes_to_array(boxes_b), "boxes_b"
    )
    n, m = arr_a.shape[0], arr_b.shape[0]
    result = np.zeros((n, m), dtype=np.float64)
    if n == 0 or m == 0:
        return result

    ca = _corner_array(arr_a)
    cb = _corner_array(arr_b)
    lo_a, hi_a = ca.min(axis=1), ca.max(axis=1)
    lo_b, hi_b = cb.min(axis=1), cb.max(axis=1)
    overlap = (
        (lo_a[:, None, 0] < hi_b[None, :, 0])
        & (lo_b[None, :, 0] < hi_a[:, None, 0])
        & (lo_a[:, None, 1] < hi_b[None, :, 1])
        & (lo_b[None, :, 1] < hi_a[:, None, 1])
    )
    areas_a = arr_a[:, 2] * arr_a[:, 3]
    areas_b = arr_b[:, 2] * arr_b[:, 3]
    polys_a = [tuple(map(tuple, ca[i])) for i in range(n)]
    polys_b = [tuple(map(tuple, cb[j])) for j in range(m)]
    for i, j in zip(*np.nonzero(overlap)):
        inter = polygon_area(clip_convex(polys_a[i], polys_b[j]))
        if inter <= 0.0:
            continue
        union = areas_a[i] + areas_b[j] - inter
        if union > 0.0:
            result[i, j] = max(0.0, min(1.0, inter / union))
    return result
