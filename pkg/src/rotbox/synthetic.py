"""Synthetic scenes with analytic feature maps for desk-scale training.

Each scene scatters a few oriented rectangles into disjoint axis-aligned
"territories". Inside its territory an object paints seven analytic
channels per pixel (x, y are pixel-center coordinates):

    0  occupancy, constant 1
    1  gt_cx - x
    2  gt_cy - y
    3  log gt_w
    4  log gt_h
    5  gt_theta (raw pose in [0, 2pi))
    6  class id

Pixels outside every territory stay zero. The channel block is replicated
k*k times so the position-sensitive pooling layout sees the same base
fields in every bin block. Channels 1 and 2 are affine in (x, y) and the
rest are constant per territory, so bilinear sampling is exact as long as
sample points stay a safe margin inside the territory. The generator
enforces that margin, which is what makes `anchor_normalize` able to
reconstruct regression targets exactly and keeps the learning problem
realizable by a linear model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assigner import assign_horizontal, build_targets
from .encoding import OffsetVector, lift_aligned
from .errors import InvalidArgumentError
from .geometry import AlignedBox, OrientedBox, aligned_hull
from .roi_align import FeatureTensor, PooledFeature, rps_roi_align, transform_point

__all__ = [
    "BASE_CHANNELS",
    "SceneConfig",
    "SyntheticScene",
    "TrainingSet",
    "anchor_normalize",
    "generate_scene",
    "render_scene",
    "synthesize_training_set",
]

BASE_CHANNELS = 7
_OCC, _DX, _DY, _LOGW, _LOGH, _THETA, _CLS = range(BASE_CHANNELS)
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SceneConfig:
    """Geometry ranges and layout constants for scene synthesis."""

    image_size: int = 48
    ps_grid: int = 3
    samples_per_bin_side: int = 2
    objects_min: int = 1
    objects_max: int = 3
    long_side: tuple[float, float] = (8.0, 14.0)
    aspect: tuple[float, float] = (1.2, 3.0)
    jitter_scale: float = 0.06
    jitter_shift: float = 0.05
    territory_pad: int = 4      # hull to territory edge
    safety_margin: int = 2      # territory edge to any RoI sample
    border: int = 2
    num_classes: int = 3
    pos_thresh: float = 0.5

    def __post_init__(self) -> None:
        if self.image_size < 16:
            raise InvalidArgumentError("image_size must be at least 16")
        if self.ps_grid < 1 or self.samples_per_bin_side < 1:
            raise InvalidArgumentError("grid sizes must be >= 1")
        if not 1 <= self.objects_min <= self.objects_max:
            raise InvalidArgumentError("need 1 <= objects_min <= objects_max")
        if not 0.0 < self.long_side[0] <= self.long_side[1]:
            raise InvalidArgumentError("long_side range must be positive and ordered")
        if not 1.0 <= self.aspect[0] <= self.aspect[1]:
            raise InvalidArgumentError("aspect range must start at 1 or above")
        if self.jitter_scale < 0 or self.jitter_shift < 0:
            raise InvalidArgumentError("jitter amounts must be >= 0")
        if self.territory_pad <= self.safety_margin:
            raise InvalidArgumentError("territory_pad must exceed safety_margin")
        if self.num_classes < 1:
            raise InvalidArgumentError("num_classes must be >= 1")
        if not 0.0 < self.pos_thresh < 1.0:
            raise InvalidArgumentError("pos_thresh must be in (0, 1)")


@dataclass(frozen=True)
class SyntheticScene:
    """One generated scene: ground truth poses, their territories, and HRoIs."""

    size: int
    ps_grid: int
    gts: tuple[OrientedBox, ...]
    class_ids: tuple[int, ...]
    territories: tuple[tuple[int, int, int, int], ...]  # inclusive pixel rects
    hrois: tuple[AlignedBox, ...]

    def __post_init__(self) -> None:
        n = len(self.gts)
        if not (len(self.class_ids) == len(self.territories) == len(self.hrois) == n):
            raise InvalidArgumentError("scene lists must have equal length")


@dataclass(frozen=True)
class TrainingSet:
    """Positive training pairs plus the scenes they came from.

    features holds anchor-normalized pooled features (see anchor_normalize);
    targets holds the matching encoded offsets. anchors are the lifted HRoIs,
    and (pair_scene, pair_hroi) locate each pair's origin.
    """

    scenes: tuple[SyntheticScene, ...]
    features: tuple[PooledFeature, ...]
    targets: tuple[OffsetVector, ...]
    anchors: tuple[OrientedBox, ...]
    pair_scene: tuple[int, ...]
    pair_hroi: tuple[int, ...]

    def pairs(self) -> list[tuple[PooledFeature, OffsetVector]]:
        return list(zip(self.features, self.targets))


def _hull_half_extents(w: float, h: float, theta: float) -> tuple[float, float]:
    c, s = abs(math.cos(theta)), abs(math.sin(theta))
    return (w * c + h * s) / 2.0, (w * s + h * c) / 2.0


def _rects_disjoint(a: tuple[int, int, int, int], b: tuple[int, int, int, int], gap: int) -> bool:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    return ax1 + gap < bx0 or bx1 + gap < ax0 or ay1 + gap < by0 or by1 + gap < ay0


def generate_scene(rng: np.random.Generator, config: SceneConfig = SceneConfig()) -> SyntheticScene:
    """Place objects in disjoint territories and jitter an HRoI per object."""
    size = config.image_size
    gts: list[OrientedBox] = []
    class_ids: list[int] = []
    territories: list[tuple[int, int, int, int]] = []
    hrois: list[AlignedBox] = []

    wanted = int(rng.integers(config.objects_min, config.objects_max + 1))
    for _ in range(wanted):
        for _attempt in range(60):
            w = float(rng.uniform(*config.long_side))
            h = w / float(rng.uniform(*config.aspect))
            theta = float(rng.uniform(0.0, _TWO_PI))
            ex, ey = _hull_half_extents(w, h, theta)
            thx, thy = ex + config.territory_pad, ey + config.territory_pad
            lo_x, hi_x = config.border + thx, size - config.border - thx
            lo_y, hi_y = config.border + thy, size - config.border - thy
            if lo_x >= hi_x or lo_y >= hi_y:
                continue
            cx = float(rng.uniform(lo_x, hi_x))
            cy = float(rng.uniform(lo_y, hi_y))
            rect = (
                math.floor(cx - thx),
                math.floor(cy - thy),
                math.ceil(cx + thx),
                math.ceil(cy + thy),
            )
            if not all(_rects_disjoint(rect, other, gap=1) for other in territories):
                continue
            gt = OrientedBox(cx, cy, w, h, theta)
            gts.append(gt)
            class_ids.append(int(rng.integers(0, config.num_classes)))
            territories.append(rect)
            hrois.append(_jitter_hull(rng, gt, rect, config))
            break

    if not gts:
        raise InvalidArgumentError(
            f"no object fits an image of size {size}; enlarge image_size or shrink objects"
        )
    return SyntheticScene(
        size=size,
        ps_grid=config.ps_grid,
        gts=tuple(gts),
        class_ids=tuple(class_ids),
        territories=tuple(territories),
        hrois=tuple(hrois),
    )


def _jitter_hull(
    rng: np.random.Generator,
    gt: OrientedBox,
    rect: tuple[int, int, int, int],
    config: SceneConfig,
) -> AlignedBox:
    hull = aligned_hull(gt)
    js, jt = config.jitter_scale, config.jitter_shift
    # corner deltas, so zero jitter reproduces the hull bit for bit
    gx = float(rng.uniform(-js, js)) * hull.width / 2.0
    gy = float(rng.uniform(-js, js)) * hull.height / 2.0
    dx = float(rng.uniform(-jt, jt)) * hull.width
    dy = float(rng.uniform(-jt, jt)) * hull.height

    # samples taken inside the HRoI must stay clear of the territory edge
    m = config.safety_margin
    x0 = max(hull.xmin + dx - gx, rect[0] + m)
    y0 = max(hull.ymin + dy - gy, rect[1] + m)
    x1 = min(hull.xmax + dx + gx, rect[2] - m)
    y1 = min(hull.ymax + dy + gy, rect[3] - m)
    return AlignedBox(x0, y0, x1, y1)


def render_scene(scene: SyntheticScene) -> FeatureTensor:
    """Paint the analytic channels and replicate them into the PS layout."""
    size = scene.size
    base = np.zeros((size, size, BASE_CHANNELS), dtype=np.float64)
    for gt, cls, (x0, y0, x1, y1) in zip(scene.gts, scene.class_ids, scene.territories):
        xs = np.arange(x0, x1 + 1, dtype=np.float64)
        ys = np.arange(y0, y1 + 1, dtype=np.float64)
        base[y0 : y1 + 1, x0 : x1 + 1, _OCC] = 1.0
        base[y0 : y1 + 1, x0 : x1 + 1, _DX] = gt.cx - xs[None, :]
        base[y0 : y1 + 1, x0 : x1 + 1, _DY] = gt.cy - ys[:, None]
        base[y0 : y1 + 1, x0 : x1 + 1, _LOGW] = math.log(gt.w)
        base[y0 : y1 + 1, x0 : x1 + 1, _LOGH] = math.log(gt.h)
        base[y0 : y1 + 1, x0 : x1 + 1, _THETA] = gt.theta
        base[y0 : y1 + 1, x0 : x1 + 1, _CLS] = float(cls)
    k = scene.ps_grid
    return FeatureTensor(np.tile(base, (1, 1, k * k)))


def anchor_normalize(pooled: PooledFeature, anchor: OrientedBox) -> PooledFeature:
    """Re-express pooled analytic channels in the anchor's own frame.

    Output channels per bin: occupancy, tx, ty, tw, th, ttheta, class id,
    where the middle five are the offsets the anchor would need to reach the
    pooled object. When every sample of a bin landed inside one territory,
    those channels equal the encoded regression target of (anchor, object)
    in every bin, so a linear readout of these features is exact.
    """
    if pooled.channels_out != BASE_CHANNELS:
        raise InvalidArgumentError(
            f"expected {BASE_CHANNELS} pooled channels, got {pooled.channels_out}"
        )
    k = pooled.k
    cos_t, sin_t = math.cos(anchor.theta), math.sin(anchor.theta)
    log_w, log_h = math.log(anchor.w), math.log(anchor.h)
    out = np.empty_like(pooled.data)
    for i in range(k):
        for j in range(k):
            occ, dxp, dyp, lw, lh, th, cls = pooled.data[i, j]
            # pooled dx/dy are relative to the bin's mean sample point; shift
            # them to the anchor center before rotating into its frame
            xbar, ybar = transform_point(
                anchor, (i + 0.5) * anchor.w / k, (j + 0.5) * anchor.h / k
            )
            dx = dxp + (xbar - anchor.cx)
            dy = dyp + (ybar - anchor.cy)
            tx = (dx * cos_t + dy * sin_t) / anchor.w
            ty = (dy * cos_t - dx * sin_t) / anchor.h
            dth = (th - anchor.theta) % _TWO_PI
            if dth >= _TWO_PI:
                dth = 0.0
            out[i, j] = (occ, tx, ty, lw - log_w, lh - log_h, dth / _TWO_PI, cls)
    return PooledFeature(out)


def pool_features(
    tensor: FeatureTensor,
    hroi: AlignedBox,
    config: SceneConfig = SceneConfig(),
) -> tuple[PooledFeature, OrientedBox]:
    """Pool a lifted HRoI from the scene tensor and normalize to its frame."""
    anchor = lift_aligned(hroi)
    pooled = rps_roi_align(
        tensor, anchor, k=config.ps_grid, samples_per_bin_side=config.samples_per_bin_side
    )
    return anchor_normalize(pooled, anchor), anchor


def synthesize_training_set(
    n: int,
    seed: int,
    config: SceneConfig = SceneConfig(),
) -> TrainingSet:
    """Generate n scenes and collect (feature, target) pairs for positives."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)

    scenes: list[SyntheticScene] = []
    features: list[PooledFeature] = []
    targets: list[OffsetVector] = []
    anchors: list[OrientedBox] = []
    pair_scene: list[int] = []
    pair_hroi: list[int] = []

    for scene_index in range(n):
        scene = generate_scene(rng, config)
        scenes.append(scene)
        tensor = render_scene(scene)
        assignments = assign_horizontal(list(scene.hrois), list(scene.gts), config.pos_thresh)
        built, _labels = build_targets(list(scene.hrois), assignments, list(scene.gts))
        built_iter = iter(built)
        for hroi_index, assignment in enumerate(assignments):
            if not assignment.positive:
                continue
            feature, anchor = pool_features(tensor, scene.hrois[hroi_index], config)
            features.append(feature)
            targets.append(next(built_iter))
            anchors.append(anchor)
            pair_scene.append(scene_index)
            pair_hroi.append(hroi_index)

    return TrainingSet(
        scenes=tuple(scenes),
        features=tuple(features),
        targets=tuple(targets),
        anchors=tuple(anchors),
        pair_scene=tuple(pair_scene),
        pair_hroi=tuple(pair_hroi),
    )
