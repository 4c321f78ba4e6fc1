"""Scene synthesis: layout guarantees, feature exactness, target spread."""

import math

import numpy as np
import pytest

from rotbox.encoding import decode, encode, lift_aligned
from rotbox.errors import InvalidArgumentError
from rotbox.geometry import aligned_hull, iou_oriented
from rotbox.synthetic import (
    BASE_CHANNELS,
    SceneConfig,
    anchor_normalize,
    generate_scene,
    pool_features,
    render_scene,
    synthesize_training_set,
)


def test_scene_config_validation():
    with pytest.raises(InvalidArgumentError):
        SceneConfig(image_size=8)
    with pytest.raises(InvalidArgumentError):
        SceneConfig(objects_min=3, objects_max=2)
    with pytest.raises(InvalidArgumentError):
        SceneConfig(aspect=(0.5, 2.0))
    with pytest.raises(InvalidArgumentError):
        SceneConfig(territory_pad=2, safety_margin=2)
    with pytest.raises(InvalidArgumentError):
        SceneConfig(jitter_scale=-0.1)


def test_generate_scene_rejects_unplaceable_objects():
    cfg = SceneConfig(image_size=20, long_side=(40.0, 40.0))
    with pytest.raises(InvalidArgumentError):
        generate_scene(np.random.default_rng(0), cfg)


def test_synthesis_is_deterministic():
    a = synthesize_training_set(8, seed=21)
    b = synthesize_training_set(8, seed=21)
    assert a.scenes == b.scenes
    assert a.targets == b.targets
    for fa, fb in zip(a.features, b.features):
        assert np.array_equal(fa.data, fb.data)


def test_territories_are_disjoint_and_inside_the_image():
    ts = synthesize_training_set(25, seed=22)
    for scene in ts.scenes:
        rects = scene.territories
        for idx, (x0, y0, x1, y1) in enumerate(rects):
            assert 0 <= x0 < x1 < scene.size
            assert 0 <= y0 < y1 < scene.size
            for other in rects[idx + 1 :]:
                ox0, oy0, ox1, oy1 = other
                assert x1 < ox0 or ox1 < x0 or y1 < oy0 or oy1 < y0


def test_hrois_stay_clear_of_territory_edges():
    cfg = SceneConfig()
    ts = synthesize_training_set(25, seed=23, config=cfg)
    for scene in ts.scenes:
        for hroi, (x0, y0, x1, y1) in zip(scene.hrois, scene.territories):
            assert hroi.xmin >= x0 + cfg.safety_margin - 1e-12
            assert hroi.ymin >= y0 + cfg.safety_margin - 1e-12
            assert hroi.xmax <= x1 - cfg.safety_margin + 1e-12
            assert hroi.ymax <= y1 - cfg.safety_margin + 1e-12


def test_rendered_channels_are_zero_outside_territories():
    scene = generate_scene(np.random.default_rng(24))
    tensor = render_scene(scene)
    assert tensor.channels == scene.ps_grid**2 * BASE_CHANNELS
    mask = np.zeros((scene.size, scene.size), dtype=bool)
    for x0, y0, x1, y1 in scene.territories:
        mask[y0 : y1 + 1, x0 : x1 + 1] = True
    outside = tensor.data[~mask]
    assert np.all(outside == 0.0)
    # occupancy channel is exactly 1 inside every territory
    for x0, y0, x1, y1 in scene.territories:
        assert np.all(tensor.data[y0 : y1 + 1, x0 : x1 + 1, 0] == 1.0)


def test_pooled_features_carry_the_exact_target_in_every_bin():
    ts = synthesize_training_set(20, seed=25)
    assert len(ts.targets) >= 20
    for feature, target in zip(ts.features, ts.targets):
        t = np.asarray(target.astuple())
        for i in range(feature.k):
            for j in range(feature.k):
                assert feature.data[i, j, 0] == 1.0  # occupancy
                assert np.abs(feature.data[i, j, 1:6] - t).max() < 1e-12


def test_class_channel_survives_pooling():
    ts = synthesize_training_set(15, seed=26)
    for feature, s, h in zip(ts.features, ts.pair_scene, ts.pair_hroi):
        want = float(ts.scenes[s].class_ids[h])
        assert feature.data[0, 0, 6] == pytest.approx(want, abs=1e-9)


def test_zero_jitter_hrois_equal_hulls_and_targets_are_side_ratios():
    cfg = SceneConfig(jitter_scale=0.0, jitter_shift=0.0)
    ts = synthesize_training_set(12, seed=27, config=cfg)
    assert len(ts.targets) == sum(len(s.gts) for s in ts.scenes)  # hull IoU is 1
    for target, s, h in zip(ts.targets, ts.pair_scene, ts.pair_hroi):
        gt = ts.scenes[s].gts[h]
        hull = aligned_hull(gt)
        assert ts.scenes[s].hrois[h] == hull
        assert target.tx == pytest.approx(0.0, abs=1e-12)
        assert target.ty == pytest.approx(0.0, abs=1e-12)
        assert target.tw == pytest.approx(math.log(gt.w / hull.width), abs=1e-12)
        assert target.th == pytest.approx(math.log(gt.h / hull.height), abs=1e-12)
        assert target.ttheta == pytest.approx(gt.theta / (2 * math.pi), abs=1e-12)


def test_ttheta_targets_span_the_unit_interval():
    # distribution sanity, deliberately loose: raw poses are uniform in
    # [0, 2pi) so normalized angle targets should fill [0, 1)
    values = [t.ttheta for t in synthesize_training_set(400, seed=28).targets]
    assert len(values) > 400
    assert min(values) < 0.05 and max(values) > 0.95
    hist, _ = np.histogram(values, bins=10, range=(0.0, 1.0))
    assert np.all(hist > 0)
    assert all(0.0 <= v < 1.0 for v in values)


def test_decoding_the_target_recovers_the_ground_truth():
    ts = synthesize_training_set(15, seed=29)
    for target, anchor, s, h in zip(ts.targets, ts.anchors, ts.pair_scene, ts.pair_hroi):
        gt = ts.scenes[s].gts[h]
        recovered = decode(anchor, target)
        assert iou_oriented(recovered, gt) > 1.0 - 1e-9


def test_anchor_normalize_matches_direct_encode():
    # pooled features of a clean HRoI, re-expressed in its frame, must equal
    # the encode() of (anchor, gt) channel for channel
    scene = generate_scene(np.random.default_rng(30))
    tensor = render_scene(scene)
    for gt, hroi in zip(scene.gts, scene.hrois):
        feature, anchor = pool_features(tensor, hroi)
        want = np.asarray(encode(anchor, gt).astuple())
        for i in range(feature.k):
            for j in range(feature.k):
                assert np.abs(feature.data[i, j, 1:6] - want).max() < 1e-12


def test_anchor_normalize_rejects_wrong_channel_count():
    from rotbox.roi_align import PooledFeature

    pooled = PooledFeature(np.zeros((2, 2, 5)))
    with pytest.raises(InvalidArgumentError):
        anchor_normalize(pooled, lift_aligned(aligned_hull(generate_scene(
            np.random.default_rng(31)).gts[0])))


def test_synthesize_rejects_bad_n():
    with pytest.raises(InvalidArgumentError):
        synthesize_training_set(0, seed=1)
