from __future__ import annotations

import numpy as np
import pytest

from scribbleseg import (
    Ellipsoid,
    ScribbleSet,
    SimulationConfig,
    bbox_of_mask,
    calc_ellipsoid,
    clip_margin,
    corrective_annotator_step,
    empty_mask,
    expand_bbox,
    make_rng,
    sample_user_input,
    simulate_training_annotations,
)
from scribbleseg.simulate import EmptyMarginError, sample_annotation_counts

from .conftest import blob_mask


class TestCalcEllipsoid:
    def test_subvoxel_axes_give_center_only(self):
        mask = calc_ellipsoid(Ellipsoid((4, 4, 4), (0.9, 0.9, 0.9)), (9, 9, 9))
        assert mask.sum() == 1 and mask[4, 4, 4]

    def test_unit_axes_give_center_plus_face_neighbors(self):
        mask = calc_ellipsoid(Ellipsoid((4, 4, 4), (1.0, 1.0, 1.0)), (9, 9, 9))
        # enumerate the 3x3x3 candidate block by the ellipsoid inequality
        expected = empty_mask((9, 9, 9))
        for x in range(3, 6):
            for y in range(3, 6):
                for z in range(3, 6):
                    if (x - 4) ** 2 + (y - 4) ** 2 + (z - 4) ** 2 <= 1:
                        expected[x, y, z] = True
        np.testing.assert_array_equal(mask, expected)
        assert mask.sum() == 7

    def test_corner_center_clips(self):
        mask = calc_ellipsoid(Ellipsoid((0, 0, 0), (2.0, 2.0, 2.0)), (8, 8, 8))
        unclipped = calc_ellipsoid(Ellipsoid((4, 4, 4), (2.0, 2.0, 2.0)), (9, 9, 9))
        assert mask.sum() == unclipped[4:, 4:, 4:].sum()
        assert mask[0, 0, 0]

    def test_center_outside_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            calc_ellipsoid(Ellipsoid((9, 0, 0), (1.0, 1.0, 1.0)), (8, 8, 8))


class TestClipMargin:
    def test_excludes_single_voxel(self):
        gt = empty_mask((9, 9, 9))
        gt[4, 4, 4] = True
        box = expand_bbox(bbox_of_mask(gt), 3.0, (9, 9, 9))
        candidates = clip_margin(box, gt)
        assert candidates.shape[0] == box.num_voxels - 1
        assert not any((tuple(c) == (4, 4, 4)) for c in candidates)

    def test_full_gt_errors(self):
        gt = np.ones((4, 4, 4), dtype=bool)
        with pytest.raises(EmptyMarginError):
            clip_margin(bbox_of_mask(gt), gt)

    def test_counts_on_centered_cube(self):
        gt = empty_mask((16, 16, 16))
        gt[6:10, 6:10, 6:10] = True
        box = expand_bbox(bbox_of_mask(gt), 2.0, (16, 16, 16))
        candidates = clip_margin(box, gt)
        assert candidates.shape[0] == box.num_voxels - 64
        for c in candidates[:: max(1, candidates.shape[0] // 50)]:
            assert not gt[tuple(c)]


class TestSampleUserInput:
    def test_singleton_gt_centers_on_it(self):
        gt = empty_mask((20, 20, 20))
        gt[7, 8, 9] = True
        cfg = SimulationConfig()
        mask = sample_user_input(gt, (20, 20, 20), cfg, "foreground", make_rng(0))
        assert mask[7, 8, 9]
        box = bbox_of_mask(mask)
        center = tuple((lo + hi - 1) // 2 for lo, hi in zip(box.mins, box.maxs))
        assert center == (7, 8, 9)

    def test_foreground_centers_and_axis_bounds(self):
        dims = (40, 30, 20)
        gt = blob_mask(dims)
        cfg = SimulationConfig(alpha=0.1, min_axis=2.0)
        rng = make_rng(42)
        for _ in range(300):
            mask = sample_user_input(gt, dims, cfg, "foreground", rng)
            box = bbox_of_mask(mask)
            # the rasterized extent never exceeds the sampled axis cap
            for k in range(3):
                assert box.maxs[k] - box.mins[k] <= 2 * max(cfg.min_axis, cfg.alpha * dims[k]) + 1

    def test_background_centers_inside_margin(self):
        dims = (32, 32, 32)
        gt = blob_mask(dims)
        cfg = SimulationConfig(beta=2.0)
        expanded = expand_bbox(bbox_of_mask(gt), cfg.beta, dims)
        rng = make_rng(7)
        for _ in range(300):
            before = rng.bit_generator.state
            mask = sample_user_input(gt, dims, cfg, "background", rng)
            rng.bit_generator.state = before
            candidates = clip_margin(expanded, gt)
            pick = candidates[int(rng.integers(candidates.shape[0]))]
            rng.random(3)
            assert not gt[tuple(pick)]
            assert expanded.contains_point(tuple(pick))
            assert mask[tuple(pick)]

    def test_deterministic_given_seed(self):
        dims = (24, 24, 24)
        gt = blob_mask(dims)
        cfg = SimulationConfig()
        a = sample_user_input(gt, dims, cfg, "foreground", make_rng(99))
        b = sample_user_input(gt, dims, cfg, "foreground", make_rng(99))
        np.testing.assert_array_equal(a, b)


class TestTrainingAnnotations:
    def test_degenerate_ranges(self):
        dims = (24, 24, 24)
        gt = blob_mask(dims)
        cfg = SimulationConfig(fg_count_range=(1, 1), bg_count_range=(0, 0))
        scribbles = simulate_training_annotations(gt, dims, cfg, make_rng(3))
        assert scribbles.foreground.any()
        assert not scribbles.background.any()

    def test_counts_stay_in_ranges(self):
        cfg = SimulationConfig()
        rng = make_rng(11)
        for _ in range(500):
            n_fg, n_bg = sample_annotation_counts(cfg, rng)
            assert n_fg in (1, 2, 3)
            assert n_bg in (0, 1)

    def test_classes_disjoint_and_bg_outside_gt(self):
        dims = (28, 28, 28)
        gt = blob_mask(dims)
        rng = make_rng(13)
        cfg = SimulationConfig(bg_count_range=(1, 1))
        for _ in range(50):
            s = simulate_training_annotations(gt, dims, cfg, rng)
            assert not np.any(s.foreground & s.background)
            assert not np.any(s.background & gt)

    def test_empty_margin_downgrades_background(self):
        gt = np.ones((6, 6, 6), dtype=bool)
        cfg = SimulationConfig(fg_count_range=(1, 1), bg_count_range=(1, 1))
        with pytest.warns(UserWarning, match="margin"):
            s = simulate_training_annotations(gt, (6, 6, 6), cfg, make_rng(4))
        assert not s.background.any()

    def test_deterministic_across_runs(self):
        dims = (20, 20, 20)
        gt = blob_mask(dims)
        cfg = SimulationConfig(rng_seed=5)
        a = simulate_training_annotations(gt, dims, cfg, make_rng(cfg.rng_seed))
        b = simulate_training_annotations(gt, dims, cfg, make_rng(cfg.rng_seed))
        np.testing.assert_array_equal(a.foreground, b.foreground)
        np.testing.assert_array_equal(a.background, b.background)


class TestCorrectiveStep:
    def test_perfect_prediction_gives_empty_delta(self):
        dims = (16, 16, 16)
        gt = blob_mask(dims)
        delta = corrective_annotator_step(gt, gt.copy(), SimulationConfig(), make_rng(0))
        assert delta.is_empty()

    def test_empty_prediction_gives_foreground_only(self):
        dims = (24, 24, 24)
        gt = blob_mask(dims)
        delta = corrective_annotator_step(gt, empty_mask(dims), SimulationConfig(), make_rng(1))
        assert delta.foreground.any()
        assert not delta.background.any()
        assert not np.any(delta.foreground & ~gt)

    def test_overgrown_prediction_gets_background_in_spurious_blob(self):
        dims = (32, 32, 32)
        gt = blob_mask(dims, (10, 10, 10), (4.0, 4.0, 4.0))
        spurious = blob_mask(dims, (24, 24, 24), (3.0, 3.0, 3.0))
        prediction = gt | spurious
        delta = corrective_annotator_step(gt, prediction, SimulationConfig(), make_rng(2))
        assert not delta.foreground.any()
        assert delta.background.any()
        assert not np.any(delta.background & gt)
        # scribble centered in the spurious blob, not elsewhere
        assert delta.background[24, 24, 24]

    def test_picks_largest_error_component(self):
        dims = (40, 20, 20)
        big = blob_mask(dims, (10, 10, 10), (5.0, 5.0, 5.0))
        small = blob_mask(dims, (30, 10, 10), (2.0, 2.0, 2.0))
        gt = big | small
        delta = corrective_annotator_step(gt, empty_mask(dims), SimulationConfig(), make_rng(3))
        assert np.any(delta.foreground & big)
        assert not np.any(delta.foreground & small)

    def test_scribbles_are_gt_consistent(self):
        dims = (24, 24, 24)
        gt = blob_mask(dims)
        rng = make_rng(6)
        pred_rng = np.random.default_rng(17)
        for _ in range(20):
            prediction = pred_rng.random(dims) < 0.2
            delta = corrective_annotator_step(gt, prediction, SimulationConfig(), rng)
            assert not np.any(delta.foreground & ~gt)
            assert not np.any(delta.background & gt)


def test_scribbleset_rejects_overlap():
    fg = empty_mask((4, 4, 4))
    bg = empty_mask((4, 4, 4))
    fg[1, 1, 1] = True
    bg[1, 1, 1] = True
    with pytest.raises(ValueError, match="overlap"):
        ScribbleSet(fg, bg)


def test_scribbleset_merge_later_wins():
    dims = (4, 4, 4)
    base_fg = empty_mask(dims)
    base_fg[0, 0, 0] = True
    base_bg = empty_mask(dims)
    base_bg[1, 0, 0] = True
    base = ScribbleSet(base_fg, base_bg)

    delta_fg = empty_mask(dims)
    delta_fg[1, 0, 0] = True  # switches class
    merged = base.merged_with(ScribbleSet(delta_fg, empty_mask(dims)))
    assert merged.foreground[1, 0, 0]
    assert not merged.background[1, 0, 0]
    assert merged.foreground[0, 0, 0]
