"""Renderer, edge detector, contour tracer, feature calibration, and the
dataset builder, each checked against independent pixel-count oracles."""

from __future__ import annotations

import numpy as np
import pytest

from tissuebench.errors import ConfigError, RangeError
from tissuebench.vision import (
    AugmentationConfig,
    FeatureExtractor,
    RenderConfig,
    SoftmaxAreaClassifier,
    build_dataset,
    detect_edges,
    largest_contour_area,
    render_frame,
    trace_contours,
)
from tissuebench.vision.dataset import (
    adjust_intensity,
    augment_frame,
    crop_rescale_nearest,
    flip_lr,
    rotate_nearest,
)
from tissuebench.vision.deformation_map import (
    DEFORMATION_CLASSES,
    class_midpoint_mm,
    ground_truth_deformation,
)
from tissuebench.vision.render import notch_area_px2, read_pgm, write_pgm


# ---------------------------------------------------------------------------
# renderer

def test_render_undeformed_area_is_exact():
    frame = render_frame(0.0)
    assert frame.silhouette_area_px2 == frame.config.undeformed_area_px2
    assert int(frame.tissue_mask().sum()) == frame.config.undeformed_area_px2


def test_render_full_stroke_removes_max_notch():
    frame = render_frame(35.0)
    cfg = frame.config
    assert frame.silhouette_area_px2 == cfg.undeformed_area_px2 - cfg.max_notch_area_px2
    assert int(frame.tissue_mask().sum()) == frame.silhouette_area_px2


def test_render_area_reduction_tracks_ground_truth_exactly():
    # Pixel-count oracle: mask area reduction within 1 px^2 of the nominal
    # fraction at every probed position.
    cfg = RenderConfig()
    for pos in (12.0, 15.0, 21.7, 25.9, 30.1, 33.3, 35.0):
        frame = render_frame(pos, cfg)
        reduction = cfg.undeformed_area_px2 - int(frame.tissue_mask().sum())
        expected = ground_truth_deformation(pos) / 100.0 * cfg.max_notch_area_px2
        assert abs(reduction - expected) <= 1.0


def test_render_thirtythree_percent_notch():
    cfg = RenderConfig()
    frame = render_frame(21.7, cfg)
    reduction = cfg.undeformed_area_px2 - int(frame.tissue_mask().sum())
    assert abs(reduction - 0.33 * cfg.max_notch_area_px2) <= 1.0


def test_render_intensity_levels_distinct():
    frame = render_frame(20.0)
    cfg = frame.config
    present = set(np.unique(frame.pixels).tolist())
    assert {cfg.background_level, cfg.tissue_level, cfg.knife_level} <= present


def test_render_deterministic():
    a = render_frame(17.3)
    b = render_frame(17.3)
    assert np.array_equal(a.pixels, b.pixels)


def test_render_silhouette_strictly_decreasing_beyond_contact():
    cfg = RenderConfig()
    grid = np.linspace(cfg.contact_mm + 0.2, 35.0, 120)
    areas = [render_frame(float(p), cfg).silhouette_area_px2 for p in grid]
    assert all(b < a for a, b in zip(areas, areas[1:]))


def test_render_rejects_out_of_range():
    with pytest.raises(RangeError):
        render_frame(-1.0)
    with pytest.raises(RangeError):
        render_frame(35.5)


def test_render_rejects_degenerate_geometry():
    with pytest.raises(ConfigError):
        RenderConfig(tissue_size_px=0)


def test_pgm_round_trip(tmp_path):
    frame = render_frame(22.0)
    path = tmp_path / "frame.pgm"
    write_pgm(frame.pixels, path)
    loaded = read_pgm(path)
    assert np.array_equal(loaded, frame.pixels)


# ---------------------------------------------------------------------------
# edge detection

def test_edges_uniform_frame_empty():
    assert not detect_edges(np.full((64, 64), 128, dtype=np.uint8)).any()


def test_edges_step_edge_one_to_two_pixels_wide():
    img = np.zeros((32, 32), dtype=np.uint8)
    img[:, 16:] = 255
    edges = detect_edges(img)
    cols = np.unique(np.nonzero(edges)[1])
    assert set(cols.tolist()) <= {15, 16}
    assert len(cols) in (1, 2)
    assert np.all(edges[:, 15])


def test_edges_contain_tissue_boundary():
    # Oracle from the renderer: every silhouette boundary pixel (a tissue
    # pixel with a non-tissue 4-neighbor) must be marked.
    frame = render_frame(25.0)
    mask = frame.tissue_mask()
    edges = detect_edges(frame.pixels)
    interior = (
        mask
        & np.roll(mask, 1, 0) & np.roll(mask, -1, 0)
        & np.roll(mask, 1, 1) & np.roll(mask, -1, 1)
    )
    boundary = mask & ~interior
    assert np.all(edges[boundary])


def test_edges_threshold_validation():
    with pytest.raises(ConfigError):
        detect_edges(np.zeros((4, 4), dtype=np.uint8), threshold=0.0)


# ---------------------------------------------------------------------------
# contour tracing

def _filled_square_edges(size: int, top: int, left: int, side: int) -> np.ndarray:
    img = np.zeros((size, size), dtype=np.uint8)
    img[top:top + side, left:left + side] = 255
    return detect_edges(img)


def test_contours_empty_map():
    assert trace_contours(np.zeros((16, 16), dtype=bool)) == []


def test_contours_square_matches_pixel_count_oracle():
    side = 100
    edges = _filled_square_edges(200, 50, 50, side)
    contours = trace_contours(edges)
    assert len(contours) == 1
    oracle = side * side
    assert abs(contours[0].area - oracle) / oracle <= 0.04
    assert contours[0].is_closed()


def test_contours_two_disjoint_squares():
    img = np.zeros((240, 240), dtype=np.uint8)
    img[20:90, 20:90] = 255       # 70 x 70
    img[110:210, 110:210] = 255   # 100 x 100
    contours = trace_contours(detect_edges(img))
    assert len(contours) == 2
    assert abs(contours[0].area - 100 * 100) / (100 * 100) <= 0.04
    assert abs(contours[1].area - 70 * 70) / (70 * 70) <= 0.04
    assert contours[0].area > contours[1].area  # sorted largest first


def test_contours_all_closed_on_rendered_frames():
    for pos in (0.0, 14.0, 27.0, 35.0):
        frame = render_frame(pos)
        for contour in trace_contours(detect_edges(frame.pixels)):
            assert contour.is_closed()


def test_largest_contour_fast_path_matches_full_trace():
    for pos in (0.0, 13.0, 21.7, 29.0, 35.0):
        edges = detect_edges(render_frame(pos).pixels)
        full = trace_contours(edges)
        assert largest_contour_area(edges) == pytest.approx(full[0].area)


def test_contour_area_within_four_percent_of_mask_oracle():
    cfg = RenderConfig()
    for pos in np.linspace(0.0, 35.0, 30):
        frame = render_frame(float(pos), cfg)
        traced = largest_contour_area(detect_edges(frame.pixels))
        oracle = int(frame.tissue_mask().sum())
        assert abs(traced - oracle) / oracle <= 0.04


def test_single_pixel_component():
    edge_map = np.zeros((8, 8), dtype=bool)
    edge_map[3, 4] = True
    contours = trace_contours(edge_map)
    assert len(contours) == 1
    assert contours[0].area == 0.0
    assert len(contours[0].points) == 1


def test_contours_terminate_and_close_on_random_noise():
    # Adversarial jaggy components: the tracer must terminate and every
    # boundary must stay closed.
    rng = np.random.default_rng(3)
    for density in (0.1, 0.3, 0.5):
        edge_map = rng.random((72, 72)) < density
        contours = trace_contours(edge_map)
        assert len(contours) >= 1
        for contour in contours:
            assert contour.is_closed()
            assert contour.area >= 0.0


# ---------------------------------------------------------------------------
# feature calibration

def test_feature_extractor_hits_anchor_fractions():
    fx = FeatureExtractor()
    for cls in DEFORMATION_CLASSES[1:]:
        pos = cls.position_range_mm[1]
        frame = render_frame(pos)
        fraction = fx.fraction_from_frame(frame.pixels)
        assert fraction == pytest.approx(cls.nominal_deformation_pct / 100.0,
                                         abs=1e-6)


def test_feature_extractor_midpoints_land_midway():
    fx = FeatureExtractor()
    frame = render_frame(class_midpoint_mm(DEFORMATION_CLASSES[1]))
    assert fx.fraction_from_frame(frame.pixels) == pytest.approx(0.165, abs=0.01)


def test_classifier_argmax_matches_position_class_at_midpoints():
    fx = FeatureExtractor()
    clf = SoftmaxAreaClassifier()
    for cls in DEFORMATION_CLASSES:
        frame = render_frame(class_midpoint_mm(cls))
        fraction = fx.fraction_from_frame(frame.pixels)
        assert clf.predict_class(fraction).index == cls.index


# ---------------------------------------------------------------------------
# augmentation

def test_flip_is_involution():
    frame = render_frame(18.0)
    assert np.array_equal(flip_lr(flip_lr(frame.pixels)), frame.pixels)


def test_rotation_by_360_restores_frame():
    frame = render_frame(18.0)
    assert np.array_equal(rotate_nearest(frame.pixels, 360.0), frame.pixels)
    assert np.array_equal(rotate_nearest(frame.pixels, -720.0), frame.pixels)


def test_rotation_changes_frame():
    frame = render_frame(18.0)
    assert not np.array_equal(rotate_nearest(frame.pixels, 10.0), frame.pixels)


def test_intensity_adjustment_clips():
    img = np.array([[0, 128, 255]], dtype=np.uint8)
    out = adjust_intensity(img, 1.5, 20.0)
    assert out.dtype == np.uint8
    assert out[0, 2] == 255
    assert out[0, 0] == 20


def test_crop_rescale_preserves_shape():
    frame = render_frame(18.0)
    out = crop_rescale_nearest(frame.pixels, 0.05)
    assert out.shape == frame.pixels.shape


def test_area_preserving_augment_keeps_traced_area():
    from tissuebench.vision.features import measure_silhouette_area

    frame = render_frame(23.0)
    base_area = measure_silhouette_area(frame.pixels)
    cfg = AugmentationConfig(rotation_prob=0.0, random_crop=0.0)
    for i in range(8):
        rng = np.random.default_rng(i)
        pixels, preserving = augment_frame(frame.pixels, cfg, rng,
                                           fill=frame.config.background_level)
        assert preserving
        assert measure_silhouette_area(pixels) == pytest.approx(base_area)


def test_augment_bit_reproducible_for_seed():
    frame = render_frame(19.0)
    cfg = AugmentationConfig()
    for seed in range(6):
        a, _ = augment_frame(frame.pixels, cfg, np.random.default_rng(seed),
                             fill=frame.config.background_level)
        b, _ = augment_frame(frame.pixels, cfg, np.random.default_rng(seed),
                             fill=frame.config.background_level)
        assert np.array_equal(a, b)


def test_pipeline_round_trip_bound_per_point():
    # |predict(render -> edges -> contours -> area) - ground truth| stays
    # within the regression tolerance at every grid point.
    from tissuebench.vision import build_dataset, fit_area_regressor, predict_deformation
    from tissuebench.vision.features import measure_silhouette_area

    fx = FeatureExtractor()
    ds = build_dataset(n_base=80, aug=None, seed=19)
    train = ds.split_records("train")
    reg = fit_area_regressor(
        [r.contour_area_px2 for r in train],
        [r.ground_truth_pct for r in train],
        fx.reference_area,
    )
    tolerance = 4.23 + max(reg.val_rmse_pct, 0.1)
    for pos in np.linspace(0.0, 35.0, 60):
        area = measure_silhouette_area(render_frame(float(pos)).pixels)
        predicted = predict_deformation(reg, area, fx.reference_area)
        truth = ground_truth_deformation(float(pos))
        assert abs(predicted - truth) <= tolerance


# ---------------------------------------------------------------------------
# dataset builder

def test_dataset_exact_count_without_augmentation():
    ds = build_dataset(n_base=10, aug=None, seed=3)
    assert len(ds.records) == 10
    assert all(not r.augmented for r in ds.records)


def test_dataset_augmentation_adds_variants():
    ds = build_dataset(n_base=10, aug=AugmentationConfig(variants_per_frame=2),
                       seed=3)
    assert len(ds.records) == 30
    assert sum(r.augmented for r in ds.records) == 20


def test_dataset_split_sizes_7_2_1():
    ds = build_dataset(n_base=50, aug=None, seed=3)
    sizes = ds.base_split_sizes()
    assert sizes == {"train": 35, "val": 10, "test": 5}


def test_dataset_manifest_deterministic():
    a = build_dataset(n_base=12, aug=AugmentationConfig(), seed=21)
    b = build_dataset(n_base=12, aug=AugmentationConfig(), seed=21)
    assert a.manifest_csv() == b.manifest_csv()
    c = build_dataset(n_base=12, aug=AugmentationConfig(), seed=22)
    assert a.manifest_csv() != c.manifest_csv()


def test_dataset_records_labeled_consistently():
    from tissuebench.vision.deformation_map import class_from_position

    ds = build_dataset(n_base=20, aug=None, seed=4)
    for record in ds.records:
        assert record.class_id == class_from_position(record.knife_mm).name
        assert record.ground_truth_pct == pytest.approx(
            ground_truth_deformation(record.knife_mm)
        )


def test_dataset_write_layout(tmp_path):
    ds = build_dataset(n_base=10, aug=None, seed=5, keep_frames=True)
    ds.write(tmp_path, write_frames=True)
    assert (tmp_path / "manifest.csv").exists()
    for name in ("train", "val", "test"):
        assert (tmp_path / f"{name}.csv").exists()
    pgms = list((tmp_path / "frames").glob("*.pgm"))
    assert len(pgms) == 10
    header = (tmp_path / "manifest.csv").read_text().splitlines()[0]
    assert header == "frame_path,knife_mm,class_id,ground_truth_pct,contour_area_px2"
