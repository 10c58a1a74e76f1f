"""Position/deformation maps, the classifier, the probability combiners,
and the area regressor."""

from __future__ import annotations

import numpy as np
import pytest

from tissuebench.errors import ContractError, FitError, RangeError
from tissuebench.vision import (
    AreaRegressor,
    ClassProbabilities,
    SoftmaxAreaClassifier,
    class_from_position,
    decide_deformation,
    fit_area_regressor,
    ground_truth_deformation,
    optimized_deformation,
    predict_deformation,
)
from tissuebench.vision.classify import argmax_class
from tissuebench.vision.deformation_map import DEFORMATION_CLASSES


# ---------------------------------------------------------------------------
# ground_truth_deformation / class_from_position

def test_ground_truth_knots():
    assert ground_truth_deformation(5.0) == 0.0
    assert ground_truth_deformation(12.0) == 0.0
    assert ground_truth_deformation(21.7) == pytest.approx(33.0)
    assert ground_truth_deformation(30.1) == pytest.approx(67.0)
    assert ground_truth_deformation(35.0) == pytest.approx(100.0)


def test_ground_truth_interpolated_point():
    # 33 + (25.9 - 21.7) / (30.1 - 21.7) * 34 = 50
    assert ground_truth_deformation(25.9) == pytest.approx(50.0)


def test_ground_truth_monotone():
    grid = np.linspace(0.0, 35.0, 400)
    values = [ground_truth_deformation(float(p)) for p in grid]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_ground_truth_range_error():
    with pytest.raises(RangeError):
        ground_truth_deformation(-0.01)
    with pytest.raises(RangeError):
        ground_truth_deformation(35.01)


def test_class_ranges():
    assert class_from_position(5.0).name == "Compress00"
    assert class_from_position(12.0).name == "Compress01"  # half-open boundary
    assert class_from_position(21.69).name == "Compress01"
    assert class_from_position(21.7).name == "Compress02"
    assert class_from_position(30.1).name == "Compress03"
    assert class_from_position(35.0).name == "Compress03"  # closed at the top


def test_class_ranges_partition_stroke():
    for p in np.linspace(0.0, 35.0, 1000):
        cls = class_from_position(float(p))
        low, high = cls.position_range_mm
        assert low <= p and (p < high or (p == 35.0 and high == 35.0))


def test_nominal_values_strictly_increasing():
    values = [c.nominal_deformation_pct for c in DEFORMATION_CLASSES]
    assert values == sorted(values)
    assert len(set(values)) == len(values)


def test_class_from_deformation_tracks_position_classes():
    from tissuebench.vision.deformation_map import class_from_deformation

    # Inverting the deformation map must agree with the position ranges at
    # every depth, including between midpoints (e.g. 25 mm -> Compress02).
    # Exactly 12 mm is excluded: 0% deformation there is indistinguishable
    # from free space, so the inversion reports Compress00.
    for p in np.linspace(0.0, 35.0, 351):
        if p == 12.0:
            continue
        expected = class_from_position(float(p))
        got = class_from_deformation(ground_truth_deformation(float(p)))
        assert got.index == expected.index, f"at {p} mm"


def test_class_from_deformation_range_error():
    from tissuebench.vision.deformation_map import class_from_deformation

    with pytest.raises(RangeError):
        class_from_deformation(-0.1)
    with pytest.raises(RangeError):
        class_from_deformation(100.5)


# ---------------------------------------------------------------------------
# classifier

def test_classifier_zero_distance_dominates():
    clf = SoftmaxAreaClassifier(temperature=0.05)
    probs = clf.classify(0.33)
    assert probs.p[1] > 0.95
    assert probs.top1() == 1


def test_classifier_zero_reduction_is_compress00():
    clf = SoftmaxAreaClassifier()
    probs = clf.classify(0.0)
    assert probs.top1() == 0


def test_classifier_half_reduction_top2():
    # Distances {0.5, 0.17, 0.17, 0.5}: softmax arithmetic puts classes 1 and
    # 2 on top with equal mass.
    clf = SoftmaxAreaClassifier(temperature=0.05)
    probs = clf.classify(0.5)
    order = np.argsort(probs.p)[::-1]
    assert set(order[:2].tolist()) == {1, 2}
    assert probs.p[1] == pytest.approx(probs.p[2], rel=1e-9)
    expected = np.exp(-np.array([0.5, 0.17, 0.17, 0.5]) / 0.05)
    expected /= expected.sum()
    assert np.allclose(probs.as_array(), expected, atol=1e-12)


def test_classifier_tie_break_goes_to_higher_class():
    clf = SoftmaxAreaClassifier()
    # Exactly midway between the class-0 and class-1 nominal fractions.
    assert clf.predict_class(0.165).index == 1
    assert clf.predict_class(0.5).index == 2
    assert clf.predict_class(0.835).index == 3


def test_classifier_rejects_out_of_range_feature():
    clf = SoftmaxAreaClassifier()
    with pytest.raises(ContractError):
        clf.classify(1.2)
    with pytest.raises(ContractError):
        clf.classify(-0.1)


def test_argmax_class_helper():
    probs = ClassProbabilities((0.1, 0.4, 0.4, 0.1))
    assert argmax_class(probs).index == 2  # tie toward the higher class


def test_class_probabilities_validation():
    with pytest.raises(ContractError):
        ClassProbabilities((0.5, 0.5, 0.5, -0.5))
    with pytest.raises(ContractError):
        ClassProbabilities((0.3, 0.3, 0.3, 0.3))


# ---------------------------------------------------------------------------
# optimized_deformation

def test_optimized_deformation_published_example():
    # (0.9783 * 33) + (0.0213 * 0) + (0.004 * 67) + (0 * 100) = 32.5519
    value = optimized_deformation([0.0213, 0.9783, 0.004, 0.0])
    assert value == pytest.approx(32.5519, abs=1e-4)


def test_optimized_deformation_one_hot_and_uniform():
    assert optimized_deformation([0.0, 0.0, 0.0, 1.0]) == 100.0
    assert optimized_deformation([0.25, 0.25, 0.25, 0.25]) == pytest.approx(50.0)


def test_optimized_deformation_permutation_invariant():
    rng = np.random.default_rng(5)
    nominal = [0.0, 33.0, 67.0, 100.0]
    for _ in range(100):
        p = rng.dirichlet(np.ones(4))
        base = optimized_deformation(p, nominal)
        perm = rng.permutation(4)
        permuted = optimized_deformation(p[perm], [nominal[i] for i in perm])
        assert permuted == pytest.approx(base, abs=1e-9)
        assert 0.0 <= base <= 100.0


# ---------------------------------------------------------------------------
# decide_deformation

def test_decide_snaps_compress00_above_090():
    assert decide_deformation([0.92, 0.05, 0.02, 0.01]) == 0.0


def test_decide_snaps_higher_classes_above_095():
    assert decide_deformation([0.02, 0.96, 0.01, 0.01]) == 33.0
    assert decide_deformation([0.01, 0.01, 0.97, 0.01]) == 67.0
    assert decide_deformation([0.01, 0.01, 0.02, 0.96]) == 100.0


def test_decide_no_snap_below_thresholds():
    # 0.94 for Compress01 is below its 0.95 snap threshold.
    value = decide_deformation([0.05, 0.94, 0.01, 0.0])
    assert value != 33.0


def test_decide_top2_renormalized_example():
    # (0.50*33 + 0.40*67) / 0.90 = 48.111...
    value = decide_deformation([0.10, 0.50, 0.40, 0.00])
    assert value == pytest.approx((0.5 * 33 + 0.4 * 67) / 0.9, abs=1e-9)
    assert value == pytest.approx(48.111, abs=1e-2)


def test_decide_top2_without_renormalization():
    value = decide_deformation([0.10, 0.50, 0.40, 0.00], renormalize_top2=False)
    assert value == pytest.approx(0.5 * 33 + 0.4 * 67, abs=1e-9)


def test_decide_property_sweep():
    # Over random probability vectors: output in [0, 100]; snapping exactly
    # to a nominal value iff a snap threshold is met.
    rng = np.random.default_rng(41)
    snaps = ((0.90, 0.0), (0.95, 33.0), (0.95, 67.0), (0.95, 100.0))
    nominal = {0.0, 33.0, 67.0, 100.0}
    for _ in range(10_000):
        p = rng.dirichlet(np.ones(4) * rng.uniform(0.2, 3.0))
        value = decide_deformation(p)
        assert 0.0 <= value <= 100.0
        top = int(np.argmax(p))
        threshold, snap_value = snaps[top]
        if p[top] > threshold:
            assert value == snap_value
        else:
            order = np.argsort(-p, kind="stable")
            a, b = int(order[0]), int(order[1])
            na = [0.0, 33.0, 67.0, 100.0][a]
            nb = [0.0, 33.0, 67.0, 100.0][b]
            expected = (p[a] * na + p[b] * nb) / (p[a] + p[b])
            assert value == pytest.approx(expected, abs=1e-9)


# ---------------------------------------------------------------------------
# area regressor

def test_regressor_exact_on_noiseless_linear_data():
    a0 = 1000.0
    areas = np.linspace(650.0, 1000.0, 40)
    deformations = 100.0 * (a0 - areas) / 350.0
    reg = fit_area_regressor(areas, deformations, a0)
    assert reg.val_rmse_pct < 1e-9
    assert predict_deformation(reg, 1000.0, a0) == pytest.approx(0.0, abs=1e-9)
    assert predict_deformation(reg, 650.0, a0) == pytest.approx(100.0, abs=1e-9)


def test_regressor_monotone_nonincreasing_in_area():
    a0 = 1000.0
    areas = np.linspace(650.0, 1000.0, 40)
    deformations = 100.0 * (a0 - areas) / 350.0
    reg = fit_area_regressor(areas, deformations, a0)
    sweep = [predict_deformation(reg, a, a0) for a in np.linspace(600, 1100, 50)]
    assert all(b <= a + 1e-12 for a, b in zip(sweep, sweep[1:]))


def test_regressor_prediction_clamped():
    a0 = 1000.0
    areas = np.linspace(650.0, 1000.0, 10)
    deformations = 100.0 * (a0 - areas) / 350.0
    reg = fit_area_regressor(areas, deformations, a0)
    assert predict_deformation(reg, 100.0, a0) == 100.0
    assert predict_deformation(reg, 5000.0, a0) == 0.0


def test_regressor_rank_deficient_raises():
    with pytest.raises(FitError):
        fit_area_regressor([500.0] * 10, [10.0] * 10, 1000.0)


def test_regressor_json_round_trip(tmp_path):
    a0 = 1000.0
    areas = np.linspace(650.0, 1000.0, 10)
    deformations = 100.0 * (a0 - areas) / 350.0
    reg = fit_area_regressor(areas, deformations, a0)
    path = tmp_path / "regressor.json"
    reg.save(path)
    loaded = AreaRegressor.load(path)
    assert loaded == reg
