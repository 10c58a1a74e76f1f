"""Knife position <-> deformation class/percentage maps.

The four compression classes partition the 35 mm stroke into half-open
position ranges (the last closed at 35 mm). Deformation percentage is
piecewise linear between the range endpoints: contact at 12 mm maps to 0%,
each range's upper endpoint carries the class's nominal percentage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import RangeError

STROKE_MM = 35.0

# Position knots and the deformation percentage anchored at each.
_KNOT_POSITIONS = (12.0, 21.7, 30.1, 35.0)
_KNOT_DEFORMATION = (0.0, 33.0, 67.0, 100.0)


@dataclass(frozen=True)
class DeformationClass:
    index: int
    name: str
    nominal_deformation_pct: float
    position_range_mm: tuple[float, float]  # half-open, last closed at 35


DEFORMATION_CLASSES: tuple[DeformationClass, ...] = (
    DeformationClass(0, "Compress00", 0.0, (0.0, 12.0)),
    DeformationClass(1, "Compress01", 33.0, (12.0, 21.7)),
    DeformationClass(2, "Compress02", 67.0, (21.7, 30.1)),
    DeformationClass(3, "Compress03", 100.0, (30.1, 35.0)),
)

NOMINAL_DEFORMATIONS_PCT = tuple(c.nominal_deformation_pct for c in DEFORMATION_CLASSES)

CLASSES_BY_NAME = {c.name: c for c in DEFORMATION_CLASSES}


def ground_truth_deformation(knife_position_mm: float) -> float:
    """Deformation percentage for a knife position: 0 below contact, then
    piecewise linear through the segment endpoints up to 100% at full stroke."""
    if not 0.0 <= knife_position_mm <= STROKE_MM:
        raise RangeError(
            f"knife position {knife_position_mm} mm outside [0, {STROKE_MM}]"
        )
    if knife_position_mm <= _KNOT_POSITIONS[0]:
        return 0.0
    return float(np.interp(knife_position_mm, _KNOT_POSITIONS, _KNOT_DEFORMATION))


def class_from_position(knife_position_mm: float) -> DeformationClass:
    """Class whose half-open range contains the position (upper-closed at 35 mm)."""
    if not 0.0 <= knife_position_mm <= STROKE_MM:
        raise RangeError(
            f"knife position {knife_position_mm} mm outside [0, {STROKE_MM}]"
        )
    for cls in DEFORMATION_CLASSES:
        low, high = cls.position_range_mm
        if low <= knife_position_mm < high:
            return cls
    return DEFORMATION_CLASSES[-1]  # exactly 35.0


def class_from_deformation(deformation_pct: float) -> DeformationClass:
    """Class whose deformation interval contains the percentage.

    Inverts the position->deformation map, so it agrees with
    class_from_position at every knife position (not just midpoints):
    exactly 0% is Compress00, then (0, 33) / [33, 67) / [67, 100].
    """
    if not 0.0 <= deformation_pct <= 100.0:
        raise RangeError(f"deformation {deformation_pct}% outside [0, 100]")
    if deformation_pct <= 1e-9:
        return DEFORMATION_CLASSES[0]
    if deformation_pct < 33.0:
        return DEFORMATION_CLASSES[1]
    if deformation_pct < 67.0:
        return DEFORMATION_CLASSES[2]
    return DEFORMATION_CLASSES[3]


def class_midpoint_mm(cls: DeformationClass) -> float:
    low, high = cls.position_range_mm
    return 0.5 * (low + high)
