"""Contour-area feature extraction for the classifier and regressor.

The raw traced area differs from the construction area by a boundary-band
offset (the trace runs around the dilated edge set). The extractor removes
that systematic by calibrating the measured area reduction against frames
rendered at the four class anchor positions, mapping measured reductions
piecewise-linearly onto the nominal deformation fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError
from .contours import largest_contour_area
from .deformation_map import DEFORMATION_CLASSES
from .edges import DEFAULT_EDGE_THRESHOLD, detect_edges
from .render import RenderConfig, render_frame

ANCHOR_FRACTIONS = tuple(c.nominal_deformation_pct / 100.0 for c in DEFORMATION_CLASSES)


def measure_silhouette_area(pixels: np.ndarray,
                            threshold: float = DEFAULT_EDGE_THRESHOLD) -> float:
    """Traced contour area of the dominant object in a frame."""
    return largest_contour_area(detect_edges(pixels, threshold))


@dataclass
class FeatureExtractor:
    """Maps a traced silhouette area to an area-reduction fraction in [0, 1]."""

    config: RenderConfig = field(default_factory=RenderConfig)
    edge_threshold: float = DEFAULT_EDGE_THRESHOLD
    reference_area: float = field(init=False)
    anchor_reductions: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        anchor_positions = [c.position_range_mm[1] for c in DEFORMATION_CLASSES]
        anchor_positions[0] = self.config.contact_mm  # 0% anchor at contact
        areas = [
            measure_silhouette_area(render_frame(p, self.config).pixels,
                                    self.edge_threshold)
            for p in anchor_positions
        ]
        self.reference_area = areas[0]
        reductions = np.array([self.reference_area - a for a in areas])
        if not np.all(np.diff(reductions) > 0.0):
            raise ContractError("anchor area reductions are not increasing; "
                                "geometry or threshold is degenerate")
        self.anchor_reductions = reductions

    def fraction_from_area(self, traced_area: float) -> float:
        """Calibrated area-reduction fraction for a traced silhouette area."""
        reduction = self.reference_area - traced_area
        fraction = float(np.interp(reduction, self.anchor_reductions,
                                   np.asarray(ANCHOR_FRACTIONS)))
        return min(max(fraction, 0.0), 1.0)

    def fraction_from_frame(self, pixels: np.ndarray) -> float:
        return self.fraction_from_area(
            measure_silhouette_area(pixels, self.edge_threshold)
        )
