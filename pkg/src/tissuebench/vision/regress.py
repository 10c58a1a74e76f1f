"""Least-squares regressor from normalized contour area to deformation %.

Stands behind a backend-agnostic interface: anything that maps area/A0 to a
clamped percentage can replace it. Persisted as a small JSON document of
coefficients plus training metadata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import FitError


@dataclass(frozen=True)
class AreaRegressor:
    """Polynomial map from normalized area (area / A0) to deformation %."""

    coefficients: tuple[float, ...]  # highest power first (np.polyval order)
    degree: int
    train_size: int
    val_size: int
    val_rmse_pct: float

    def predict(self, normalized_area: float) -> float:
        value = float(np.polyval(self.coefficients, normalized_area))
        return min(max(value, 0.0), 100.0)

    def to_json(self) -> str:
        return json.dumps(
            {
                "coefficients": list(self.coefficients),
                "degree": self.degree,
                "train_size": self.train_size,
                "val_size": self.val_size,
                "val_rmse_pct": self.val_rmse_pct,
            },
            indent=2,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="ascii")

    @classmethod
    def from_json(cls, text: str) -> "AreaRegressor":
        doc = json.loads(text)
        return cls(
            coefficients=tuple(float(c) for c in doc["coefficients"]),
            degree=int(doc["degree"]),
            train_size=int(doc["train_size"]),
            val_size=int(doc["val_size"]),
            val_rmse_pct=float(doc["val_rmse_pct"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "AreaRegressor":
        return cls.from_json(Path(path).read_text(encoding="ascii"))


def rmse(predicted: np.ndarray, actual: np.ndarray) -> float:
    return float(np.sqrt(np.mean((np.asarray(predicted) - np.asarray(actual)) ** 2)))


def fit_area_regressor(
    areas: Sequence[float],
    deformations_pct: Sequence[float],
    reference_area: float,
    degree: int = 1,
    val_areas: Sequence[float] | None = None,
    val_deformations_pct: Sequence[float] | None = None,
) -> AreaRegressor:
    """Least-squares polynomial fit of deformation % on area / reference_area.

    Validation RMSE is computed on the held-out split when provided,
    otherwise on the training data.
    """
    x = np.asarray(areas, dtype=float)
    y = np.asarray(deformations_pct, dtype=float)
    if reference_area <= 0.0:
        raise FitError("reference area must be > 0")
    if len(x) < 2 or len(x) != len(y):
        raise FitError("need at least two (area, deformation) pairs")
    if len(np.unique(x)) <= degree:
        raise FitError(
            f"rank-deficient design: {len(np.unique(x))} distinct areas "
            f"cannot support degree {degree}"
        )
    coeffs = np.polyfit(x / reference_area, y, deg=degree)

    if val_areas is not None and len(val_areas) > 0:
        vx = np.asarray(val_areas, dtype=float) / reference_area
        vy = np.asarray(val_deformations_pct, dtype=float)
    else:
        vx = x / reference_area
        vy = y
    predictions = np.clip(np.polyval(coeffs, vx), 0.0, 100.0)
    return AreaRegressor(
        coefficients=tuple(float(c) for c in coeffs),
        degree=degree,
        train_size=len(x),
        val_size=len(vx) if val_areas is not None else 0,
        val_rmse_pct=rmse(predictions, vy),
    )


def predict_deformation(
    regressor: AreaRegressor, area: float, reference_area: float
) -> float:
    """Clamped deformation % for a traced contour area."""
    if reference_area <= 0.0:
        raise FitError("reference area must be > 0")
    return regressor.predict(area / reference_area)
