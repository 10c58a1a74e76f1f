"""Deterministic four-class compression classifier.

Softmax over negative distances between the observed area-reduction fraction
and each class's nominal fraction. The interface (a probability vector over
the four classes) is the contract; any backend producing ClassProbabilities
can be substituted for this baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .deformation_map import DEFORMATION_CLASSES, DeformationClass

NOMINAL_FRACTIONS = tuple(c.nominal_deformation_pct / 100.0 for c in DEFORMATION_CLASSES)

PROBABILITY_SUM_TOL = 1e-6


@dataclass(frozen=True)
class ClassProbabilities:
    """Probability vector over the four compression classes."""

    p: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        if len(self.p) != len(DEFORMATION_CLASSES):
            raise ContractError("probability vector must have four entries")
        for v in self.p:
            if not 0.0 <= v <= 1.0:
                raise ContractError(f"probability {v} outside [0, 1]")
        if abs(sum(self.p) - 1.0) > PROBABILITY_SUM_TOL:
            raise ContractError(f"probabilities sum to {sum(self.p)}, not 1")

    def top1(self) -> int:
        return int(np.argmax(self.p))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)


@dataclass(frozen=True)
class SoftmaxAreaClassifier:
    """Softmax over -|fraction - nominal| / temperature.

    A frame at a class's position-range midpoint lands exactly midway between
    two nominal fractions, so distance ties are structural; ``tie_tolerance``
    breaks near-ties toward the higher class (deeper positions deform more).
    """

    temperature: float = 0.05
    tie_tolerance: float = 0.02
    nominal_fractions: tuple[float, ...] = NOMINAL_FRACTIONS

    def __post_init__(self) -> None:
        if self.temperature <= 0.0:
            raise ContractError("temperature must be > 0")

    def classify(self, fraction: float) -> ClassProbabilities:
        if not 0.0 <= fraction <= 1.0:
            raise ContractError(f"area-reduction fraction {fraction} outside [0, 1]")
        distances = np.abs(fraction - np.asarray(self.nominal_fractions))
        logits = -distances / self.temperature
        logits -= logits.max()
        weights = np.exp(logits)
        probs = weights / weights.sum()
        return ClassProbabilities(tuple(float(v) for v in probs))

    def predict_class(self, fraction: float) -> DeformationClass:
        """Argmax with near-ties resolved toward the higher class index."""
        if not 0.0 <= fraction <= 1.0:
            raise ContractError(f"area-reduction fraction {fraction} outside [0, 1]")
        distances = [abs(fraction - nominal) for nominal in self.nominal_fractions]
        best = min(distances)
        for idx in range(len(distances) - 1, -1, -1):
            if distances[idx] <= best + self.tie_tolerance:
                return DEFORMATION_CLASSES[idx]
        raise AssertionError("unreachable: min distance always matches")


def argmax_class(probs: ClassProbabilities, tie_tolerance: float = 1e-12) -> DeformationClass:
    """Highest-probability class; near-ties go to the higher class index."""
    arr = probs.as_array()
    best = float(arr.max())
    for idx in range(len(arr) - 1, -1, -1):
        if arr[idx] >= best - tie_tolerance:
            return DEFORMATION_CLASSES[idx]
    raise AssertionError("unreachable")
