"""Class-probability -> deformation-percentage combiners.

``optimized_deformation`` is the probability-weighted sum of the class
nominal percentages. ``decide_deformation`` snaps to the top class's nominal
value when its probability clears the per-class threshold, and otherwise
combines the top-2 classes (renormalized by default).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ContractError
from .classify import ClassProbabilities
from .deformation_map import NOMINAL_DEFORMATIONS_PCT

# Top-1 snap thresholds: Compress00 snaps above 0.90, the rest above 0.95.
SNAP_THRESHOLDS = (0.90, 0.95, 0.95, 0.95)


def _as_vector(probs: ClassProbabilities | Sequence[float]) -> np.ndarray:
    if isinstance(probs, ClassProbabilities):
        return probs.as_array()
    arr = np.asarray(probs, dtype=float)
    if arr.shape != (len(NOMINAL_DEFORMATIONS_PCT),):
        raise ContractError("expected a four-entry probability vector")
    if np.any(arr < 0.0):
        raise ContractError("probabilities must be non-negative")
    return arr


def optimized_deformation(
    probs: ClassProbabilities | Sequence[float],
    nominal_pct: Sequence[float] = NOMINAL_DEFORMATIONS_PCT,
) -> float:
    """Probability-weighted sum of class nominal deformations (percent).

    Accepts raw vectors without renormalizing, so published worked examples
    whose entries do not sum exactly to one reproduce digit-for-digit.
    """
    arr = _as_vector(probs)
    return float(np.dot(arr, np.asarray(nominal_pct, dtype=float)))


def decide_deformation(
    probs: ClassProbabilities | Sequence[float],
    renormalize_top2: bool = True,
) -> float:
    """Threshold decision rule over the class probabilities.

    If the top-1 class clears its snap threshold the class nominal value is
    returned exactly. Otherwise the top-2 classes are combined; with
    ``renormalize_top2`` their probabilities are rescaled to sum to one
    before weighting.
    """
    arr = _as_vector(probs)
    top1 = int(np.argmax(arr))
    if arr[top1] > SNAP_THRESHOLDS[top1]:
        return float(NOMINAL_DEFORMATIONS_PCT[top1])
    order = np.argsort(-arr, kind="stable")
    a, b = int(order[0]), int(order[1])
    pa, pb = float(arr[a]), float(arr[b])
    na, nb = NOMINAL_DEFORMATIONS_PCT[a], NOMINAL_DEFORMATIONS_PCT[b]
    weighted = pa * na + pb * nb
    if renormalize_top2:
        mass = pa + pb
        if mass <= 0.0:
            raise ContractError("top-2 probability mass is zero")
        weighted /= mass
    return float(weighted)
