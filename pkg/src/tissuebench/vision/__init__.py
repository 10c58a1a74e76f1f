"""Deformation pipeline: synthetic top-view frames, edge detection, contour
tracing, dataset building, classification, and the contour-area regressor.
"""

from .deformation_map import (
    DEFORMATION_CLASSES,
    DeformationClass,
    class_from_position,
    ground_truth_deformation,
)
from .render import Frame, RenderConfig, render_frame
from .edges import detect_edges
from .contours import Contour, trace_contours, largest_contour_area
from .classify import ClassProbabilities, SoftmaxAreaClassifier
from .combine import optimized_deformation, decide_deformation
from .regress import AreaRegressor, fit_area_regressor, predict_deformation
from .dataset import AugmentationConfig, Dataset, DatasetRecord, build_dataset
from .features import FeatureExtractor

__all__ = [
    "DEFORMATION_CLASSES",
    "DeformationClass",
    "class_from_position",
    "ground_truth_deformation",
    "Frame",
    "RenderConfig",
    "render_frame",
    "detect_edges",
    "Contour",
    "trace_contours",
    "largest_contour_area",
    "ClassProbabilities",
    "SoftmaxAreaClassifier",
    "optimized_deformation",
    "decide_deformation",
    "AreaRegressor",
    "fit_area_regressor",
    "predict_deformation",
    "AugmentationConfig",
    "Dataset",
    "DatasetRecord",
    "build_dataset",
    "FeatureExtractor",
]
