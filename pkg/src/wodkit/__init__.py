"""Weighted outlier detection: pattern-frequency weights, weighted k-means,
Mahalanobis and density scoring, thresholds, streaming and evaluation."""
from .clustering import ClusterConfig, ClusterModel, kmeanspp_init, weighted_kmeans, weighted_objective
from .config import PipelineConfig, load_config
from .data import Dataset, apply_normalizer, dedupe, fit_normalizer, impute_missing, load_csv, split
from .errors import ConfigError, DataError, NumericError, WodError
from .evaluation import GridSpec, Metrics, confusion, cross_validate, grid_search, roc_auc
from .pipeline import FittedPipeline, detect, fit, score
from .scoring import abod_score, density_flags, mahalanobis_distance
from .streaming import StreamConfig, StreamDetector, WindowVerdict
from .thresholding import DetectionResult, chisq_threshold, fixed_threshold, quantile_threshold
from .weighting import (
    knn_distance_weights,
    normalize_weights,
    pattern_frequency_weights,
    uniform_weights,
)

__version__ = "0.1.0"
