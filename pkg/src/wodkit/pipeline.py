"""End-to-end batch pipeline: preprocess, weight, cluster, score, threshold.

``fit`` learns everything that must be carried to new data (imputation
means, normalizer, cluster model, calibrated threshold). Weights, density
counts and angle scores are always computed on the batch being scored.
"""
import json
from dataclasses import dataclass

import numpy as np

from . import data as dm
from . import scoring, thresholding, weighting
from .clustering import ClusterModel, weighted_kmeans
from .config import PipelineConfig
from .errors import ConfigError, DataError
from .jsonio import canonical_dumps

MODEL_FORMAT = "wodkit-model/1"


@dataclass
class FittedPipeline:
    config: PipelineConfig
    feature_names: tuple
    impute_means: np.ndarray
    normalizer: dm.NormalizationParams
    model: ClusterModel
    threshold: float  # None for the density method
    n_train: int
    weight_source: str = "scheme"  # or "column"

    @property
    def d(self):
        return len(self.feature_names)

    def to_dict(self):
        return {
            "format": MODEL_FORMAT,
            "config": self.config.to_dict(),
            "feature_names": list(self.feature_names),
            "impute_means": self.impute_means.tolist(),
            "normalizer": self.normalizer.to_dict(),
            "cluster": self.model.to_dict(),
            "threshold": self.threshold,
            "n_train": self.n_train,
            "weights": {"source": self.weight_source, "scheme": self.config["weighting.scheme"]},
        }

    def dumps(self):
        return canonical_dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
            raise DataError(f"not a {MODEL_FORMAT} model document")
        try:
            cfg = PipelineConfig(doc["config"])
            fitted = cls(
                config=cfg,
                feature_names=tuple(doc["feature_names"]),
                impute_means=np.asarray(doc["impute_means"], dtype=np.float64),
                normalizer=dm.NormalizationParams.from_dict(doc["normalizer"]),
                model=ClusterModel.from_dict(doc["cluster"]),
                threshold=None if doc["threshold"] is None else float(doc["threshold"]),
                n_train=int(doc["n_train"]),
                weight_source=doc["weights"]["source"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"corrupt model file: {exc}") from None
        if fitted.model.d != fitted.d or fitted.impute_means.shape != (fitted.d,):
            raise DataError("corrupt model file: inconsistent feature count")
        return fitted

    @classmethod
    def loads(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"corrupt model file: {exc}") from None
        return cls.from_dict(doc)


@dataclass
class ScoredBatch:
    """Result over an input batch; rows dropped by imputation are not in ``kept``."""

    dataset: dm.Dataset
    kept: np.ndarray
    weights: np.ndarray
    result: thresholding.DetectionResult

    def full_scores(self):
        out = np.full(self.dataset.n, np.nan)
        out[self.kept] = self.result.scores
        return out

    def full_flags(self):
        out = np.zeros(self.dataset.n, dtype=bool)
        out[self.kept] = self.result.flags
        return out

    def labels(self):
        if self.dataset.labels is None:
            return None
        return self.dataset.labels[self.kept]


def check_chisq(cfg, weighted, force=False):
    """chisq cut-offs only make sense for raw Mahalanobis distances."""
    if (cfg["threshold.policy"] == "chisq" and cfg["score.method"] == "weighted_mahalanobis"
            and weighted and not force):
        raise ConfigError("threshold.policy 'chisq' with non-uniform weights is not calibrated; "
                          "use uniform weighting or pass --force")


def _is_weighted(cfg, ds, use_weight_column):
    return (use_weight_column and ds.weights is not None) or cfg["weighting.scheme"] != "uniform"


def _impute(ds, cfg, means=None):
    """Returns (dataset without missing cells, indices of the surviving rows)."""
    X = np.array(ds.features)
    miss = np.isnan(X)
    if not miss.any():
        return ds, np.arange(ds.n)
    if cfg["preprocess.impute"] == "drop_rows":
        keep = np.flatnonzero(~miss.any(axis=1))
        if keep.size == 0:
            raise DataError("drop_rows removed every row")
        return ds.take(keep), keep
    if means is None:
        return dm.impute_missing(ds, "feature_mean"), np.arange(ds.n)
    X[miss] = np.broadcast_to(means, X.shape)[miss]
    return ds.with_features(X), np.arange(ds.n)


def _weights(ds, cfg, use_weight_column):
    if use_weight_column:
        if ds.weights is None:
            raise DataError("weights column requested but the dataset has none")
        return weighting.normalize_weights(ds.weights)
    return weighting.compute_weights(ds, cfg["weighting.scheme"], cfg["weighting.bins"], cfg["weighting.k"])


def _raw_scores(ds, w, model, cfg):
    """(scores, density flags or None)."""
    method = cfg["score.method"]
    if method == "weighted_mahalanobis":
        return scoring.score(ds, w, model), None
    if method == "density":
        counts = scoring.neighbor_counts(ds, cfg["score.eps"])
        return scoring.density_scores(counts), counts < cfg["score.min_pts"]
    return scoring.abod_score(ds), None


def _calibrate(scores, cfg, d):
    policy = cfg["threshold.policy"]
    if policy == "fixed":
        return float(cfg["threshold.value"])
    if policy == "quantile":
        return thresholding.nearest_rank(scores, cfg["threshold.q"])
    return thresholding.chisq_cutoff(cfg["threshold.alpha"], d)


def fit(ds, cfg, use_weight_column=False, force=False):
    check_chisq(cfg, _is_weighted(cfg, ds, use_weight_column), force)
    observed = ~np.isnan(ds.features)
    if not observed.any(axis=0).all():
        raise DataError("a feature has no observed values")
    means = np.array([ds.features[observed[:, j], j].mean() for j in range(ds.d)])
    train, _ = _impute(ds, cfg, means)
    if cfg["preprocess.dedupe"]:
        train = dm.dedupe(train)
    norm = dm.fit_normalizer(train, cfg["preprocess.normalize"])
    train = dm.apply_normalizer(train, norm)
    w = _weights(train, cfg, use_weight_column)
    model = weighted_kmeans(train, w, cfg.cluster_config())
    threshold = None
    if cfg["score.method"] != "density":
        scores, _ = _raw_scores(train, w, model, cfg)
        threshold = _calibrate(scores, cfg, train.d)
    return FittedPipeline(
        config=cfg,
        feature_names=ds.feature_names,
        impute_means=means,
        normalizer=norm,
        model=model,
        threshold=threshold,
        n_train=train.n,
        weight_source="column" if use_weight_column else "scheme",
    )


def score(fitted, ds):
    cfg = fitted.config
    if ds.d != fitted.d:
        raise DataError(f"model expects {fitted.d} features, data has {ds.d}")
    use_col = fitted.weight_source == "column"
    batch, kept = _impute(ds, cfg, fitted.impute_means)
    batch = dm.apply_normalizer(batch, fitted.normalizer)
    w = _weights(batch, cfg, use_col)
    scores, dflags = _raw_scores(batch, w, fitted.model, cfg)
    meta = {"policy": cfg["threshold.policy"], "method": cfg["score.method"]}
    if dflags is not None:
        result = thresholding.DetectionResult(scores=scores, threshold=None, flags=dflags,
                                              meta={**meta, "policy": "density"})
    else:
        result = thresholding.apply_threshold(scores, fitted.threshold, **meta)
    return ScoredBatch(dataset=ds, kept=kept, weights=w, result=result)


def detect(ds, cfg, use_weight_column=False, force=False):
    fitted = fit(ds, cfg, use_weight_column, force)
    return fitted, score(fitted, ds)
