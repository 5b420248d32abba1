"""Flat, typed pipeline configuration.

A config document is a JSON object whose keys are dotted names such as
``cluster.k``. Unknown keys and ill-typed values raise ConfigError before
any work starts.
"""
import json
import math
import os
from collections.abc import Mapping

from .clustering import METRICS, ClusterConfig
from .errors import ConfigError
from .scoring import METHODS
from .thresholding import POLICIES
from .weighting import SCHEMES

ENV_CONFIG = "WODKIT_CONFIG"
MAX_STREAM_CAPACITY = 1_000_000


def _enum(*choices):
    def check(v):
        return v in choices, f"one of {list(choices)}"
    return check


def _at_least(lo):
    def check(v):
        return v >= lo, f">= {lo}"
    return check


def _positive(v):
    return v > 0 and math.isfinite(v), "positive and finite"


def _open_unit(v):
    return 0 < v < 1, "in (0, 1)"


def _any(v):
    return True, ""


def _optional_finite(v):
    return v is None or math.isfinite(v), "null or finite"


# key -> (type, default, check)
SCHEMA = {
    "seed": (int, 0, _any),
    "preprocess.impute": (str, "feature_mean", _enum("feature_mean", "drop_rows")),
    "preprocess.dedupe": (bool, False, _any),
    "preprocess.normalize": (str, "zscore", _enum("zscore", "minmax", "none")),
    "weighting.scheme": (str, "pattern_frequency", _enum(*SCHEMES)),
    "weighting.bins": (int, 8, _at_least(2)),
    "weighting.k": (int, 5, _at_least(1)),
    "cluster.k": (int, 2, _at_least(1)),
    "cluster.seed": (int, 0, _any),
    "cluster.max_iters": (int, 100, _at_least(1)),
    "cluster.tol": (float, 1e-6, _positive),
    "cluster.ridge": (float, 1e-6, _positive),
    "cluster.metric": (str, "euclidean", _enum(*METRICS)),
    "score.method": (str, "weighted_mahalanobis", _enum(*METHODS)),
    "score.eps": (float, 0.5, _positive),
    "score.min_pts": (int, 5, _at_least(0)),
    "threshold.policy": (str, "quantile", _enum(*POLICIES)),
    "threshold.value": ((float, type(None)), None, _optional_finite),
    "threshold.q": (float, 0.95, _open_unit),
    "threshold.alpha": (float, 0.05, _open_unit),
    "eval.folds": (int, 5, _at_least(2)),
    "stream.capacity": (int, 256, lambda v: (2 <= v <= MAX_STREAM_CAPACITY, f"in [2, {MAX_STREAM_CAPACITY}]")),
    "stream.mode": (str, "tumbling", _enum("tumbling", "sliding")),
    "stream.stride": (int, 64, _at_least(1)),
    "tune.grid": (dict, {}, _any),
    "tune.metric": (str, "auc", _enum("auc", "f1", "precision", "recall", "accuracy", "detection_rate")),
    "tune.folds": (int, 5, _at_least(2)),
    "tune.random": (int, 0, _at_least(0)),
}


def _coerce(key, value):
    typ, _, check = SCHEMA[key]
    types = typ if isinstance(typ, tuple) else (typ,)
    if float in types and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if int in types and bool not in types and isinstance(value, bool):
        raise ConfigError(f"{key}: expected integer, got boolean")
    if not isinstance(value, types):
        names = "/".join(t.__name__ for t in types)
        raise ConfigError(f"{key}: expected {names}, got {type(value).__name__} {value!r}")
    ok, what = check(value)
    if not ok:
        raise ConfigError(f"{key}: value {value!r} must be {what}")
    return value


class PipelineConfig(Mapping):
    """Immutable mapping of every tunable, defaults filled in."""

    def __init__(self, values=None):
        merged = {k: v[1] for k, v in SCHEMA.items()}
        for key, value in (values or {}).items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, value)
        self._check_cross(merged)
        self._values = merged

    @staticmethod
    def _check_cross(v):
        if v["threshold.policy"] == "fixed" and v["threshold.value"] is None:
            raise ConfigError("threshold.policy 'fixed' needs threshold.value")
        if v["stream.mode"] == "sliding" and v["stream.stride"] > v["stream.capacity"]:
            raise ConfigError("stream.stride must not exceed stream.capacity")
        for name, vals in v["tune.grid"].items():
            if name not in SCHEMA or name.startswith("tune."):
                raise ConfigError(f"tune.grid: unknown or untunable key {name!r}")
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"tune.grid: {name!r} needs a non-empty list of values")
            for val in vals:
                try:
                    _coerce(name, val)
                except ConfigError as exc:
                    raise ConfigError(f"tune.grid: {exc}") from None

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __repr__(self):
        return f"PipelineConfig({self._values!r})"

    def replace(self, overrides):
        merged = dict(self._values)
        merged.update(overrides)
        return PipelineConfig(merged)

    def to_dict(self):
        return dict(self._values)

    def cluster_config(self):
        return ClusterConfig(
            k=self["cluster.k"],
            seed=self["cluster.seed"],
            max_iters=self["cluster.max_iters"],
            tol=self["cluster.tol"],
            ridge=self["cluster.ridge"],
            metric=self["cluster.metric"],
        )


def load_config(path=None):
    """Read a config file; falls back to $WODKIT_CONFIG, then to defaults."""
    path = path or os.environ.get(ENV_CONFIG)
    if not path:
        return PipelineConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return PipelineConfig(doc)


def parse_override(text):
    """``key=value``; the value is parsed as JSON, falling back to a bare string."""
    key, sep, raw = text.partition("=")
    if not sep:
        raise ConfigError(f"override {text!r} is not KEY=VALUE")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value
