"""Bounded buffer that runs the batch pipeline on tumbling or sliding windows.

Each window is refit from scratch. Window number w (0-based) uses
``cluster.seed + w`` so a stream replays exactly as independent batch runs.
"""
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import pipeline
from .config import MAX_STREAM_CAPACITY
from .data import Dataset
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class StreamConfig:
    capacity: int
    mode: str
    stride: int
    pipeline: object  # PipelineConfig

    def __post_init__(self):
        if not 2 <= self.capacity <= MAX_STREAM_CAPACITY:
            raise ConfigError(f"stream capacity must lie in [2, {MAX_STREAM_CAPACITY}]")
        if self.mode not in ("tumbling", "sliding"):
            raise ConfigError(f"stream mode must be tumbling or sliding, got {self.mode!r}")
        if self.mode == "sliding" and not 1 <= self.stride <= self.capacity:
            raise ConfigError("stream stride must lie in [1, capacity]")

    @classmethod
    def from_pipeline(cls, cfg):
        return cls(cfg["stream.capacity"], cfg["stream.mode"], cfg["stream.stride"], cfg)


@dataclass(frozen=True)
class WindowVerdict:
    window: int
    row_ids: tuple
    result: object  # DetectionResult
    iterations: int
    objective: float
    partial: bool = False

    def to_dict(self):
        r = self.result
        return {
            "window": self.window,
            "partial": self.partial,
            "row_ids": list(self.row_ids),
            "threshold": r.threshold,
            "scores": [float(s) for s in r.scores],
            "flags": [bool(f) for f in r.flags],
            "n_flagged": r.n_flagged,
            "iterations": self.iterations,
            "objective": self.objective,
        }


def window_config(cfg, window):
    return cfg.replace({"cluster.seed": cfg["cluster.seed"] + window})


def run_window(features, row_ids, feature_names, cfg, window, partial=False):
    """The batch pipeline on one window; also what the equivalence tests call."""
    ds = Dataset(features=features, feature_names=feature_names, row_ids=row_ids)
    fitted, batch = pipeline.detect(ds, window_config(cfg, window))
    hist = fitted.model.objective_history
    return WindowVerdict(
        window=window,
        row_ids=tuple(row_ids),
        result=batch.result,
        iterations=fitted.model.iterations,
        objective=hist[-1] if hist else 0.0,
        partial=partial,
    )


class StreamDetector:
    """Single-writer buffer; call ``push`` per row and ``flush`` at end of stream."""

    def __init__(self, cfg, feature_names):
        self.cfg = cfg
        self.feature_names = tuple(feature_names)
        self.d = len(self.feature_names)
        self._rows = deque()
        self._ids = deque()
        self._fresh = 0  # rows not yet covered by any verdict
        self.window = 0
        self.unprocessed = 0

    def __len__(self):
        return len(self._rows)

    def _emit(self, partial=False):
        X = np.array(self._rows, dtype=np.float64).reshape(len(self._rows), self.d)
        verdict = run_window(X, list(self._ids), self.feature_names, self.cfg.pipeline, self.window, partial)
        self.window += 1
        self._fresh = 0
        return verdict

    def push(self, row, row_id):
        row = np.asarray(row, dtype=np.float64)
        if row.shape != (self.d,):
            raise DataError(f"row {row_id!r} has {row.size} values, expected {self.d}")
        if not np.all(np.isfinite(row)):
            raise DataError(f"row {row_id!r} has missing or non-finite values")
        self._rows.append(row)
        self._ids.append(row_id)
        self._fresh += 1
        B = self.cfg.capacity
        assert len(self._rows) <= B, "stream buffer over capacity"
        if len(self._rows) < B:
            return None
        verdict = self._emit()
        drop = B if self.cfg.mode == "tumbling" else self.cfg.stride
        for _ in range(drop):
            self._rows.popleft()
            self._ids.popleft()
        return verdict

    def min_partial(self):
        p = self.cfg.pipeline
        need = max(p["cluster.k"] + 1, p["score.min_pts"] + 1)
        if p["weighting.scheme"] == "knn_distance":
            need = max(need, p["weighting.k"] + 1)
        if p["score.method"] == "abod":
            need = max(need, 3)
        return need

    def flush(self):
        """Run the pipeline on leftover rows if there are enough of them; drains the buffer."""
        verdict = None
        self.unprocessed = 0
        if self._fresh:
            if len(self._rows) >= self.min_partial():
                verdict = self._emit(partial=True)
            else:
                self.unprocessed = self._fresh
        self._rows.clear()
        self._ids.clear()
        self._fresh = 0
        return verdict
