"""Metrics on labelled data, k-fold cross-validation and grid search.

The positive class is "outlier". ``detection_rate`` is reported as an
alias of recall.
"""
import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata

from . import pipeline
from .errors import DataError

METRIC_NAMES = ("precision", "recall", "f1", "accuracy", "detection_rate", "auc")


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    detection_rate: float
    auc: float = None

    def to_dict(self):
        return asdict(self)


def confusion(flags, labels, scores=None):
    """Confusion counts and rates; AUC is added when ``scores`` is given and both classes occur."""
    flags = np.asarray(flags, dtype=bool)
    labels = np.asarray(labels, dtype=bool)
    if flags.shape != labels.shape:
        raise DataError(f"{flags.size} flags vs {labels.size} labels")
    tp = int(np.sum(flags & labels))
    fp = int(np.sum(flags & ~labels))
    fn = int(np.sum(~flags & labels))
    tn = int(np.sum(~flags & ~labels))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    n = tp + fp + fn + tn
    auc = None
    if scores is not None and 0 < labels.sum() < labels.size:
        auc = roc_auc(scores, labels)
    return Metrics(tp, fp, fn, tn, precision, recall, f1, (tp + tn) / n if n else 0.0, recall, auc)


def roc_auc(scores, labels):
    """Mann-Whitney AUC with midranks for tied scores."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    if s.shape != y.shape:
        raise DataError(f"{s.size} scores vs {y.size} labels")
    P = int(y.sum())
    N = y.size - P
    if P == 0 or N == 0:
        raise DataError("roc_auc needs both positive and negative labels")
    r_pos = rankdata(s, method="average")[y].sum()
    return float((r_pos - P * (P + 1) / 2.0) / (P * N))


def fold_indices(n, folds, seed):
    if not 2 <= folds <= n:
        raise DataError(f"folds must lie in [2, n={n}], got {folds}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, folds)]


def _summarize(rows):
    summary = {}
    for name in METRIC_NAMES:
        vals = [r["metrics"][name] for r in rows if r["metrics"][name] is not None]
        if vals:
            summary[name] = {"mean": float(np.mean(vals)), "std": float(np.std(vals)), "n": len(vals)}
        else:
            summary[name] = None
    return summary


def cross_validate(ds, cfg, folds=None, seed=None, use_weight_column=False, force=False):
    """Per-fold metrics plus mean/std (population) per metric.

    Each fold fits on the remaining rows and scores the held-out rows with
    the fitted threshold. Folds whose held-out labels are single-class get
    ``auc = None`` and a note.
    """
    if ds.labels is None:
        raise DataError("cross-validation needs labels")
    folds = cfg["eval.folds"] if folds is None else folds
    seed = cfg["seed"] if seed is None else seed
    rows = []
    n = ds.n
    for f, test_idx in enumerate(fold_indices(n, folds, seed)):
        train_idx = np.setdiff1d(np.arange(n), test_idx, assume_unique=True)
        fitted = pipeline.fit(ds.take(train_idx), cfg, use_weight_column, force)
        batch = pipeline.score(fitted, ds.take(test_idx))
        m = confusion(batch.result.flags, batch.labels(), batch.result.scores)
        row = {"fold": f, "n_train": int(train_idx.size), "n_test": int(test_idx.size),
               "test_rows": [ds.row_ids[i] for i in test_idx], "metrics": m.to_dict()}
        if m.auc is None:
            row["note"] = "auc omitted: held-out fold has a single class"
        rows.append(row)
    return {"folds": rows, "summary": _summarize(rows), "n_folds": folds, "seed": seed}


@dataclass(frozen=True)
class GridSpec:
    params: dict
    metric: str = "auc"
    folds: int = 5
    seed: int = 0
    random_samples: int = 0  # 0 = full grid

    def __post_init__(self):
        if not self.params:
            raise DataError("grid is empty")
        for name, vals in self.params.items():
            if not vals:
                raise DataError(f"grid parameter {name!r} has no values")
        if self.metric not in METRIC_NAMES:
            raise DataError(f"unknown selection metric {self.metric!r}")

    @classmethod
    def from_config(cls, cfg):
        return cls(params=dict(cfg["tune.grid"]), metric=cfg["tune.metric"], folds=cfg["tune.folds"],
                   seed=cfg["seed"], random_samples=cfg["tune.random"])

    def cells(self):
        names = list(self.params)
        cells = [dict(zip(names, combo)) for combo in itertools.product(*(self.params[k] for k in names))]
        if 0 < self.random_samples < len(cells):
            pick = np.random.default_rng(self.seed).choice(len(cells), self.random_samples, replace=False)
            return [(int(i), cells[i]) for i in np.sort(pick)]
        return list(enumerate(cells))


def grid_search(ds, base, grid, use_weight_column=False, force=False):
    """Cross-validate every grid cell; best = highest mean metric, first wins on ties."""
    table = []
    for index, cell in grid.cells():
        cfg = base.replace(cell)
        cv = cross_validate(ds, cfg, grid.folds, grid.seed, use_weight_column, force)
        stat = cv["summary"][grid.metric]
        table.append({
            "index": index,
            "params": cell,
            "mean": None if stat is None else stat["mean"],
            "std": None if stat is None else stat["std"],
            "summary": cv["summary"],
        })
    table.sort(key=lambda r: r["index"])
    scored = [r for r in table if r["mean"] is not None and not math.isnan(r["mean"])]
    if not scored:
        raise DataError(f"metric {grid.metric!r} unavailable for every grid cell")
    best = scored[0]
    for row in scored[1:]:
        if row["mean"] > best["mean"]:
            best = row
    return base.replace(best["params"]), table, best
