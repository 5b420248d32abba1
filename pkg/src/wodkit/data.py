"""Dataset container, CSV ingestion and the preprocessing steps.

Missing cells are carried as NaN until ``impute_missing`` removes them.
Randomness (``split``) uses numpy's PCG64 generator seeded directly with
the caller's integer, so partitions are reproducible across machines.
"""
import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError

_TRUE = {"1", "true", "t", "yes"}
_FALSE = {"0", "false", "f", "no"}


def _frozen(a):
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    feature_names: tuple
    row_ids: tuple
    labels: np.ndarray = None
    weights: np.ndarray = None  # user-supplied per-row weights, if any

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"dataset must be a non-empty 2-D table, got shape {X.shape}")
        n, d = X.shape
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "row_ids", tuple(self.row_ids))
        if len(self.feature_names) != d:
            raise DataError(f"{len(self.feature_names)} feature names for {d} columns")
        if len(self.row_ids) != n:
            raise DataError(f"{len(self.row_ids)} row ids for {n} rows")
        if self.labels is not None:
            y = np.asarray(self.labels, dtype=bool)
            if y.shape != (n,):
                raise DataError(f"labels have length {y.shape[0]}, expected {n}")
            object.__setattr__(self, "labels", _frozen(y))
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != (n,):
                raise DataError(f"weights have length {w.shape[0]}, expected {n}")
            object.__setattr__(self, "weights", _frozen(w))

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    @property
    def has_missing(self):
        return bool(np.isnan(self.features).any())

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(
            features=self.features[idx],
            feature_names=self.feature_names,
            row_ids=[self.row_ids[i] for i in idx],
            labels=None if self.labels is None else self.labels[idx],
            weights=None if self.weights is None else self.weights[idx],
        )

    def with_features(self, X):
        return replace(self, features=X)


def _parse_label(cell, line, col):
    v = cell.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise DataError(f"row {line}, column {col!r}: label {cell!r} is not 0/1/true/false")


def _parse_float(cell, line, col):
    s = cell.strip()
    if s == "":
        return math.nan
    try:
        v = float(s)
    except ValueError:
        raise DataError(f"row {line}, column {col!r}: cannot parse {cell!r} as a number") from None
    if math.isnan(v):
        # NaN is reserved as the missing-value sentinel
        raise DataError(f"row {line}, column {col!r}: literal NaN not allowed, leave the cell empty")
    return v


def parse_rows(rows, header=None, label_column=None, id_column=None, weight_column=None,
               first_line=1):
    """Build a Dataset from an iterable of already-split CSV rows.

    ``header`` names the columns; when None, columns are named ``c0, c1, ...``
    after the width of the first row. ``first_line`` is the file line number
    of the first data row, used in error messages.
    """
    rows = list(rows)
    if not rows:
        raise DataError("no data rows")
    if header is None:
        header = [f"c{j}" for j in range(len(rows[0]))]
    header = [h.strip() for h in header]
    width = len(header)

    def col_index(name, what):
        if name is None:
            return None
        if name not in header:
            raise DataError(f"{what} column {name!r} not found in header {header}")
        return header.index(name)

    li = col_index(label_column, "label")
    ii = col_index(id_column, "id")
    wi = col_index(weight_column, "weight")
    special = {j for j in (li, ii, wi) if j is not None}
    feat_cols = [j for j in range(width) if j not in special]
    if not feat_cols:
        raise DataError("no feature columns left after removing label/id/weight columns")

    X = np.empty((len(rows), len(feat_cols)))
    labels, ids, weights = [], [], []
    for r, row in enumerate(rows):
        line = first_line + r
        if len(row) != width:
            raise DataError(f"row {line}: expected {width} fields, found {len(row)}")
        for c, j in enumerate(feat_cols):
            X[r, c] = _parse_float(row[j], line, header[j])
        if li is not None:
            labels.append(_parse_label(row[li], line, header[li]))
        ids.append(row[ii].strip() if ii is not None else str(r))
        if wi is not None:
            w = _parse_float(row[wi], line, header[wi])
            if not (math.isfinite(w) and w > 0):
                raise DataError(f"row {line}, column {header[wi]!r}: weight must be positive and finite")
            weights.append(w)
    return Dataset(
        features=X,
        feature_names=[header[j] for j in feat_cols],
        row_ids=ids,
        labels=labels if li is not None else None,
        weights=weights if wi is not None else None,
    )


def load_csv(path, has_header=True, label_column=None, id_column=None, weight_column=None):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    header = None
    first_line = 1
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header, rows = rows[0], rows[1:]
        first_line = 2
    return parse_rows(rows, header, label_column, id_column, weight_column, first_line)


def write_csv(ds, path_or_fh, float_format="{!r}"):
    """Write features (and labels, if any) in the same dialect ``load_csv`` reads."""
    own = isinstance(path_or_fh, (str, bytes)) or hasattr(path_or_fh, "__fspath__")
    fh = open(path_or_fh, "w", newline="", encoding="utf-8") if own else path_or_fh
    try:
        w = csv.writer(fh, lineterminator="\n")
        head = ["row_id", *ds.feature_names]
        if ds.labels is not None:
            head.append("label")
        w.writerow(head)
        for i in range(ds.n):
            row = [ds.row_ids[i], *(float_format.format(float(v)) for v in ds.features[i])]
            if ds.labels is not None:
                row.append(int(ds.labels[i]))
            w.writerow(row)
    finally:
        if own:
            fh.close()


def impute_missing(ds, strategy="feature_mean"):
    X = np.array(ds.features)
    miss = np.isnan(X)
    if not miss.any():
        return ds
    if strategy == "drop_rows":
        keep = np.flatnonzero(~miss.any(axis=1))
        if keep.size == 0:
            raise DataError("drop_rows removed every row")
        return ds.take(keep)
    if strategy == "feature_mean":
        for j in np.flatnonzero(miss.any(axis=0)):
            col = X[:, j]
            obs = col[~miss[:, j]]
            if obs.size == 0:
                raise DataError(f"feature {ds.feature_names[j]!r} has no observed values")
            col[miss[:, j]] = obs.mean()
        return ds.with_features(X)
    raise DataError(f"unknown impute strategy {strategy!r}")


def dedupe(ds):
    """Keep the first occurrence of each bitwise-identical feature row."""
    seen = set()
    keep = []
    X = np.ascontiguousarray(ds.features)
    for i in range(ds.n):
        key = X[i].tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(i)
    if len(keep) == ds.n:
        return ds
    return ds.take(keep)


@dataclass(frozen=True)
class NormalizationParams:
    method: str
    shift: np.ndarray = field(default=None)
    scale: np.ndarray = field(default=None)

    def to_dict(self):
        return {
            "method": self.method,
            "shift": None if self.shift is None else [float(v) for v in self.shift],
            "scale": None if self.scale is None else [float(v) for v in self.scale],
        }

    @classmethod
    def from_dict(cls, doc):
        shift = doc.get("shift")
        scale = doc.get("scale")
        return cls(
            method=doc["method"],
            shift=None if shift is None else np.asarray(shift, dtype=np.float64),
            scale=None if scale is None else np.asarray(scale, dtype=np.float64),
        )


def fit_normalizer(ds, method="zscore"):
    """Per-feature statistics for ``apply_normalizer``.

    zscore uses the population standard deviation. A scale of 0 marks a
    constant feature, which maps to 0 on application.
    """
    X = ds.features
    if np.isnan(X).any():
        raise DataError("fit_normalizer needs a dataset without missing values")
    if method == "none":
        return NormalizationParams("none")
    if method == "zscore":
        std = X.std(axis=0)
        # rounding in the mean can leave a tiny std on a constant column
        std[X.max(axis=0) == X.min(axis=0)] = 0.0
        return NormalizationParams("zscore", X.mean(axis=0), std)
    if method == "minmax":
        lo = X.min(axis=0)
        return NormalizationParams("minmax", lo, X.max(axis=0) - lo)
    raise DataError(f"unknown normalization method {method!r}")


def apply_normalizer(ds, params):
    if params.method == "none":
        return ds
    if ds.d != params.shift.shape[0]:
        raise DataError(f"normalizer fitted on {params.shift.shape[0]} features, data has {ds.d}")
    const = params.scale == 0
    safe = np.where(const, 1.0, params.scale)
    X = (ds.features - params.shift) / safe
    X[:, const] = 0.0
    return ds.with_features(X)


def split(ds, train_fraction, seed):
    """Seeded random partition; both sides keep the original row order."""
    if not 0 < train_fraction < 1:
        raise DataError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = ds.n
    if n < 2:
        raise DataError("split needs at least 2 rows")
    n_train = math.floor(train_fraction * n + 0.5)
    if n_train == 0 or n_train == n:
        raise DataError(f"train_fraction {train_fraction} leaves one side empty for n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return ds.take(np.sort(perm[:n_train])), ds.take(np.sort(perm[n_train:]))


def preprocess(ds, impute="feature_mean", dedup=False):
    """impute, then optionally dedupe; the stage order used by the pipeline."""
    ds = impute_missing(ds, impute)
    if dedup:
        ds = dedupe(ds)
    return ds
