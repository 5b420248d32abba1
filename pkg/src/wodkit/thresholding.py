"""Turn a score vector into outlier flags.

Flags use a strict ``score > threshold`` comparison everywhere, so scores
tied with the threshold stay unflagged.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .chi2 import chi2_quantile
from .errors import DataError

POLICIES = ("fixed", "quantile", "chisq")


@dataclass(frozen=True)
class DetectionResult:
    scores: np.ndarray
    threshold: float  # None when flags did not come from a threshold
    flags: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_flagged(self):
        return int(self.flags.sum())


def _scores(s):
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise DataError("scores must be a non-empty 1-D array")
    return s


def apply_threshold(s, t, **meta):
    s = _scores(s)
    return DetectionResult(scores=s, threshold=float(t), flags=s > t, meta=meta)


def fixed_threshold(s, t):
    if not math.isfinite(t):
        raise DataError(f"fixed threshold must be finite, got {t}")
    return apply_threshold(s, t, policy="fixed", value=float(t))


def nearest_rank(s, q):
    """The ceil(q*n)-th smallest score."""
    if not 0 < q < 1:
        raise DataError(f"q must lie in (0, 1), got {q}")
    s = _scores(s)
    # the 1e-9 absorbs representation error in q*n (0.07 * 100 = 7.000000000000001)
    rank = min(max(math.ceil(q * s.size - 1e-9), 1), s.size)
    return float(np.partition(s, rank - 1)[rank - 1])


def quantile_threshold(s, q):
    return apply_threshold(s, nearest_rank(s, q), policy="quantile", q=float(q))


def chisq_cutoff(alpha, dims):
    """sqrt of the (1 - alpha) chi-square quantile with ``dims`` degrees of freedom."""
    if not 0 < alpha < 1:
        raise DataError(f"alpha must lie in (0, 1), got {alpha}")
    if dims < 1:
        raise DataError(f"dims must be >= 1, got {dims}")
    return math.sqrt(chi2_quantile(1.0 - alpha, dims))


def chisq_threshold(s, alpha, dims):
    """Expects raw (unweighted) Mahalanobis distances."""
    return apply_threshold(s, chisq_cutoff(alpha, dims), policy="chisq", alpha=float(alpha), dims=int(dims))
