"""Chi-square CDF and quantile from the regularized lower incomplete gamma.

P(a, x) uses the power series for x < a + 1 and a modified Lentz continued
fraction for the upper tail otherwise. The quantile is found by Newton steps
on the CDF, safeguarded by a bisection bracket.
"""
import math

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 1000


def _series(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_cf(a, x):
    b = x + 1.0 - a
    c = 1.0 / _TINY
    dd = 1.0 / b
    h = dd
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        dd = an * dd + b
        if abs(dd) < _TINY:
            dd = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        dd = 1.0 / dd
        delta = dd * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return _series(a, x)
    return 1.0 - _upper_cf(a, x)


def gammainc_upper(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _series(a, x)
    return _upper_cf(a, x)


def chi2_cdf(x, dof):
    if x <= 0:
        return 0.0
    return gammainc_lower(dof / 2.0, x / 2.0)


def chi2_sf(x, dof):
    if x <= 0:
        return 1.0
    return gammainc_upper(dof / 2.0, x / 2.0)


def chi2_pdf(x, dof):
    if x <= 0:
        return 0.0
    a = dof / 2.0
    return math.exp((a - 1.0) * math.log(x) - x / 2.0 - a * math.log(2.0) - math.lgamma(a))


def chi2_quantile(p, dof, rtol=1e-12):
    """x such that chi2_cdf(x, dof) == p."""
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if dof < 1:
        raise ValueError(f"dof must be >= 1, got {dof}")
    # work on whichever tail keeps the target away from 1
    if p <= 0.5:
        def excess(x):
            return chi2_cdf(x, dof) - p
    else:
        def excess(x):
            return (1.0 - p) - chi2_sf(x, dof)
    lo, hi = 0.0, max(1.0, float(dof))
    while excess(hi) < 0:
        lo, hi = hi, hi * 2.0
    x = 0.5 * (lo + hi)
    for _ in range(200):
        f = excess(x)
        if f == 0:
            return x
        if f < 0:
            lo = x
        else:
            hi = x
        pdf = chi2_pdf(x, dof)
        step = f / pdf if pdf > 0 else math.inf
        nxt = x - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= rtol * abs(nxt) or hi - lo <= rtol * hi:
            return nxt
        x = nxt
    return x
