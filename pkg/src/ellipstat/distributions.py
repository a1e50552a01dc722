# Quantiles of chi-square, F and t, inverted by bisection on the
# regularized incomplete gamma/beta functions. No quantile tables, no
# dependence on scipy.stats distribution objects; scipy.special supplies
# only the incomplete-function evaluations.

import math

from scipy import special

_BISECT_TOL = 1e-12
_MAX_ITER = 200


def _bisect_increasing(f, target, lo, hi):
    """Solve f(x) = target for increasing f on [lo, hi] to ~1e-12."""
    flo, fhi = f(lo), f(hi)
    if not (flo <= target <= fhi):
        raise ValueError(f"target {target} not bracketed by [{flo}, {fhi}]")
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BISECT_TOL * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def chi2_cdf(x, df):
    if x <= 0:
        return 0.0
    return float(special.gammainc(df / 2.0, x / 2.0))


def chi2_quantile(level, df):
    """x with P(chi2_df <= x) = level."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    hi = df + 10.0
    while chi2_cdf(hi, df) < level:
        hi *= 2.0
    return _bisect_increasing(lambda x: chi2_cdf(x, df), level, 0.0, hi)


def f_cdf(x, d1, d2):
    if x <= 0:
        return 0.0
    z = d1 * x / (d1 * x + d2)
    return float(special.betainc(d1 / 2.0, d2 / 2.0, z))


def f_quantile(level, d1, d2):
    """x with P(F_{d1,d2} <= x) = level."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if d1 <= 0 or d2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    hi = 10.0
    while f_cdf(hi, d1, d2) < level:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("F quantile does not converge")
    return _bisect_increasing(lambda x: f_cdf(x, d1, d2), level, 0.0, hi)


def t_cdf(x, df):
    z = df / (df + x * x)
    half_tail = 0.5 * float(special.betainc(df / 2.0, 0.5, z))
    return 1.0 - half_tail if x >= 0 else half_tail


def t_quantile(level, df):
    """x with P(t_df <= x) = level."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if level == 0.5:
        return 0.0
    if level < 0.5:
        return -t_quantile(1.0 - level, df)
    hi = 2.0
    while t_cdf(hi, df) < level:
        hi *= 2.0
    return _bisect_increasing(lambda x: t_cdf(x, df), level, 0.0, hi)


def f_sf(x, d1, d2):
    """Upper tail P(F_{d1,d2} > x)."""
    if x <= 0:
        return 1.0
    z = d2 / (d1 * x + d2)
    return float(special.betainc(d2 / 2.0, d1 / 2.0, z))


def norm_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def norm_coverage(k):
    """Two-sided normal coverage of mean +/- k standard deviations."""
    return 2.0 * norm_cdf(k) - 1.0
