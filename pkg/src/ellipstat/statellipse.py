# Data ellipsoids and group-structured covariance summaries: sample
# moments, Mahalanobis distance, coverage radii, pooled within/between
# decompositions and the within/between/marginal slope triad.

from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist
from . import gellipsoid as ge
from . import numkernel as nk


@dataclass(frozen=True)
class Sample:
    data: np.ndarray            # n x p
    names: tuple = ()

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if not np.all(np.isfinite(data)):
            raise ValueError("sample has non-finite entries")
        if data.shape[0] < 2:
            raise ValueError("a sample needs at least two rows")
        names = tuple(self.names) if self.names else tuple(
            f"x{i + 1}" for i in range(data.shape[1]))
        if len(names) != data.shape[1]:
            raise ValueError("names length does not match columns")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "names", names)

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def p(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class GroupedSample:
    samples: dict = field(default_factory=dict)   # label -> Sample

    def __post_init__(self):
        if not self.samples:
            raise ValueError("need at least one group")
        ps = {s.p for s in self.samples.values()}
        if len(ps) != 1:
            raise ValueError("groups must share the same columns")
        names = {s.names for s in self.samples.values()}
        if len(names) != 1:
            raise ValueError("groups must share variable names")

    @property
    def g(self):
        return len(self.samples)

    @property
    def p(self):
        return next(iter(self.samples.values())).p

    @property
    def names(self):
        return next(iter(self.samples.values())).names

    @property
    def total_n(self):
        return sum(s.n for s in self.samples.values())

    def pooled_sample(self):
        return Sample(np.vstack([s.data for s in self.samples.values()]),
                      self.names)


@dataclass(frozen=True)
class CoverageSpec:
    kind: str       # 'chisq' | 'f_small_sample' | 'stddev_multiple'
    value: float    # coverage level for quantile kinds, else the multiple

    def __post_init__(self):
        if self.kind in ("chisq", "f_small_sample"):
            if not 0.0 < self.value < 1.0:
                raise ValueError("coverage level must be in (0, 1)")
        elif self.kind == "stddev_multiple":
            if self.value <= 0:
                raise ValueError("multiple must be positive")
        else:
            raise ValueError(f"unknown coverage kind {self.kind!r}")

    @classmethod
    def chisq(cls, level):
        return cls("chisq", level)

    @classmethod
    def small_sample(cls, level):
        return cls("f_small_sample", level)

    @classmethod
    def stddev(cls, multiple=1.0):
        return cls("stddev_multiple", multiple)


def mean_cov(sample):
    """Column means and the n-1 divisor covariance matrix."""
    y = sample.data
    ybar = y.mean(axis=0)
    dev = y - ybar
    s = dev.T @ dev / (sample.n - 1)
    return ybar, 0.5 * (s + s.T)


def correlation(sample):
    _, s = mean_cov(sample)
    d = np.sqrt(np.diag(s))
    return s / np.outer(d, d)


def mahalanobis(y, ybar, s_mat):
    """Squared Mahalanobis distance (y - ybar)^T S^{-1} (y - ybar)."""
    s_mat = nk.check_symmetric(s_mat)
    lam, _ = nk.psd_eigvals(s_mat)
    if lam[-1] <= 1e-12 * max(lam[0], 1e-300):
        raise nk.NotPositiveDefiniteError(int(np.argmin(lam)), lam[-1])
    d = np.asarray(y, dtype=float) - np.asarray(ybar, dtype=float)
    return float(d @ np.linalg.solve(s_mat, d))


def coverage_radius(p, n, spec):
    """Radius c of the coverage ellipsoid; c^2 is the reference quantile."""
    if spec.kind == "chisq":
        return float(np.sqrt(dist.chi2_quantile(spec.value, p)))
    if spec.kind == "f_small_sample":
        if n <= p:
            raise ValueError("small-sample radius needs n > p")
        f_q = dist.f_quantile(spec.value, p, n - p)
        return float(np.sqrt(p * (n - 1) / (n - p) * f_q))
    return float(spec.value)


def data_ellipsoid(sample, spec=CoverageSpec.stddev(1.0)):
    """Data ellipsoid of radius c: the mean +/- c S^{1/2} contour."""
    ybar, s = mean_cov(sample)
    c = coverage_radius(sample.p, sample.n, spec)
    return ge.from_moment(c * c * s, ybar)


def univariate_shadow(e, direction):
    """Interval shadow of an ellipsoid on a unit direction.

    Half-width is the norm of diag(radii) U^T d; an unbounded component
    along the direction gives an infinite interval.
    """
    d = np.asarray(direction, dtype=float).ravel()
    nrm = np.linalg.norm(d)
    if not np.isclose(nrm, 1.0, atol=1e-8):
        raise ValueError("direction must be a unit vector")
    comps = e.frame.T @ d
    inf_mask = np.isinf(e.radii)
    if np.any(inf_mask & (np.abs(comps) > 1e-12)):
        return (-np.inf, np.inf)
    half = float(np.linalg.norm(e.radii[~inf_mask] * comps[~inf_mask]))
    mid = float(e.center @ d)
    return (mid - half, mid + half)


def pooled_within_cov(gs):
    """(N - g)^{-1} sum over groups of (n_i - 1) S_i."""
    n_total = gs.total_n
    if n_total - gs.g < 1:
        raise ValueError("pooled covariance needs N - g >= 1")
    acc = np.zeros((gs.p, gs.p))
    for s in gs.samples.values():
        _, si = mean_cov(s)
        acc += (s.n - 1) * si
    return acc / (n_total - gs.g)


def group_means(gs):
    labels = list(gs.samples)
    means = np.array([gs.samples[k].data.mean(axis=0) for k in labels])
    ns = np.array([gs.samples[k].n for k in labels])
    return labels, means, ns


def between_cov(gs, weighted=True):
    """Covariance of the group means.

    weighted=True: sum n_i (m_i - grand)(m_i - grand)^T / (g - 1) with the
    n-weighted grand mean (the hypothesis SSCP of a one-way design over
    g - 1). weighted=False: the plain g-1 divisor covariance of the means.
    """
    if gs.g < 2:
        raise ValueError("between-group covariance needs g >= 2")
    _, means, ns = group_means(gs)
    if weighted:
        grand = (ns[:, None] * means).sum(axis=0) / ns.sum()
        dev = means - grand
        b = (ns[:, None] * dev).T @ dev / (gs.g - 1)
    else:
        dev = means - means.mean(axis=0)
        b = dev.T @ dev / (gs.g - 1)
    return 0.5 * (b + b.T)


def _slope_corr(s, ix, iy):
    sxx, syy, sxy = s[ix, ix], s[iy, iy], s[ix, iy]
    if sxx <= 0 or syy <= 0:
        raise ValueError("slope undefined: zero variance")
    return sxy / sxx, sxy / np.sqrt(sxx * syy)


def marginal_decomposition(gs, x_index=0, y_index=1):
    """Within, between and marginal slopes/correlations for one (x, y) pair.

    The marginal slope always lies in the closed interval spanned by the
    within and between slopes (the total covariance is their weighted
    average).
    """
    if gs.g < 2:
        raise ValueError("decomposition needs g >= 2")
    s_w = pooled_within_cov(gs)
    s_b = between_cov(gs, weighted=True)
    _, s_t = mean_cov(gs.pooled_sample())
    b_w, r_w = _slope_corr(s_w, x_index, y_index)
    b_b, r_b = _slope_corr(s_b, x_index, y_index)
    b_m, r_m = _slope_corr(s_t, x_index, y_index)
    return {
        "beta_within": float(b_w), "beta_between": float(b_b),
        "beta_marginal": float(b_m),
        "r_within": float(r_w), "r_between": float(r_b),
        "r_marginal": float(r_m),
    }


def exact_cov_sample(rng, n, mean, cov):
    """Draw n points whose sample mean and n-1 covariance are exact.

    The draw is whitened empirically and recolored with the target
    covariance factor, so the realized second moments match the request.
    """
    p = len(mean)
    if n <= p:
        raise ValueError("need n > p for an exact-covariance draw")
    z = rng.standard_normal((n, p))
    z -= z.mean(axis=0)
    sz = z.T @ z / (n - 1)
    _, fz = nk.psd_sqrt(sz)
    white = z @ np.linalg.inv(fz).T
    _, f = nk.psd_sqrt(np.asarray(cov, dtype=float))
    return np.asarray(mean, dtype=float) + white @ f.T


def grouped_slopes_demo(cov_sign=+1, seed=13, n_per_group=10, n_groups=5):
    """Five-group demo with exact within-group moments.

    Group means follow x_i = 2 i + U(-0.4, 0.4), y_i = x_i + N(0, 0.5^2);
    every group has within-group covariance exactly
    [[6, +/-3], [+/-3, 2]] (within correlation +/-0.866). The default seed
    puts the between-means correlation near 0.95.
    """
    rng = np.random.default_rng(seed)
    cov = np.array([[6.0, 3.0 * cov_sign], [3.0 * cov_sign, 2.0]])
    groups = {}
    for i in range(1, n_groups + 1):
        mx = 2.0 * i + rng.uniform(-0.4, 0.4)
        my = mx + rng.normal(0.0, 0.5)
        data = exact_cov_sample(rng, n_per_group, (mx, my), cov)
        groups[f"g{i}"] = Sample(data, ("x", "y"))
    return GroupedSample(groups)
