# OLS fitting and its elliptical geometry in coefficient space:
# confidence ellipsoids and shadows, the visual slope interval,
# added-variable geometry, variance inflation, and measurement-error
# (attenuation) studies.

from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from . import gellipsoid as ge

RANK_TOL = 1e-10


@dataclass(frozen=True)
class LinearFit:
    coef: np.ndarray        # includes the intercept as coefficient 0
    xtx: np.ndarray         # q x q cross-product of the full design
    xtx_inv: np.ndarray
    s2: float               # residual variance, RSS / df
    df: int                 # n - q
    n: int
    names: tuple            # coefficient names, names[0] == 'intercept'
    residuals: np.ndarray
    fitted: np.ndarray

    @property
    def q(self):
        return self.coef.size

    def se(self):
        return np.sqrt(self.s2 * np.diag(self.xtx_inv))


def design_matrix(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return np.column_stack([np.ones(x.shape[0]), x])


def ols_fit(x, y, names=None):
    """OLS with an intercept always included; x holds the predictors only.

    Rejects rank-deficient designs, reporting the offending singular
    value.
    """
    xd = design_matrix(x)
    y = np.asarray(y, dtype=float).ravel()
    n, q = xd.shape
    if y.size != n:
        raise ValueError("x and y lengths differ")
    if n <= q:
        raise ValueError(f"need n > {q} observations")
    sv = np.linalg.svd(xd, compute_uv=False)
    if sv[-1] <= RANK_TOL * sv[0]:
        raise ValueError(
            f"design is rank deficient: min singular value {sv[-1]:.3e}")
    coef, _, _, _ = np.linalg.lstsq(xd, y, rcond=None)
    fitted = xd @ coef
    resid = y - fitted
    df = n - q
    s2 = float(resid @ resid / df)
    xtx = xd.T @ xd
    if names is None:
        names = ["intercept"] + [f"x{i}" for i in range(1, q)]
    return LinearFit(coef=coef, xtx=xtx, xtx_inv=np.linalg.inv(xtx),
                     s2=s2, df=df, n=n, names=tuple(names),
                     residuals=resid, fitted=fitted)


@dataclass(frozen=True)
class ConfidenceSpec:
    kind: str = "joint"     # 'joint' | 'ci' | 'scheffe' | 'bonferroni'
    alpha: float = 0.05
    d: int = 2              # simultaneous dimensions for joint/scheffe
    m: int = 1              # comparisons for bonferroni

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.d < 1 or self.m < 1:
            raise ValueError("d and m must be >= 1")
        if self.kind not in ("joint", "ci", "scheffe", "bonferroni"):
            raise ValueError(f"unknown kind {self.kind!r}")

    def radius(self, df):
        if self.kind in ("joint", "scheffe"):
            return float(np.sqrt(
                self.d * dist.f_quantile(1 - self.alpha, self.d, df)))
        if self.kind == "ci":
            return float(dist.t_quantile(1 - self.alpha / 2, df))
        return float(dist.t_quantile(1 - self.alpha / (2 * self.m), df))


def confidence_ellipsoid(fit, coords, spec=None):
    """Confidence ellipsoid for selected coefficients.

    Centered at the estimates, with moment matrix
    radius^2 * s^2 * (X^T X)^{-1}[coords, coords]; the radius follows the
    spec kind (joint F, per-coordinate t, or Bonferroni t).
    """
    coords = list(coords)
    if any(c < 0 or c >= fit.q for c in coords):
        raise ValueError(f"coordinates out of range 0..{fit.q - 1}")
    if spec is None:
        spec = ConfidenceSpec(kind="joint", d=len(coords))
    r = spec.radius(fit.df)
    sub = fit.xtx_inv[np.ix_(coords, coords)]
    return ge.from_moment(r * r * fit.s2 * sub, fit.coef[coords])


def shadow_interval(fit, combo, spec=None):
    """Confidence interval for a linear combination c^T beta.

    Equals the shadow of the matching confidence ellipsoid along c.
    """
    c = np.asarray(combo, dtype=float).ravel()
    if c.size != fit.q or not np.any(c):
        raise ValueError("combination must be a nonzero q-vector")
    if spec is None:
        spec = ConfidenceSpec(kind="ci")
    r = spec.radius(fit.df)
    mid = float(c @ fit.coef)
    half = r * float(np.sqrt(fit.s2 * c @ fit.xtx_inv @ c))
    return (mid - half, mid + half)


def visual_ci_slope(x, y, alpha=0.05):
    """Visual slope interval for simple regression.

    The tangent parallelogram of the standard data ellipse has diagonals
    with slopes b +/- s_e/s_x; shrinking toward the fitted line by 2/sqrt(n)
    approximates the 95% interval. The exact t interval is returned for
    comparison (alpha only affects the exact interval).
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n = x.size
    if n < 3:
        raise ValueError("need n >= 3")
    sx = x.std(ddof=1)
    if sx <= 0:
        raise ValueError("x has zero variance")
    fit = ols_fit(x, y)
    b = float(fit.coef[1])
    se_resid = float(np.sqrt(fit.s2))
    spread = se_resid / sx
    shrink = 2.0 / np.sqrt(n)
    t_half = dist.t_quantile(1 - alpha / 2, fit.df) * fit.se()[1]
    return {
        "slope": b,
        "diagonal_slopes": (b - spread, b + spread),
        "approx_interval": (b - shrink * spread, b + shrink * spread),
        "exact_interval": (b - t_half, b + t_half),
        "shrink_factor": float(shrink),
    }


def _residualize(target, others):
    fit = ols_fit(others, target) if others.shape[1] else None
    if fit is None:
        return target - target.mean()
    return target - fit.fitted


def avp(x, y, k):
    """Added-variable construction for predictor k (0-based column of x).

    Both the response and x_k are residualized on the remaining
    predictors (plus intercept); the simple through-origin slope of the
    residual scatter equals the full-model coefficient of x_k, and its
    residuals equal the full-model residuals.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float).ravel()
    if not 0 <= k < x.shape[1]:
        raise ValueError(f"k must index a predictor column 0..{x.shape[1] - 1}")
    others = np.delete(x, k, axis=1)
    x_star = _residualize(x[:, k], others)
    y_star = _residualize(y, others)
    sxx = float(x_star @ x_star)
    if sxx <= 0:
        raise ValueError("predictor k is collinear with the others")
    slope = float(x_star @ y_star / sxx)
    resid = y_star - slope * x_star
    denom = float(np.sqrt(sxx * (y_star @ y_star)))
    partial_corr = float(x_star @ y_star / denom) if denom > 0 else 0.0
    return {
        "x_star": x_star,
        "y_star": y_star,
        "slope": slope,
        "residuals": resid,
        "partial_corr": partial_corr,
    }


def vif(x, k):
    """Variance inflation factor for predictor k, two ways.

    algebraic: 1 / (1 - R^2 of x_k on the others);
    geometric: squared ratio of the marginal to conditional spread of x_k.
    The two coincide identically; both are returned.
    """
    x = np.asarray(x, dtype=float)
    xk = x[:, k]
    others = np.delete(x, k, axis=1)
    x_star = _residualize(xk, others)
    tss = float(((xk - xk.mean()) ** 2).sum())
    rss = float((x_star ** 2).sum())
    if tss <= 0:
        raise ValueError("x_k has zero variance")
    if rss <= 1e-14 * tss:
        return {"algebraic": np.inf, "geometric": np.inf,
                "r_squared": 1.0}
    r2 = 1.0 - rss / tss
    return {
        "algebraic": 1.0 / (1.0 - r2),
        "geometric": tss / rss,
        "r_squared": r2,
    }


def perturb_predictor(x, k, delta, seed=0):
    """Add N(0, (delta * SD_k)^2) noise to column k, preserving its mean.

    The realized noise is recentred so the column mean is unchanged
    exactly.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    x = np.asarray(x, dtype=float).copy()
    if x.ndim == 1:
        x = x[:, None]
    if delta == 0:
        return x
    rng = np.random.default_rng(seed)
    sd = x[:, k].std(ddof=1)
    noise = rng.normal(0.0, delta * sd, size=x.shape[0])
    noise -= noise.mean()
    x[:, k] = x[:, k] + noise
    return x


def attenuation_curve(x, y, deltas, reps=100, seed=0):
    """Mean slope ratio slope(delta)/slope(0) under predictor noise.

    Noise with standard deviation delta * SD_x drives the estimated slope
    toward zero; the population ratio is 1 / (1 + delta^2).
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    base = ols_fit(x, y).coef[1]
    rng = np.random.default_rng(seed)
    sd = x.std(ddof=1)
    out = []
    for delta in deltas:
        if delta == 0:
            out.append(1.0)
            continue
        acc = 0.0
        for _ in range(reps):
            noise = rng.normal(0.0, delta * sd, size=x.size)
            noise -= noise.mean()
            acc += ols_fit(x + noise, y).coef[1] / base
        out.append(float(acc / reps))
    return {"deltas": [float(d) for d in deltas], "mean_ratio": out,
            "expected_ratio": [1.0 / (1.0 + float(d) ** 2) for d in deltas]}
