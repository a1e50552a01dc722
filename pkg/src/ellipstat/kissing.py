# The locus-of-osculation family: where concentric ellipse families kiss,
# and the estimators whose geometry that is — the two-group discriminant
# axis, ridge regression, Bayes posterior combination, mixed-model
# GLS/BLUE/BLUP, and multivariate meta-analysis.

from dataclasses import dataclass

import numpy as np

from . import gellipsoid as ge
from . import numkernel as nk

SKEW = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class QuadFamily:
    """Concentric elliptical level sets f(x) = (x - m)^T A (x - m)."""
    m: np.ndarray
    a_mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float).ravel()
        a = nk.check_symmetric(self.a_mat)
        if m.size != 2 or a.shape != (2, 2):
            raise ValueError("quad families are two-dimensional")
        lam, _ = nk.psd_eigvals(a)
        if lam[-1] <= 0:
            raise ValueError("shape matrix must be positive definite")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "a_mat", a)

    def value(self, x):
        d = np.asarray(x, dtype=float) - self.m
        return float(d @ self.a_mat @ d)

    def gradient(self, x):
        d = np.asarray(x, dtype=float) - self.m
        return 2.0 * self.a_mat @ d

    def level_ellipse(self, radius):
        """The level set f(x) = radius^2 as an ellipsoid."""
        return ge.from_precision(self.a_mat / radius ** 2, self.m)


def cross_field(f1, f2, x):
    """Cross product of the two gradients at x (zero iff they are parallel).

    Evaluates the bilinear form (x - m2)^T A2^T C A1 (x - m1) with the
    2 x 2 skew matrix C; its zero set is the locus of osculation and
    always contains both centers.
    """
    x = np.asarray(x, dtype=float)
    b = f2.a_mat.T @ SKEW @ f1.a_mat
    d1 = x - f1.m
    d2 = x - f2.m
    if x.ndim == 1:
        return float(d2 @ b @ d1)
    return np.einsum("...i,ij,...j->...", d2, b, d1)


def _cross_gradient(f1, f2, x):
    b = f2.a_mat.T @ SKEW @ f1.a_mat
    return b @ (x - f1.m) + b.T @ (x - f2.m)


def _newton_refine(f1, f2, x, steps=1):
    for _ in range(steps):
        g = cross_field(f1, f2, x)
        grad = _cross_gradient(f1, f2, x)
        nrm2 = float(grad @ grad)
        if nrm2 <= 0:
            break
        x = x - g * grad / nrm2
    return x


def trace_locus(f1, f2, bbox, resolution=64, newton_steps=3):
    """Zero contour of the cross field by marching squares.

    bbox is (xmin, xmax, ymin, ymax); each cell edge with a sign change
    contributes a linearly interpolated crossing, cell segments are
    chained into polylines, and every vertex gets a few Newton steps onto
    the exact zero set. Returns {'polylines': [...], 'scale': ...} where
    scale is the max |g| over the grid (the reference for vertex
    residuals).
    """
    if resolution < 32:
        raise ValueError("resolution must be >= 32")
    xmin, xmax, ymin, ymax = bbox
    xs = np.linspace(xmin, xmax, resolution + 1)
    ys = np.linspace(ymin, ymax, resolution + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    grid = np.stack([gx, gy], axis=-1)
    vals = cross_field(f1, f2, grid)
    scale = float(np.abs(vals).max())
    if scale == 0.0:
        return {"polylines": [], "scale": 0.0}

    def interp(p_a, v_a, p_b, v_b):
        t = v_a / (v_a - v_b)
        return p_a + t * (p_b - p_a)

    segments = []
    for i in range(resolution):
        for j in range(resolution):
            corners = [grid[i, j], grid[i + 1, j],
                       grid[i + 1, j + 1], grid[i, j + 1]]
            cv = [vals[i, j], vals[i + 1, j],
                  vals[i + 1, j + 1], vals[i, j + 1]]
            pts = []
            for k in range(4):
                a, b = k, (k + 1) % 4
                va, vb = cv[a], cv[b]
                if va == 0.0 and vb == 0.0:
                    continue
                if va == 0.0:
                    pts.append(np.array(corners[a]))
                elif (va < 0) != (vb < 0):
                    pts.append(interp(corners[a], va, corners[b], vb))
            if len(pts) == 2:
                segments.append((pts[0], pts[1]))
            elif len(pts) == 4:
                # saddle cell: break the ambiguity with the center value
                center = 0.25 * sum(np.asarray(c) for c in corners)
                cval = cross_field(f1, f2, center)
                if (cval < 0) == (cv[0] < 0):
                    segments.append((pts[0], pts[3]))
                    segments.append((pts[1], pts[2]))
                else:
                    segments.append((pts[0], pts[1]))
                    segments.append((pts[2], pts[3]))

    # chain segments sharing endpoints into polylines
    tol = 1e-9 * max(xmax - xmin, ymax - ymin)
    unused = list(segments)
    polylines = []
    while unused:
        a, b = unused.pop()
        chain = [a, b]
        grown = True
        while grown:
            grown = False
            for idx, (c, d) in enumerate(unused):
                if np.linalg.norm(chain[-1] - c) < tol:
                    chain.append(d)
                elif np.linalg.norm(chain[-1] - d) < tol:
                    chain.append(c)
                elif np.linalg.norm(chain[0] - c) < tol:
                    chain.insert(0, d)
                elif np.linalg.norm(chain[0] - d) < tol:
                    chain.insert(0, c)
                else:
                    continue
                unused.pop(idx)
                grown = True
                break
        refined = np.array([_newton_refine(f1, f2, p, newton_steps)
                            for p in chain])
        polylines.append(refined)
    polylines.sort(key=lambda pl: -len(pl))
    return {"polylines": polylines, "scale": scale}


def osculation_point(f1, f2, radius1, locus=None, bbox=None, resolution=96):
    """External kiss point of the level ellipse f1 = radius1^2 with the
    f2 family.

    Candidate vertices are locus points where the two gradients are
    antiparallel (ellipses touching from outside, as on the branch
    running between the centers); the one closest in f1-level is polished
    with a 2 x 2 Newton iteration on (cross_field, f1 - radius1^2).
    Returns the point and the f2 radius at which the families touch
    there.
    """
    if locus is None:
        if bbox is None:
            raise ValueError("need a traced locus or a bbox")
        locus = trace_locus(f1, f2, bbox, resolution)
    best, best_err = None, np.inf
    for pl in locus["polylines"]:
        for pt in pl:
            if f1.gradient(pt) @ f2.gradient(pt) >= 0:
                continue
            err = abs(f1.value(pt) - radius1 ** 2)
            if err < best_err:
                best, best_err = pt.copy(), err
    if best is None:
        raise ValueError("no external osculation candidates on the locus")
    x = best
    for _ in range(40):
        r = np.array([cross_field(f1, f2, x),
                      f1.value(x) - radius1 ** 2])
        jac = np.vstack([_cross_gradient(f1, f2, x), f1.gradient(x)])
        try:
            step = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError:
            break
        x = x - step
        if np.linalg.norm(step) < 1e-14 * (1 + np.linalg.norm(x)):
            break
    return x, float(np.sqrt(f2.value(x)))


def lda_axis(m1, m2, s_pooled):
    """Two-group discriminant coefficients b = S_pooled^{-1} (m1 - m2).

    Classification boundaries {x: b^T x = d} over the cut point d are the
    tangent planes at points of osculation of the two data-ellipsoid
    families.
    """
    s_pooled = nk.check_symmetric(s_pooled)
    lam, _ = nk.psd_eigvals(s_pooled)
    if lam[-1] <= 1e-12 * max(lam[0], 1e-300):
        raise nk.NotPositiveDefiniteError(int(np.argmin(lam)), lam[-1])
    m1 = np.asarray(m1, dtype=float).ravel()
    m2 = np.asarray(m2, dtype=float).ravel()
    b = np.linalg.solve(s_pooled, m1 - m2)

    def boundary(cut):
        return {"normal": b, "offset": float(cut)}

    midpoint_cut = float(b @ (m1 + m2) / 2.0)
    return {"coef": b, "boundary": boundary, "midpoint_cut": midpoint_cut}


def _standardize_columns(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    x_center = x.mean(axis=0)
    xc = x - x_center
    lengths = np.linalg.norm(xc, axis=0)
    if np.any(lengths <= 0):
        raise ValueError("constant predictor column")
    xs = xc / lengths
    y_center = y.mean()
    return xs, y - y_center, lengths, x_center, y_center


@dataclass(frozen=True)
class RidgeResult:
    k: float
    beta: np.ndarray          # standardized scale
    beta_original: np.ndarray  # original predictor units
    cov: np.ndarray           # sampling covariance on the standardized scale
    gls_shrink: np.ndarray    # G with beta = G beta_ols
    beta_ols: np.ndarray
    s2: float


def ridge(x, y, k, penalty_matrix=None):
    """Ridge regression on the centered, unit-length predictor scale.

    beta(k) = (X'X + K)^{-1} X'y with K = k I (or a supplied PSD penalty
    matrix); sampling covariance s^2 (X'X + K)^{-1} X'X (X'X + K)^{-1}.
    k = 0 reproduces OLS.
    """
    if k < 0:
        raise ValueError("ridge constant must be nonnegative")
    xs, yc, lengths, _, _ = _standardize_columns(x, y)
    q = xs.shape[1]
    pen = k * np.eye(q) if penalty_matrix is None else \
        nk.check_symmetric(penalty_matrix)
    xtx = xs.T @ xs
    xty = xs.T @ yc
    beta_ols = np.linalg.solve(xtx, xty)
    core = np.linalg.inv(xtx + pen)
    beta = core @ xty
    n = xs.shape[0]
    df = n - q - 1
    resid = yc - xs @ beta_ols
    s2 = float(resid @ resid / df)
    cov = s2 * core @ xtx @ core
    shrink = core @ xtx
    return RidgeResult(k=float(k), beta=beta, beta_original=beta / lengths,
                       cov=0.5 * (cov + cov.T), gls_shrink=shrink,
                       beta_ols=beta_ols, s2=s2)


def ridge_trace(x, y, ks, coords=(0, 1), radius_factor=0.5):
    """Coefficient path with a variance ellipse per ridge constant.

    Each entry carries the coefficient pair and its covariance ellipse,
    drawn at radius_factor times the standard radius.
    """
    coords = list(coords)
    out = []
    for k in ks:
        r = ridge(x, y, k)
        sub = r.cov[np.ix_(coords, coords)]
        ell = ge.from_moment(radius_factor ** 2 * sub, r.beta[coords])
        out.append({"k": float(k), "beta": r.beta[coords], "ellipse": ell,
                    "result": r})
    return out


def bayes_posterior(x, y, beta_prior, a_mat, standardize=True):
    """Posterior mean under a conjugate normal prior with precision A.

    beta_post = (X'X + A)^{-1} (X'X beta_ols + A beta_prior); the
    covariance is reported both unscaled, (X'X + A)^{-1}, and multiplied
    by the residual variance. With standardize=True the computation runs
    on the same centered unit-length scale as ridge, so A = k I and a
    zero prior reproduce ridge exactly.
    """
    a_mat = nk.check_symmetric(a_mat)
    if standardize:
        xs, yc, _, _, _ = _standardize_columns(x, y)
    else:
        xs = np.asarray(x, dtype=float)
        yc = np.asarray(y, dtype=float).ravel()
    beta_prior = np.asarray(beta_prior, dtype=float).ravel()
    xtx = xs.T @ xs
    xty = xs.T @ yc
    beta_ols = np.linalg.solve(xtx, xty)
    total = xtx + a_mat
    sv = np.linalg.svd(total, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise ValueError("X'X + A is singular")
    beta_post = np.linalg.solve(total, xtx @ beta_ols + a_mat @ beta_prior)
    n, q = xs.shape
    resid = yc - xs @ beta_ols
    s2 = float(resid @ resid / (n - q - (1 if standardize else 0)))
    cov_unit = np.linalg.inv(total)
    return {"beta_post": beta_post, "beta_ols": beta_ols,
            "cov_unit": cov_unit, "cov": s2 * cov_unit, "s2": s2}


# ----------------------------------------------------------------- mixed

@dataclass(frozen=True)
class Cluster:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        z = x if self.z is None else np.asarray(self.z, dtype=float)
        if x.shape[0] != y.size or z.shape[0] != y.size:
            raise ValueError("cluster dimensions disagree")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @property
    def n(self):
        return self.y.size


@dataclass(frozen=True)
class MixedSpec:
    clusters: list
    g_mat: np.ndarray           # between-cluster covariance of random effects
    sigma2: float = None        # error variance; estimated if omitted
    r_mats: list = None         # per-cluster error covariance, default s2 I

    def __post_init__(self):
        if not self.clusters:
            raise ValueError("need at least one cluster")
        object.__setattr__(self, "g_mat",
                           nk.check_symmetric(self.g_mat))

    def error_variance(self):
        if self.sigma2 is not None:
            return float(self.sigma2)
        rss, df = 0.0, 0
        for c in self.clusters:
            coef, _, _, _ = np.linalg.lstsq(c.x, c.y, rcond=None)
            r = c.y - c.x @ coef
            rss += float(r @ r)
            df += c.n - c.x.shape[1]
        if df <= 0:
            raise ValueError("no residual degrees of freedom for sigma^2")
        return rss / df

    def r_mat(self, i):
        if self.r_mats is not None:
            return np.asarray(self.r_mats[i], dtype=float)
        return self.error_variance() * np.eye(self.clusters[i].n)


def gls_fixed(spec):
    """Mixed-model GLS fixed effects with V_i = Z_i G Z_i' + R_i."""
    a = None
    b = None
    for i, c in enumerate(spec.clusters):
        v = c.z @ spec.g_mat @ c.z.T + spec.r_mat(i)
        sv = np.linalg.svd(v, compute_uv=False)
        if sv[-1] <= 1e-12 * sv[0]:
            raise ValueError(f"cluster {i}: V is singular")
        vi_x = np.linalg.solve(v, c.x)
        if a is None:
            a = np.zeros((c.x.shape[1], c.x.shape[1]))
            b = np.zeros(c.x.shape[1])
        a += c.x.T @ vi_x
        b += vi_x.T @ c.y
    cov = np.linalg.inv(a)
    return {"beta": cov @ b, "cov": 0.5 * (cov + cov.T)}


def cluster_blues(spec):
    """Per-cluster OLS estimates with S_i = sigma^2 (X_i'X_i)^{-1}.

    Rank-deficient clusters are skipped and reported rather than fitted.
    """
    s2 = spec.error_variance()
    estimates, skipped = [], []
    for i, c in enumerate(spec.clusters):
        sv = np.linalg.svd(c.x, compute_uv=False)
        if c.n < c.x.shape[1] or sv[-1] <= 1e-10 * sv[0]:
            skipped.append(i)
            continue
        xtx_inv = np.linalg.inv(c.x.T @ c.x)
        beta = xtx_inv @ c.x.T @ c.y
        estimates.append({"index": i, "beta": beta, "s_mat": s2 * xtx_inv})
    return {"estimates": estimates, "skipped": skipped, "sigma2": s2}


def blup(beta_blue, s_mat, beta_gls, g_mat):
    """Inverse-variance weighted combination of a BLUE with the GLS pool.

    (S^{-1} + G^{-1})^{-1} (S^{-1} beta_blue + G^{-1} beta_gls): complete
    pooling as G -> 0, no pooling as G -> infinity.
    """
    s_inv = np.linalg.inv(nk.check_symmetric(s_mat))
    g_inv = np.linalg.inv(nk.check_symmetric(g_mat))
    w = np.linalg.inv(s_inv + g_inv)
    beta = w @ (s_inv @ np.asarray(beta_blue, dtype=float)
                + g_inv @ np.asarray(beta_gls, dtype=float))
    return {"beta": beta, "cov": 0.5 * (w + w.T)}


def estimate_g_moments(spec):
    """Moment-matching G: covariance of the BLUEs minus their average S_i,
    eigen-clipped to PSD."""
    blues = cluster_blues(spec)
    betas = np.array([e["beta"] for e in blues["estimates"]])
    if betas.shape[0] < 2:
        raise ValueError("need at least two full-rank clusters")
    dev = betas - betas.mean(axis=0)
    raw = dev.T @ dev / (betas.shape[0] - 1)
    raw -= sum(e["s_mat"] for e in blues["estimates"]) / betas.shape[0]
    dec = nk.sym_eig(0.5 * (raw + raw.T))
    lam = np.clip(dec.eigvals, 0.0, None)
    return (dec.eigvecs * lam) @ dec.eigvecs.T


# ------------------------------------------------------------------ meta

@dataclass(frozen=True)
class MetaStudy:
    y: np.ndarray           # p outcome effects
    s_mat: np.ndarray       # p x p within-study covariance
    x_mat: np.ndarray = None  # study design; identity when omitted
    label: str = ""

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        s = nk.check_symmetric(self.s_mat)
        lam, _ = nk.psd_eigvals(s)
        if lam[-1] <= 0:
            raise ValueError("within-study covariance must be PD")
        x = np.eye(y.size) if self.x_mat is None else \
            np.asarray(self.x_mat, dtype=float)
        if x.shape[0] != y.size:
            raise ValueError("design rows must match the outcome length")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "s_mat", s)
        object.__setattr__(self, "x_mat", x)


def _meta_gls(studies, extra=None):
    a = None
    b = None
    for s in studies:
        sigma = s.s_mat if extra is None else s.s_mat + extra
        si_x = np.linalg.solve(sigma, s.x_mat)
        if a is None:
            k = s.x_mat.shape[1]
            a = np.zeros((k, k))
            b = np.zeros(k)
        a += s.x_mat.T @ si_x
        b += si_x.T @ s.y
    cov = np.linalg.inv(a)
    return {"beta": cov @ b, "cov": 0.5 * (cov + cov.T)}


def meta_fixed(studies):
    """Fixed-effect GLS pool: inverse-variance weighting by S_i alone."""
    if not studies:
        raise ValueError("need at least one study")
    return _meta_gls(studies)


def meta_random(studies, delta):
    """Random-effects pool with Sigma_i = S_i + Delta.

    Delta = 0 reduces exactly to the fixed-effect estimate; the returned
    covariance is the inverse of the accumulated precision.
    """
    delta = nk.check_symmetric(delta)
    lam, _ = nk.psd_eigvals(delta)
    return _meta_gls(studies, extra=delta)


def meta_blup(studies, beta_re, v_cov, delta):
    """Per-study BLUPs beta_re + Delta Sigma_i^{-1} (y_i - X_i beta_re).

    Each covariance is V + (Delta - Delta Sigma_i^{-1} Delta), never
    smaller than V in the PSD order.
    """
    delta = nk.check_symmetric(delta)
    beta_re = np.asarray(beta_re, dtype=float).ravel()
    out = []
    for s in studies:
        sigma = s.s_mat + delta
        mean_i = s.x_mat @ beta_re
        adj = delta @ np.linalg.solve(sigma, s.y - mean_i)
        cov_i = v_cov + delta - delta @ np.linalg.solve(sigma, delta)
        out.append({"label": s.label, "beta": mean_i + adj,
                    "cov": 0.5 * (cov_i + cov_i.T)})
    return out


def estimate_delta_mom(studies):
    """Method-of-moments between-study covariance, eigen-clipped to PSD.

    (g-1)^{-1} sum (y_i - ybar)(y_i - ybar)^T - g^{-1} sum S_i, for
    intercept-only designs.
    """
    if len(studies) < 2:
        raise ValueError("need at least two studies")
    ys = np.array([s.y for s in studies])
    g = len(studies)
    dev = ys - ys.mean(axis=0)
    raw = dev.T @ dev / (g - 1) - sum(s.s_mat for s in studies) / g
    dec = nk.sym_eig(0.5 * (raw + raw.T))
    lam = np.clip(dec.eigvals, 0.0, None)
    return (dec.eigvecs * lam) @ dec.eigvecs.T
