import io
import csv

import numpy as np
import pytest

from ellipstat import datasets, kissing as ki
from ellipstat import statellipse as st

from conftest import random_pd

DEMO_F1 = ki.QuadFamily([-2.0, 2.0], [[1.0, 0.5], [0.5, 1.5]])
DEMO_F2 = ki.QuadFamily([2.0, 6.0], [[1.5, -0.3], [-0.3, 1.0]])
DEMO_BBOX = (-8.0, 8.0, -4.0, 12.0)


def test_cross_field_zero_at_centers():
    assert ki.cross_field(DEMO_F1, DEMO_F2, DEMO_F1.m) == 0.0
    assert ki.cross_field(DEMO_F1, DEMO_F2, DEMO_F2.m) == 0.0


def test_cross_field_sign_for_circles():
    f1 = ki.QuadFamily([0.0, 0.0], np.eye(2))
    f2 = ki.QuadFamily([2.0, 0.0], np.eye(2))
    above = ki.cross_field(f1, f2, [1.0, 0.5])
    below = ki.cross_field(f1, f2, [1.0, -0.5])
    on = ki.cross_field(f1, f2, [0.7, 0.0])
    assert above * below < 0
    assert on == pytest.approx(0.0, abs=1e-12)


def test_cross_field_zero_iff_gradients_parallel():
    rng = np.random.default_rng(1)
    locus = ki.trace_locus(DEMO_F1, DEMO_F2, DEMO_BBOX, 64)
    pts = np.vstack(locus["polylines"])
    for x in pts[:: max(1, len(pts) // 50)]:
        g1 = DEMO_F1.gradient(x)
        g2 = DEMO_F2.gradient(x)
        cross = g1[0] * g2[1] - g1[1] * g2[0]
        assert abs(cross) < 1e-6 * (np.linalg.norm(g1)
                                    * np.linalg.norm(g2) + 1e-12)
    # off-locus points have nonparallel gradients
    for _ in range(20):
        x = rng.uniform((-8, -4), (8, 12))
        if abs(ki.cross_field(DEMO_F1, DEMO_F2, x)) < 0.5:
            continue
        g1 = DEMO_F1.gradient(x)
        g2 = DEMO_F2.gradient(x)
        assert abs(g1[0] * g2[1] - g1[1] * g2[0]) > 1e-3


def test_trace_locus_demo_quality():
    locus = ki.trace_locus(DEMO_F1, DEMO_F2, DEMO_BBOX, 96)
    verts = np.vstack(locus["polylines"])
    resid = np.abs(ki.cross_field(DEMO_F1, DEMO_F2, verts)).max()
    assert resid <= 1e-6 * locus["scale"]
    cell = max(DEMO_BBOX[1] - DEMO_BBOX[0],
               DEMO_BBOX[3] - DEMO_BBOX[2]) / 96 * np.sqrt(2)
    assert np.linalg.norm(verts - DEMO_F1.m, axis=1).min() < cell
    assert np.linalg.norm(verts - DEMO_F2.m, axis=1).min() < cell


def test_trace_locus_equal_shapes_collapses_to_line():
    f2 = ki.QuadFamily([2.0, 6.0], DEMO_F1.a_mat)
    locus = ki.trace_locus(DEMO_F1, f2, DEMO_BBOX, 96)
    verts = np.vstack(locus["polylines"])
    d = (f2.m - DEMO_F1.m) / np.linalg.norm(f2.m - DEMO_F1.m)
    normal = np.array([-d[1], d[0]])
    assert np.abs((verts - DEMO_F1.m) @ normal).max() < 1e-6


def test_trace_locus_resolution_floor_and_empty():
    with pytest.raises(ValueError):
        ki.trace_locus(DEMO_F1, DEMO_F2, DEMO_BBOX, 16)
    far = (100.0, 101.0, 100.0, 101.0)
    locus = ki.trace_locus(DEMO_F1, DEMO_F2, far, 32)
    assert locus["polylines"] == []


def test_osculation_points_lie_on_locus_and_levels():
    locus = ki.trace_locus(DEMO_F1, DEMO_F2, DEMO_BBOX, 96)
    for r1 in (2.0, 3.0):
        pt, r2 = ki.osculation_point(DEMO_F1, DEMO_F2, r1, locus=locus)
        assert abs(ki.cross_field(DEMO_F1, DEMO_F2, pt)) < 1e-9 * \
            locus["scale"]
        assert DEMO_F1.value(pt) == pytest.approx(r1 ** 2, rel=1e-10)
        assert DEMO_F2.value(pt) == pytest.approx(r2 ** 2, rel=1e-10)


def test_osculation_recovers_published_drawing_radii():
    # under the moment drawing convention (x-m)^T A^{-1} (x-m) = r^2 the
    # trial-and-error radii pair as (2 -> 3.1) and (3 -> 1.74)
    g1 = ki.QuadFamily(DEMO_F1.m, np.linalg.inv(DEMO_F1.a_mat))
    g2 = ki.QuadFamily(DEMO_F2.m, np.linalg.inv(DEMO_F2.a_mat))
    locus = ki.trace_locus(g1, g2, DEMO_BBOX, 128)
    _, r2 = ki.osculation_point(g1, g2, 2.0, locus=locus)
    assert r2 == pytest.approx(3.1, abs=0.01)
    _, r2 = ki.osculation_point(g1, g2, 3.0, locus=locus)
    assert r2 == pytest.approx(1.74, abs=0.01)


def test_lda_axis_identity_and_scaling():
    m1 = np.array([1.0, 0.0])
    m2 = np.array([-1.0, 2.0])
    out = ki.lda_axis(m1, m2, np.eye(2))
    assert out["coef"] == pytest.approx(m1 - m2)
    scaled = ki.lda_axis(m1, m2, 4.0 * np.eye(2))
    assert scaled["coef"] == pytest.approx((m1 - m2) / 4.0)
    # classification side unchanged by covariance scaling
    x = np.array([3.0, -1.0])
    s1 = out["coef"] @ x - out["midpoint_cut"]
    s2 = scaled["coef"] @ x - scaled["midpoint_cut"]
    assert np.sign(s1) == np.sign(s2)
    with pytest.raises(Exception):
        ki.lda_axis(m1, m2, np.diag([1.0, 0.0]))


def test_lda_boundary_tangent_to_osculating_family():
    # equal shapes: on the locus the common gradient is normal to the
    # discriminant boundary family
    rng = np.random.default_rng(2)
    s_pooled = random_pd(rng, 2)
    m1 = np.array([-2.0, 2.0])
    m2 = np.array([2.0, 6.0])
    a_mat = np.linalg.inv(s_pooled)
    f1 = ki.QuadFamily(m1, a_mat)
    f2 = ki.QuadFamily(m2, a_mat)
    locus = ki.trace_locus(f1, f2, DEMO_BBOX, 96)
    out = ki.lda_axis(m1, m2, s_pooled)
    b = out["coef"]
    verts = np.vstack(locus["polylines"])
    inner = [v for v in verts
             if f1.gradient(v) @ f2.gradient(v) < -1e-9]
    assert inner
    for v in inner[:: max(1, len(inner) // 25)]:
        grad = f1.gradient(v)
        cosine = grad @ b / (np.linalg.norm(grad) * np.linalg.norm(b))
        assert abs(abs(cosine) - 1.0) < 1e-6


# ------------------------------------------------------------------ ridge

def test_ridge_zero_equals_ols(longley):
    _, x, y = longley
    r = ki.ridge(x, y, 0.0)
    assert np.abs(r.beta - r.beta_ols).max() < 1e-10
    xs, yc, *_ = ki._standardize_columns(x, y)
    direct = np.linalg.solve(xs.T @ xs, xs.T @ yc)
    assert r.beta == pytest.approx(direct, rel=1e-9)
    assert r.cov == pytest.approx(r.s2 * np.linalg.inv(xs.T @ xs),
                                  rel=1e-8)


def test_ridge_large_k_shrinks_to_zero(longley):
    _, x, y = longley
    r0 = ki.ridge(x, y, 0.0)
    big = ki.ridge(x, y, 1e6)
    assert np.linalg.norm(big.beta) < 1e-3 * np.linalg.norm(r0.beta)


def test_ridge_longley_grid_monotonicity(longley):
    _, x, y = longley
    ks = [0.0, 0.005, 0.01, 0.02, 0.04, 0.08]
    norms, dets = [], []
    for k in ks:
        r = ki.ridge(x, y, k)
        norms.append(np.linalg.norm(r.beta))
        dets.append(np.linalg.det(r.cov))
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))
    assert all(b < a for a, b in zip(dets, dets[1:]))


def test_ridge_negative_k_rejected(longley):
    _, x, y = longley
    with pytest.raises(ValueError):
        ki.ridge(x, y, -0.1)


def test_ridge_kiss_condition_two_predictors(longley):
    # gradient of the RSS contour at the ridge solution is antiparallel
    # to the gradient of the squared-norm constraint
    _, x, y = longley
    x2 = x[:, [1, 2]]                   # GNP, Unemployed
    xs, yc, *_ = ki._standardize_columns(x2, y)
    for k in (0.005, 0.01, 0.02, 0.04, 0.08):
        r = ki.ridge(x2, y, k)
        grad_rss = 2.0 * (xs.T @ xs @ r.beta - xs.T @ yc)
        grad_pen = 2.0 * r.beta
        cross = grad_rss[0] * grad_pen[1] - grad_rss[1] * grad_pen[0]
        denom = np.linalg.norm(grad_rss) * np.linalg.norm(grad_pen)
        assert abs(cross) / denom < 1e-8
        assert grad_rss @ grad_pen < 0


def test_ridge_trace_entries(longley):
    _, x, y = longley
    ks = [0.0, 0.01, 0.08]
    trace = ki.ridge_trace(x, y, ks, coords=(1, 2))
    assert [t["k"] for t in trace] == ks
    # half the standard radius: moment matrix = 0.25 * cov block
    r = trace[0]["result"]
    back = (trace[0]["ellipse"].frame * trace[0]["ellipse"].radii ** 2) \
        @ trace[0]["ellipse"].frame.T
    assert back == pytest.approx(0.25 * r.cov[np.ix_([1, 2], [1, 2])],
                                 rel=1e-9)
    areas = [np.prod(t["ellipse"].radii) for t in trace]
    assert areas[0] > areas[1] > areas[2]


def test_ridge_equals_ols_on_supplemented_data(longley):
    # appending q fictitious orthogonal observations sqrt(k) I with zero
    # responses turns plain OLS into the ridge solution
    _, x, y = longley
    xs, yc, *_ = ki._standardize_columns(x, y)
    for k in (0.01, 0.08):
        x_aug = np.vstack([xs, np.sqrt(k) * np.eye(6)])
        y_aug = np.concatenate([yc, np.zeros(6)])
        beta_aug = np.linalg.lstsq(x_aug, y_aug, rcond=None)[0]
        assert beta_aug == pytest.approx(ki.ridge(x, y, k).beta,
                                         rel=1e-10)


def test_ridge_matrix_penalty(longley):
    # a diagonal penalty matrix k I reproduces the scalar-k path
    _, x, y = longley
    k = 0.02
    with_matrix = ki.ridge(x, y, 0.0, penalty_matrix=k * np.eye(6))
    assert with_matrix.beta == pytest.approx(ki.ridge(x, y, k).beta,
                                             rel=1e-12)


# ------------------------------------------------------------------ bayes

def test_bayes_reduces_to_ols_and_ridge(longley):
    _, x, y = longley
    out = ki.bayes_posterior(x, y, np.zeros(6), np.zeros((6, 6)))
    r0 = ki.ridge(x, y, 0.0)
    assert out["beta_post"] == pytest.approx(r0.beta, rel=1e-10)
    for k in (0.01, 0.08, 1.0):
        out = ki.bayes_posterior(x, y, np.zeros(6), k * np.eye(6))
        rk = ki.ridge(x, y, k)
        assert np.abs(out["beta_post"] - rk.beta).max() < 1e-12 * \
            max(1.0, np.abs(rk.beta).max())


def test_bayes_prior_dominant_limit(longley):
    _, x, y = longley
    prior = np.arange(1.0, 7.0)
    out = ki.bayes_posterior(x, y, prior, 1e9 * np.eye(6))
    assert out["beta_post"] == pytest.approx(prior, rel=1e-6)


def test_bayes_residual_identity(longley):
    # (X'X)(post - ols) + A(post - prior) = 0
    _, x, y = longley
    rng = np.random.default_rng(3)
    prior = rng.standard_normal(6)
    a_mat = random_pd(rng, 6, scale=0.1)
    out = ki.bayes_posterior(x, y, prior, a_mat)
    xs, yc, *_ = ki._standardize_columns(x, y)
    resid = xs.T @ xs @ (out["beta_post"] - out["beta_ols"]) \
        + a_mat @ (out["beta_post"] - prior)
    assert np.abs(resid).max() < 1e-9


# ------------------------------------------------------------------ mixed

def _toy_clusters(rng, m=8, beta=(1.0, 2.0), g_scale=0.5, n_range=(8, 15)):
    clusters = []
    for _ in range(m):
        n = int(rng.integers(*n_range))
        x = np.column_stack([np.ones(n), rng.standard_normal(n)])
        u = rng.standard_normal(2) * g_scale
        y = x @ (np.array(beta) + u) + rng.standard_normal(n)
        clusters.append(ki.Cluster(x, y))
    return clusters


def test_gls_zero_g_equals_pooled_ols():
    rng = np.random.default_rng(4)
    clusters = _toy_clusters(rng)
    spec = ki.MixedSpec(clusters, np.zeros((2, 2)), sigma2=1.0)
    out = ki.gls_fixed(spec)
    x_all = np.vstack([c.x for c in clusters])
    y_all = np.concatenate([c.y for c in clusters])
    pooled = np.linalg.lstsq(x_all, y_all, rcond=None)[0]
    assert out["beta"] == pytest.approx(pooled, rel=1e-9)


def test_gls_single_cluster():
    rng = np.random.default_rng(5)
    clusters = _toy_clusters(rng, m=1)
    g_mat = np.diag([0.3, 0.2])
    spec = ki.MixedSpec(clusters, g_mat, sigma2=1.0)
    out = ki.gls_fixed(spec)
    c = clusters[0]
    v = c.z @ g_mat @ c.z.T + np.eye(c.n)
    direct = np.linalg.solve(c.x.T @ np.linalg.solve(v, c.x),
                             c.x.T @ np.linalg.solve(v, c.y))
    assert out["beta"] == pytest.approx(direct, rel=1e-10)


def test_gls_blockwise_equals_stacked():
    rng = np.random.default_rng(6)
    clusters = _toy_clusters(rng, m=5)
    g_mat = random_pd(rng, 2, scale=0.2)
    spec = ki.MixedSpec(clusters, g_mat, sigma2=1.3)
    out = ki.gls_fixed(spec)
    # stacked whole-matrix oracle
    x_all = np.vstack([c.x for c in clusters])
    y_all = np.concatenate([c.y for c in clusters])
    n_all = len(y_all)
    v_all = 1.3 * np.eye(n_all)
    at = 0
    for c in clusters:
        v_all[at:at + c.n, at:at + c.n] += c.z @ g_mat @ c.z.T
        at += c.n
    vi_x = np.linalg.solve(v_all, x_all)
    beta = np.linalg.solve(x_all.T @ vi_x, vi_x.T @ y_all)
    assert out["beta"] == pytest.approx(beta, rel=1e-9)
    assert out["cov"] == pytest.approx(np.linalg.inv(x_all.T @ vi_x),
                                       rel=1e-9)


def test_cluster_blues_match_per_group_oracle():
    rng = np.random.default_rng(7)
    clusters = _toy_clusters(rng, m=6)
    spec = ki.MixedSpec(clusters, np.eye(2))
    out = ki.cluster_blues(spec)
    assert not out["skipped"]
    for entry, c in zip(out["estimates"], clusters):
        direct = np.linalg.lstsq(c.x, c.y, rcond=None)[0]
        assert entry["beta"] == pytest.approx(direct, rel=1e-9)


def test_cluster_blues_identical_clusters():
    rng = np.random.default_rng(8)
    base = _toy_clusters(rng, m=1)[0]
    spec = ki.MixedSpec([base, base, base], np.eye(2))
    out = ki.cluster_blues(spec)
    betas = np.array([e["beta"] for e in out["estimates"]])
    assert np.abs(betas - betas[0]).max() < 1e-12


def test_cluster_blues_flags_rank_deficient():
    rng = np.random.default_rng(9)
    good = _toy_clusters(rng, m=2)
    bad = ki.Cluster(np.ones((5, 2)), np.arange(5.0))   # collinear columns
    spec = ki.MixedSpec(good + [bad], np.eye(2))
    out = ki.cluster_blues(spec)
    assert out["skipped"] == [2]
    assert len(out["estimates"]) == 2


def test_blup_limits_and_identity():
    rng = np.random.default_rng(10)
    s_mat = random_pd(rng, 2)
    blue = rng.standard_normal(2)
    gls = rng.standard_normal(2)
    g_mat = random_pd(rng, 2)
    out = ki.blup(blue, s_mat, gls, g_mat)
    resid = np.linalg.solve(s_mat, out["beta"] - blue) \
        + np.linalg.solve(g_mat, out["beta"] - gls)
    assert np.abs(resid).max() < 1e-9
    near_blue = ki.blup(blue, s_mat, gls, 1e9 * np.eye(2))["beta"]
    assert near_blue == pytest.approx(blue, abs=1e-6)
    near_gls = ki.blup(blue, s_mat, gls, 1e-9 * np.eye(2))["beta"]
    assert near_gls == pytest.approx(gls, abs=1e-6)


def test_hsb_sample_slope_shrinks_more_than_intercept():
    rows = list(csv.reader(io.StringIO(datasets.hsb_sample())))
    by = {}
    for r in rows[1:]:
        by.setdefault(r[0], []).append((float(r[1]), float(r[2])))
    clusters = []
    for k in sorted(by):
        arr = np.array(by[k])
        clusters.append(ki.Cluster(
            np.column_stack([np.ones(len(arr)), arr[:, 0]]), arr[:, 1]))
    g_mat = np.diag([6.0, 0.05])        # intercepts vary, slopes barely
    spec = ki.MixedSpec(clusters, g_mat)
    gls = ki.gls_fixed(spec)
    blues = ki.cluster_blues(spec)
    blups = [ki.blup(e["beta"], e["s_mat"], gls["beta"], g_mat)
             for e in blues["estimates"]]
    bb = np.array([e["beta"] for e in blues["estimates"]])
    bp = np.array([b["beta"] for b in blups])
    rel = np.abs(bb - bp).mean(axis=0) / bb.std(axis=0, ddof=1)
    assert rel[1] > rel[0]


# ------------------------------------------------------------------- meta

def test_meta_fixed_single_study(berkey_studies):
    one = ki.meta_fixed(berkey_studies[:1])
    assert one["beta"] == pytest.approx(berkey_studies[0].y)
    assert one["cov"] == pytest.approx(berkey_studies[0].s_mat)


def test_meta_fixed_equal_covariances():
    s_mat = np.array([[1.0, 0.3], [0.3, 2.0]])
    studies = [ki.MetaStudy([1.0, 0.0], s_mat),
               ki.MetaStudy([3.0, 4.0], s_mat)]
    out = ki.meta_fixed(studies)
    assert out["beta"] == pytest.approx([2.0, 2.0])


def test_meta_fixed_berkey(berkey_studies):
    out = ki.meta_fixed(berkey_studies)
    assert out["beta"][0] == pytest.approx(0.307, abs=0.005)
    assert out["beta"][1] == pytest.approx(-0.394, abs=0.005)


def test_meta_random_reductions(berkey_studies):
    fixed = ki.meta_fixed(berkey_studies)
    re0 = ki.meta_random(berkey_studies, np.zeros((2, 2)))
    assert re0["beta"] == pytest.approx(fixed["beta"], abs=1e-12)
    # continuity at Delta -> 0
    eps = ki.meta_random(berkey_studies, 1e-8 * np.eye(2))
    assert np.abs(eps["beta"] - fixed["beta"]).max() < 1e-5
    # equal-weight limit
    big = ki.meta_random(berkey_studies, 1e9 * np.eye(2))
    ybar = np.mean([s.y for s in berkey_studies], axis=0)
    assert big["beta"] == pytest.approx(ybar, abs=1e-6)


def test_meta_random_berkey_mom(berkey_studies):
    delta = ki.estimate_delta_mom(berkey_studies)
    corr = delta[0, 1] / np.sqrt(delta[0, 0] * delta[1, 1])
    assert 0.4 <= corr <= 0.8
    out = ki.meta_random(berkey_studies, delta)
    assert out["beta"][0] == pytest.approx(0.353, abs=0.05)
    assert out["beta"][1] == pytest.approx(-0.339, abs=0.05)


def test_meta_blup_properties(berkey_studies):
    delta = ki.estimate_delta_mom(berkey_studies)
    re = ki.meta_random(berkey_studies, delta)
    blups = ki.meta_blup(berkey_studies, re["beta"], re["cov"], delta)
    for s, b in zip(berkey_studies, blups):
        # matrix-weighted average identity
        resid = np.linalg.solve(s.s_mat, b["beta"] - s.y) \
            + np.linalg.solve(delta, b["beta"] - re["beta"])
        assert np.abs(resid).max() < 1e-9
        # cov_i dominates V in the PSD order
        lam = np.linalg.eigvalsh(b["cov"] - re["cov"])
        assert lam.min() > -1e-12


def test_meta_blup_degenerate_cases(berkey_studies):
    re = ki.meta_fixed(berkey_studies)
    blups = ki.meta_blup(berkey_studies, re["beta"], re["cov"],
                         np.zeros((2, 2)))
    for b in blups:
        assert b["beta"] == pytest.approx(re["beta"])
        assert b["cov"] == pytest.approx(re["cov"])
    # a perfectly measured study keeps its own estimate
    tiny = ki.MetaStudy([5.0, -1.0], 1e-12 * np.eye(2))
    delta = np.eye(2)
    out = ki.meta_blup([tiny], [0.0, 0.0], np.zeros((2, 2)), delta)
    assert out[0]["beta"] == pytest.approx([5.0, -1.0], abs=1e-9)


def test_estimate_delta_mom_cases():
    rng = np.random.default_rng(11)
    # duplicated studies with tiny S: MoM recovers the sample covariance
    ys = rng.standard_normal((6, 2)) * 2.0
    studies = [ki.MetaStudy(y, 1e-8 * np.eye(2)) for y in ys]
    delta = ki.estimate_delta_mom(studies)
    assert delta == pytest.approx(np.cov(ys.T, ddof=1), abs=1e-6)
    with pytest.raises(ValueError):
        ki.estimate_delta_mom(studies[:1])


def test_estimate_delta_mom_null_truth():
    # with Delta = 0 truth the estimate collapses toward zero
    rng = np.random.default_rng(12)
    med = []
    for _ in range(100):
        s_mat = np.eye(2)
        ys = rng.multivariate_normal([0.0, 0.0], s_mat, size=8)
        studies = [ki.MetaStudy(y, s_mat) for y in ys]
        delta = ki.estimate_delta_mom(studies)
        med.append(np.linalg.eigvalsh(delta).max())
    assert np.median(med) < 0.6
