import numpy as np
import pytest

from ellipstat import gellipsoid as ge
from ellipstat import statellipse as st

from conftest import random_pd


def test_mean_cov_two_points():
    s = st.Sample(np.array([[0.0, 0.0], [2.0, 2.0]]))
    mean, cov = st.mean_cov(s)
    assert mean == pytest.approx([1.0, 1.0])
    assert cov == pytest.approx(np.array([[2.0, 2.0], [2.0, 2.0]]))


def test_mean_cov_centered_sample():
    rng = np.random.default_rng(0)
    data = rng.standard_normal((40, 3))
    data -= data.mean(axis=0)
    mean, _ = st.mean_cov(st.Sample(data))
    assert np.abs(mean).max() < 1e-14


def test_galton_correlation(galton_sample):
    r = st.correlation(galton_sample)[0, 1]
    assert r == pytest.approx(0.46, abs=0.005)


def test_mahalanobis_against_2x2_inverse():
    rng = np.random.default_rng(4)
    s_mat = random_pd(rng, 2)
    ybar = rng.standard_normal(2)
    y = rng.standard_normal(2)
    d = y - ybar
    a, b, c = s_mat[0, 0], s_mat[0, 1], s_mat[1, 1]
    det = a * c - b * b
    manual = (c * d[0] ** 2 - 2 * b * d[0] * d[1] + a * d[1] ** 2) / det
    assert st.mahalanobis(y, ybar, s_mat) == pytest.approx(manual, rel=1e-12)
    assert st.mahalanobis(ybar, ybar, s_mat) == 0.0
    assert st.mahalanobis(y, ybar, np.eye(2)) == pytest.approx(d @ d)


def test_mahalanobis_rejects_singular():
    with pytest.raises(Exception):
        st.mahalanobis([1.0, 0.0], [0.0, 0.0], np.diag([1.0, 0.0]))


def test_coverage_radius_kinds():
    assert st.coverage_radius(2, 50, st.CoverageSpec.chisq(0.95)) ** 2 == \
        pytest.approx(5.99, abs=0.01)
    assert st.coverage_radius(2, 50, st.CoverageSpec.chisq(0.68)) ** 2 == \
        pytest.approx(2.28, abs=0.01)
    assert st.coverage_radius(2, 50, st.CoverageSpec.chisq(0.40)) ** 2 == \
        pytest.approx(1.0, abs=0.05)
    assert st.coverage_radius(3, 99, st.CoverageSpec.stddev(1.5)) == 1.5
    # small-sample radius exceeds the asymptotic one
    small = st.coverage_radius(2, 12, st.CoverageSpec.small_sample(0.95))
    asym = st.coverage_radius(2, 12, st.CoverageSpec.chisq(0.95))
    assert small > asym
    with pytest.raises(ValueError):
        st.coverage_radius(5, 5, st.CoverageSpec.small_sample(0.95))


def test_data_ellipsoid_shadows_are_standard_intervals(galton_sample):
    # the radius-1 (40%) ellipse projects to mean +/- 1 sd on each axis
    mean, cov = st.mean_cov(galton_sample)
    ell = st.data_ellipsoid(galton_sample, st.CoverageSpec.stddev(1.0))
    lo, hi = st.univariate_shadow(ell, np.array([1.0, 0.0]))
    assert (hi - lo) / 2 == pytest.approx(np.sqrt(cov[0, 0]), rel=1e-9)
    lo, hi = st.univariate_shadow(ell, np.array([0.0, 1.0]))
    assert (hi - lo) / 2 == pytest.approx(np.sqrt(cov[1, 1]), rel=1e-9)
    assert (hi + lo) / 2 == pytest.approx(mean[1], rel=1e-9)


def test_shadow_of_any_linear_combination(galton_sample):
    # half-width of the radius-1 shadow equals the sd of the combination
    _, cov = st.mean_cov(galton_sample)
    ell = st.data_ellipsoid(galton_sample, st.CoverageSpec.stddev(1.0))
    rng = np.random.default_rng(8)
    for _ in range(20):
        d = rng.standard_normal(2)
        d /= np.linalg.norm(d)
        lo, hi = st.univariate_shadow(ell, d)
        assert (hi - lo) / 2 == pytest.approx(np.sqrt(d @ cov @ d),
                                              rel=1e-9)


def test_shadow_diagonal_direction_closed_form():
    ell = ge.GEllipsoid(np.zeros(2), np.eye(2), np.array([3.0, 2.0]))
    d = np.array([1.0, 1.0]) / np.sqrt(2.0)
    lo, hi = st.univariate_shadow(ell, d)
    assert (hi - lo) / 2 == pytest.approx(np.sqrt((9 + 4) / 2), rel=1e-12)


def test_galton_95_coverage(galton_sample):
    mean, cov = st.mean_cov(galton_sample)
    c2 = st.coverage_radius(2, galton_sample.n,
                            st.CoverageSpec.chisq(0.95)) ** 2
    inv = np.linalg.inv(cov)
    dev = galton_sample.data - mean
    d2 = np.einsum("ij,jk,ik->i", dev, inv, dev)
    assert (d2 <= c2).mean() == pytest.approx(0.95, abs=0.02)


def test_unit_covariance_sample_shadow():
    rng = np.random.default_rng(77)
    data = rng.standard_normal((4000, 2))
    ell = st.data_ellipsoid(st.Sample(data), st.CoverageSpec.stddev(1.0))
    lo, hi = st.univariate_shadow(ell, np.array([1.0, 0.0]))
    assert (hi - lo) / 2 == pytest.approx(1.0, abs=0.05)


def test_pooled_within_cov_basics():
    rng = np.random.default_rng(9)
    data = rng.standard_normal((30, 2))
    single = st.GroupedSample({"a": st.Sample(data)})
    _, s = st.mean_cov(st.Sample(data))
    assert st.pooled_within_cov(single) == pytest.approx(s)

    shifted = st.GroupedSample({
        "a": st.Sample(data),
        "b": st.Sample(data + np.array([5.0, -3.0])),
    })
    assert st.pooled_within_cov(shifted) == pytest.approx(s)


def test_between_cov_cases():
    rng = np.random.default_rng(10)
    base = rng.standard_normal((20, 2))
    base -= base.mean(axis=0)
    other = rng.standard_normal((20, 2))
    other -= other.mean(axis=0)
    equal_means = st.GroupedSample({
        "a": st.Sample(base + 1.0),
        "b": st.Sample(other + 1.0),
    })
    b = st.between_cov(equal_means)
    assert np.abs(b).max() < 1e-12

    two = st.GroupedSample({
        "a": st.Sample(base),
        "b": st.Sample(base + np.array([2.0, 2.0])),
    })
    b = st.between_cov(two)
    lam, vecs = np.linalg.eigh(b)
    assert lam[0] == pytest.approx(0.0, abs=1e-12)
    top = vecs[:, -1]
    assert np.abs(top) == pytest.approx([1.0, 1.0] / np.sqrt(2.0))

    with pytest.raises(ValueError):
        st.between_cov(st.GroupedSample({"a": st.Sample(base)}))


def test_anova_identity():
    gs = st.grouped_slopes_demo()
    n_total, g = gs.total_n, gs.g
    _, s_total = st.mean_cov(gs.pooled_sample())
    lhs = (n_total - g) * st.pooled_within_cov(gs) \
        + (g - 1) * st.between_cov(gs)
    assert np.abs(lhs - (n_total - 1) * s_total).max() < 1e-10 * \
        np.abs(s_total).max() * n_total


def test_marginal_decomposition_demo():
    for sign in (+1, -1):
        gs = st.grouped_slopes_demo(sign)
        d = st.marginal_decomposition(gs)
        assert d["r_within"] == pytest.approx(sign * 0.87, abs=0.02)
        assert d["r_between"] == pytest.approx(0.95, abs=0.03)
        lo = min(d["beta_within"], d["beta_between"]) - 1e-9
        hi = max(d["beta_within"], d["beta_between"]) + 1e-9
        assert lo <= d["beta_marginal"] <= hi


def test_marginal_decomposition_limits():
    rng = np.random.default_rng(12)
    base = rng.standard_normal((30, 2))
    base -= base.mean(axis=0)
    cov = np.array([[2.0, 1.0], [1.0, 2.0]])
    shaped = st.exact_cov_sample(rng, 30, (0.0, 0.0), cov)
    equal_means = st.GroupedSample({
        "a": st.Sample(shaped),
        "b": st.Sample(st.exact_cov_sample(rng, 30, (0.0, 0.0), cov)),
    })
    d = st.marginal_decomposition(equal_means)
    assert d["beta_marginal"] == pytest.approx(d["beta_within"], abs=1e-9)


def test_marginal_between_within_interval_randomized():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        g = int(rng.integers(2, 6))
        groups = {}
        for i in range(g):
            n_i = int(rng.integers(3, 12))
            center = rng.uniform(-5, 5, 2)
            data = center + rng.standard_normal((n_i, 2)) * \
                rng.uniform(0.5, 2.0, 2)
            groups[f"g{i}"] = st.Sample(data)
        gs = st.GroupedSample(groups)
        try:
            d = st.marginal_decomposition(gs)
        except ValueError:
            continue
        lo = min(d["beta_within"], d["beta_between"]) - 1e-9
        hi = max(d["beta_within"], d["beta_between"]) + 1e-9
        assert lo <= d["beta_marginal"] <= hi


def test_data_ellipsoid_affine_equivariance():
    rng = np.random.default_rng(13)
    data = rng.standard_normal((50, 2)) @ np.array([[1.0, 0.4],
                                                    [0.0, 0.8]])
    a_mat = np.array([[2.0, 0.5], [-0.3, 1.2]])
    b_vec = np.array([3.0, -1.0])
    spec = st.CoverageSpec.chisq(0.68)
    direct = st.data_ellipsoid(st.Sample(data @ a_mat.T + b_vec), spec)
    mapped = ge.linear_image(st.data_ellipsoid(st.Sample(data), spec), a_mat)
    assert direct.radii == pytest.approx(mapped.radii, rel=1e-9)
    assert direct.center == pytest.approx(mapped.center + b_vec, rel=1e-9)


def test_exact_cov_sample_moments():
    rng = np.random.default_rng(14)
    cov = np.array([[6.0, 3.0], [3.0, 2.0]])
    data = st.exact_cov_sample(rng, 10, (1.0, -2.0), cov)
    s = st.Sample(data)
    mean, got = st.mean_cov(s)
    assert mean == pytest.approx([1.0, -2.0], abs=1e-10)
    assert got == pytest.approx(cov, rel=1e-10)
