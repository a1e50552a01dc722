# Generalized ellipsoids: center + orthogonal frame + radii in [0, inf].
# One object covers the proper ("fat"), degenerate ("flat") and unbounded
# (cylinder) cases, closed under duality, linear images and projections.

import math
from dataclasses import dataclass

import numpy as np

from . import numkernel as nk

ZERO_RADIUS_TOL = 1e-12
FRAME_TOL = 1e-10


@dataclass(frozen=True)
class Signature:
    """Counts of positive, zero and infinite radii; always sums to p."""
    n_pos: int
    n_zero: int
    n_inf: int

    def as_tuple(self):
        return (self.n_pos, self.n_zero, self.n_inf)


@dataclass(frozen=True)
class GEllipsoid:
    center: np.ndarray
    frame: np.ndarray   # orthogonal, columns are principal axes
    radii: np.ndarray   # descending, entries in [0, inf]

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).ravel()
        frame = np.asarray(self.frame, dtype=float)
        radii = np.asarray(self.radii, dtype=float).ravel()
        p = center.size
        if frame.shape != (p, p):
            raise ValueError(f"frame shape {frame.shape} != ({p}, {p})")
        if radii.size != p:
            raise ValueError("radii length does not match dimension")
        if np.any(np.isnan(radii)) or np.any(radii < 0):
            raise ValueError("radii must be nonnegative (inf allowed)")
        dev = np.abs(frame.T @ frame - np.eye(p)).max()
        if dev > FRAME_TOL:
            raise ValueError(f"frame is not orthogonal (deviation {dev:.2e})")
        finite = radii[np.isfinite(radii)]
        if finite.size > 1 and np.any(np.diff(finite) > 1e-9 * (1 + finite[0])):
            raise ValueError("radii must be sorted descending")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "radii", radii)

    @property
    def dim(self):
        return self.center.size


def _sorted_frame(frame, radii):
    # inf sorts first, then finite descending, zeros last
    key = np.where(np.isinf(radii), np.inf, radii)
    order = np.argsort(-key, kind="stable")
    return frame[:, order], radii[order]


def from_moment(w, center=None):
    """Ellipsoid of a PSD moment (covariance-like) matrix: radii sqrt(eig)."""
    lam, vecs = nk.psd_eigvals(w)
    p = lam.size
    if center is None:
        center = np.zeros(p)
    radii = np.sqrt(lam)
    radii[lam <= ZERO_RADIUS_TOL * max(lam[0], 1.0)] = 0.0
    vecs, radii = _sorted_frame(vecs, radii)
    return GEllipsoid(center=center, frame=vecs, radii=radii)


def from_precision(c, center=None):
    """Ellipsoid {x: (x-mu)^T C (x-mu) <= 1}: radii 1/sqrt(eig(C)).

    A zero eigenvalue of C leaves the ellipsoid unbounded along that
    eigenvector.
    """
    lam, vecs = nk.psd_eigvals(c)
    p = lam.size
    if center is None:
        center = np.zeros(p)
    radii = np.empty(p)
    zero = lam <= ZERO_RADIUS_TOL * max(lam[0], 1.0)
    radii[~zero] = 1.0 / np.sqrt(lam[~zero])
    radii[zero] = np.inf
    vecs, radii = _sorted_frame(vecs, radii)
    return GEllipsoid(center=center, frame=vecs, radii=radii)


def from_generator(a, center=None):
    """Image of the unit sphere under an arbitrary (maybe rectangular) map.

    Equals from_moment(a @ a.T) whenever that product is finite.
    """
    a = nk.as_matrix(a)
    if a.ndim != 2:
        raise ValueError("generator must be a matrix")
    p = a.shape[0]
    if center is None:
        center = np.zeros(p)
    dec = nk.svd(a)
    radii = np.zeros(p)
    k = min(p, dec.singulars.size)
    radii[:k] = dec.singulars[:k]
    radii[radii <= ZERO_RADIUS_TOL * max(radii[0], 1.0)] = 0.0
    return GEllipsoid(center=center, frame=dec.left, radii=radii)


def dual(e):
    """Elementwise radius inversion (1/0 = inf, 1/inf = 0); an involution."""
    radii = e.radii
    inv = np.empty_like(radii)
    inv[radii == 0] = np.inf
    inv[np.isinf(radii)] = 0.0
    finite_pos = (radii > 0) & np.isfinite(radii)
    inv[finite_pos] = 1.0 / radii[finite_pos]
    frame, inv = _sorted_frame(e.frame, inv)
    return GEllipsoid(center=e.center, frame=frame, radii=inv)


def signature(e):
    radii = e.radii
    scale = 1.0
    finite = radii[np.isfinite(radii)]
    if finite.size:
        scale = max(finite.max(), 1.0)
    n_inf = int(np.sum(np.isinf(radii)))
    n_zero = int(np.sum(radii <= ZERO_RADIUS_TOL * scale))
    return Signature(n_pos=radii.size - n_inf - n_zero, n_zero=n_zero,
                     n_inf=n_inf)


def linear_image(e, l_mat):
    """Image L(E) of the ellipsoid under an m x p linear map.

    Finite part maps through the SVD of L U diag(radii); unbounded
    directions map to the span of their images (the image stays infinite
    unless L annihilates the direction).
    """
    l_mat = nk.as_matrix(l_mat)
    if l_mat.ndim != 2 or l_mat.shape[1] != e.dim:
        raise ValueError(f"map shape {l_mat.shape} does not act on R^{e.dim}")
    m = l_mat.shape[0]
    center = l_mat @ e.center

    inf_mask = np.isinf(e.radii)
    fin_gen = l_mat @ (e.frame[:, ~inf_mask] * e.radii[~inf_mask])

    if not inf_mask.any():
        return from_generator(fin_gen, center)

    # Orthonormal basis of the image of the unbounded directions.
    img = l_mat @ e.frame[:, inf_mask]
    q, r = np.linalg.qr(img)
    keep = np.abs(np.diag(r)) > 1e-12 * max(np.abs(r).max(), 1e-300)
    q = q[:, keep]
    k = q.shape[1]
    if k == 0:
        return from_generator(fin_gen, center)

    # The cylinder swallows any finite extent along its axis directions:
    # project the finite generator onto the orthogonal complement.
    proj = np.eye(m) - q @ q.T
    rest = from_generator(proj @ fin_gen, np.zeros(m))
    frame = np.column_stack([q, rest.frame[:, :m - k]])
    # Re-orthonormalize the complement part against q (kills roundoff and
    # any zero-radius axes of `rest` that leaked into span(q)).
    frame, _ = np.linalg.qr(frame)
    radii = np.concatenate([np.full(k, np.inf), rest.radii[:m - k]])
    return GEllipsoid(center=center, frame=frame, radii=radii)


def project(e, p_mat, tol=1e-10):
    """Image under an idempotent matrix (orthogonal shadow if symmetric)."""
    p_mat = nk.as_matrix(p_mat)
    dev = np.abs(p_mat @ p_mat - p_mat).max()
    if dev > tol * max(1.0, np.abs(p_mat).max()):
        raise ValueError(f"matrix is not idempotent: |P^2 - P| = {dev:.2e}")
    return linear_image(e, p_mat)


def contains(e, x, tol=1e-9):
    """Classify a point as 'inside', 'boundary' or 'outside'.

    Infinite radii impose no constraint; zero radii require membership in
    the flat within tol (scaled by the largest finite radius).
    """
    x = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("point must be finite")
    z = e.frame.T @ (x - e.center)
    finite = e.radii[np.isfinite(e.radii)]
    scale = max(finite.max(), 1.0) if finite.size else 1.0
    total = 0.0
    for zi, ri in zip(z, e.radii):
        if np.isinf(ri):
            continue
        if ri <= ZERO_RADIUS_TOL * scale:
            if abs(zi) > tol * scale:
                return "outside"
            continue
        total += (zi / ri) ** 2
    norm = math.sqrt(total)
    if abs(norm - 1.0) <= tol:
        return "boundary"
    return "inside" if norm < 1.0 else "outside"


def size_measures(e):
    """The four scalar 'size' summaries of the squared radii.

    generalized_variance = prod(radii^2)   (determinant / squared volume scale)
    avg_variance         = sum(radii^2)    (trace)
    avg_precision        = 1 / sum(radii^-2)   (harmonic)
    max_variance         = radii[0]^2      (largest axis)
    """
    lam = e.radii ** 2
    if np.any(np.isinf(lam)):
        gen_var = math.inf
        avg_var = math.inf
    else:
        gen_var = float(np.prod(lam))
        avg_var = float(np.sum(lam))
    if np.any(lam == 0):
        avg_prec = 0.0
    else:
        avg_prec = float(1.0 / np.sum(1.0 / lam))
    max_var = float(lam[0])
    return {
        "generalized_variance": gen_var,
        "avg_variance": avg_var,
        "avg_precision": avg_prec,
        "max_variance": max_var,
    }


def volume(e):
    """Hypervolume pi^{p/2} prod(radii) / Gamma(p/2 + 1); 0 if flat, inf if unbounded."""
    if np.any(np.isinf(e.radii)):
        return math.inf
    p = e.dim
    return float(np.pi ** (p / 2.0) * np.prod(e.radii)
                 / math.gamma(p / 2.0 + 1.0))


@dataclass(frozen=True)
class ConjugateAxes:
    axes: np.ndarray    # columns a_i with A A^T = W
    kind: str           # 'given' | 'cholesky' | 'principal'

    def parallelogram(self, center=None):
        """Vertices of the bounding tangent parallelepiped (2^p corners)."""
        p = self.axes.shape[0]
        if center is None:
            center = np.zeros(p)
        center = np.asarray(center, dtype=float)
        corners = []
        for mask in range(2 ** p):
            signs = np.array([1.0 if mask >> i & 1 else -1.0
                              for i in range(p)])
            corners.append(center + self.axes @ signs)
        return np.array(corners)

    def area(self):
        """Volume of the bounding parallelepiped: 2^p |det A|."""
        p = self.axes.shape[0]
        return float(2 ** p * abs(np.linalg.det(self.axes)))

    def sum_sq_diameters(self):
        """Sum of squared diameter lengths, 4 * 2^{p-1} * tr(A A^T) / ... .

        A diameter joins opposite corners +/- A s over sign vectors s;
        there are 2^{p-1} of them with squared length 4 |A s|^2. Their sum
        equals 2^{p+1} tr(A A^T), an invariant of W alone.
        """
        p = self.axes.shape[0]
        total = 0.0
        for mask in range(2 ** (p - 1)):
            signs = np.array([1.0] + [1.0 if mask >> i & 1 else -1.0
                                      for i in range(p - 1)])
            d = 2.0 * self.axes @ signs
            total += float(d @ d)
        return total


def conjugate_axes(w, kind="principal", given=None):
    """A factor A of the PD matrix W (W = A A^T); columns are conjugate axes.

    kind='cholesky' gives the lower-triangular factor (last axis aligned
    with the last coordinate axis); kind='principal' gives the spectral
    factor (mutually orthogonal axes); kind='given' validates a
    user-supplied factor.
    """
    w = nk.check_symmetric(w)
    if kind == "given":
        if given is None:
            raise ValueError("kind='given' requires the factor")
        a = nk.as_matrix(given)
        resid = np.abs(a @ a.T - w).max()
        if resid > 1e-8 * max(np.abs(w).max(), 1e-300):
            raise ValueError(f"given factor does not reproduce W ({resid:.2e})")
    elif kind == "cholesky":
        a = nk.cholesky(w)
    elif kind == "principal":
        _, a = nk.psd_sqrt(w)
        lam, _ = nk.psd_eigvals(w)
        if lam[-1] <= 0:
            raise nk.NotPositiveDefiniteError(int(np.argmin(lam)), lam[-1])
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return ConjugateAxes(axes=a, kind=kind)


def tangent_plane(e, x_boundary, tol=1e-9):
    """Tangent hyperplane to a proper ellipsoid at a boundary point.

    Returns (normal, offset) with normal^T x = offset on the plane; the
    normal is proportional to C (x - mu) for the precision matrix C.
    """
    if signature(e).as_tuple() != (e.dim, 0, 0):
        raise ValueError("tangent plane requires a proper ellipsoid")
    status = contains(e, x_boundary, tol)
    if status != "boundary":
        raise ValueError(f"point is {status}, not on the boundary")
    x = np.asarray(x_boundary, dtype=float).ravel()
    c_mat = (e.frame / e.radii ** 2) @ e.frame.T
    normal = c_mat @ (x - e.center)
    normal = normal / np.linalg.norm(normal)
    return normal, float(normal @ x)


def boundary_points(e, n=256, seed=0):
    """Deterministic boundary sample of a bounded ellipsoid.

    2D uses equally spaced angles; higher dimensions use a Fibonacci-style
    lattice mapped through the frame.
    """
    if np.any(np.isinf(e.radii)):
        raise ValueError("boundary sampling requires a bounded ellipsoid")
    p = e.dim
    if p == 1:
        sphere = np.array([[1.0], [-1.0]])
    elif p == 2:
        theta = 2 * np.pi * np.arange(n) / n
        sphere = np.column_stack([np.cos(theta), np.sin(theta)])
    elif p == 3:
        i = np.arange(n) + 0.5
        phi = np.arccos(1 - 2 * i / n)
        golden = np.pi * (1 + 5 ** 0.5)
        theta = golden * i
        sphere = np.column_stack([np.cos(theta) * np.sin(phi),
                                  np.sin(theta) * np.sin(phi),
                                  np.cos(phi)])
    else:
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((n, p))
        sphere = z / np.linalg.norm(z, axis=1, keepdims=True)
    return e.center + sphere * e.radii @ e.frame.T
