"""Generalized ellipsoids and the elliptical geometry of linear models.

The package is organized around one geometric object, the generalized
ellipsoid (center + orthogonal frame + radii in [0, inf]), and the
statistical constructions that live on it: data and confidence
ellipsoids, hypothesis-error summaries for multivariate models,
canonical discriminant projections, and the kissing-ellipsoid family of
shrinkage estimators (ridge, Bayes, BLUP, multivariate meta-analysis).
Figures are emitted as deterministic SVG.
"""

from . import (cli, datasets, distributions, gellipsoid, kissing, linmod,
               mlm, numkernel, render, statellipse)
from .gellipsoid import (GEllipsoid, Signature, conjugate_axes, dual,
                         from_generator, from_moment, from_precision,
                         linear_image, project, signature, volume)
from .statellipse import (CoverageSpec, GroupedSample, Sample,
                          coverage_radius, data_ellipsoid,
                          marginal_decomposition, mean_cov,
                          pooled_within_cov)

__version__ = "0.1.0"

__all__ = [
    "cli", "datasets", "distributions", "gellipsoid", "kissing", "linmod",
    "mlm", "numkernel", "render", "statellipse",
    "GEllipsoid", "Signature", "conjugate_axes", "dual", "from_generator",
    "from_moment", "from_precision", "linear_image", "project",
    "signature", "volume",
    "CoverageSpec", "GroupedSample", "Sample", "coverage_radius",
    "data_ellipsoid", "marginal_decomposition", "mean_cov",
    "pooled_within_cov",
]
