# Kissing ellipsoids: one geometric idea behind many estimators.
#
# Two families of concentric ellipses osculate along the zero set of a
# bilinear cross-product field -- a conic through both centers. The same
# picture describes the two-group discriminant axis (data space), ridge
# and Bayes estimates (coefficient space), and the BLUPs of mixed models
# and multivariate meta-analysis (matrix-weighted averages of two
# information sources).

import csv
import io
import os

import numpy as np

from ellipstat import datasets, kissing as ki, render

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# 1. the locus of osculation for the demo families
f1 = ki.QuadFamily([-2.0, 2.0], [[1.0, 0.5], [0.5, 1.5]])
f2 = ki.QuadFamily([2.0, 6.0], [[1.5, -0.3], [-0.3, 1.0]])
bbox = (-8.0, 8.0, -4.0, 12.0)
locus = ki.trace_locus(f1, f2, bbox, 96)
verts = np.vstack(locus["polylines"])
print(f"locus: {len(locus['polylines'])} branch(es), "
      f"{len(verts)} vertices, max |g| residual "
      f"{np.abs(ki.cross_field(f1, f2, verts)).max():.2e}")
for r1 in (2.0, 3.0):
    pt, r2 = ki.osculation_point(f1, f2, r1, locus=locus)
    print(f"  level {r1:.1f} of family 1 kisses level {r2:.3f} of "
          f"family 2 at ({pt[0]:+.3f}, {pt[1]:+.3f})")
scene = render.figure("kiss_locus", f1, f2, bbox=bbox,
                      title="locus of osculation")
with open(os.path.join(OUT, "kiss_locus.svg"), "w") as f:
    f.write(render.render_scene(scene))

# 2. ridge trace on the Longley series
rows = list(csv.reader(io.StringIO(datasets.fixture_csv_text("longley"))))
arr = np.array([[float(v) for v in r] for r in rows[1:]])
x, y = arr[:, :6], arr[:, 6]
ks = [0.0, 0.005, 0.01, 0.02, 0.04, 0.08]
trace = ki.ridge_trace(x, y, ks, coords=(1, 2))
print("ridge on Longley (standardized scale):")
for t in trace:
    r = t["result"]
    print(f"  k = {t['k']:5.3f}  |beta| = {np.linalg.norm(r.beta):7.3f}  "
          f"gen.var = {np.linalg.det(r.cov):.3e}")
scene = render.figure("ridge_trace", trace, names=("GNP", "Unemployed"),
                      title="bivariate ridge trace (half-radius ellipses)")
with open(os.path.join(OUT, "ridge_trace.svg"), "w") as f:
    f.write(render.render_scene(scene))

# ridge is the zero-prior special case of the conjugate Bayes combination
bayes = ki.bayes_posterior(x, y, np.zeros(6), 0.02 * np.eye(6))
print(f"bayes(A = 0.02 I, prior 0) equals ridge(0.02): "
      f"{np.abs(bayes['beta_post'] - ki.ridge(x, y, 0.02).beta).max():.1e}")

# 3. multivariate meta-analysis of the periodontal trials
rows = list(csv.reader(io.StringIO(datasets.fixture_csv_text("berkey"))))
studies = []
for r in rows[1:]:
    studies.append(ki.MetaStudy(
        [float(r[3]), float(r[4])],
        [[float(r[5]), float(r[6])], [float(r[6]), float(r[7])]],
        label=r[0]))
fixed = ki.meta_fixed(studies)
delta = ki.estimate_delta_mom(studies)
re = ki.meta_random(studies, delta)
blups = ki.meta_blup(studies, re["beta"], re["cov"], delta)
print(f"fixed-effect pool:  ({fixed['beta'][0]:+.3f}, "
      f"{fixed['beta'][1]:+.3f})")
print(f"random-effect pool: ({re['beta'][0]:+.3f}, {re['beta'][1]:+.3f}) "
      f"with between-study corr "
      f"{delta[0, 1] / np.sqrt(delta[0, 0] * delta[1, 1]):.2f}")
scene = render.figure("meta_panel", studies, re, blups=blups, delta=delta,
                      names=("PD effect", "AL effect"),
                      title="random-effects meta-analysis with BLUPs")
with open(os.path.join(OUT, "meta_random.svg"), "w") as f:
    f.write(render.render_scene(scene))

# 4. BLUPs shrink school-level fits toward the GLS pool
rows = list(csv.reader(io.StringIO(datasets.hsb_sample())))
by = {}
for r in rows[1:]:
    by.setdefault(r[0], []).append((float(r[1]), float(r[2])))
clusters = [ki.Cluster(np.column_stack([np.ones(len(v)),
                                        np.array(v)[:, 0]]),
                       np.array(v)[:, 1]) for v in by.values()]
g_mat = np.diag([6.0, 0.05])
spec = ki.MixedSpec(clusters, g_mat)
gls = ki.gls_fixed(spec)
blues = ki.cluster_blues(spec)
school_blups = [ki.blup(b["beta"], b["s_mat"], gls["beta"], g_mat)
                for b in blues["estimates"]]
bb = np.array([b["beta"] for b in blues["estimates"]])
bp = np.array([b["beta"] for b in school_blups])
rel = np.abs(bb - bp).mean(axis=0) / bb.std(axis=0, ddof=1)
print(f"school BLUPs: relative shrinkage intercept {rel[0]:.2f}, "
      f"slope {rel[1]:.2f} (slopes pool much harder)")
print("wrote", OUT)
