# Command-line surface: CSV ingestion, one subcommand per analysis
# family, JSON numeric export with stable keys and 12-significant-digit
# floats, optional SVG figure output. Exit codes: 0 success, 2 input
# error, 3 numerical failure.

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import datasets, gellipsoid as ge, kissing, linmod, mlm, render
from . import statellipse as st
from . import numkernel as nk


class InputError(Exception):
    """Bad file, flag or column; maps to exit status 2."""


# ------------------------------------------------------------- data table

@dataclass
class DataTable:
    header: list
    columns: dict      # name -> float ndarray or list[str]
    n: int

    def numeric(self, name):
        col = self._get(name)
        if not isinstance(col, np.ndarray):
            raise InputError(f"column {name!r} is not numeric")
        return col

    def categorical(self, name):
        col = self._get(name)
        if isinstance(col, np.ndarray):
            return [str(v) for v in col]
        return col

    def _get(self, name):
        try:
            return self.columns[name]
        except KeyError:
            raise InputError(
                f"no column {name!r}; have {self.header}") from None

    def numeric_names(self):
        return [h for h in self.header
                if isinstance(self.columns[h], np.ndarray)]


def _parse_table(text, source):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not rows[0]:
        raise InputError(f"{source}: empty file")
    header = rows[0]
    width = len(header)
    data = rows[1:]
    if not data:
        raise InputError(f"{source}: no data rows")
    for lineno, row in enumerate(data, start=2):
        if len(row) != width:
            raise InputError(
                f"{source}: line {lineno} has {len(row)} fields, "
                f"expected {width}")
    columns = {}
    for j, name in enumerate(header):
        raw = [row[j] for row in data]
        try:
            vals = np.array([float(v) for v in raw])
        except ValueError:
            columns[name] = raw
            continue
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0]) + 2
            raise InputError(
                f"{source}: column {name!r} has a non-finite value "
                f"at line {bad}")
        columns[name] = vals
    return DataTable(header=header, columns=columns, n=len(data))


def load_csv(path):
    """Load a CSV file: header row, comma separators, '.' decimals."""
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return _parse_table(text, path)


def resolve_data(name_or_path):
    """A file path if it exists, otherwise a bundled/generated fixture."""
    if os.path.exists(name_or_path):
        return load_csv(name_or_path)
    base = os.path.basename(name_or_path)
    base = base[:-4] if base.endswith(".csv") else base
    if base in datasets.list_fixtures():
        try:
            text = datasets.fixture_csv_text(base)
        except OSError as exc:
            raise InputError(f"fixture {base!r}: {exc}") from exc
        return _parse_table(text, f"fixture:{base}")
    raise InputError(f"no such file or fixture: {name_or_path}")


# ------------------------------------------------------------ JSON output

def _json_fragment(obj):
    if isinstance(obj, dict):
        inner = ", ".join(f"{json.dumps(str(k))}: {_json_fragment(v)}"
                          for k, v in obj.items())
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_fragment(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _json_fragment(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return '"nan"'
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return f"{v:.12g}"
    return json.dumps(obj)


def dump_json(obj):
    """JSON text with insertion-ordered keys and %.12g floats."""
    return _json_fragment(obj) + "\n"


def _emit(args, payload, scene=None):
    if getattr(args, "json", None):
        with open(args.json, "w", encoding="utf-8") as f:
            f.write(dump_json(payload))
    else:
        sys.stdout.write(dump_json(payload))
    if scene is not None and getattr(args, "svg", None):
        with open(args.svg, "w", encoding="utf-8") as f:
            f.write(render.render_scene(scene))


def _ellipsoid_payload(e):
    return {"center": e.center, "frame": e.frame, "radii": e.radii}


# ------------------------------------------------------- shared arguments

def _columns_arg(value):
    return [c.strip() for c in value.split(",") if c.strip()]


def _floats_arg(value):
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _matrix_arg(value):
    try:
        rows = [[float(v) for v in row.split(",")]
                for row in value.split(";")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise argparse.ArgumentTypeError("ragged matrix")
    return np.array(rows)


def _xy_columns(table, args, need=2):
    if args.x and args.y:
        names = [args.x, args.y]
    elif args.x:
        names = _columns_arg(args.x)
    else:
        names = table.numeric_names()[:need]
    if len(names) < need:
        raise InputError(f"need {need} numeric columns")
    return names, np.column_stack([table.numeric(c) for c in names])


def _grouped(table, group_col, value_cols):
    labels = table.categorical(group_col)
    mat = np.column_stack([table.numeric(c) for c in value_cols])
    by = {}
    for lab, row in zip(labels, mat):
        by.setdefault(lab, []).append(row)
    return st.GroupedSample({lab: st.Sample(np.array(rows),
                                            tuple(value_cols))
                             for lab, rows in sorted(by.items())})


def _design_response(table, args):
    y = table.numeric(args.response)
    x_names = (_columns_arg(args.predictors) if args.predictors
               else [c for c in table.numeric_names()
                     if c != args.response])
    if not x_names:
        raise InputError("no predictor columns")
    x = np.column_stack([table.numeric(c) for c in x_names])
    return x_names, x, y


# ------------------------------------------------------------ subcommands

def cmd_data_ellipse(args):
    table = resolve_data(args.data)
    names, mat = _xy_columns(table, args)
    sample = st.Sample(mat, tuple(names))
    mean, cov = st.mean_cov(sample)
    r = cov[0, 1] / np.sqrt(cov[0, 0] * cov[1, 1])
    spec = st.CoverageSpec.chisq(args.level)
    ell = st.data_ellipsoid(sample, spec)
    c = st.coverage_radius(2, sample.n, spec)
    sh_x = st.univariate_shadow(ell, np.array([1.0, 0.0]))
    sh_y = st.univariate_shadow(ell, np.array([0.0, 1.0]))
    payload = {
        "columns": names,
        "n": sample.n,
        "level": args.level,
        "c_squared": c * c,
        "mean": mean,
        "cov": cov,
        "r": float(r),
        "radii": ell.radii,
        "shadow_x": sh_x,
        "shadow_y": sh_y,
        "area": ge.volume(ell),
    }
    scene = render.build_data_ellipse_panel(
        sample, levels=tuple(sorted({0.40, 0.68, args.level})),
        title=f"data ellipses: {names[0]} vs {names[1]}")
    _emit(args, payload, scene)
    return 0


def cmd_decompose(args):
    table = resolve_data(args.data)
    names = _columns_arg(args.columns) if args.columns else \
        table.numeric_names()[:2]
    gs = _grouped(table, args.group, names)
    out = st.marginal_decomposition(gs, 0, 1)
    payload = {"columns": names, "group": args.group, "g": gs.g,
               "n": gs.total_n}
    payload.update(out)
    _emit(args, payload)
    return 0


def cmd_betaspace(args):
    table = resolve_data(args.data)
    x_names, x, y = _design_response(table, args)
    fit = linmod.ols_fit(x, y, names=["intercept"] + x_names)
    coords = ([fit.names.index(c) for c in _columns_arg(args.coords)]
              if args.coords else [1, 2])
    if len(coords) != 2:
        raise InputError("--coords needs exactly two coefficient names")
    joint = linmod.confidence_ellipsoid(
        fit, coords, linmod.ConfidenceSpec("joint", args.alpha, d=2))
    ci_ival = {}
    scheffe = {}
    for c in coords:
        e_c = [1.0 if i == c else 0.0 for i in range(fit.q)]
        ci_ival[fit.names[c]] = linmod.shadow_interval(
            fit, e_c, linmod.ConfidenceSpec("ci", args.alpha))
        scheffe[fit.names[c]] = linmod.shadow_interval(
            fit, e_c, linmod.ConfidenceSpec("joint", args.alpha, d=2))
    dev = joint.frame.T @ (np.zeros(2) - joint.center)
    inside = float(np.sum((dev / joint.radii) ** 2)) <= 1.0
    payload = {
        "response": args.response,
        "predictors": x_names,
        "coef": dict(zip(fit.names, fit.coef)),
        "se": dict(zip(fit.names, fit.se())),
        "df": fit.df,
        "s2": fit.s2,
        "coords": [fit.names[c] for c in coords],
        "joint_ellipse": _ellipsoid_payload(joint),
        "ci_intervals": ci_ival,
        "scheffe_intervals": scheffe,
        "joint_test_rejects_zero": not inside,
    }
    scene = render.build_beta_space_panel(
        fit, coords, alpha=args.alpha,
        title=f"coefficient space: {args.response}")
    _emit(args, payload, scene)
    return 0


def cmd_avp(args):
    table = resolve_data(args.data)
    x_names, x, y = _design_response(table, args)
    if args.k not in x_names:
        raise InputError(f"--k must be one of {x_names}")
    k = x_names.index(args.k)
    res = linmod.avp(x, y, k)
    fit = linmod.ols_fit(x, y, names=["intercept"] + x_names)
    infl = linmod.vif(x, k)
    payload = {
        "response": args.response,
        "predictor": args.k,
        "slope": res["slope"],
        "full_model_coef": float(fit.coef[k + 1]),
        "slope_matches_full_model": abs(res["slope"] - fit.coef[k + 1]),
        "partial_corr": res["partial_corr"],
        "residual_match": float(np.abs(res["residuals"]
                                       - fit.residuals).max()),
        "vif_algebraic": infl["algebraic"],
        "vif_geometric": infl["geometric"],
    }
    scene = render.build_avp_marginal_overlay(
        x, y, k, names=(args.k, args.response),
        title=f"added-variable: {args.k}")
    _emit(args, payload, scene)
    return 0


def cmd_measure_error(args):
    table = resolve_data(args.data)
    x = table.numeric(args.x)
    y = table.numeric(args.response)
    deltas = args.deltas or [0.0, 0.5, 1.0, 1.5]
    curve = linmod.attenuation_curve(x, y, deltas, reps=args.reps,
                                     seed=args.seed)
    payload = {"x": args.x, "response": args.response, "reps": args.reps,
               "seed": args.seed}
    payload.update(curve)
    _emit(args, payload)
    return 0


def _manova_pieces(table, args):
    names = _columns_arg(args.columns) if args.columns else \
        table.numeric_names()
    gs = _grouped(table, args.group, names)
    fit, labels = mlm.manova_fit(gs)
    hyp = mlm.overall_hypothesis(gs.g)
    h, e = mlm.hypothesis_matrices(fit, hyp)
    return names, gs, fit, labels, h, e


def cmd_heplot(args):
    table = resolve_data(args.data)
    names, gs, fit, labels, h, e = _manova_pieces(table, args)
    res = mlm.test_stats(h, e, df_h=gs.g - 1, df_e=fit.df_e)
    crit = mlm.roy_critical(gs.g - 1, fit.df_e, gs.p, args.alpha)
    geometry = (mlm.mtest_geometry(float(res.lambdas[0]),
                                   float(res.lambdas[1]))
                if res.s >= 2 else None)
    payload = {
        "columns": names,
        "group": args.group,
        "df_h": gs.g - 1,
        "df_e": fit.df_e,
        "lambdas": res.lambdas,
        "wilks": res.wilks,
        "pillai": res.pillai,
        "hotelling_lawley": res.hotelling_lawley,
        "roy": res.roy,
        "f_tests": {k: {"f": v[0], "df1": v[1], "df2": v[2], "p": v[3]}
                    for k, v in res.f_stats.items()},
        "partial_eta2": res.partial_eta2,
        "roy_critical": crit,
        "protrusion_ratio": res.roy / crit,
        "mtest_geometry": geometry,
    }
    coords = ([names.index(c) for c in _columns_arg(args.coords)]
              if args.coords else [0, 1])
    _, means, _ = st.group_means(gs)
    scene = render.build_he_plot(
        h, e, fit.df_e, gs.g - 1, fit.y_mean, coords=tuple(coords),
        names=(names[coords[0]], names[coords[1]]), alpha=args.alpha,
        scaling=args.scaling, means=means, labels=labels,
        title=f"HE plot ({args.scaling} scaling)")
    _emit(args, payload, scene)
    return 0


def cmd_contrasts(args):
    table = resolve_data(args.data)
    names, gs, fit, labels, h, e = _manova_pieces(table, args)
    if not args.contrast:
        raise InputError("give at least one --contrast")
    hyps = []
    for i, spec in enumerate(args.contrast):
        row = np.array(_floats_arg(spec))
        if row.size != gs.g:
            raise InputError(
                f"contrast {spec!r} needs {gs.g} entries (one per group)")
        hyps.append(mlm.Hypothesis(row[None, :], label=f"c{i + 1}"))
    dec = mlm.contrast_decompose(fit, hyps,
                                 overall=mlm.overall_hypothesis(gs.g))
    payload = {
        "columns": names,
        "groups": labels,
        "contrasts": [list(hyp.l_mat[0]) for hyp in hyps],
        "orthogonal": dec["orthogonal"],
        "h_overall": dec["h_overall"],
        "h_parts": dec["h_parts"],
        "additivity_residual": dec["residual"],
        "additivity_relative": dec["residual"]
        / float(np.abs(dec["h_overall"]).max()),
    }
    _emit(args, payload)
    return 0


def cmd_canonical(args):
    table = resolve_data(args.data)
    names = _columns_arg(args.columns) if args.columns else \
        table.numeric_names()
    gs = _grouped(table, args.group, names)
    can = mlm.canonical(gs)
    payload = {
        "columns": names,
        "groups": can.group_labels,
        "lambdas": can.lambdas,
        "percent": can.percent,
        "structure": {name: can.structure[j]
                      for j, name in enumerate(names)},
        "group_means": {lab: can.group_means[i]
                        for i, lab in enumerate(can.group_labels)},
    }
    scene = None
    if can.scores.shape[1] >= 2:
        scene = render.build_canonical_he(gs, title="canonical HE plot")
    _emit(args, payload, scene)
    return 0


def cmd_kiss(args):
    f1 = kissing.QuadFamily(args.m1, args.a1)
    f2 = kissing.QuadFamily(args.m2, args.a2)
    if args.bbox:
        bbox = tuple(args.bbox)
        if len(bbox) != 4:
            raise InputError("--bbox needs xmin,xmax,ymin,ymax")
    else:
        span = float(np.linalg.norm(f2.m - f1.m)) + 4.0
        cx, cy = 0.5 * (f1.m + f2.m)
        bbox = (cx - span, cx + span, cy - span, cy + span)
    locus = kissing.trace_locus(f1, f2, bbox, args.resolution)
    verts = (np.vstack(locus["polylines"]) if locus["polylines"]
             else np.empty((0, 2)))
    resid = (float(np.abs(kissing.cross_field(f1, f2, verts)).max())
             if len(verts) else 0.0)
    marks = []
    for r1 in args.mark:
        pt, r2 = kissing.osculation_point(f1, f2, r1, locus=locus)
        marks.append({"radius1": r1, "point": pt, "radius2": r2})
    payload = {
        "m1": f1.m, "m2": f2.m, "a1": f1.a_mat, "a2": f2.a_mat,
        "bbox": list(bbox),
        "resolution": args.resolution,
        "n_polylines": len(locus["polylines"]),
        "n_vertices": int(len(verts)),
        "scale": locus["scale"],
        "max_abs_g": resid,
        "dist_to_m1": float(np.linalg.norm(verts - f1.m, axis=1).min())
        if len(verts) else float("inf"),
        "dist_to_m2": float(np.linalg.norm(verts - f2.m, axis=1).min())
        if len(verts) else float("inf"),
        "osculation": marks,
    }
    scene = render.build_kiss_locus(f1, f2, mark_radii=tuple(args.mark),
                                    bbox=bbox, resolution=args.resolution,
                                    title="locus of osculation")
    _emit(args, payload, scene)
    return 0


def cmd_lda(args):
    table = resolve_data(args.data)
    names = _columns_arg(args.columns) if args.columns else \
        table.numeric_names()
    gs = _grouped(table, args.group, names)
    if gs.g != 2:
        raise InputError(f"lda needs exactly two groups, found {gs.g}")
    labels, means, _ = st.group_means(gs)
    pooled = st.pooled_within_cov(gs)
    out = kissing.lda_axis(means[0], means[1], pooled)
    payload = {
        "columns": names,
        "groups": labels,
        "mean_1": means[0],
        "mean_2": means[1],
        "pooled_cov": pooled,
        "coef": out["coef"],
        "midpoint_cut": out["midpoint_cut"],
    }
    _emit(args, payload)
    return 0


def cmd_ridge_trace(args):
    table = resolve_data(args.data)
    x_names, x, y = _design_response(table, args)
    ks = args.ks or [0.0, 0.005, 0.01, 0.02, 0.04, 0.08]
    coords = ([x_names.index(c) for c in _columns_arg(args.coords)]
              if args.coords else [0, 1])
    trace = kissing.ridge_trace(x, y, ks, coords=tuple(coords))
    norms = [float(np.linalg.norm(t["result"].beta)) for t in trace]
    dets = [float(np.linalg.det(t["result"].cov)) for t in trace]
    payload = {
        "response": args.response,
        "predictors": x_names,
        "coords": [x_names[c] for c in coords],
        "ks": [float(k) for k in ks],
        "beta_path": [t["result"].beta for t in trace],
        "beta_original_units": [t["result"].beta_original for t in trace],
        "coef_norms": norms,
        "cov_generalized_variance": dets,
        "norm_monotone_nonincreasing":
            all(b <= a + 1e-12 for a, b in zip(norms, norms[1:])),
        "genvar_strictly_decreasing":
            all(b < a for a, b in zip(dets, dets[1:])),
    }
    scene = render.build_ridge_trace(
        trace, names=(x_names[coords[0]], x_names[coords[1]]),
        title="bivariate ridge trace")
    _emit(args, payload, scene)
    return 0


def cmd_bayes(args):
    table = resolve_data(args.data)
    x_names, x, y = _design_response(table, args)
    q = len(x_names)
    prior = np.array(args.prior) if args.prior else np.zeros(q)
    if prior.size != q:
        raise InputError(f"--prior needs {q} entries")
    if args.precision_matrix is not None:
        a_mat = args.precision_matrix
    else:
        a_mat = args.precision * np.eye(q)
    out = kissing.bayes_posterior(x, y, prior, a_mat)
    payload = {
        "response": args.response,
        "predictors": x_names,
        "prior_mean": prior,
        "precision": a_mat,
        "beta_ols": out["beta_ols"],
        "beta_posterior": out["beta_post"],
        "cov_unit": out["cov_unit"],
        "cov": out["cov"],
        "s2": out["s2"],
    }
    _emit(args, payload)
    return 0


def cmd_blup(args):
    table = resolve_data(args.data)
    y = table.numeric(args.response)
    x = table.numeric(args.x)
    labels = table.categorical(args.group)
    by = {}
    for lab, xi, yi in zip(labels, x, y):
        by.setdefault(lab, []).append((xi, yi))
    clusters, names = [], []
    for lab in sorted(by):
        arr = np.array(by[lab])
        design = np.column_stack([np.ones(len(arr)), arr[:, 0]])
        clusters.append(kissing.Cluster(design, arr[:, 1]))
        names.append(lab)
    spec0 = kissing.MixedSpec(clusters, np.zeros((2, 2)))
    if args.g_diag:
        if len(args.g_diag) != 2:
            raise InputError("--g-diag needs two entries")
        g_mat = np.diag(args.g_diag)
    else:
        g_mat = kissing.estimate_g_moments(spec0)
    spec = kissing.MixedSpec(clusters, g_mat)
    gls = kissing.gls_fixed(spec)
    blues = kissing.cluster_blues(spec)
    blups = [kissing.blup(e["beta"], e["s_mat"], gls["beta"], g_mat)
             for e in blues["estimates"]]
    bb = np.array([e["beta"] for e in blues["estimates"]])
    bp = np.array([b["beta"] for b in blups])
    rel = np.abs(bb - bp).mean(axis=0) / bb.std(axis=0, ddof=1)
    payload = {
        "group": args.group,
        "x": args.x,
        "response": args.response,
        "n_clusters": len(clusters),
        "sigma2": blues["sigma2"],
        "g_matrix": g_mat,
        "gls_beta": gls["beta"],
        "gls_cov": gls["cov"],
        "clusters": [{"label": names[e["index"]], "blue": e["beta"],
                      "blup": b["beta"]}
                     for e, b in zip(blues["estimates"], blups)],
        "skipped": [names[i] for i in blues["skipped"]],
        "relative_shrinkage_intercept": float(rel[0]),
        "relative_shrinkage_slope": float(rel[1]),
    }
    _emit(args, payload)
    return 0


def _berkey_studies(table):
    need = ["effect_PD", "effect_AL", "var_PD", "cov_PD_AL", "var_AL"]
    for c in need:
        if c not in table.columns:
            raise InputError(f"meta table needs column {c!r}")
    labels = (table.categorical("trial") if "trial" in table.columns
              else [f"study{i + 1}" for i in range(table.n)])
    studies = []
    for i in range(table.n):
        y = [table.numeric("effect_PD")[i], table.numeric("effect_AL")[i]]
        s_mat = [[table.numeric("var_PD")[i], table.numeric("cov_PD_AL")[i]],
                 [table.numeric("cov_PD_AL")[i], table.numeric("var_AL")[i]]]
        studies.append(kissing.MetaStudy(y, s_mat, label=labels[i]))
    return studies


def cmd_meta(args):
    table = resolve_data(args.data)
    studies = _berkey_studies(table)
    fixed = kissing.meta_fixed(studies)
    payload = {
        "n_studies": len(studies),
        "model": args.model,
        "beta_fixed": fixed["beta"],
        "cov_fixed": fixed["cov"],
    }
    scene = None
    if args.model == "fixed":
        payload["beta"] = fixed["beta"]
        payload["cov"] = fixed["cov"]
        scene = render.build_meta_panel(studies, fixed,
                                        names=("PD effect", "AL effect"),
                                        title="fixed-effect pooling")
    else:
        if args.delta is not None:
            delta = args.delta
        else:
            delta = kissing.estimate_delta_mom(studies)
        re = kissing.meta_random(studies, delta)
        blups = kissing.meta_blup(studies, re["beta"], re["cov"], delta)
        corr = float(delta[0, 1] / np.sqrt(delta[0, 0] * delta[1, 1])) \
            if delta[0, 0] > 0 and delta[1, 1] > 0 else 0.0
        payload.update({
            "delta": delta,
            "delta_corr": corr,
            "beta": re["beta"],
            "cov": re["cov"],
            "blups": [{"label": b["label"], "beta": b["beta"],
                       "cov": b["cov"]} for b in blups],
        })
        scene = render.build_meta_panel(studies, re, blups=blups,
                                        delta=delta,
                                        names=("PD effect", "AL effect"),
                                        title="random-effects pooling")
    _emit(args, payload, scene)
    return 0


def cmd_gell(args):
    mat = args.matrix
    center = np.array(args.center) if args.center else None
    if args.form == "moment":
        e = ge.from_moment(mat, center)
    elif args.form == "precision":
        e = ge.from_precision(mat, center)
    else:
        e = ge.from_generator(mat, center)
    d = ge.dual(e)
    payload = {
        "form": args.form,
        "matrix": mat,
        "signature": list(ge.signature(e).as_tuple()),
        "radii": e.radii,
        "center": e.center,
        "volume": ge.volume(e),
        "dual_signature": list(ge.signature(d).as_tuple()),
        "dual_radii": d.radii,
        "size_measures": ge.size_measures(e),
    }
    if args.project is not None:
        proj = ge.project(e, args.project)
        payload["projected_signature"] = list(ge.signature(proj).as_tuple())
        payload["projected_radii"] = proj.radii
    if args.conjugate:
        if args.form != "moment":
            raise InputError("--conjugate applies to the moment form")
        axes = ge.conjugate_axes(mat, args.conjugate, given=args.factor)
        gram = axes.axes.T @ np.linalg.inv(mat) @ axes.axes
        payload["conjugate"] = {
            "kind": args.conjugate,
            "axes": axes.axes,
            "gram_residual": float(np.abs(gram
                                          - np.eye(mat.shape[0])).max()),
            "parallelogram_area": axes.area(),
            "sum_sq_diameters": axes.sum_sq_diameters(),
        }
    _emit(args, payload)
    return 0


def cmd_fixtures(args):
    payload = {"fixtures": [{"name": k, "provenance": v}
                            for k, v in datasets.list_fixtures().items()],
               "directory": datasets.fixture_dir()}
    _emit(args, payload)
    return 0


# ----------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="ellip",
        description="Ellipsoid calculus for linear and multivariate "
                    "model summaries; JSON numbers out, SVG figures out.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        p.add_argument("--json", help="write the JSON payload here")
        p.add_argument("--svg", help="write the SVG figure here")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("data-ellipse", cmd_data_ellipse,
            help="bivariate data ellipse summary")
    p.add_argument("--data", required=True)
    p.add_argument("--x", help="x column (or comma list when --y omitted)")
    p.add_argument("--y")
    p.add_argument("--level", type=float, default=0.40)
    p.set_defaults(x=None)

    p = add("decompose", cmd_decompose,
            help="within/between/marginal slope decomposition")
    p.add_argument("--data", required=True)
    p.add_argument("--group", required=True)
    p.add_argument("--columns", help="comma list, default first two numeric")

    p = add("betaspace", cmd_betaspace,
            help="confidence ellipses and shadows in coefficient space")
    p.add_argument("--data", required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--predictors", help="comma list, default all numeric")
    p.add_argument("--coords", help="two coefficient names for the panel")
    p.add_argument("--alpha", type=float, default=0.05)

    p = add("avp", cmd_avp, help="added-variable geometry and VIF")
    p.add_argument("--data", required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--predictors")
    p.add_argument("--k", required=True, help="predictor under study")

    p = add("measure-error", cmd_measure_error,
            help="attenuation under predictor measurement error")
    p.add_argument("--data", required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--deltas", type=_floats_arg)
    p.add_argument("--reps", type=int, default=100)

    p = add("heplot", cmd_heplot, help="hypothesis-error test summary")
    p.add_argument("--data", required=True)
    p.add_argument("--group", required=True)
    p.add_argument("--columns")
    p.add_argument("--coords")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--scaling", choices=["significance", "effect"],
                   default="significance")

    p = add("contrasts", cmd_contrasts,
            help="contrast decomposition of a group effect")
    p.add_argument("--data", required=True)
    p.add_argument("--group", required=True)
    p.add_argument("--columns")
    p.add_argument("--contrast", action="append",
                   help="comma list of per-group weights; repeatable")

    p = add("canonical", cmd_canonical,
            help="canonical discriminant projection")
    p.add_argument("--data", required=True)
    p.add_argument("--group", required=True)
    p.add_argument("--columns")

    p = add("kiss", cmd_kiss, help="trace a locus of osculation")
    p.add_argument("--m1", type=_floats_arg, default=[-2.0, 2.0])
    p.add_argument("--m2", type=_floats_arg, default=[2.0, 6.0])
    p.add_argument("--a1", type=_matrix_arg,
                   default=np.array([[1.0, 0.5], [0.5, 1.5]]))
    p.add_argument("--a2", type=_matrix_arg,
                   default=np.array([[1.5, -0.3], [-0.3, 1.0]]))
    p.add_argument("--bbox", type=_floats_arg)
    p.add_argument("--resolution", type=int, default=96)
    p.add_argument("--mark", type=_floats_arg, default=[2.0, 3.0],
                   help="f1 radii whose kiss points are marked")

    p = add("lda", cmd_lda, help="two-group discriminant axis")
    p.add_argument("--data", required=True)
    p.add_argument("--group", required=True)
    p.add_argument("--columns")

    p = add("ridge-trace", cmd_ridge_trace,
            help="ridge path with variance ellipses")
    p.add_argument("--data", required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--predictors")
    p.add_argument("--ks", type=_floats_arg)
    p.add_argument("--coords", help="two predictor names for the panel")

    p = add("bayes", cmd_bayes, help="conjugate posterior combination")
    p.add_argument("--data", required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--predictors")
    p.add_argument("--prior", type=_floats_arg)
    p.add_argument("--precision", type=float, default=0.0,
                   help="scalar k for A = k I")
    p.add_argument("--precision-matrix", type=_matrix_arg)

    p = add("blup", cmd_blup, help="cluster BLUEs, GLS pool and BLUPs")
    p.add_argument("--data", required=True)
    p.add_argument("--group", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--g-diag", type=_floats_arg,
                   help="diagonal of G; default moment estimate")

    p = add("meta", cmd_meta, help="multivariate meta-analysis")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=["fixed", "random"],
                   default="fixed")
    p.add_argument("--delta", type=_matrix_arg,
                   help="between-study covariance; default moment estimate")

    p = add("gell", cmd_gell,
            help="generalized ellipsoid signature/dual/projection demo")
    p.add_argument("--matrix", type=_matrix_arg, required=True)
    p.add_argument("--form", choices=["moment", "precision", "generator"],
                   default="moment")
    p.add_argument("--center", type=_floats_arg)
    p.add_argument("--project", type=_matrix_arg)
    p.add_argument("--conjugate", choices=["given", "cholesky",
                                           "principal"])
    p.add_argument("--factor", type=_matrix_arg,
                   help="factor A for --conjugate given")

    add("fixtures", cmd_fixtures, help="list bundled data fixtures")
    return parser


def run(args):
    """Dispatch a parsed command; returns the process exit status."""
    try:
        return args.func(args)
    except InputError as exc:
        print(f"ellip: input error: {exc}", file=sys.stderr)
        return 2
    except (nk.NotSymmetricError, nk.NotPositiveDefiniteError,
            nk.IndefiniteError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"ellip: numerical failure: {exc}", file=sys.stderr)
        return 3


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
