"""Matplotlib rendering of the exported analyses (Agg, deterministic)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .loading import (load_curvature, load_json, load_mesh, load_report,
                      rows_where)

DPI = 130

plt.rcParams.update({
    "figure.dpi": DPI,
    "savefig.dpi": DPI,
    "font.size": 8,
    "axes.titlesize": 8,
    "axes.labelsize": 8,
    "lines.linewidth": 1.2,
})


def _save(fig, out_path):
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, metadata={"Software": "manifold-figures"})
    plt.close(fig)
    return str(out_path)


def _gridline_positions(mu, norm_cum, n_marks=17):
    """Angles at equal normalized-length steps (inverse of the cumulative)."""
    targets = np.linspace(0.0, 1.0, n_marks)
    return np.interp(targets, norm_cum, mu)


# ---------------------------------------------------------------------------
# static circle


def render_static(export_dir, out_path, variants=("trained",)):
    """Decision-boundary warping of the circle classifier: metric profile,
    warped gridline marks, and cumulative length vs the uniform line."""
    rep = load_report(Path(export_dir) / "static" / "gridlines.json",
                      tables=("gridlines",))
    tab = rep["gridlines"]
    nrows = len(variants)
    fig, axes = plt.subplots(nrows, 3, figsize=(8.5, 2.6 * nrows),
                             squeeze=False)
    for r, variant in enumerate(variants):
        rows = rows_where(tab, variant=variant, axis=0)
        mu = rows["mu"].astype(float)
        sqrt_cum = rows["sqrt_cum"].astype(float)
        g = np.gradient(sqrt_cum, mu) ** 2  # back out G from the cumulative
        ax = axes[r, 0]
        ax.plot(mu, g, color="tab:blue")
        ax.set_xlabel("angle")
        ax.set_ylabel("metric entry")
        ax.set_title(f"{variant}: circle metric")
        for b in (0.0, np.pi):
            ax.axvline(b, color="gray", ls=":", lw=0.8)
        ax = axes[r, 1]
        marks = _gridline_positions(mu, rows["norm_sqrt"].astype(float))
        ax.plot(np.cos(mu), np.sin(mu), color="lightgray", lw=0.8)
        ax.scatter(np.cos(marks), np.sin(marks), s=14, color="tab:red",
                   zorder=3)
        ax.set_aspect("equal")
        ax.set_title("equal-length gridline marks")
        ax.set_xticks([])
        ax.set_yticks([])
        ax = axes[r, 2]
        ax.plot(mu, rows["norm_sqrt"].astype(float), color="tab:blue",
                label="learned metric")
        ax.plot(mu, (mu - mu[0]) / (mu[-1] - mu[0]), color="k", ls="--",
                lw=0.8, label="uniform")
        ax.set_xlabel("angle")
        ax.set_ylabel("normalized length")
        ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, out_path)


# ---------------------------------------------------------------------------
# E-I network


def render_ei(export_dir, out_path):
    """Line-attractor build-up: state mesh fan-out and metric hand-off from
    the time direction to the input direction."""
    base = Path(export_dir) / "ei"
    mesh = load_json(base / "ei_mesh.json",
                     required_fields=("u_grid", "t_grid", "shape", "states"))
    rep = load_report(base / "ei_metric.json", tables=("metric",))
    states = np.asarray(mesh["states"]).reshape(mesh["shape"])
    us = np.asarray(mesh["u_grid"])
    fig = plt.figure(figsize=(9, 3))
    ax = fig.add_subplot(1, 3, 1, projection="3d")
    step = max(1, len(us) // 24)
    for i in range(0, len(us), step):
        ax.plot(states[i, :, 0], states[i, :, 1], states[i, :, 2], lw=0.7,
                color=plt.cm.viridis(us[i]))
    ax.set_title("state mesh over input line")
    ax.set_xticks([]); ax.set_yticks([]); ax.set_zticks([])

    tab = rep["metric"]
    ts = np.unique(tab["t"].astype(float))
    gtt = np.array([tab["g_tt"][tab["t"] == t].astype(float).mean() for t in ts])
    guu = np.array([tab["g_uu"][tab["t"] == t].astype(float).mean() for t in ts])
    ax = fig.add_subplot(1, 3, 2)
    ax.semilogy(ts, np.maximum(gtt, 1e-30), label="time-time", color="tab:red")
    ax.semilogy(ts, np.maximum(guu, 1e-30), label="input-input", color="tab:blue")
    ax.set_xlabel("t")
    ax.set_ylabel("metric entry")
    ax.legend(frameon=False)
    ax.set_title("metric hand-off to the input direction")

    ax = fig.add_subplot(1, 3, 3)
    uu = np.unique(tab["u"].astype(float))
    img = np.array([[tab["g_uu"][(tab["t"] == t) & (tab["u"] == u)].astype(float)[0]
                     for u in uu] for t in ts])
    pc = ax.pcolormesh(uu, ts, img, shading="nearest")
    fig.colorbar(pc, ax=ax, label="input-input entry")
    ax.set_xlabel("u")
    ax.set_ylabel("t")
    fig.tight_layout()
    return _save(fig, out_path)


# ---------------------------------------------------------------------------
# context task


def render_context(export_dir, out_path):
    """Contextual gating panels: output sweeps, warped gridlines, eigenvalue
    decay, update-alignment curves, and neuron loadings."""
    base = Path(export_dir) / "context"
    sweep = load_report(base / "output_sweep.json", tables=("outputs",))
    grid = load_report(base / "gridlines.json", tables=("gridlines",))
    eig = load_report(base / "eigen_decay.json", tables=("eigenvalues",))
    sel = load_report(base / "selection_alignment.json", tables=("alignment",))
    loads = load_report(base / "neuron_loadings.json", tables=("loadings",))

    fig, axes = plt.subplots(1, 5, figsize=(13, 2.6))
    ax = axes[0]
    out_tab = rows_where(sweep["outputs"], ctx=1)
    for ui in np.unique(out_tab["u_irr"])[::2]:
        rows = rows_where(out_tab, u_irr=ui)
        ax.plot(rows["t"].astype(float), rows["y"].astype(float), lw=0.8,
                color=plt.cm.coolwarm(0.5 + float(ui) * 2.0))
    ax.set_xlabel("t")
    ax.set_ylabel("readout")
    ax.set_title("output vs irrelevant input")

    ax = axes[1]
    gtab = grid["gridlines"]
    late_t = gtab["t"].astype(float).max()
    for axis, color in ((0, "tab:blue"), (1, "tab:orange")):
        rows = rows_where(gtab, variant="ctx1", axis=axis)
        tmask = rows["t"].astype(float) == late_t
        mu = rows["mu"].astype(float)[tmask]
        nrm = rows["norm_sqrt"].astype(float)[tmask]
        npts = np.sum(np.diff(mu) < 0) + 1  # lines share a mu ramp
        mu0 = mu[: len(mu) // max(npts, 1)]
        nrm0 = nrm[: len(mu0)]
        ax.plot(mu0, nrm0, color=color, label=f"input {axis + 1}")
    ax.set_xlabel("input value")
    ax.set_ylabel("normalized length")
    ax.legend(frameon=False)
    ax.set_title("late-time gridlines (context 1)")

    ax = axes[2]
    etab = rows_where(eig["eigenvalues"], ctx=1)
    urels = np.unique(etab["u_rel"].astype(float))
    mid = urels[np.argmin(np.abs(urels))]
    for ei, color in ((0, "tab:blue"), (1, "tab:orange"), (2, "tab:green")):
        rows = rows_where(etab, eig_index=ei)
        tmask = rows["u_rel"].astype(float) == mid
        ts = rows["t"].astype(float)[tmask]
        order = np.argsort(ts)
        ax.plot(ts[order], rows["mean"].astype(float)[tmask][order],
                color=color, label=f"eig {ei + 1}")
        ax.fill_between(ts[order], rows["q10"].astype(float)[tmask][order],
                        rows["q90"].astype(float)[tmask][order], alpha=0.2,
                        color=color)
    ax.set_xlabel("t")
    ax.set_ylabel("normalized eigenvalue")
    ax.legend(frameon=False)
    ax.set_title("metric eigenvalue decay")

    ax = axes[3]
    stab = rows_where(sel["alignment"], ctx=1)
    for vec, color in (("u_rel", "tab:blue"), ("u_irr", "tab:orange"),
                       ("time", "tab:green"), ("random_baseline", "gray")):
        rows = rows_where(stab, vector=vec)
        ts = rows["t"].astype(float)
        order = np.argsort(ts)
        ax.plot(ts[order], rows["alignment"].astype(float)[order],
                color=color, label=vec, ls="--" if vec == "random_baseline" else "-")
    ax.set_xlabel("t")
    ax.set_ylabel("|alignment|")
    ax.legend(frameon=False, fontsize=6)
    ax.set_title("update direction vs tangents")

    ax = axes[4]
    ltab = rows_where(loads["loadings"], ctx=1)
    ax.scatter(ltab["time_load"].astype(float), ltab["rel_load"].astype(float),
               s=6, color="tab:blue", label="relevant")
    ax.scatter(ltab["time_load"].astype(float), ltab["irr_load"].astype(float),
               s=6, color="tab:orange", label="irrelevant")
    ax.set_xlabel("time-direction loading")
    ax.set_ylabel("input loading")
    ax.legend(frameon=False, fontsize=6)
    ax.set_title("neuron loadings")
    fig.tight_layout()
    return _save(fig, out_path)


def render_context_supplementary(export_dir, out_path):
    """Weight spectra and unnormalized gridlines across contexts."""
    base = Path(export_dir) / "context"
    spec = load_report(base / "weight_spectrum.json",
                       tables=("singular_values", "w_eigenvalues"))
    grid = load_report(base / "gridlines.json", tables=("gridlines",))
    eig = load_report(base / "eigen_decay.json", tables=("eigenvalues",))

    fig, axes = plt.subplots(1, 4, figsize=(11, 2.6))
    ax = axes[0]
    ev = spec["w_eigenvalues"]
    ax.scatter(ev["re"].astype(float), ev["im"].astype(float), s=8,
               color="tab:blue")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title("recurrent weight eigenvalues")

    ax = axes[1]
    sv = spec["singular_values"]
    ax.semilogy(sv["index"].astype(int), np.maximum(sv["W"].astype(float), 1e-20),
                label="W", color="tab:blue")
    ax.semilogy(sv["index"].astype(int), np.maximum(sv["dW"].astype(float), 1e-20),
                label="update", color="tab:red")
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    ax.legend(frameon=False)
    ax.set_title("weight and update spectra")

    ax = axes[2]
    gtab = grid["gridlines"]
    for variant, color in (("ctx1", "tab:blue"), ("ctx2", "tab:orange")):
        rows = rows_where(gtab, variant=variant, axis=1)
        ts = rows["t"].astype(float)
        late = ts == ts.max()
        mu = rows["mu"].astype(float)[late]
        sq = rows["sq_cum"].astype(float)[late]
        k = np.sum(np.diff(mu) < 0) + 1
        ax.plot(mu[: len(mu) // max(k, 1)], sq[: len(mu) // max(k, 1)],
                color=color, label=variant)
    ax.set_xlabel("input 2 value")
    ax.set_ylabel("unnormalized squared length")
    ax.legend(frameon=False)
    ax.set_title("context-dependent stretch")

    ax = axes[3]
    etab = rows_where(eig["eigenvalues"], ctx=1, eig_index=0)
    ts = etab["t"].astype(float)
    late = ts == ts.max()
    ur = etab["u_rel"].astype(float)[late]
    order = np.argsort(ur)
    ax.plot(ur[order], etab["mean"].astype(float)[late][order], color="tab:blue")
    ax.set_xlabel("relevant input")
    ax.set_ylabel("top normalized eigenvalue")
    ax.set_title("warping across inputs (final time)")
    fig.tight_layout()
    return _save(fig, out_path)


# ---------------------------------------------------------------------------
# working memory


def render_wm(export_dir, out_path):
    """Torus panels: PCA embedding, curvature, torus metric entries
    (colormap clipped to each entry's 10/90% quantiles), warp ratio,
    decoder alignment, delay-stable subspaces, and the arc-length prism."""
    base = Path(export_dir) / "wm2"
    mesh = load_mesh(base / "mesh.json")
    curv = load_curvature(base / "curvature.json")
    metric = load_report(base / "metric_field.json", tables=("metric",))
    ratio = load_report(base / "warp_ratio.json", tables=("ratio",))
    dec = load_report(base / "decoder_alignment.json", tables=("alignment",))
    sub = load_report(base / "subspace_stability.json", tables=("similarity",))
    prism = load_report(Path(export_dir) / "wm3" / "arclength_prism.json",
                        tables=("sides",))

    if "pca_projections" not in mesh:
        from .loading import ExportError

        raise ExportError(f"export file {base / 'mesh.json'} lacks field 'pca'")
    fig = plt.figure(figsize=(13, 7.6))
    ax = fig.add_subplot(3, 3, 1, projection="3d")
    proj = mesh["pca_projections"]
    color = np.repeat(mesh["theta1"], len(mesh["theta2"]))
    stride = max(1, len(proj) // 4000)
    ax.scatter(proj[::stride, 0], proj[::stride, 1], proj[::stride, 2],
               c=color[::stride], cmap="hsv", s=3)
    ax.set_title(f"PCA torus at t = {mesh['t']:.1f}")
    ax.set_xticks([]); ax.set_yticks([]); ax.set_zticks([])

    ax = fig.add_subplot(3, 3, 2)
    K = np.where(curv["invalid"], np.nan, curv["K"])
    vmax = np.nanquantile(np.abs(K), 0.95)
    pc = ax.pcolormesh(curv["theta2"], curv["theta1"], K, cmap="RdBu_r",
                       vmin=-vmax, vmax=vmax, shading="nearest")
    fig.colorbar(pc, ax=ax, label="Gaussian curvature")
    if curv.get("extrema"):
        for mode, marker in (("max", "^"), ("min", "v")):
            c2, c1 = curv["extrema"][mode]["center"][1], \
                curv["extrema"][mode]["center"][0]
            ax.plot(c2, c1, marker, color="k", ms=5)
    ax.set_xlabel("angle 2")
    ax.set_ylabel("angle 1")
    ax.set_title(f"curvature at t = {curv['t']:.1f}")

    # angular-block metric entries over the torus, each clipped to its own
    # 10th/90th quantiles
    mtab = metric["metric"]
    mt = mtab["time"].astype(float)
    t_show = mt.max()
    rows = {k: v[mt == t_show] for k, v in mtab.items()}
    k1 = np.unique(rows["k1"].astype(float))
    k2 = np.unique(rows["k2"].astype(float))
    for pi, (name, label) in enumerate((("g_11", "angle1-angle1"),
                                        ("g_12", "angle1-angle2"),
                                        ("g_22", "angle2-angle2"))):
        ax = fig.add_subplot(3, 3, 4 + pi)
        vals = rows[name].astype(float).reshape(len(k1), len(k2))
        lo, hi = np.quantile(vals, (0.1, 0.9))
        pc = ax.pcolormesh(k2, k1, vals, vmin=lo, vmax=hi, shading="nearest")
        fig.colorbar(pc, ax=ax)
        ax.set_title(f"metric {label} (t = {t_show:g})")
        ax.set_xticks([]); ax.set_yticks([])

    ax = fig.add_subplot(3, 3, 3)
    rtab = ratio["ratio"]
    ts = rtab["t"].astype(float)
    order = np.argsort(ts)
    ax.plot(ts[order], rtab["ratio_mean"].astype(float)[order], color="tab:blue")
    ax.fill_between(ts[order], rtab["ratio_q10"].astype(float)[order],
                    rtab["ratio_q90"].astype(float)[order], alpha=0.25,
                    color="tab:blue")
    ax.axhline(0.5, color="k", ls=":", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("angle-2 share of trace")
    ax.set_title("torus stretching over time")

    ax = fig.add_subplot(3, 3, 7)
    atab = dec["alignment"]
    for h, ls in zip(np.unique(atab["delay"].astype(float)), ("-", "--")):
        rows = rows_where(atab, delay=h)
        ts = rows["t"].astype(float)
        order = np.argsort(ts)
        ax.plot(ts[order], rows["align_th1"].astype(float)[order], "tab:blue",
                ls=ls, label=f"item 1, delay {h:g}")
        ax.plot(ts[order], rows["align_th2"].astype(float)[order], "tab:orange",
                ls=ls, label=f"item 2, delay {h:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("decoder alignment")
    ax.legend(frameon=False, fontsize=6)
    ax.set_title("go-cued decoder alignment")

    ax = fig.add_subplot(3, 3, 8)
    stab = sub["similarity"]
    t_i = np.unique(stab["t_i"].astype(float))
    img = np.array([[stab["similarity"][(stab["t_i"] == a) & (stab["t_j"] == b)]
                     .astype(float)[0] for b in t_i] for a in t_i])
    pc = ax.pcolormesh(t_i, t_i, img, vmin=0, vmax=1, shading="nearest")
    fig.colorbar(pc, ax=ax, label="subspace similarity")
    ax.set_xlabel("t")
    ax.set_ylabel("t")
    ax.set_title("2-PC subspace stability")

    ax = fig.add_subplot(3, 3, 9)
    ptab = prism["sides"]
    ts = np.unique(ptab["t"].astype(float))
    width = 0.25
    for axis, color in ((0, "tab:blue"), (1, "tab:orange"), (2, "tab:green")):
        rows = rows_where(ptab, axis=axis)
        order = np.argsort(rows["t"].astype(float))
        ax.bar(np.arange(len(ts)) + (axis - 1) * width,
               rows["side_length"].astype(float)[order], width=width,
               color=color, label=f"angle {axis + 1}")
    ax.set_xticks(np.arange(len(ts)))
    ax.set_xticklabels([f"t={t:g}" for t in ts])
    ax.set_ylabel("side length")
    ax.legend(frameon=False, fontsize=6)
    ax.set_title("3-torus arc-length prism")
    fig.tight_layout()
    return _save(fig, out_path)


def render_wm_supplementary(export_dir, out_path):
    """Delay-start curvature, wm gridlines, and the full-task similarity."""
    base = Path(export_dir)
    curv = load_curvature(base / "wm2_t2" / "curvature.json")
    grid = load_report(base / "wm2" / "gridlines.json", tables=("gridlines",))
    sub = load_report(base / "wm2" / "subspace_stability.json",
                      tables=("similarity",))

    fig, axes = plt.subplots(1, 3, figsize=(9.5, 2.8))
    ax = axes[0]
    K = np.where(curv["invalid"], np.nan, curv["K"])
    vmax = np.nanquantile(np.abs(K), 0.95)
    pc = ax.pcolormesh(curv["theta2"], curv["theta1"], K, cmap="RdBu_r",
                       vmin=-vmax, vmax=vmax, shading="nearest")
    fig.colorbar(pc, ax=ax, label="Gaussian curvature")
    ax.set_title(f"curvature at delay start (t = {curv['t']:.1f})")

    ax = axes[1]
    gtab = grid["gridlines"]
    ts = np.unique(gtab["t"].astype(float))
    for t, ls in zip(ts[:2], ("-", "--")):
        rows = rows_where(gtab, axis=0)
        tmask = rows["t"].astype(float) == t
        mu = rows["mu"].astype(float)[tmask]
        nrm = rows["norm_sqrt"].astype(float)[tmask]
        k = np.sum(np.diff(mu) < 0) + 1
        m = len(mu) // max(k, 1)
        ax.plot(mu[:m], nrm[:m], ls=ls, color="tab:blue", label=f"t = {t:g}")
    ax.set_xlabel("angle 1")
    ax.set_ylabel("normalized length")
    ax.legend(frameon=False)
    ax.set_title("torus gridlines")

    ax = axes[2]
    stab = sub["similarity"]
    t_i = np.unique(stab["t_i"].astype(float))
    img = np.array([[stab["similarity"][(stab["t_i"] == a) & (stab["t_j"] == b)]
                     .astype(float)[0] for b in t_i] for a in t_i])
    pc = ax.pcolormesh(t_i, t_i, img, vmin=0, vmax=1, shading="nearest")
    fig.colorbar(pc, ax=ax)
    ax.set_title("similarity across the whole task")
    fig.tight_layout()
    return _save(fig, out_path)


# ---------------------------------------------------------------------------
# Romo


def render_romo(export_dir, out_path):
    """Stable-rank expansion/collapse and the anti-aligned input directions."""
    rep = load_report(Path(export_dir) / "romo" / "stable_rank_trace.json",
                      tables=("srank",))
    tab = rep["srank"]
    fig, axes = plt.subplots(1, 2, figsize=(7, 2.6))
    for side, color, label in ((1, "tab:green", "first input larger"),
                               (-1, "tab:blue", "second input larger")):
        rows = rows_where(tab, side=side)
        ts = rows["t"].astype(float)
        order = np.argsort(ts)
        axes[0].plot(ts[order], rows["srank_mean"].astype(float)[order],
                     color=color, label=label)
        axes[0].fill_between(ts[order], rows["srank_q20"].astype(float)[order],
                             rows["srank_q80"].astype(float)[order],
                             color=color, alpha=0.2)
        axes[1].plot(ts[order], rows["offdiag_mean"].astype(float)[order],
                     color=color, label=label)
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("stable rank")
    axes[0].legend(frameon=False, fontsize=6)
    axes[0].set_title("dimensionality expands, then collapses")
    axes[1].axhline(-0.8, color="k", ls=":", lw=0.8)
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("normalized off-diagonal")
    axes[1].set_title("inputs anti-align at output")
    fig.tight_layout()
    return _save(fig, out_path)
