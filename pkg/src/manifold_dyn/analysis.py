"""Checkpoint-level analyses mirroring the paper's figure panels.

Every analysis is a pure function of (checkpoint, config, seed) returning an
AnalysisReport: named numeric tables plus pass/fail flags against declared
thresholds. Stochastic tasks are analyzed pathwise under the frozen
zero-noise realization, i.e. along the drift.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .checkpoint import Checkpoint
from .errors import ConfigError
from .geometry import SurfaceMesh, gaussian_curvature, geodesic_gridlines
from .numerics import Rng, pca, stable_rank, subspace_similarity, svd
from .tangent import tangent_grid, upper_triangle
from .tasks import (TaskSpec, _DEFAULTS, ei_state_mesh, make_task,
                    static_metric)

QUANTILES = (0.1, 0.9)  # default bands; the Romo trace uses (0.2, 0.8)


@dataclass
class AnalysisReport:
    analysis_id: str
    checkpoint_ref: str
    config: dict
    thresholds: dict
    passes: dict
    tables: dict = dc_field(default_factory=dict)  # name -> {column: list}
    extra_files: dict = dc_field(default_factory=dict)  # filename -> document

    @property
    def ok(self) -> bool:
        return all(self.passes.values())

    def save(self, out_dir, stem=None) -> list:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = stem or self.analysis_id
        doc = {
            "analysis_id": self.analysis_id,
            "checkpoint": self.checkpoint_ref,
            "config": _jsonable(self.config),
            "thresholds": _jsonable(self.thresholds),
            "pass": self.passes,
            "tables": {k: _jsonable(v) for k, v in self.tables.items()},
        }
        paths = [out_dir / f"{stem}.json"]
        with open(paths[0], "w") as fh:
            json.dump(doc, fh)
        for name, cols in self.tables.items():
            p = out_dir / f"{stem}_{name}.csv"
            with open(p, "w", newline="") as fh:
                writer = csv.writer(fh)
                keys = list(cols)
                writer.writerow(keys)
                for row in zip(*[cols[k] for k in keys]):
                    writer.writerow([repr(v) if isinstance(v, float) else v
                                     for v in row])
            paths.append(p)
        for fname, extra in self.extra_files.items():
            p = out_dir / fname
            with open(p, "w") as fh:
                json.dump(_jsonable(extra), fh)
            paths.append(p)
        return [str(p) for p in paths]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


ANALYSIS_DT = 0.01  # geometry-grade step, regardless of the training step


def task_from_checkpoint(ck: Checkpoint) -> TaskSpec:
    defaults = _DEFAULTS[ck.task_id]
    overrides = {k: v for k, v in ck.hyperparameters.items()
                 if k in defaults and not isinstance(defaults[k], tuple)}
    if "dt" in defaults:
        overrides["dt"] = ANALYSIS_DT
    return make_task(ck.task_id, overrides)


def _require_task(ck: Checkpoint, *task_ids):
    if ck.task_id not in task_ids:
        raise ConfigError(
            f"analysis requires a checkpoint of task {' or '.join(task_ids)}, "
            f"got {ck.task_id!r}")


def _grid_times(times, dt):
    return [round(float(t) / dt) * dt for t in times]


# ---------------------------------------------------------------------------
# context-task analyses


def _context_tangents(task, params, ctx, kappas, times):
    field = task.field(params)
    jac = task.jac(params)
    chart = task.chart(ctx)
    return tangent_grid(field, jac, chart, kappas, task.x0, times, task.dt)


def eigen_decay(ck: Checkpoint, t_grid=None, u_grid=None) -> AnalysisReport:
    """Normalized metric eigenvalues over time, per context.

    Normalization: per-time top eigenvalue at the relevant input's decision
    boundary (u_rel = 0, u_irr = 0) in the matching context. Eigenvalues are
    averaged over the irrelevant input with 10/90% quantile bands.
    """
    _require_task(ck, "context")
    task = task_from_checkpoint(ck)
    t_grid = _grid_times(t_grid if t_grid is not None
                         else [0.0, 0.2, 2.0, 5.0, 8.0, 10.0], task.dt)
    u_max = task.config["u_max"]
    u_grid = (np.asarray(u_grid, dtype=float) if u_grid is not None
              else np.linspace(-u_max, u_max, 5))
    params = ck.final_params
    cols = {"ctx": [], "t": [], "u_rel": [], "eig_index": [],
            "mean": [], "q10": [], "q90": []}
    passes = {}
    boundary_small = []
    for ctx in (1, 2):
        rel = ctx - 1
        pts = [np.zeros(2)]  # normalization reference at u = (0, 0)
        for ur in u_grid:
            for ui in u_grid:
                kap = np.zeros(2)
                kap[rel] = ur
                kap[1 - rel] = ui
                pts.append(kap)
        kappas = np.array(pts)
        times, xs, fs, As = _context_tangents(task, params, ctx, kappas, t_grid)
        for it, t in enumerate(times):
            J_ref = np.concatenate([fs[it, 0][:, None], As[it, 0]], axis=1)
            ref_vals = np.linalg.eigvalsh(J_ref.T @ J_ref)
            ref = max(ref_vals.max(), 1e-300)
            J = np.concatenate([fs[it, 1:][:, :, None], As[it, 1:]], axis=2)
            G = np.einsum("bni,bnj->bij", J, J)
            vals = np.linalg.eigvalsh(G)[:, ::-1] / ref  # descending
            vals = vals.reshape(len(u_grid), len(u_grid), 3)
            for iu, ur in enumerate(u_grid):
                for ei in range(3):
                    band = vals[iu, :, ei]
                    cols["ctx"].append(ctx)
                    cols["t"].append(float(t))
                    cols["u_rel"].append(float(ur))
                    cols["eig_index"].append(ei)
                    cols["mean"].append(float(band.mean()))
                    cols["q10"].append(float(np.quantile(band, QUANTILES[0])))
                    cols["q90"].append(float(np.quantile(band, QUANTILES[1])))
            if it == len(times) - 1:
                mid = np.argmin(np.abs(u_grid))  # boundary-adjacent u_rel
                boundary_small.append(vals[mid, :, 1:].mean(axis=0))
        # t = 0: exactly one nonzero eigenvalue (A(0) = 0)
        t0_vals = None
        if np.isclose(times[0], 0.0):
            J0 = np.concatenate([fs[0, 1:][:, :, None], As[0, 1:]], axis=2)
            G0 = np.einsum("bni,bnj->bij", J0, J0)
            t0_vals = np.linalg.eigvalsh(G0)[:, ::-1]
            passes[f"t0_single_nonzero_ctx{ctx}"] = bool(
                np.all(np.abs(t0_vals[:, 1:]) <= 1e-12 * np.maximum(t0_vals[:, :1], 1e-300)))
    small = np.array(boundary_small)
    passes["late_two_smallest_leq_0.1"] = bool(np.all(small <= 0.1))
    return AnalysisReport(
        analysis_id="eigen_decay", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"t_grid": t_grid, "u_grid": u_grid},
        thresholds={"late_two_smallest": 0.1},
        passes=passes, tables={"eigenvalues": cols})


def context_metric_ratio(ck: Checkpoint, t=None, u_grid=None) -> AnalysisReport:
    """G_irr,irr / G_rel,rel at the readout time near the decision boundary."""
    _require_task(ck, "context")
    task = task_from_checkpoint(ck)
    t = task.t_end if t is None else float(t)
    u_max = task.config["u_max"]
    u_grid = (np.asarray(u_grid, dtype=float) if u_grid is not None
              else np.linspace(-u_max, u_max, 5))
    params = ck.final_params
    cols = {"ctx": [], "u_irr": [], "g_rel": [], "g_irr": [], "ratio": []}
    worst = 0.0
    for ctx in (1, 2):
        rel = ctx - 1
        kappas = np.zeros((len(u_grid), 2))
        kappas[:, 1 - rel] = u_grid  # u_rel = 0: the decision boundary
        _, xs, fs, As = _context_tangents(task, params, ctx, kappas, [t])
        A = As[0]
        g_rel = np.einsum("bn,bn->b", A[:, :, rel], A[:, :, rel])
        g_irr = np.einsum("bn,bn->b", A[:, :, 1 - rel], A[:, :, 1 - rel])
        ratio = g_irr / np.maximum(g_rel, 1e-300)
        worst = max(worst, float(ratio.mean()))
        for i, ui in enumerate(u_grid):
            cols["ctx"].append(ctx)
            cols["u_irr"].append(float(ui))
            cols["g_rel"].append(float(g_rel[i]))
            cols["g_irr"].append(float(g_irr[i]))
            cols["ratio"].append(float(ratio[i]))
    return AnalysisReport(
        analysis_id="context_metric_ratio",
        checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"t": t, "u_grid": u_grid},
        thresholds={"mean_ratio_max": 0.2},
        passes={"irrelevant_compressed": bool(worst <= 0.2)},
        tables={"ratios": cols})


def selection_alignment(ck: Checkpoint, t_grid=None, u_point=(0.1, 0.1)) -> AnalysisReport:
    """|v1 . normalized tangent| where v1 is the top right singular vector
    of the weight update dW = W_final - W_init."""
    _require_task(ck, "context")
    task = task_from_checkpoint(ck)
    t_grid = _grid_times(t_grid if t_grid is not None
                         else [0.5, 2.0, 5.0, 8.0, 10.0], task.dt)
    dW = ck.final_params["W"] - ck.init_params["W"]
    _, _, v = svd(dW)
    v1 = v[:, 0]
    params = ck.final_params
    cols = {"ctx": [], "t": [], "vector": [], "alignment": []}
    late_ok = []
    rng = Rng(ck.seed, stream=31)
    rand_dir = rng.normal(size=task.n)
    rand_dir /= np.linalg.norm(rand_dir)
    for ctx in (1, 2):
        rel = ctx - 1
        kap = np.zeros(2)
        kap[rel], kap[1 - rel] = u_point
        times, xs, fs, As = _context_tangents(task, params, ctx, kap[None], t_grid)
        for it, t in enumerate(times):
            vecs = {"time": fs[it, 0],
                    "u_rel": As[it, 0][:, rel],
                    "u_irr": As[it, 0][:, 1 - rel]}
            aligns = {}
            for name, vec in vecs.items():
                nrm = np.linalg.norm(vec)
                align = float("nan") if nrm == 0 else float(abs(v1 @ vec / nrm))
                aligns[name] = align
                cols["ctx"].append(ctx)
                cols["t"].append(float(t))
                cols["vector"].append(name)
                cols["alignment"].append(align)
            cols["ctx"].append(ctx)
            cols["t"].append(float(t))
            cols["vector"].append("random_baseline")
            cols["alignment"].append(float(abs(v1 @ rand_dir)))
            if it == len(times) - 1:
                late_ok.append(aligns["u_rel"] > aligns["u_irr"])
    return AnalysisReport(
        analysis_id="selection_alignment",
        checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"t_grid": t_grid, "u_point": list(u_point)},
        thresholds={"late_relevant_exceeds_irrelevant": True},
        passes={"late_relevant_dominates": bool(all(late_ok))},
        tables={"alignment": cols})


def neuron_loadings(ck: Checkpoint, t=None, u_point=(0.1, 0.1)) -> AnalysisReport:
    """Per-neuron components of the normalized tangent vectors + stats."""
    _require_task(ck, "context")
    task = task_from_checkpoint(ck)
    t = task.t_end if t is None else float(t)
    params = ck.final_params
    cols = {"ctx": [], "neuron": [], "time_load": [], "rel_load": [], "irr_load": []}
    stats = {"ctx": [], "corr_time_rel": [], "corr_time_irr": [],
             "skew_max": [], "kurt_max": []}
    passes = {}
    for ctx in (1, 2):
        rel = ctx - 1
        kap = np.zeros(2)
        kap[rel], kap[1 - rel] = u_point
        _, xs, fs, As = _context_tangents(task, params, ctx, kap[None], [t])
        f = fs[0, 0] / max(np.linalg.norm(fs[0, 0]), 1e-300)
        a_rel = As[0, 0][:, rel] / max(np.linalg.norm(As[0, 0][:, rel]), 1e-300)
        a_irr = As[0, 0][:, 1 - rel] / max(np.linalg.norm(As[0, 0][:, 1 - rel]), 1e-300)
        for i in range(task.n):
            cols["ctx"].append(ctx)
            cols["neuron"].append(i)
            cols["time_load"].append(float(f[i]))
            cols["rel_load"].append(float(a_rel[i]))
            cols["irr_load"].append(float(a_irr[i]))
        c_tr = float(np.corrcoef(f, a_rel)[0, 1])
        c_ti = float(np.corrcoef(f, a_irr)[0, 1])

        def skew_kurt(v):
            z = (v - v.mean()) / max(v.std(), 1e-300)
            return float(np.mean(z**3)), float(np.mean(z**4) - 3.0)

        sk = [skew_kurt(v) for v in (f, a_rel, a_irr)]
        stats["ctx"].append(ctx)
        stats["corr_time_rel"].append(c_tr)
        stats["corr_time_irr"].append(c_ti)
        stats["skew_max"].append(max(abs(s) for s, _ in sk))
        stats["kurt_max"].append(max(abs(k) for _, k in sk))
        passes[f"time_rel_corr_dominates_ctx{ctx}"] = bool(abs(c_tr) > abs(c_ti))
    return AnalysisReport(
        analysis_id="neuron_loadings", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"t": t, "u_point": list(u_point)},
        thresholds={"gaussianity_moment_band": 1.0},
        passes=passes, tables={"loadings": cols, "stats": stats})


def output_sweep(ck: Checkpoint, u_fixed=0.2, sweep=None, t_grid=None) -> AnalysisReport:
    """Zero-noise outputs while sweeping the irrelevant input (Fig 4d-style)."""
    _require_task(ck, "context")
    task = task_from_checkpoint(ck)
    from .bptt import rnn_outputs

    u_max = task.config["u_max"]
    sweep = (np.asarray(sweep, dtype=float) if sweep is not None
             else np.linspace(-u_max, u_max, 9))
    t_grid = _grid_times(t_grid if t_grid is not None
                         else np.linspace(0.0, task.t_end, 26), task.dt)
    steps_at = [int(round(t / task.dt)) for t in t_grid]
    params = ck.final_params
    cols = {"ctx": [], "t": [], "u_irr": [], "y": []}
    spreads = []
    for ctx in (1, 2):
        rel = ctx - 1
        u = np.zeros((len(sweep), 2))
        u[:, rel] = u_fixed
        u[:, 1 - rel] = sweep
        trial = task.make_trial(u, np.full(len(sweep), ctx), None, None)
        ys = rnn_outputs(params, trial, steps_at)
        for it, t in enumerate(t_grid):
            for i, ui in enumerate(sweep):
                cols["ctx"].append(ctx)
                cols["t"].append(float(t))
                cols["u_irr"].append(float(ui))
                cols["y"].append(float(ys[it, i, 0]))
        spreads.append(float(ys[-1, :, 0].max() - ys[-1, :, 0].min()))
    return AnalysisReport(
        analysis_id="output_sweep", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"u_fixed": u_fixed, "sweep": sweep, "t_grid": t_grid},
        thresholds={"final_spread_max": 0.05},
        passes={"output_invariant_to_irrelevant": bool(max(spreads) <= 0.05)},
        tables={"outputs": cols, "spread": {"ctx": [1, 2], "spread": spreads}})


def weight_spectrum(ck: Checkpoint) -> AnalysisReport:
    """Singular values of W and dW, W eigenvalues, update participation."""
    from .numerics import participation_ratio

    W = ck.final_params["W"]
    dW = W - ck.init_params["W"]
    _, sw, _ = svd(W)
    _, sd, _ = svd(dW)
    eigs = np.linalg.eigvals(W)
    pr = participation_ratio(sd)
    n = W.shape[0]
    return AnalysisReport(
        analysis_id="weight_spectrum", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={}, thresholds={"update_participation_max": n / 4},
        passes={"updates_low_rank": bool(pr <= n / 4 or np.allclose(sd, 0))},
        tables={
            "singular_values": {"index": list(range(n)),
                                "W": sw.tolist(), "dW": sd.tolist()},
            "w_eigenvalues": {"re": eigs.real.tolist(), "im": eigs.imag.tolist()},
            "summary": {"participation_ratio": [pr]},
        })


def gridlines(ck: Checkpoint, t_grid=None, lines_per_axis=5, steps=64) -> AnalysisReport:
    """Geodesic gridlines: static circle, context planes, or the wm2 torus."""
    _require_task(ck, "context", "static_circle", "wm2")
    task = task_from_checkpoint(ck)
    cols = {"variant": [], "t": [], "axis": [], "fixed": [], "mu": [],
            "sqrt_cum": [], "sq_cum": [], "norm_sqrt": [], "norm_sq": []}

    def add_tables(tag, t_val, tables):
        for tab in tables:
            for i in range(len(tab.mu)):
                cols["variant"].append(tag)
                cols["t"].append(t_val)
                cols["axis"].append(tab.axis)
                cols["fixed"].append(json.dumps({str(k): float(v)
                                                 for k, v in tab.fixed.items()}))
                cols["mu"].append(float(tab.mu[i]))
                cols["sqrt_cum"].append(float(tab.sqrt_cum[i]))
                cols["sq_cum"].append(float(tab.sq_cum[i]))
                cols["norm_sqrt"].append(float(tab.norm_sqrt[i]))
                cols["norm_sq"].append(float(tab.norm_sq[i]))

    passes = {}
    if ck.task_id == "static_circle":
        for tag, params in (("trained", ck.final_params), ("untrained", ck.init_params)):
            sampler = lambda kap, axis, p=params: static_metric(kap[:, 0], p)
            tabs = geodesic_gridlines(sampler, [0.0], [[0.0, 2 * np.pi]], 1,
                                      steps=max(steps, 200))
            add_tables(tag, 0.0, tabs)
        share_tr = boundary_length_share(ck.final_params)
        share_un = boundary_length_share(ck.init_params)
        uniform = 1.6 / (2 * np.pi)
        passes["trained_boundary_concentration"] = bool(share_tr >= 1.5 * uniform)
        passes["untrained_lacks_concentration"] = bool(share_un < 1.5 * uniform)
        thresholds = {"boundary_share_min": 1.5 * uniform}
    elif ck.task_id == "wm2":
        task_wm = task_from_checkpoint(ck)
        windows = task_wm.readout_windows()
        if t_grid is None:
            t_grid = [0.5 * (task_wm.input_end + windows[0][0]),
                      windows[-1][1] - 0.2]
        t_grid = _grid_times(t_grid, task_wm.dt)
        params = ck.final_params
        field, jac, chart = (task_wm.field(params), task_wm.jac(params),
                             task_wm.chart())
        for t in t_grid:
            def sampler(kaps, axis, _t=t):
                _, _, _, As = tangent_grid(field, jac, chart, kaps,
                                           task_wm.x0, [_t], task_wm.dt)
                a = As[0][:, :, axis]
                return np.einsum("bn,bn->b", a, a)

            tabs = geodesic_gridlines(sampler, [np.pi, np.pi],
                                      [[0, 2 * np.pi]] * 2,
                                      min(lines_per_axis, 3), steps=steps)
            add_tables("wm2", float(t), tabs)
        thresholds = {}
    else:
        t_grid = _grid_times(t_grid if t_grid is not None else [0.2, task.t_end],
                             task.dt)
        u_max = task.config["u_max"]
        params = ck.final_params
        for ctx in (1, 2):
            field, jac, chart = (task.field(params), task.jac(params),
                                 task.chart(ctx))
            for t in t_grid:
                def sampler(kaps, axis, _t=t):
                    _, _, _, As = tangent_grid(field, jac, chart, kaps,
                                               task.x0, [_t], task.dt)
                    a = As[0][:, :, axis]
                    return np.einsum("bn,bn->b", a, a)

                tabs = geodesic_gridlines(sampler, [0.0, 0.0],
                                          [[-u_max, u_max]] * 2,
                                          lines_per_axis, steps=steps)
                add_tables(f"ctx{ctx}", float(t), tabs)
        thresholds = {}
    return AnalysisReport(
        analysis_id="gridlines", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"lines_per_axis": lines_per_axis, "steps": steps},
        thresholds=thresholds, passes=passes, tables={"gridlines": cols})


def boundary_length_share(params, half_width=0.4) -> float:
    """Fraction of the circle's metric length within +-0.4 rad of {0, pi}."""
    from .geometry import coordinate_arclength

    arc = coordinate_arclength(lambda mu: static_metric(mu, params),
                               [0.0, 2 * np.pi], 720)
    total = arc.total

    def cum(v):
        return float(np.interp(v % (2 * np.pi), arc.mu, arc.sqrt_cum))

    share = 0.0
    for c in (0.0, np.pi):
        lo, hi = c - half_width, c + half_width
        if lo < 0:
            share += (arc.total - cum(lo % (2 * np.pi))) + cum(hi)
        else:
            share += cum(hi) - cum(lo)
    return share / total


# ---------------------------------------------------------------------------
# E-I analyses


def ei_metric_trace(ck_or_task, t_grid=None, u_grid=None) -> AnalysisReport:
    """Metric blocks over time for the E-I line-attractor network."""
    task = (ck_or_task if isinstance(ck_or_task, TaskSpec)
            else task_from_checkpoint(ck_or_task))
    if task.task_id != "ei_decision":
        raise ConfigError("ei_metric_trace runs on the ei_decision task")
    params = task.fixed_params
    t_grid = _grid_times(t_grid if t_grid is not None
                         else [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, task.t_end],
                         task.dt)
    u_grid = (np.asarray(u_grid, dtype=float) if u_grid is not None
              else np.linspace(0.05, 0.95, 7))
    times, xs, fs, As = tangent_grid(task.field(params), task.jac(params),
                                     task.chart(), u_grid[:, None], task.x0,
                                     t_grid, task.dt)
    cols = {"t": [], "u": [], "g_tt": [], "g_tu": [], "g_uu": []}
    for it, t in enumerate(times):
        for iu, u in enumerate(u_grid):
            f = fs[it, iu]
            a = As[it, iu][:, 0]
            cols["t"].append(float(t))
            cols["u"].append(float(u))
            cols["g_tt"].append(float(f @ f))
            cols["g_tu"].append(float(f @ a))
            cols["g_uu"].append(float(a @ a))
    arr = {k: np.array(v) for k, v in cols.items()}
    at0 = arr["t"] == 0.0
    at_end = arr["t"] == times[-1]
    passes = {
        "t0_offdiagonal_exact_zero": bool(np.all(arr["g_tu"][at0] == 0.0)
                                          and np.all(arr["g_uu"][at0] == 0.0)),
        "steady_state_time_direction_dead": bool(
            np.all(arr["g_tt"][at_end] <= 1e-6 * arr["g_uu"][at_end])),
        "steady_state_input_direction_alive": bool(np.all(arr["g_uu"][at_end] > 0)),
    }
    return AnalysisReport(
        analysis_id="ei_metric", checkpoint_ref="ei_decision:fixed",
        config={"t_grid": t_grid, "u_grid": u_grid},
        thresholds={"gtt_over_guu_max": 1e-6},
        passes=passes, tables={"metric": cols})


def ei_mesh_export(task: TaskSpec) -> dict:
    """The u x time x unit state mesh (S2.2's 200 x 100 x 3)."""
    us, times, states = ei_state_mesh(task)
    return {
        "u_grid": us.tolist(),
        "t_grid": [float(t) for t in times],
        "shape": list(states.shape),
        "states": states.reshape(-1).tolist(),
    }


# ---------------------------------------------------------------------------
# working-memory analyses


def _wm_torus_pass(task, params, times, grid, h=None):
    axes = [np.arange(grid) * (2 * np.pi / grid)] * task.items
    mesh = np.meshgrid(*axes, indexing="ij")
    thetas = np.column_stack([g.ravel() for g in mesh])
    times, xs, fs, As = tangent_grid(task.field(params), task.jac(params),
                                     task.chart(h), thetas, task.x0, times,
                                     task.dt)
    return thetas, times, xs, fs, As


def warp_ratio(ck: Checkpoint, t_grid=None, grid=12, h=None) -> AnalysisReport:
    """Mean G_th2th2 / (G_th1th1 + G_th2th2) over the torus, with bands."""
    _require_task(ck, "wm2")
    task = task_from_checkpoint(ck)
    windows = task.readout_windows(h)
    if t_grid is None:
        t_grid = np.concatenate([
            np.linspace(0.5, windows[0][0] - 0.2, 6),
            [0.5 * sum(windows[0]), 0.5 * sum(windows[1])],
        ])
    t_grid = _grid_times(t_grid, task.dt)
    thetas, times, xs, fs, As = _wm_torus_pass(task, ck.final_params,
                                               t_grid, grid, h)
    cols = {"t": [], "ratio_mean": [], "ratio_q10": [], "ratio_q90": [],
            "g11_mean": [], "g22_mean": [], "g12_mean": []}
    ratios_at = {}
    for it, t in enumerate(times):
        A = As[it]
        g11 = np.einsum("bn,bn->b", A[:, :, 0], A[:, :, 0])
        g22 = np.einsum("bn,bn->b", A[:, :, 1], A[:, :, 1])
        g12 = np.einsum("bn,bn->b", A[:, :, 0], A[:, :, 1])
        ratio = g22 / np.maximum(g11 + g22, 1e-300)
        ratios_at[float(t)] = float(ratio.mean())
        cols["t"].append(float(t))
        cols["ratio_mean"].append(float(ratio.mean()))
        cols["ratio_q10"].append(float(np.quantile(ratio, QUANTILES[0])))
        cols["ratio_q90"].append(float(np.quantile(ratio, QUANTILES[1])))
        cols["g11_mean"].append(float(g11.mean()))
        cols["g22_mean"].append(float(g22.mean()))
        cols["g12_mean"].append(float(g12.mean()))
    r1 = ratios_at[_grid_times([0.5 * sum(windows[0])], task.dt)[0]]
    r2 = ratios_at[_grid_times([0.5 * sum(windows[1])], task.dt)[0]]
    passes = {"crosses_half_between_readouts": bool(r1 < 0.5 < r2)}
    return AnalysisReport(
        analysis_id="warp_ratio", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"t_grid": [float(t) for t in t_grid], "grid": grid},
        thresholds={"readout1_below": 0.5, "readout2_above": 0.5},
        passes=passes, tables={"ratio": cols})


def decoder_alignment(ck: Checkpoint, t_grid=None, grid=8,
                      delays=(2.0, 3.0)) -> AnalysisReport:
    """|D diag(phi'(x)) d_thi x| per item over the torus, for two delays.

    The dominance switch between items must track the go-pulse time, not
    absolute time.
    """
    _require_task(ck, "wm2")
    task = task_from_checkpoint(ck)
    params = ck.final_params
    D = params["D"]
    cols = {"delay": [], "t": [], "align_th1": [], "align_th2": []}
    switch_times = {}
    passes = {}
    for h in delays:
        windows = task.readout_windows(h)
        t_end = windows[-1][1]
        if t_grid is None:
            ts = np.arange(task.input_end + 0.2, t_end - 1e-9, 0.1)
        else:
            ts = np.asarray(t_grid, dtype=float)
        ts = _grid_times(ts, task.dt)
        thetas, times, xs, fs, As = _wm_torus_pass(task, params, ts, grid, h)
        a1m, a2m = [], []
        for it, t in enumerate(times):
            dphi = 1.0 - np.tanh(xs[it]) ** 2
            a1 = np.linalg.norm((dphi * As[it][:, :, 0]) @ D.T, axis=-1)
            a2 = np.linalg.norm((dphi * As[it][:, :, 1]) @ D.T, axis=-1)
            cols["delay"].append(float(h))
            cols["t"].append(float(t))
            cols["align_th1"].append(float(a1.mean()))
            cols["align_th2"].append(float(a2.mean()))
            a1m.append(a1.mean())
            a2m.append(a2.mean())
        a1m, a2m = np.array(a1m), np.array(a2m)
        tarr = np.array(times)
        # dominance within each readout window
        w1 = (tarr >= windows[0][0]) & (tarr < windows[0][1])
        w2 = (tarr >= windows[1][0]) & (tarr < windows[1][1])
        passes[f"item1_dominates_first_readout_h{h}"] = bool(
            np.mean(a1m[w1] > a2m[w1]) > 0.5)
        passes[f"item2_dominates_second_readout_h{h}"] = bool(
            np.mean(a2m[w2] > a1m[w2]) > 0.5)
        flip = np.where((a2m[1:] > a1m[1:]) & (a1m[:-1] >= a2m[:-1]))[0]
        switch_times[h] = float(tarr[flip[-1] + 1]) if len(flip) else float("nan")
    # switch must move with the go pulse: compare switch-time difference to
    # the delay difference
    hs = sorted(switch_times)
    expected = hs[1] - hs[0]
    observed = switch_times[hs[1]] - switch_times[hs[0]]
    passes["switch_tracks_go_pulse"] = bool(abs(observed - expected) <= 0.5)
    return AnalysisReport(
        analysis_id="decoder_alignment", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"grid": grid, "delays": list(delays)},
        thresholds={"switch_shift_tolerance": 0.5},
        passes=passes,
        tables={"alignment": cols,
                "switch": {"delay": hs,
                           "switch_time": [switch_times[h] for h in hs]}})


def subspace_stability(ck: Checkpoint, t_grid=None, grid=12, h=None) -> AnalysisReport:
    """Pairwise similarity of the 2-PC subspaces across time points."""
    _require_task(ck, "wm2", "wm3")
    task = task_from_checkpoint(ck)
    h_val = task.config["delay_analysis"] if h is None else float(h)
    windows = task.readout_windows(h_val)
    delay_lo = task.input_end + 0.3
    delay_hi = windows[0][0] - 0.2
    if t_grid is None:
        t_grid = np.concatenate([
            np.linspace(0.3, task.input_end, 4),
            np.linspace(delay_lo, delay_hi, 5),
            [0.5 * sum(w) for w in windows],
        ])
    t_grid = _grid_times(t_grid, task.dt)
    thetas, times, xs, _, _ = _wm_torus_pass(task, ck.final_params, t_grid,
                                             grid, h_val)
    bases = []
    for it in range(len(times)):
        comps, _, _ = pca(xs[it], 2)
        bases.append(comps)
    k = len(times)
    sim = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            sim[i, j] = subspace_similarity(bases[i], bases[j])
    tarr = np.array(times)
    in_delay = (tarr >= delay_lo - 1e-9) & (tarr <= delay_hi + 1e-9)
    delay_idx = np.where(in_delay)[0]
    delay_min = float(sim[np.ix_(delay_idx, delay_idx)].min())
    passes = {
        "diagonal_unity": bool(np.allclose(np.diag(sim), 1.0, atol=1e-9)),
        "symmetric": bool(np.allclose(sim, sim.T, atol=1e-9)),
        "delay_similarity_geq_0.9": bool(delay_min >= 0.9),
    }
    flat = {"t_i": [], "t_j": [], "similarity": []}
    for i in range(k):
        for j in range(k):
            flat["t_i"].append(float(tarr[i]))
            flat["t_j"].append(float(tarr[j]))
            flat["similarity"].append(float(sim[i, j]))
    return AnalysisReport(
        analysis_id="subspace_stability", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"t_grid": [float(t) for t in t_grid], "grid": grid, "h": h_val},
        thresholds={"delay_min_similarity": 0.9},
        passes=passes,
        tables={"similarity": flat,
                "delay_summary": {"delay_min": [delay_min]}})


def torus_injectivity(ck: Checkpoint, t=None, grid=64, h=None) -> AnalysisReport:
    """Minimum pairwise distance on the angle grid + wrap-around closure."""
    _require_task(ck, "wm2")
    task = task_from_checkpoint(ck)
    h_val = task.config["delay_analysis"] if h is None else float(h)
    windows = task.readout_windows(h_val)
    t_val = 0.5 * (task.input_end + windows[0][0]) if t is None else float(t)
    t_val = _grid_times([t_val], task.dt)[0]
    params = ck.final_params
    thetas, times, xs, _, _ = _wm_torus_pass(task, params, [t_val], grid, h_val)
    X = xs[0]
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.fill_diagonal(d2, np.inf)
    min_dist = float(np.sqrt(max(d2.min(), 0.0)))
    # closure residual: angles 0 and 2 pi give identical inputs
    probe = np.array([[0.0, 1.0], [2 * np.pi, 1.0]])
    _, xs2, _, _ = tangent_grid(task.field(params), None, task.chart(h_val),
                                probe, task.x0, [t_val], task.dt)
    closure = float(np.linalg.norm(xs2[0, 0] - xs2[0, 1]))
    # solver tolerance: halve dt on a probe subset
    _, xs_half, _, _ = tangent_grid(task.field(params), None, task.chart(h_val),
                                    thetas[:8], task.x0, [t_val], task.dt / 2)
    solver_tol = float(np.linalg.norm(xs_half[0] - xs[0][:8], axis=1).max())
    passes = {
        "closure_within_1e-6": bool(closure <= 1e-6),
        "min_distance_positive": bool(min_dist > 0),
        "min_distance_above_10x_solver_tol": bool(min_dist > 10 * solver_tol),
    }
    return AnalysisReport(
        analysis_id="torus_injectivity", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"t": t_val, "grid": grid, "h": h_val},
        thresholds={"min_distance_over_tol": 10.0},
        passes=passes,
        tables={"summary": {"min_distance": [min_dist],
                            "solver_tol": [solver_tol],
                            "closure_residual": [closure]}})


def arclength_prism(ck: Checkpoint, t_grid=None, reference=None,
                    line_steps=16, avg_grid=3, h=None) -> AnalysisReport:
    """Per-axis arc lengths from a reference angle on the wm3 hyper-torus."""
    _require_task(ck, "wm3")
    task = task_from_checkpoint(ck)
    items = task.items
    h_val = task.config["delay_analysis"] if h is None else float(h)
    windows = task.readout_windows(h_val)
    if t_grid is None:
        t_grid = [0.5 * sum(w) for w in windows]
    t_grid = _grid_times(t_grid, task.dt)
    reference = (np.full(items, np.pi) if reference is None
                 else np.asarray(reference, dtype=float))
    params = ck.final_params
    field, jac, chart = task.field(params), task.jac(params), task.chart(h_val)

    mu = np.linspace(0, 2 * np.pi, 2 * line_steps + 1)
    others_vals = np.arange(avg_grid) * (2 * np.pi / avg_grid)
    # assemble every (axis, other-combo, mu) chart point in one batch
    pts = []
    index = []
    for axis in range(items):
        others = [j for j in range(items) if j != axis]
        combos = np.meshgrid(*[others_vals] * len(others), indexing="ij")
        combos = np.column_stack([c.ravel() for c in combos])
        for ci, combo in enumerate(combos):
            for mi, m in enumerate(mu):
                kap = np.empty(items)
                kap[axis] = m
                for j, val in zip(others, combo):
                    kap[j] = val
                index.append((axis, ci, mi))
                pts.append(kap)
    pts = np.array(pts)
    times, xs, fs, As = tangent_grid(field, jac, chart, pts, task.x0, t_grid,
                                     task.dt)
    n_combos = len(combos)
    cols = {"t": [], "axis": [], "L_left": [], "L_right": [], "side_length": []}
    grid_cols = {"t": [], "axis": [], "mu": [], "norm_cum": []}
    side_by_t = {}
    for it, t in enumerate(times):
        A = As[it]
        g_diag = np.empty(len(pts))
        for p in range(len(pts)):
            axis = index[p][0]
            a = A[p][:, axis]
            g_diag[p] = a @ a
        g_diag = g_diag.reshape(items, n_combos, len(mu))
        dmu = mu[1] - mu[0]
        sides = []
        for axis in range(items):
            g_mean = g_diag[axis].mean(axis=0)  # average over other angles
            seg = 0.5 * (g_mean[1:] + g_mean[:-1]) * dmu
            cum = np.concatenate([[0.0], np.cumsum(seg)])
            half = line_steps
            L_left = float(cum[half] - cum[0])
            L_right = float(cum[-1] - cum[half])
            cols["t"].append(float(t))
            cols["axis"].append(axis)
            cols["L_left"].append(L_left)
            cols["L_right"].append(L_right)
            cols["side_length"].append(L_left + L_right)
            sides.append(L_left + L_right)
            total = cum[-1] if cum[-1] > 0 else 1.0
            for mi, m in enumerate(mu):
                grid_cols["t"].append(float(t))
                grid_cols["axis"].append(axis)
                grid_cols["mu"].append(float(m))
                grid_cols["norm_cum"].append(float(cum[mi] / total))
        side_by_t[float(t)] = sides
    passes = {}
    for i, (t, sides) in enumerate(sorted(side_by_t.items())[:items]):
        if i < items:
            passes[f"item{i + 1}_longest_during_its_readout"] = bool(
                int(np.argmax(sides)) == i)
    return AnalysisReport(
        analysis_id="arclength_prism", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"t_grid": [float(t) for t in t_grid],
                "reference": reference.tolist(), "avg_grid": avg_grid},
        thresholds={},
        passes=passes, tables={"sides": cols, "gridlines": grid_cols})


# ---------------------------------------------------------------------------
# Romo analyses


def stable_rank_trace(ck: Checkpoint, t_grid=None, grid=9) -> AnalysisReport:
    """sRank of the input-block metric per submanifold sign(u1 - u2)."""
    _require_task(ck, "romo")
    task = task_from_checkpoint(ck)
    cfg = task.config
    if t_grid is None:
        t_grid = np.arange(0.25, task.t_end + 1e-9, 0.25)
    t_grid = _grid_times(t_grid, task.dt)
    vals = np.linspace(cfg["u_lo"] + 0.02, cfg["u_hi"] - 0.02, grid)
    u1, u2 = np.meshgrid(vals, vals, indexing="ij")
    keep = np.abs(u1 - u2) >= 0.05
    kappas = np.column_stack([u1[keep], u2[keep]])
    side = np.sign(kappas[:, 0] - kappas[:, 1])
    params = ck.final_params
    times, xs, fs, As = tangent_grid(task.field(params), task.jac(params),
                                     task.chart(), kappas, task.x0, t_grid,
                                     task.dt)
    cols = {"t": [], "side": [], "srank_mean": [], "srank_q20": [],
            "srank_q80": [], "offdiag_mean": []}
    delay_max = {1.0: -np.inf, -1.0: -np.inf}
    out_min = {1.0: np.inf, -1.0: np.inf}
    out_offdiag = {1.0: np.inf, -1.0: np.inf}
    delay_window = (cfg["pulse2"][1] + 0.5, cfg["t1"])
    out_window = (cfg["t2"], cfg["t3"])
    for it, t in enumerate(times):
        A = As[it]
        g11 = np.einsum("bn,bn->b", A[:, :, 0], A[:, :, 0])
        g22 = np.einsum("bn,bn->b", A[:, :, 1], A[:, :, 1])
        g12 = np.einsum("bn,bn->b", A[:, :, 0], A[:, :, 1])
        tr = g11 + g22
        disc = np.sqrt(np.maximum(0.25 * (g11 - g22) ** 2 + g12**2, 0.0))
        lam1 = 0.5 * tr + disc
        srank = np.where(lam1 > 0, tr / np.maximum(lam1, 1e-300), 0.0)
        offd = g12 / np.maximum(np.sqrt(g11 * g22), 1e-300)
        for s in (1.0, -1.0):
            mask = side == s
            sr = srank[mask]
            od = float(offd[mask].mean())
            cols["t"].append(float(t))
            cols["side"].append(int(s))
            cols["srank_mean"].append(float(sr.mean()))
            cols["srank_q20"].append(float(np.quantile(sr, 0.2)))
            cols["srank_q80"].append(float(np.quantile(sr, 0.8)))
            cols["offdiag_mean"].append(od)
            if delay_window[0] <= t <= delay_window[1]:
                delay_max[s] = max(delay_max[s], float(sr.mean()))
            if out_window[0] <= t <= out_window[1]:
                out_min[s] = min(out_min[s], float(sr.mean()))
                out_offdiag[s] = min(out_offdiag[s], od)
    passes = {
        "delay_expansion_srank_geq_1.5": bool(min(delay_max.values()) >= 1.5),
        "output_collapse_srank_leq_1.3": bool(max(out_min.values()) <= 1.3),
        "output_offdiag_leq_-0.8": bool(max(out_offdiag.values()) <= -0.8),
    }
    return AnalysisReport(
        analysis_id="stable_rank_trace", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"t_grid": [float(t) for t in t_grid], "grid": grid},
        thresholds={"delay_max_min": 1.5, "output_min_max": 1.3,
                    "output_offdiag_max": -0.8},
        passes=passes, tables={"srank": cols})


# ---------------------------------------------------------------------------
# dimensionality probe (all tasks)


PROBE_WINDOWS = {
    # task -> (t_window, label). kappa windows default to the chart box.
    "ei_decision": ((30.0, 50.0), "steady state"),
    "context": ((8.0, 10.0), "readout approach"),
    "wm2": ((3.5, 4.5), "delay"),
    "wm3": ((4.5, 5.5), "delay"),
    "romo": ((2.75, 4.0), "delay"),
}


def dimensionality_probe(ck_or_task, seed: int = 0, samples: int = 60,
                         t_window=None, kappa_window=None, variant=None,
                         threshold: float = 1e-3) -> AnalysisReport:
    """Local PCA rank of state samples in a (t, kappa) ball.

    Ball radius is 5% of each declared coordinate range (the probe window
    for t, the chart box for kappa), centered at the window midpoints.
    Reports the count of singular values above `threshold` of the largest;
    the count must not exceed m + 1.
    """
    task = (ck_or_task if isinstance(ck_or_task, TaskSpec)
            else task_from_checkpoint(ck_or_task))
    params = (task.fixed_params if task.task_id == "ei_decision"
              else ck_or_task.final_params)
    if task.task_id == "static_circle":
        raise ConfigError("dimensionality probe applies to the dynamical tasks")
    t_window = t_window or PROBE_WINDOWS[task.task_id][0]
    variants = ([1, 2] if task.task_id == "context" else [None]) \
        if variant is None else [variant]
    rng = Rng(seed, stream=101)
    cols = {"variant": [], "sv_index": [], "sv_rel": []}
    ranks = {}
    for var in variants:
        chart = task.chart(var) if var is not None else task.chart()
        box = np.asarray(kappa_window if kappa_window is not None else chart.box,
                         dtype=float)
        t_lo, t_hi = t_window
        rt = 0.05 * (t_hi - t_lo)
        rk = 0.05 * (box[:, 1] - box[:, 0])
        t0 = 0.5 * (t_lo + t_hi)
        k0 = 0.5 * (box[:, 0] + box[:, 1])
        ts = t0 + rng.uniform(-rt, rt, size=samples)
        ts = np.round(ts / task.dt) * task.dt
        kaps = k0 + rng.uniform(-1, 1, size=(samples, task.m)) * rk
        uniq = sorted(set(float(t) for t in ts))
        _, xs, _, _ = tangent_grid(task.field(params), None, chart, kaps,
                                   task.x0, uniq, task.dt)
        pos = {t: i for i, t in enumerate(uniq)}
        X = np.array([xs[pos[float(t)], i] for i, t in enumerate(ts)])
        X = X - X.mean(axis=0)
        svals = np.linalg.svd(X, compute_uv=False)
        rel = svals / max(svals[0], 1e-300)
        rank = int(np.sum(rel > threshold))
        key = f"ctx{var}" if var is not None else "all"
        ranks[key] = rank
        for i, rv in enumerate(rel[: task.m + 4]):
            cols["variant"].append(key)
            cols["sv_index"].append(i)
            cols["sv_rel"].append(float(rv))
    limit = task.m + 1
    passes = {f"rank_{k}_leq_{limit}": bool(r <= limit) for k, r in ranks.items()}
    ref = ("fixed" if task.task_id == "ei_decision"
           else f"{ck_or_task.task_id}:{ck_or_task.seed}")
    return AnalysisReport(
        analysis_id="dimensionality", checkpoint_ref=ref,
        config={"t_window": list(t_window), "samples": samples,
                "threshold": threshold, "seed": seed},
        thresholds={"rank_max": limit, "sv_threshold": threshold},
        passes=passes,
        tables={"spectrum": cols,
                "rank": {"variant": list(ranks), "rank": list(ranks.values())}})


def metric_field(ck: Checkpoint, t_grid=None, grid=16, h=None) -> AnalysisReport:
    """Full (m+1)x(m+1) metric sampled over the chart, per time point.

    For wm tasks the chart grid covers the torus; for the context task a
    (u1, u2) lattice per context. The raw upper-triangle field is also
    written in the axes+values export format.
    """
    _require_task(ck, "context", "wm2", "wm3")
    task = task_from_checkpoint(ck)
    params = ck.final_params
    tri_names = None
    extra = {}
    cols = None
    if ck.task_id in ("wm2", "wm3"):
        t_grid = _grid_times(t_grid if t_grid is not None
                             else [task.input_end, task.readout_windows(h)[0][0]],
                             task.dt)
        thetas, times, xs, fs, As = _wm_torus_pass(task, params, t_grid, grid, h)
        variants = [("wm", thetas, times, fs, As)]
        axes = [np.arange(grid) * (2 * np.pi / grid)] * task.m
    else:
        u_max = task.config["u_max"]
        t_grid = _grid_times(t_grid if t_grid is not None else [0.2, task.t_end],
                             task.dt)
        ax = np.linspace(-u_max, u_max, grid)
        U1, U2 = np.meshgrid(ax, ax, indexing="ij")
        kappas = np.column_stack([U1.ravel(), U2.ravel()])
        variants = []
        for ctx in (1, 2):
            times, xs, fs, As = _context_tangents(task, params, ctx, kappas,
                                                  t_grid)
            variants.append((f"ctx{ctx}", kappas, times, fs, As))
        axes = [ax, ax]
    m = task.m
    names = ["t"] + [f"k{i + 1}" for i in range(m)]
    tri_names = [f"g_{a}{b}" for a in range(m + 1) for b in range(a, m + 1)]
    cols = {"variant": [], "time": []}
    for nm in names[1:]:
        cols[nm] = []
    for nm in tri_names:
        cols[nm] = []
    for tag, pts, times, fs, As in variants:
        G_all = np.empty((len(times), len(pts), m + 1, m + 1))
        for it in range(len(times)):
            J = np.concatenate([fs[it][:, :, None], As[it]], axis=2)
            G_all[it] = np.einsum("bni,bnj->bij", J, J)
            for p in range(len(pts)):
                cols["variant"].append(tag)
                cols["time"].append(float(times[it]))
                for i in range(m):
                    cols[f"k{i + 1}"].append(float(pts[p][i]))
                idx = 0
                for a in range(m + 1):
                    for b in range(a, m + 1):
                        cols[tri_names[idx]].append(float(G_all[it, p, a, b]))
                        idx += 1
        shaped = G_all.reshape((len(times),) + tuple(len(a) for a in axes)
                               + (m + 1, m + 1))
        extra[f"metric_field_raw_{tag}.json"] = {
            "schema_version": 1,
            "m": m,
            "t_grid": [float(t) for t in times],
            "kappa_grid": [[float(v) for v in a] for a in axes],
            "entry_order": "upper triangle, row-major over (t, kappa_1, ..)",
            "values": upper_triangle(shaped).reshape(
                -1, (m + 1) * (m + 2) // 2).tolist(),
        }
    return AnalysisReport(
        analysis_id="metric_field", checkpoint_ref=f"{ck.task_id}:{ck.seed}",
        config={"t_grid": [float(t) for t in t_grid], "grid": grid},
        thresholds={}, passes={}, tables={"metric": cols}, extra_files=extra)


ANALYSES = {
    "metric_field": metric_field,
    "eigen_decay": eigen_decay,
    "context_metric_ratio": context_metric_ratio,
    "selection_alignment": selection_alignment,
    "neuron_loadings": neuron_loadings,
    "output_sweep": output_sweep,
    "weight_spectrum": weight_spectrum,
    "gridlines": gridlines,
    "ei_metric": ei_metric_trace,
    "warp_ratio": warp_ratio,
    "decoder_alignment": decoder_alignment,
    "subspace_stability": subspace_stability,
    "torus_injectivity": torus_injectivity,
    "arclength_prism": arclength_prism,
    "stable_rank_trace": stable_rank_trace,
    "dimensionality": dimensionality_probe,
}
