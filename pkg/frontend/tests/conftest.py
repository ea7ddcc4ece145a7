"""Synthetic export fixtures matching the producer's JSON schemas.

Generated from scratch so the rendering tests run without the producing
package installed (the whole point of the file-level contract).
"""

import json
from pathlib import Path

import numpy as np
import pytest


def report_doc(analysis_id, tables, passes=None):
    return {
        "analysis_id": analysis_id,
        "checkpoint": "synthetic:0",
        "config": {},
        "thresholds": {},
        "pass": passes or {},
        "tables": tables,
    }


def write(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc))


def synth_gridlines(variants, axes=(0, 1), ts=(0.2, 10.0), n=17):
    cols = {k: [] for k in ("variant", "t", "axis", "fixed", "mu", "sqrt_cum",
                            "sq_cum", "norm_sqrt", "norm_sq")}
    for variant in variants:
        for t in ts:
            for ax in axes:
                mu = np.linspace(0, 2 * np.pi, n)
                cum = (mu / mu[-1]) ** 2 * 4.0
                for i in range(n):
                    cols["variant"].append(variant)
                    cols["t"].append(float(t))
                    cols["axis"].append(ax)
                    cols["fixed"].append("{}")
                    cols["mu"].append(float(mu[i]))
                    cols["sqrt_cum"].append(float(cum[i]))
                    cols["sq_cum"].append(float(cum[i] ** 2))
                    cols["norm_sqrt"].append(float(cum[i] / cum[-1]))
                    cols["norm_sq"].append(float(cum[i] ** 2 / cum[-1] ** 2))
    return cols


def mesh_doc(g=12, n=5, with_pca=True, with_k=True, t=6.0):
    th = (np.arange(g) * (2 * np.pi / g)).tolist()
    rng = np.random.default_rng(0)
    states = rng.normal(size=(g, g, n))
    doc = {
        "schema_version": 1,
        "theta1_grid": th,
        "theta2_grid": th,
        "t": t,
        "n": n,
        "states": states.reshape(-1).tolist(),
        "periodic": [True, True],
    }
    if with_k:
        doc["K"] = rng.normal(size=g * g).tolist()
        doc["invalid_mask"] = [0] * (g * g)
    if with_pca:
        doc["pca"] = {
            "components": rng.normal(size=(3, n)).tolist(),
            "projections": rng.normal(size=(g * g, 3)).tolist(),
            "explained_variance": [3.0, 2.0, 1.0],
        }
    return doc


def curvature_doc(g=12, t=2.0):
    th = (np.arange(g) * (2 * np.pi / g)).tolist()
    rng = np.random.default_rng(1)
    return {
        "theta1_grid": th,
        "theta2_grid": th,
        "t": t,
        "K": rng.normal(size=g * g).tolist(),
        "invalid_mask": [0] * (g * g),
    }


@pytest.fixture(scope="session")
def export_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("exports")

    write(root / "static" / "gridlines.json", report_doc(
        "gridlines", {"gridlines": synth_gridlines(["trained", "untrained"],
                                                   axes=(0,), ts=(0.0,))}))

    us = np.linspace(0, 1, 8)
    ts = np.linspace(0.5, 50, 10)
    states = np.random.default_rng(2).normal(size=(8, 10, 3))
    write(root / "ei" / "ei_mesh.json", {
        "u_grid": us.tolist(), "t_grid": ts.tolist(),
        "shape": [8, 10, 3], "states": states.reshape(-1).tolist()})
    cols = {k: [] for k in ("t", "u", "g_tt", "g_tu", "g_uu")}
    for t in ts:
        for u in us:
            cols["t"].append(float(t))
            cols["u"].append(float(u))
            cols["g_tt"].append(float(np.exp(-t)))
            cols["g_tu"].append(0.0)
            cols["g_uu"].append(1.0 + u)
    write(root / "ei" / "ei_metric.json", report_doc("ei_metric",
                                                     {"metric": cols}))

    # context reports
    sweep = {k: [] for k in ("ctx", "t", "u_irr", "y")}
    for ctx in (1, 2):
        for t in np.linspace(0, 10, 6):
            for ui in np.linspace(-0.2, 0.2, 5):
                sweep["ctx"].append(ctx)
                sweep["t"].append(float(t))
                sweep["u_irr"].append(float(ui))
                sweep["y"].append(float(np.tanh(t / 5 + 0.1 * ui)))
    write(root / "context" / "output_sweep.json",
          report_doc("output_sweep", {"outputs": sweep,
                                      "spread": {"ctx": [1, 2],
                                                 "spread": [0.01, 0.01]}}))
    write(root / "context" / "gridlines.json", report_doc(
        "gridlines", {"gridlines": synth_gridlines(["ctx1", "ctx2"])}))
    eig = {k: [] for k in ("ctx", "t", "u_rel", "eig_index", "mean", "q10", "q90")}
    for ctx in (1, 2):
        for t in np.linspace(0, 10, 6):
            for ur in np.linspace(-0.2, 0.2, 5):
                for ei in range(3):
                    val = float(np.exp(-ei * t / 5))
                    eig["ctx"].append(ctx)
                    eig["t"].append(float(t))
                    eig["u_rel"].append(float(ur))
                    eig["eig_index"].append(ei)
                    eig["mean"].append(val)
                    eig["q10"].append(val * 0.9)
                    eig["q90"].append(val * 1.1)
    write(root / "context" / "eigen_decay.json",
          report_doc("eigen_decay", {"eigenvalues": eig}))
    align = {k: [] for k in ("ctx", "t", "vector", "alignment")}
    for ctx in (1, 2):
        for t in np.linspace(0.5, 10, 5):
            for vec in ("time", "u_rel", "u_irr", "random_baseline"):
                align["ctx"].append(ctx)
                align["t"].append(float(t))
                align["vector"].append(vec)
                align["alignment"].append(float(0.5 + 0.04 * t
                                                * (vec == "u_rel")))
    write(root / "context" / "selection_alignment.json",
          report_doc("selection_alignment", {"alignment": align}))
    rng = np.random.default_rng(3)
    loads = {"ctx": [], "neuron": [], "time_load": [], "rel_load": [],
             "irr_load": []}
    for ctx in (1, 2):
        for i in range(40):
            loads["ctx"].append(ctx)
            loads["neuron"].append(i)
            loads["time_load"].append(float(rng.normal()))
            loads["rel_load"].append(float(rng.normal()))
            loads["irr_load"].append(float(rng.normal()))
    write(root / "context" / "neuron_loadings.json",
          report_doc("neuron_loadings", {"loadings": loads,
                                         "stats": {"ctx": [1, 2],
                                                   "corr_time_rel": [0.5, 0.5],
                                                   "corr_time_irr": [0.05, 0.05],
                                                   "skew_max": [0.2, 0.2],
                                                   "kurt_max": [0.3, 0.3]}}))
    sv = {"index": list(range(20)),
          "W": np.geomspace(2, 0.01, 20).tolist(),
          "dW": np.geomspace(1, 0.001, 20).tolist()}
    write(root / "context" / "weight_spectrum.json", report_doc(
        "weight_spectrum",
        {"singular_values": sv,
         "w_eigenvalues": {"re": rng.normal(size=20).tolist(),
                           "im": rng.normal(size=20).tolist()},
         "summary": {"participation_ratio": [3.2]}}))

    # wm exports
    write(root / "wm2" / "mesh.json", mesh_doc())
    write(root / "wm2" / "curvature.json", curvature_doc(t=6.0))
    write(root / "wm2_t2" / "curvature.json", curvature_doc(t=2.0))
    g = 8
    axvals = np.arange(g) * (2 * np.pi / g)
    mcols = {k: [] for k in ("variant", "time", "k1", "k2", "g_00", "g_01",
                             "g_02", "g_11", "g_12", "g_22")}
    for t in (2.0, 5.0):
        for a in axvals:
            for b in axvals:
                mcols["variant"].append("wm")
                mcols["time"].append(float(t))
                mcols["k1"].append(float(a))
                mcols["k2"].append(float(b))
                mcols["g_00"].append(float(np.exp(-t)))
                mcols["g_01"].append(0.0)
                mcols["g_02"].append(0.0)
                mcols["g_11"].append(float(1 + 0.3 * np.cos(a)))
                mcols["g_12"].append(float(0.1 * np.sin(a + b)))
                mcols["g_22"].append(float(1 + 0.3 * np.sin(b)))
    write(root / "wm2" / "metric_field.json",
          report_doc("metric_field", {"metric": mcols}))
    ratio = {k: [] for k in ("t", "ratio_mean", "ratio_q10", "ratio_q90",
                             "g11_mean", "g22_mean", "g12_mean")}
    for t in np.linspace(0.5, 7, 10):
        r = 0.5 + 0.3 * np.tanh(t - 5.5)
        ratio["t"].append(float(t))
        ratio["ratio_mean"].append(float(r))
        ratio["ratio_q10"].append(float(r - 0.05))
        ratio["ratio_q90"].append(float(r + 0.05))
        ratio["g11_mean"].append(1.0)
        ratio["g22_mean"].append(float(r))
        ratio["g12_mean"].append(0.0)
    write(root / "wm2" / "warp_ratio.json",
          report_doc("warp_ratio", {"ratio": ratio}))
    dec = {k: [] for k in ("delay", "t", "align_th1", "align_th2")}
    for h in (2.0, 3.0):
        for t in np.linspace(2.2, 4 + h, 12):
            dec["delay"].append(float(h))
            dec["t"].append(float(t))
            dec["align_th1"].append(float(1.0 - 0.1 * t))
            dec["align_th2"].append(float(0.1 * t))
    write(root / "wm2" / "decoder_alignment.json", report_doc(
        "decoder_alignment",
        {"alignment": dec, "switch": {"delay": [2.0, 3.0],
                                      "switch_time": [5.0, 6.0]}}))
    ts = np.linspace(0.5, 7, 8)
    sim = {"t_i": [], "t_j": [], "similarity": []}
    for a in ts:
        for b in ts:
            sim["t_i"].append(float(a))
            sim["t_j"].append(float(b))
            sim["similarity"].append(float(np.exp(-abs(a - b) / 10)))
    write(root / "wm2" / "subspace_stability.json", report_doc(
        "subspace_stability",
        {"similarity": sim, "delay_summary": {"delay_min": [0.93]}}))
    write(root / "wm2" / "gridlines.json", report_doc(
        "gridlines", {"gridlines": synth_gridlines(["wm2"], ts=(3.5, 8.8))}))
    sides = {k: [] for k in ("t", "axis", "L_left", "L_right", "side_length")}
    for t in (6.5, 7.5, 8.5):
        for ax in range(3):
            sides["t"].append(float(t))
            sides["axis"].append(ax)
            sides["L_left"].append(1.0)
            sides["L_right"].append(1.0 + 0.5 * ax)
            sides["side_length"].append(2.0 + 0.5 * ax)
    write(root / "wm3" / "arclength_prism.json", report_doc(
        "arclength_prism",
        {"sides": sides, "gridlines": {"t": [6.5], "axis": [0],
                                       "mu": [0.0], "norm_cum": [0.0]}}))

    srank = {k: [] for k in ("t", "side", "srank_mean", "srank_q20",
                             "srank_q80", "offdiag_mean")}
    for t in np.linspace(0.25, 7, 14):
        for side in (1, -1):
            val = 1.0 + np.exp(-((t - 3.0) ** 2))
            srank["t"].append(float(t))
            srank["side"].append(side)
            srank["srank_mean"].append(float(val))
            srank["srank_q20"].append(float(val - 0.1))
            srank["srank_q80"].append(float(val + 0.1))
            srank["offdiag_mean"].append(float(-np.tanh(t - 4)))
    write(root / "romo" / "stable_rank_trace.json",
          report_doc("stable_rank_trace", {"srank": srank}))
    return root
