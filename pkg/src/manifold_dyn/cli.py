"""Command-line interface: train, analyze, mesh, selftest.

Exit codes: 0 success, 1 usage/config error, 2 numerical divergence,
3 declared-threshold failure. Every run writes exactly one RunManifest
into --out; nothing is written outside --out.
"""

from __future__ import annotations

import argparse
import hashlib
import inspect
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (ConfigError, DivergenceError, ManifoldDynError,
                     MeshError, ThresholdError, TrainingDivergenceError)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_THRESHOLD = 3


def _set_threads(n: int):
    os.environ.setdefault("OMP_NUM_THREADS", str(n))
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=n)
    except ImportError:
        pass


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


class ManifestWriter:
    def __init__(self, out_dir, argv, seed=None, config_path=None):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.doc = {
            "command_line": argv,
            "config_hash": _sha256(config_path) if config_path else None,
            "code_version": __version__,
            "seed": seed,
            "started": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "outputs": [],
        }

    def add(self, *paths):
        for p in paths:
            self.doc["outputs"].append(str(Path(p).name))

    def finish(self):
        self.doc["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        tmp = self.out_dir / "run_manifest.json.tmp"
        with open(tmp, "w") as fh:
            json.dump(self.doc, fh, indent=2)
        os.replace(tmp, self.out_dir / "run_manifest.json")


def cmd_train(args, argv) -> int:
    from .tasks import load_task_config, make_task
    from .training import train, warping_constrained_train

    overrides = {}
    train_kwargs = {}
    if args.config:
        task_id, overrides = load_task_config(args.config)
        if task_id != args.task:
            raise ConfigError(
                f"config is for task {task_id!r} but --task is {args.task!r}")
        train_kwargs = overrides.pop("training", {}) if isinstance(
            overrides.get("training"), dict) else {}
    task = make_task(args.task, overrides)
    manifest = ManifestWriter(args.out, argv, seed=args.seed,
                              config_path=args.config)
    ck_path = Path(args.out) / "checkpoint.json"
    hist_path = Path(args.out) / "loss_history.csv"
    try:
        if args.mode == "plain":
            ck = train(task, seed=args.seed)
        else:
            ck = warping_constrained_train(
                task, seed=args.seed, alpha=args.alpha, beta=args.beta,
                c=args.c, mode=args.mode)
    except TrainingDivergenceError as exc:
        if exc.checkpoint is not None:
            exc.checkpoint.save(ck_path)
            exc.checkpoint.loss_history_csv(hist_path)
            manifest.add(ck_path, hist_path)
        manifest.doc["error"] = str(exc)
        manifest.finish()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    ck.save(ck_path)
    ck.loss_history_csv(hist_path)
    manifest.add(ck_path, hist_path)
    manifest.finish()
    print(f"checkpoint written to {ck_path} "
          f"(final loss {ck.loss_history[-1]['loss']:.6f})")
    return EXIT_OK


def cmd_analyze(args, argv) -> int:
    from .analysis import ANALYSES
    from .checkpoint import Checkpoint

    if args.analysis not in ANALYSES:
        raise ConfigError(
            f"unknown analysis {args.analysis!r}; valid ids: "
            f"{', '.join(sorted(ANALYSES))}")
    fn = ANALYSES[args.analysis]
    kwargs = {}
    if args.config:
        try:
            with open(args.config) as fh:
                kwargs = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {args.config} is not valid JSON: {exc}")
        valid = set(inspect.signature(fn).parameters) - {"ck", "ck_or_task"}
        unknown = set(kwargs) - valid
        if unknown:
            raise ConfigError(
                f"unknown analysis config keys {sorted(unknown)}; "
                f"valid keys: {sorted(valid)}")
    if "seed" in inspect.signature(fn).parameters and "seed" not in kwargs:
        kwargs["seed"] = args.seed
    if args.analysis == "ei_metric" or (
            args.analysis == "dimensionality" and args.checkpoint is None):
        from .tasks import make_task

        subject = make_task("ei_decision")
    else:
        if args.checkpoint is None:
            raise ConfigError("--checkpoint is required for this analysis")
        subject = Checkpoint.load(args.checkpoint)
        if not subject.usable:
            raise ConfigError(f"checkpoint {args.checkpoint} is flagged unusable")
    manifest = ManifestWriter(args.out, argv, seed=args.seed,
                              config_path=args.config)
    report = fn(subject, **kwargs)
    paths = report.save(args.out)
    manifest.add(*paths)
    manifest.finish()
    for name, ok in report.passes.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {args.analysis}: {name}")
    if not report.ok:
        return EXIT_THRESHOLD
    return EXIT_OK


def cmd_mesh(args, argv) -> int:
    from .checkpoint import Checkpoint
    from .geometry import export_mesh, gaussian_curvature, mesh_surface
    from .numerics import pca

    manifest = ManifestWriter(args.out, argv, seed=None, config_path=None)
    out = Path(args.out)
    if args.task == "ei_decision":
        from .analysis import ei_mesh_export
        from .tasks import make_task

        doc = ei_mesh_export(make_task("ei_decision"))
        path = out / "ei_mesh.json"
        with open(path, "w") as fh:
            json.dump(doc, fh)
        manifest.add(path)
        manifest.finish()
        print(f"E-I mesh written to {path}")
        return EXIT_OK
    ck = Checkpoint.load(args.checkpoint)
    if ck.task_id not in ("wm2", "wm3"):
        raise ConfigError(
            f"mesh export needs a wm2/wm3 checkpoint (or --task ei_decision); "
            f"got task {ck.task_id!r}")
    from .analysis import task_from_checkpoint

    task = task_from_checkpoint(ck)
    if ck.task_id == "wm3":
        raise ConfigError("surface meshing is 2-D; use a wm2 checkpoint")
    t_val = round(args.t / task.dt) * task.dt
    mesh = mesh_surface(task.field(ck.final_params), task.chart(args.h),
                        args.grid, t_val, task.x0, task.dt)
    try:
        curv = gaussian_curvature(mesh)
    except MeshError:
        curv = None  # grid too coarse for the curvature estimator
    flat = mesh.states.reshape(-1, task.n)
    comps, proj, var = pca(flat, 3)
    pca_block = {
        "components": comps.tolist(),
        "projections": proj.tolist(),
        "explained_variance": var.tolist(),
    }
    path = out / "mesh.json"
    export_mesh(path, mesh, curv, pca_block,
                meta={"task_id": ck.task_id, "seed": ck.seed, "h": args.h})
    manifest.add(path)
    if curv is not None:
        from .geometry import curvature_extremum_patch

        extrema = {}
        for mode in ("max", "min"):
            patch = curvature_extremum_patch(curv, mode)
            extrema[mode] = {
                "center": list(patch["center"]),
                "rows": patch["rows"].tolist(),
                "cols": patch["cols"].tolist(),
            }
        curv_path = out / "curvature.json"
        with open(curv_path, "w") as fh:
            json.dump({
                "theta1_grid": mesh.theta1.tolist(),
                "theta2_grid": mesh.theta2.tolist(),
                "t": mesh.t,
                "K": [float(k) if v else 0.0 for k, v in
                      zip(curv.K.reshape(-1), curv.valid.reshape(-1))],
                "invalid_mask": (~curv.valid).reshape(-1).astype(int).tolist(),
                "extrema": extrema,
            }, fh)
        manifest.add(curv_path)
        msg = f"(K range [{np.nanmin(curv.K):.4g}, {np.nanmax(curv.K):.4g}])"
    else:
        msg = "(grid too coarse for curvature; mesh only)"
    manifest.finish()
    print(f"mesh written to {out} {msg}")
    return EXIT_OK


def cmd_selftest(args, argv) -> int:
    from .selftest import run_selftest

    results = run_selftest(dt=args.dt)
    failed = [name for name, ok, _ in results if not ok]
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return EXIT_THRESHOLD if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="manifold-dyn",
        description="Riemannian geometry of input-driven dynamical systems")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("MANIFOLD_DYN_THREADS", "1")),
                   help="thread budget (default 1, deterministic)")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a task network from scratch")
    t.add_argument("--task", required=True)
    t.add_argument("--config", default=None)
    t.add_argument("--seed", type=int, required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--mode", default="plain",
                   choices=["plain", "joint", "W-then-rest"])
    t.add_argument("--alpha", type=float, default=1.0)
    t.add_argument("--beta", type=float, default=0.0)
    t.add_argument("--c", type=float, default=1.0)

    a = sub.add_parser("analyze", help="run an analysis on a checkpoint")
    a.add_argument("--checkpoint", default=None)
    a.add_argument("--analysis", required=True)
    a.add_argument("--config", default=None)
    a.add_argument("--seed", type=int, required=True)
    a.add_argument("--out", required=True)

    m = sub.add_parser("mesh", help="export a surface mesh + curvature")
    m.add_argument("--checkpoint", default=None)
    m.add_argument("--task", default=None, choices=[None, "ei_decision"])
    m.add_argument("--t", type=float, default=6.0)
    m.add_argument("--grid", type=int, default=100)
    m.add_argument("--h", type=float, default=None)
    m.add_argument("--out", required=True)

    s = sub.add_parser("selftest", help="run the oracle suites")
    s.add_argument("--dt", type=float, default=None,
                   help="override the solver-order suite's base step")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    _set_threads(args.threads)
    handlers = {
        "train": cmd_train,
        "analyze": cmd_analyze,
        "mesh": cmd_mesh,
        "selftest": cmd_selftest,
    }
    try:
        return handlers[args.command](args, ["manifold-dyn"] + argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, TrainingDivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ThresholdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    except ManifoldDynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
