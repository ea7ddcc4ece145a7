"""Built-in oracle suites: solver order, adjoint-vs-FD, curvature, gradients.

These are the fast, self-contained correctness gates behind
`manifold-dyn selftest`; the pytest acceptance suite runs the full-size
versions. Each suite returns (name, ok, detail).
"""

from __future__ import annotations

import numpy as np

from .bptt import rnn_forward, rnn_loss_grads, static_forward, static_loss_grads
from .dynamics import InputChart, VectorField, integrate_ode
from .geometry import SurfaceMesh, gaussian_curvature
from .numerics import Rng
from .tangent import JacobianRule, adjoint_tangent, fd_tangent
from .tasks import make_task


def solver_order_suite(dt=None):
    base = 0.04 if dt is None else float(dt)
    chart = InputChart(m=1, d=1, box=[[0, 1]],
                       u_fn=lambda k, t: np.zeros(np.shape(k)[:-1] + (1,)))
    field = VectorField(n=1, d=1, f=lambda x, u, t: -x)
    slopes = {}
    for method in ("euler", "heun"):
        dts = base / np.array([1, 2, 4, 8])
        errs = []
        for d in dts:
            traj = integrate_ode(field, chart, [0.0], [1.0], 1.0, d, method)
            errs.append(abs(traj.x[-1, 0] - np.exp(-1.0)) + 1e-300)
        slopes[method] = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    heun_fine = integrate_ode(field, chart, [0.0], [1.0], 1.0, base / 8, "heun")
    heun_err = abs(heun_fine.x[-1, 0] - np.exp(-1.0))
    ok = (abs(slopes["euler"] - 1.0) <= 0.2 and abs(slopes["heun"] - 2.0) <= 0.2
          and heun_err <= 1e-5)
    detail = (f"euler slope {slopes['euler']:.2f}, heun slope "
              f"{slopes['heun']:.2f}, heun error {heun_err:.2e}")
    return "solver_order", ok, detail


def adjoint_vs_fd_suite():
    n, m = 30, 2
    rng = np.random.default_rng(7)
    W = rng.normal(size=(n, n)) * 0.5 / np.sqrt(n)
    B = rng.normal(size=(n, m)) * 0.7
    field = VectorField(n=n, d=m, f=lambda x, u, t: np.tanh(x) @ W.T - x + u @ B.T)
    chart = InputChart(m=m, d=m, box=[[-1, 1]] * m,
                       u_fn=lambda k, t: np.asarray(k, dtype=float).copy())
    eye = np.eye(n)
    jac = JacobianRule(
        j_x=lambda x, u, t: W * (1 - np.tanh(x) ** 2)[..., None, :] - eye,
        j_u=lambda x, u, t: B,
        apply_j_x=lambda x, u, t, a: np.einsum(
            "ij,...jm->...im", W, (1 - np.tanh(x) ** 2)[..., None] * a) - a)
    worst = 0.0
    for kappa, t in (([0.3, -0.5], 1.0), ([0.8, 0.1], 3.0), ([-0.4, 0.6], 5.0)):
        adj = adjoint_tangent(field, jac, chart, kappa, np.zeros(n), [t], 1e-3)[0]
        fd = fd_tangent(field, chart, kappa, np.zeros(n), t, 1e-3, delta=1e-4)
        for i in range(m):
            rel = (np.linalg.norm(adj.A[:, i] - fd.A[:, i])
                   / np.linalg.norm(fd.A[:, i]))
            worst = max(worst, float(rel))
    return "adjoint_vs_fd", worst <= 1e-3, f"worst columnwise rel err {worst:.2e}"


def curvature_torus_suite():
    R, r = 2.0, 1.0
    g = 100
    th = np.arange(g) * (2 * np.pi / g)
    U, V = np.meshgrid(th, th, indexing="ij")
    states = np.stack([(R + r * np.cos(V)) * np.cos(U),
                       (R + r * np.cos(V)) * np.sin(U),
                       r * np.sin(V)], axis=-1)
    curv = gaussian_curvature(SurfaceMesh(theta1=th, theta2=th, t=0.0,
                                          states=states))
    K_true = np.cos(V) / (r * (R + r * np.cos(V)))
    err = float(np.nanmax(np.abs(curv.K - K_true)))
    total, total_abs = curv.total_curvature()
    ok = err <= 0.05 * np.abs(K_true).max() and abs(total) <= 0.05 * total_abs
    return ("curvature_torus", ok,
            f"max error {err:.4f} (5% bound {0.05 * np.abs(K_true).max():.4f}), "
            f"Gauss-Bonnet residual {total:.2e}")


def gradient_check_suite(n_small=10, coords=5):
    results = []
    rng = np.random.default_rng(3)
    for task_id in ("context", "wm2", "wm3", "romo"):
        task = make_task(task_id, {"n": n_small})
        params = task.init_params(Rng(0))
        trial = task.sample_batch(Rng(1), 4)
        _, grads = rnn_loss_grads(params, trial)
        worst = 0.0
        eps = 1e-6
        for name in ("W", "B", "D"):
            p = params[name]
            for _ in range(coords):
                ij = tuple(rng.integers(0, s) for s in p.shape)
                p0 = p[ij]
                p[ij] = p0 + eps
                lp, _ = rnn_forward(params, trial)
                p[ij] = p0 - eps
                lm, _ = rnn_forward(params, trial)
                p[ij] = p0
                fd = (lp - lm) / (2 * eps)
                worst = max(worst, abs(fd - grads[name][ij])
                            / max(abs(fd), abs(grads[name][ij]), 1e-10))
        results.append((task_id, worst))
    task = make_task("static_circle")
    params = task.init_params(Rng(0))
    x_in, targets = task.training_inputs(None)
    _, grads = static_loss_grads(params, x_in, targets)
    worst = 0.0
    for name in ("W", "b", "D"):
        p = params[name]
        for _ in range(coords):
            ij = tuple(rng.integers(0, s) for s in p.shape)
            p0 = p[ij]
            p[ij] = p0 + 1e-6
            lp, _ = static_forward(params, x_in, targets)
            p[ij] = p0 - 1e-6
            lm, _ = static_forward(params, x_in, targets)
            p[ij] = p0
            fd = (lp - lm) / 2e-6
            worst = max(worst, abs(fd - grads[name][ij]) / max(abs(fd), 1e-10))
    results.append(("static_circle", worst))
    worst_all = max(w for _, w in results)
    detail = ", ".join(f"{tid} {w:.1e}" for tid, w in results)
    return "gradient_checks", worst_all <= 1e-4, detail


def run_selftest(dt=None):
    return [
        solver_order_suite(dt=dt),
        adjoint_vs_fd_suite(),
        curvature_torus_suite(),
        gradient_check_suite(),
    ]
