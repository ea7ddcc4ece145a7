"""Tangent bases of the state manifold and the pullback metric.

The tangent space at (t, kappa) is spanned by the time direction f(x, u, t)
and the sensitivity columns a_i = dx/dkappa_i. The columns solve the linear
forced system da_i/dt = J_f a_i + (df/du)(du/dkappa_i) with A(0) = 0, which
is integrated jointly with the state on one grid (state never interpolated).
A central-finite-difference route is kept as the independent oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dynamics import InputChart, VectorField, WienerPath, _check_guard, time_grid
from .errors import ConfigError, DegeneratePerturbationError, PsdViolationError
from .numerics import sym_eig


@dataclass
class JacobianRule:
    """Analytic Jacobians of a vector field.

    `j_x(x, u, t)` is the n x n state Jacobian, `j_u(x, u, t)` the n x d
    input Jacobian. `apply_j_x`, when given, computes J_f @ A without
    materializing J_f (used for batched grids); it must broadcast like the
    field itself.
    """

    j_x: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    j_u: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    apply_j_x: Optional[Callable] = None

    def apply(self, x, u, t, a):
        if self.apply_j_x is not None:
            return self.apply_j_x(x, u, t, a)
        return np.asarray(self.j_x(x, u, t)) @ a


@dataclass
class TangentBasis:
    """Time direction f and sensitivity columns A = dx/dkappa at one (t, kappa)."""

    f_vec: np.ndarray  # (n,)
    A: np.ndarray  # (n, m)
    t: float
    kappa: np.ndarray
    x: np.ndarray  # state at (t, kappa), kept for decoder-side analyses


@dataclass
class MetricTensor:
    """Pullback metric in (t, kappa_1..kappa_m) coordinates."""

    G: np.ndarray  # (m+1, m+1)
    t: float
    kappa: np.ndarray


def _forcing(jac: JacobianRule, chart: InputChart, x, u, kappa, t):
    # h_i = df/du @ du/dkappa_i, stacked as (..., n, m)
    ju = np.asarray(jac.j_u(x, u, t), dtype=float)
    du = np.asarray(chart.du_dkappa(kappa, t), dtype=float)
    if ju.ndim == 2 and du.ndim == 2:
        return ju @ du
    return np.einsum("...nd,...dm->...nm", ju, du)


def tangent_grid(field: VectorField, jac: Optional[JacobianRule], chart: InputChart,
                 kappas, x0, times, dt, method: str = "heun",
                 diffusion=None, path: Optional[WienerPath] = None):
    """Joint state+sensitivity integration over a batch of chart points.

    kappas: (B, m). Returns (times, x: (T, B, n), f: (T, B, n),
    A: (T, B, n, m)) sampled at the requested grid-aligned times. With a
    frozen `path`, the state follows the stochastic-Heun update while the
    sensitivities follow the drift Jacobian along that path. With jac=None
    only the state is integrated and A stays zero.
    """
    kappas = np.atleast_2d(np.asarray(kappas, dtype=float))
    B, m = kappas.shape
    if m != chart.m:
        raise ConfigError(f"kappa dimension {m} != chart.m {chart.m}")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    t_end = float(times.max())
    grid = np.array([0.0]) if t_end == 0.0 else time_grid(t_end, dt)
    idx = np.rint(times / dt).astype(int)
    if np.abs(grid[idx] - times).max() > 1e-9:
        raise ConfigError("requested times must lie on the integration grid")
    if path is not None and (path.dW.shape[0] != len(grid) - 1):
        raise ConfigError("WienerPath grid does not match requested (t_end, dt)")

    n = field.n
    x = np.broadcast_to(np.asarray(x0, dtype=float), (B, n)).copy()
    A = np.zeros((B, n, m))
    want: dict = {}
    for i, k in enumerate(idx):
        want.setdefault(int(k), []).append(i)
    xs = np.empty((len(times), B, n))
    fs = np.empty((len(times), B, n))
    As = np.empty((len(times), B, n, m))

    def record(step, x, A, u_t, t):
        for i in want.get(step, ()):
            xs[i] = x
            fs[i] = field(x, u_t, t)
            As[i] = A

    u_t = chart.u(kappas, grid[0])
    record(0, x, A, u_t, grid[0])
    euler = method == "euler"
    for k in range(len(grid) - 1):
        t, t_next = grid[k], grid[k + 1]
        k1x = field(x, u_t, t)
        if jac is not None:
            k1A = jac.apply(x, u_t, t, A) + _forcing(jac, chart, x, u_t, kappas, t)
        if path is not None:
            sig = np.asarray(diffusion(x, u_t, t), dtype=float)
            su = sig @ path.dW[k]
        else:
            su = 0.0
        u_next = chart.u(kappas, t_next)
        if euler:
            x = x + dt * k1x + su
            if jac is not None:
                A = A + dt * k1A
        else:
            xp = x + dt * k1x + su
            k2x = field(xp, u_next, t_next)
            if jac is not None:
                Ap = A + dt * k1A
                k2A = jac.apply(xp, u_next, t_next, Ap) + _forcing(jac, chart, xp, u_next, kappas, t_next)
                A = A + 0.5 * dt * (k1A + k2A)
            x = x + 0.5 * dt * (k1x + k2x) + su
        u_t = u_next
        _check_guard(x, t_next)
        record(k + 1, x, A, u_t, t_next)
    return times, xs, fs, As


def adjoint_tangent(field: VectorField, jac: JacobianRule, chart: InputChart,
                    kappa, x0, times, dt, method: str = "heun",
                    diffusion=None, path: Optional[WienerPath] = None):
    """TangentBasis at each requested time for a single chart point."""
    kappa = np.asarray(kappa, dtype=float)
    times, xs, fs, As = tangent_grid(
        field, jac, chart, kappa[None, :], x0, times, dt, method,
        diffusion=diffusion, path=path,
    )
    return [
        TangentBasis(f_vec=fs[i, 0], A=As[i, 0], t=float(times[i]), kappa=kappa, x=xs[i, 0])
        for i in range(len(times))
    ]


def fd_tangent(field: VectorField, chart: InputChart, kappa, x0, t, dt,
               delta: float = 1e-4, method: str = "heun",
               diffusion=None, path: Optional[WienerPath] = None) -> TangentBasis:
    """Central-finite-difference tangent basis (independent oracle).

    a_i ~ (x(t; kappa + delta e_i) - x(t; kappa - delta e_i)) / (2 delta),
    one-sided where the perturbed point would leave the chart box. The time
    direction is the field evaluated at the unperturbed state.
    """
    if delta < 1e-10:
        raise DegeneratePerturbationError(f"perturbation {delta:.3e} below 1e-10")
    kappa = np.asarray(kappa, dtype=float)
    m = chart.m

    # all 2m+1 state integrations run as one batch; one-sided at the box edge
    kaps = [kappa]
    sides = []
    for i in range(m):
        e = np.zeros(m)
        e[i] = delta
        hi_ok = chart.contains(kappa + e)
        lo_ok = chart.contains(kappa - e)
        if hi_ok and lo_ok:
            kaps += [kappa + e, kappa - e]
            sides.append((2 * delta, len(kaps) - 2, len(kaps) - 1))
        elif hi_ok:
            kaps += [kappa + e]
            sides.append((delta, len(kaps) - 1, 0))
        elif lo_ok:
            kaps += [kappa - e]
            sides.append((delta, 0, len(kaps) - 1))
        else:
            raise DegeneratePerturbationError(
                f"kappa +/- delta e_{i} both leave the chart box")
    _, xs, _, _ = tangent_grid(field, None, chart, np.array(kaps), x0,
                               [t], dt, method, diffusion=diffusion, path=path)
    x_all = xs[0]
    cols = [(x_all[a] - x_all[b]) / denom for denom, a, b in sides]
    x_center = x_all[0]
    f_vec = field(x_center, chart.u(kappa, t), t)
    return TangentBasis(f_vec=f_vec, A=np.stack(cols, axis=-1), t=float(t),
                        kappa=kappa, x=x_center)


def assemble_metric(tb: TangentBasis) -> MetricTensor:
    """Block pullback metric [[|f|^2, f^T A], [A^T f, A^T A]]."""
    f = np.asarray(tb.f_vec, dtype=float)
    A = np.asarray(tb.A, dtype=float)
    m = A.shape[1]
    G = np.empty((m + 1, m + 1))
    G[0, 0] = f @ f
    G[0, 1:] = f @ A
    G[1:, 0] = G[0, 1:]
    G[1:, 1:] = A.T @ A
    return MetricTensor(G=G, t=tb.t, kappa=tb.kappa)


def metric_eigs(G, normalize: bool = False, reference: Optional[float] = None):
    """Descending eigenvalues of the metric, optionally divided by `reference`.

    The metric is a (0,2)-tensor, so these are the generalized eigenvalues
    with respect to the identity metric of the coordinate chart.
    """
    Gm = G.G if isinstance(G, MetricTensor) else np.asarray(G, dtype=float)
    vals, _ = sym_eig(Gm)
    scale = max(abs(vals[0]), 1.0) if len(vals) else 1.0
    if len(vals) and vals[-1] < -1e-8 * scale:
        raise PsdViolationError(f"metric eigenvalue {vals[-1]:.3e} significantly negative")
    if normalize:
        if reference is None or reference <= 0:
            raise ConfigError("normalization requires a positive reference eigenvalue")
        vals = vals / reference
    return vals


def metric_blocks(G: np.ndarray):
    """Split an (m+1)x(m+1) metric into (G_tt, G_tk, G_kk)."""
    G = np.asarray(G, dtype=float)
    return float(G[0, 0]), G[0, 1:].copy(), G[1:, 1:].copy()


def upper_triangle(G: np.ndarray) -> np.ndarray:
    k = G.shape[-1]
    iu = np.triu_indices(k)
    return G[..., iu[0], iu[1]]


def export_metric_field(path, t_grid, kappa_axes, G_field, meta=None):
    """Write the sampled metric field to JSON.

    G_field has shape (T, *grid_shape, m+1, m+1); values are stored as the
    (m+1)(m+2)/2 upper-triangle entries per grid point, row-major over
    (t, kappa_1, ..., kappa_m).
    """
    G_field = np.asarray(G_field, dtype=float)
    m = G_field.shape[-1] - 1
    tri = upper_triangle(G_field).reshape(-1, (m + 1) * (m + 2) // 2)
    doc = {
        "schema_version": 1,
        "m": m,
        "t_grid": [float(v) for v in np.asarray(t_grid)],
        "kappa_grid": [[float(v) for v in np.asarray(ax)] for ax in kappa_axes],
        "entry_order": "upper triangle, row-major over (t, kappa_1, ..)",
        "values": tri.tolist(),
    }
    if meta:
        doc["meta"] = meta
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return path
