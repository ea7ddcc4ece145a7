"""Vector fields, input charts, and fixed-step ODE/SDE integration.

Fields and charts are vectorized over leading batch axes so that meshes of
initial conditions or chart coordinates integrate in one pass. Solvers are
fixed-step only (dt defaults elsewhere to 1e-2); noise realizations are
frozen `WienerPath` objects so every stochastic run is replayable.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DivergenceError
from .numerics import Rng

OVERFLOW_GUARD = 1e8


@dataclass
class VectorField:
    """Time-dependent vector field f(x, u, t) on R^n driven by u in R^d.

    `f` must broadcast over leading batch axes of x (and of u when u is
    batched); it must be deterministic and finite for finite inputs.
    """

    n: int
    d: int
    f: Callable[[np.ndarray, np.ndarray, float], np.ndarray]

    def __call__(self, x, u, t):
        return self.f(x, u, t)


@dataclass
class InputChart:
    """Coordinate chart kappa in a box, mapping to input signals u_kappa(t).

    `u_fn(kappa, t)` takes kappa of shape (..., m) and returns (..., d).
    `du_fn(kappa, t)`, when given, returns the coordinate derivative of
    shape (..., d, m); otherwise central finite differences are used.
    """

    m: int
    d: int
    box: np.ndarray  # (m, 2) rows [lo, hi]
    u_fn: Callable[[np.ndarray, float], np.ndarray]
    du_fn: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    periodic: tuple = dc_field(default_factory=tuple)  # indices of 2*pi-periodic axes

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=float).reshape(self.m, 2)

    def u(self, kappa, t):
        return self.u_fn(np.asarray(kappa, dtype=float), t)

    def du_dkappa(self, kappa, t, delta=1e-6):
        kappa = np.asarray(kappa, dtype=float)
        if self.du_fn is not None:
            return self.du_fn(kappa, t)
        cols = []
        for i in range(self.m):
            e = np.zeros_like(kappa)
            e[..., i] = delta
            cols.append((self.u_fn(kappa + e, t) - self.u_fn(kappa - e, t)) / (2 * delta))
        return np.stack(cols, axis=-1)

    def contains(self, kappa) -> bool:
        kappa = np.asarray(kappa, dtype=float)
        return bool(
            np.all(kappa >= self.box[:, 0] - 1e-12)
            and np.all(kappa <= self.box[:, 1] + 1e-12)
        )


@dataclass
class WienerPath:
    """Frozen Wiener increments on a uniform grid; variance dt per step."""

    seed: Optional[int]
    q: int
    t_grid: np.ndarray  # (steps + 1,)
    dW: np.ndarray  # (steps, q)

    @staticmethod
    def sample(rng: Rng, q: int, t_end: float, dt: float) -> "WienerPath":
        t_grid = time_grid(t_end, dt)
        steps = len(t_grid) - 1
        dW = rng.normal(size=(steps, q)) * np.sqrt(dt)
        return WienerPath(seed=rng.seed, q=q, t_grid=t_grid, dW=dW)

    @staticmethod
    def zeros(q: int, t_end: float, dt: float) -> "WienerPath":
        """The frozen realization dW(t) = 0 for all t."""
        t_grid = time_grid(t_end, dt)
        return WienerPath(seed=None, q=q, t_grid=t_grid, dW=np.zeros((len(t_grid) - 1, q)))


@dataclass
class StateTrajectory:
    """Solution samples x(t_i) plus the chart coordinates that produced them."""

    t: np.ndarray  # (steps + 1,)
    x: np.ndarray  # (steps + 1, n)
    kappa: np.ndarray
    method: str
    dt: float
    seed: Optional[int] = None  # noise-path seed for stochastic runs

    def to_csv(self, stem):
        """Write `<stem>.csv` (header t,x_0,..) and `<stem>.json` sidecar."""
        stem = str(stem)
        n = self.x.shape[1]
        with open(stem + ".csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"x_{i}" for i in range(n)])
            for ti, xi in zip(self.t, self.x):
                writer.writerow([repr(float(ti))] + [repr(float(v)) for v in xi])
        sidecar = {
            "kappa": [float(v) for v in np.atleast_1d(self.kappa)],
            "seed": self.seed,
            "dt": self.dt,
            "method": self.method,
        }
        with open(stem + ".json", "w") as fh:
            json.dump(sidecar, fh, indent=2)
        return stem + ".csv"


def time_grid(t_end: float, dt: float) -> np.ndarray:
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if t_end < dt:
        raise ConfigError(f"t_end {t_end} shorter than one step dt={dt}")
    steps = int(round(t_end / dt))
    return np.arange(steps + 1) * dt


def _check_guard(x, t):
    norms = np.linalg.norm(np.atleast_2d(x), axis=-1)
    if not np.all(np.isfinite(norms)) or norms.max() > OVERFLOW_GUARD:
        raise DivergenceError(f"state norm exceeded {OVERFLOW_GUARD:.0e} at t={t:.6g}", time=t)


def integrate_ode(field: VectorField, chart: InputChart, kappa, x0, t_end, dt,
                  method: str = "heun") -> StateTrajectory:
    """Fixed-step Euler or Heun integration of dx/dt = f(x, u_kappa(t), t)."""
    if method not in ("euler", "heun"):
        raise ConfigError(f"unknown method {method!r}; expected 'euler' or 'heun'")
    kappa = np.asarray(kappa, dtype=float)
    t_grid = time_grid(t_end, dt)
    x = np.asarray(x0, dtype=float).copy()
    out = np.empty((len(t_grid), x.shape[-1]))
    out[0] = x
    u_t = chart.u(kappa, t_grid[0])
    for k in range(len(t_grid) - 1):
        t = t_grid[k]
        k1 = field(x, u_t, t)
        u_next = chart.u(kappa, t_grid[k + 1])
        if method == "euler":
            x = x + dt * k1
        else:
            xp = x + dt * k1
            k2 = field(xp, u_next, t_grid[k + 1])
            x = x + 0.5 * dt * (k1 + k2)
        u_t = u_next
        _check_guard(x, t_grid[k + 1])
        out[k + 1] = x
    return StateTrajectory(t=t_grid, x=out, kappa=kappa, method=method, dt=dt)


def integrate_sde(field: VectorField, diffusion, chart: InputChart, kappa, x0,
                  t_end, dt, path: WienerPath) -> StateTrajectory:
    """Stochastic-Heun integration of dx = f dt + diffusion(x, u, t) dW.

    Drift is averaged predictor-corrector style; the step's noise increment
    `diffusion @ dW_k` enters both predictor and corrector once (additive
    noise convention). With a zero path this reduces to Heun `integrate_ode`.
    """
    kappa = np.asarray(kappa, dtype=float)
    t_grid = time_grid(t_end, dt)
    steps = len(t_grid) - 1
    if path.dW.shape[0] != steps or len(path.t_grid) != len(t_grid) or \
            abs(path.t_grid[-1] - t_grid[-1]) > 1e-12:
        raise ConfigError(
            f"WienerPath grid ({path.dW.shape[0]} steps to t={path.t_grid[-1]:.6g}) "
            f"does not match requested ({steps} steps to t={t_grid[-1]:.6g})"
        )
    x = np.asarray(x0, dtype=float).copy()
    out = np.empty((len(t_grid), x.shape[-1]))
    out[0] = x
    u_t = chart.u(kappa, t_grid[0])
    for k in range(steps):
        t = t_grid[k]
        sig = np.asarray(diffusion(x, u_t, t), dtype=float)
        su = sig @ path.dW[k]
        k1 = field(x, u_t, t)
        u_next = chart.u(kappa, t_grid[k + 1])
        xp = x + dt * k1 + su
        k2 = field(xp, u_next, t_grid[k + 1])
        x = x + 0.5 * dt * (k1 + k2) + su
        u_t = u_next
        _check_guard(x, t_grid[k + 1])
        out[k + 1] = x
    return StateTrajectory(t=t_grid, x=out, kappa=kappa,
                           method="stochastic-heun", dt=dt, seed=path.seed)
