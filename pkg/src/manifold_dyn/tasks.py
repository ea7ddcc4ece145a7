"""Task definitions: the five systems whose geometry the package reproduces.

Each constructor returns a TaskSpec bundling the vector field, input chart,
diffusion, trial sampler, and training hyperparameters. The recurrent tasks
share the drift W phi(x) - x + B u(t) with phi = tanh; columns of B carry
the per-task forcing channels (evidence, context cues, go pulse, ...).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .bptt import NoiseBlock, TrialBatch
from .dynamics import InputChart, VectorField, integrate_ode, time_grid
from .errors import ConfigError
from .numerics import Rng
from .tangent import JacobianRule

TASK_IDS = ("static_circle", "ei_decision", "context", "wm2", "wm3", "romo")

SIGN_MARGIN = 1e-3  # sampled inputs keep this margin from sign(0) targets


@dataclass
class TaskSpec:
    task_id: str
    kind: str  # static | ode | sde
    n: int
    d: int
    out: int
    m: int
    dt: float
    t_end: float
    hyper: dict
    init_params: Callable[[Rng], dict]
    sample_batch: Optional[Callable[[Rng, int], TrialBatch]] = None
    chart: Optional[Callable[..., InputChart]] = None
    field: Optional[Callable[[dict], VectorField]] = None
    jac: Optional[Callable[[dict], JacobianRule]] = None
    diffusion: Optional[Callable[[dict], Callable]] = None
    x0: Optional[np.ndarray] = None
    config: dict = dc_field(default_factory=dict)

    def readout(self, params, x):
        """y = D phi(x) (static task overrides via its own forward)."""
        return np.tanh(x) @ params["D"].T


def _rnn_field(W, B) -> VectorField:
    n, d = B.shape

    def f(x, u, t):
        return np.tanh(x) @ W.T - x + u @ B.T

    return VectorField(n=n, d=d, f=f)


def _rnn_jac(W, B) -> JacobianRule:
    eye = np.eye(W.shape[0])

    def j_x(x, u, t):
        dphi = 1.0 - np.tanh(x) ** 2
        return W * dphi[..., None, :] - eye

    def apply_j_x(x, u, t, a):
        dphi = 1.0 - np.tanh(x) ** 2
        return np.einsum("ij,...jm->...im", W, dphi[..., None] * a) - a

    return JacobianRule(j_x=j_x, j_u=lambda x, u, t: B, apply_j_x=apply_j_x)


def _rnn_init(rng: Rng, n: int, g: float, d: int, out: int) -> dict:
    return {
        "W": rng.normal(size=(n, n), std=g / np.sqrt(n)),
        "B": rng.normal(size=(n, d), std=1.0 / np.sqrt(2.0)),
        "D": rng.normal(size=(out, n), std=1.0 / np.sqrt(n)),
    }


# ---------------------------------------------------------------------------
# contextual evidence integration (SDE)

CONTEXT_DEFAULTS = {
    "n": 100,
    "g": 0.5,
    "sigma_input": 0.5,
    "sigma_neuron": 0.05,
    "lr": 5e-5,
    "iterations": 3000,
    "batch_size": 128,
    "dt": 0.05,  # training step; analyses integrate at 0.01
    "t_end": 10.0,
    "u_max": 0.2,
    "min_evidence": 0.05,  # relevant-evidence magnitude floor per trial
}


def context_task(**overrides) -> TaskSpec:
    """Contextual binary evidence integration under input and neuron noise.

    Inputs u1, u2 in [-0.2, 0.2] are constant in time; the context cue
    selects which one's sign the decoder must report at t = 10. B columns:
    [b1, b2, c1, c2] with the evidence columns also carrying the input
    noise. Analyses freeze the zero-noise path.
    """
    cfg = dict(CONTEXT_DEFAULTS)
    _apply_overrides(cfg, overrides, "context")
    n, dt, t_end = cfg["n"], cfg["dt"], cfg["t_end"]
    u_max = cfg["u_max"]
    steps = int(round(t_end / dt))

    def init_params(rng: Rng) -> dict:
        return _rnn_init(rng, n, cfg["g"], d=4, out=1)

    def chart(ctx: int = 1) -> InputChart:
        if ctx not in (1, 2):
            raise ConfigError(f"context must be 1 or 2, got {ctx}")
        cue = np.array([1.0, 0.0]) if ctx == 1 else np.array([0.0, 1.0])
        du = np.zeros((4, 2))
        du[0, 0] = du[1, 1] = 1.0

        def u_fn(kappa, t):
            kappa = np.asarray(kappa, dtype=float)
            out = np.zeros(kappa.shape[:-1] + (4,))
            out[..., :2] = kappa
            out[..., 2:] = cue
            return out

        return InputChart(m=2, d=4, box=[[-u_max, u_max], [-u_max, u_max]],
                          u_fn=u_fn, du_fn=lambda kappa, t: du)

    def sample_kappa_ctx(rng: Rng, size: int):
        # relevant evidence keeps a resolvable magnitude; the irrelevant
        # input spans the whole box
        lo = max(cfg["min_evidence"], SIGN_MARGIN)
        ctx = rng.integers(1, 3, size=size)
        u = rng.uniform(-u_max, u_max, size=(size, 2))
        sign = np.where(rng.uniform(size=size) < 0.5, -1.0, 1.0)
        mag = rng.uniform(lo, u_max, size=size)
        u[np.arange(size), ctx - 1] = sign * mag
        return u, ctx

    def make_trial(u, ctx, dW_input, dW_neuron) -> TrialBatch:
        size = len(ctx)
        v = np.zeros((size, 4))
        v[:, :2] = u
        v[np.arange(size), 1 + ctx] = 1.0
        target = np.sign(u[np.arange(size), ctx - 1])
        c = np.zeros((steps + 1, size))
        c[-1] = 1.0
        y = np.zeros((steps + 1, size, 1))
        y[-1, :, 0] = target
        noise = None
        if dW_input is not None:
            noise = NoiseBlock(cols=(0, 1), sigma_input=cfg["sigma_input"],
                               sigma_neuron=cfg["sigma_neuron"],
                               dW_input=dW_input, dW_neuron=dW_neuron)
        return TrialBatch(dt=dt, steps=steps, v=v, c=c, y=y, noise=noise,
                          meta={"ctx": ctx, "u": u, "target": target})

    def sample_batch(rng: Rng, size: int) -> TrialBatch:
        # antithetic pairs: each sampled (u, ctx) appears with +-dW, which
        # halves the noise contribution to the batch gradient
        root = np.sqrt(dt)
        if size % 2 == 0:
            half = size // 2
            u, ctx = sample_kappa_ctx(rng, half)
            u = np.concatenate([u, u])
            ctx = np.concatenate([ctx, ctx])
            dWi = rng.normal(size=(steps, half, 2, n)) * root
            dWn = rng.normal(size=(steps, half, n)) * root
            dW_input = np.concatenate([dWi, -dWi], axis=1)
            dW_neuron = np.concatenate([dWn, -dWn], axis=1)
        else:
            u, ctx = sample_kappa_ctx(rng, size)
            dW_input = rng.normal(size=(steps, size, 2, n)) * root
            dW_neuron = rng.normal(size=(steps, size, n)) * root
        return make_trial(u, ctx, dW_input, dW_neuron)

    def diffusion(params):
        # columns: per-neuron increments gated by b1, then b2, then the
        # isotropic neuron-noise block; q = 3n
        def sig(x, u, t):
            mat = np.zeros((n, 3 * n))
            idx = np.arange(n)
            mat[idx, idx] = cfg["sigma_input"] * params["B"][:, 0]
            mat[idx, n + idx] = cfg["sigma_input"] * params["B"][:, 1]
            mat[idx, 2 * n + idx] = cfg["sigma_neuron"]
            return mat

        return sig

    task = TaskSpec(
        task_id="context", kind="sde", n=n, d=4, out=1, m=2, dt=dt,
        t_end=t_end, hyper=cfg, init_params=init_params,
        sample_batch=sample_batch, chart=chart,
        field=lambda p: _rnn_field(p["W"], p["B"]),
        jac=lambda p: _rnn_jac(p["W"], p["B"]),
        diffusion=diffusion, x0=np.zeros(n), config=cfg,
    )
    task.make_trial = make_trial
    task.sample_kappa_ctx = sample_kappa_ctx
    return task


# ---------------------------------------------------------------------------
# sequential working memory (2 or 3 items)

WM_DEFAULTS = {
    "n": 100,
    "g": 0.5,
    "lr": 5e-3,
    "iterations": 3000,
    "batch_size": 32,
    "dt": 0.01,
    "item_duration": 1.0,
    "delay_min": 0.5,
    "delay_max": 3.5,
    "delay_analysis": 3.0,
    "go_width": 0.2,
    "readout_duration": 1.0,
}


def wm_task(items: int = 2, **overrides) -> TaskSpec:
    """Sequential angular working memory on a (hyper-)torus.

    Items theta_i arrive through [cos, sin] channels during windows
    [i-1, i); after a variable delay a go pulse (third channel) starts
    length-1 readout windows, one per item in presentation order.
    """
    if items not in (2, 3):
        raise ConfigError(f"items must be 2 or 3, got {items}")
    cfg = dict(WM_DEFAULTS)
    task_id = f"wm{items}"
    _apply_overrides(cfg, overrides, task_id)
    n, dt = cfg["n"], cfg["dt"]
    dur = cfg["item_duration"]
    input_end = items * dur
    t_max = input_end + cfg["delay_max"] + items * cfg["readout_duration"]
    steps = int(round(t_max / dt))
    per = int(round(cfg["readout_duration"] / dt))
    go_steps = int(round(cfg["go_width"] / dt))

    def init_params(rng: Rng) -> dict:
        return _rnn_init(rng, n, cfg["g"], d=3, out=2)

    def timeline(theta, h):
        """Forcing v(t) (steps+1, 3) and (c, y) rows for one trial."""
        g = time_grid(input_end + h + items * cfg["readout_duration"], dt)
        v = np.zeros((steps + 1, 3))
        for i in range(items):
            a, b = int(round(i * dur / dt)), int(round((i + 1) * dur / dt))
            v[a:b, 0] = np.cos(theta[i])
            v[a:b, 1] = np.sin(theta[i])
        go_idx = int(round((input_end + h) / dt))
        v[go_idx:go_idx + go_steps, 2] = 1.0
        c = np.zeros(steps + 1)
        y = np.zeros((steps + 1, 2))
        for i in range(items):
            a = go_idx + i * per
            b = a + per
            c[a:b] = dt
            y[a:b, 0] = np.cos(theta[i])
            y[a:b, 1] = np.sin(theta[i])
        return v, c, y, go_idx

    def make_trial(thetas, hs) -> TrialBatch:
        size = len(hs)
        v = np.zeros((steps + 1, size, 3))
        c = np.zeros((steps + 1, size))
        y = np.zeros((steps + 1, size, 2))
        go = np.zeros(size, dtype=int)
        for b in range(size):
            v[:, b], c[:, b], y[:, b], go[b] = timeline(thetas[b], hs[b])
        return TrialBatch(dt=dt, steps=steps, v=v, c=c, y=y,
                          meta={"theta": thetas, "h": hs, "go_idx": go})

    def sample_batch(rng: Rng, size: int) -> TrialBatch:
        thetas = rng.uniform(0.0, 2 * np.pi, size=(size, items))
        hs = rng.uniform(cfg["delay_min"], cfg["delay_max"], size=size)
        return make_trial(thetas, hs)

    def chart(h: Optional[float] = None) -> InputChart:
        h = cfg["delay_analysis"] if h is None else float(h)
        go_t0 = input_end + h
        windows = [(i * dur, (i + 1) * dur) for i in range(items)]

        def active(t):
            for i, (a, b) in enumerate(windows):
                if a <= t < b:
                    return i
            return None

        def u_fn(kappa, t):
            kappa = np.asarray(kappa, dtype=float)
            out = np.zeros(kappa.shape[:-1] + (3,))
            i = active(t)
            if i is not None:
                out[..., 0] = np.cos(kappa[..., i])
                out[..., 1] = np.sin(kappa[..., i])
            if go_t0 <= t < go_t0 + cfg["go_width"]:
                out[..., 2] = 1.0
            return out

        def du_fn(kappa, t):
            kappa = np.asarray(kappa, dtype=float)
            out = np.zeros(kappa.shape[:-1] + (3, items))
            i = active(t)
            if i is not None:
                out[..., 0, i] = -np.sin(kappa[..., i])
                out[..., 1, i] = np.cos(kappa[..., i])
            return out

        box = [[0.0, 2 * np.pi]] * items
        return InputChart(m=items, d=3, box=box, u_fn=u_fn, du_fn=du_fn,
                          periodic=tuple(range(items)))

    def readout_windows(h: Optional[float] = None):
        h = cfg["delay_analysis"] if h is None else float(h)
        t0 = input_end + h
        return [(t0 + i * cfg["readout_duration"],
                 t0 + (i + 1) * cfg["readout_duration"]) for i in range(items)]

    task = TaskSpec(
        task_id=task_id, kind="ode", n=n, d=3, out=2, m=items, dt=dt,
        t_end=input_end + cfg["delay_analysis"] + items * cfg["readout_duration"],
        hyper=cfg, init_params=init_params, sample_batch=sample_batch,
        chart=chart, field=lambda p: _rnn_field(p["W"], p["B"]),
        jac=lambda p: _rnn_jac(p["W"], p["B"]), x0=np.zeros(n), config=cfg,
    )
    task.items = items
    task.make_trial = make_trial
    task.readout_windows = readout_windows
    task.input_end = input_end
    return task


# ---------------------------------------------------------------------------
# Romo parametric working memory

ROMO_DEFAULTS = {
    "n": 100,
    "g": 0.5,
    "lr": 1e-3,
    "iterations": 2000,
    "batch_size": 32,
    "dt": 0.01,
    "u_lo": 0.5,
    "u_hi": 1.0,
    "t1": 4.0,
    "t2": 4.5,
    "t3": 7.0,
    "pulse1": (0.0, 0.5),
    "pulse2": (1.5, 2.0),
}


def romo_task(**overrides) -> TaskSpec:
    """Two sequential scalar pulses through one input vector; report which
    was larger, as a one-hot pair, after a delay."""
    cfg = dict(ROMO_DEFAULTS)
    _apply_overrides(cfg, overrides, "romo")
    n, dt = cfg["n"], cfg["dt"]
    t_end = cfg["t3"]
    steps = int(round(t_end / dt))
    grid = time_grid(t_end, dt)
    gate1 = ((grid >= cfg["pulse1"][0]) & (grid <= cfg["pulse1"][1])).astype(float)
    gate2 = ((grid >= cfg["pulse2"][0]) & (grid <= cfg["pulse2"][1])).astype(float)

    def init_params(rng: Rng) -> dict:
        return _rnn_init(rng, n, cfg["g"], d=1, out=2)

    def make_trial(u) -> TrialBatch:
        u = np.asarray(u, dtype=float)
        size = u.shape[0]
        v = (gate1[:, None] * u[:, 0] + gate2[:, None] * u[:, 1])[:, :, None]
        c = np.zeros((steps + 1, size))
        y = np.zeros((steps + 1, size, 2))
        k1 = int(round(cfg["t1"] / dt))
        k2 = int(round(cfg["t2"] / dt))
        c[:k1] = dt
        c[k2:] = dt
        y[k2:, :, 0] = (u[:, 0] > u[:, 1]).astype(float)
        y[k2:, :, 1] = (u[:, 0] < u[:, 1]).astype(float)
        return TrialBatch(dt=dt, steps=steps, v=v, c=c, y=y, meta={"u": u})

    def sample_batch(rng: Rng, size: int) -> TrialBatch:
        u = rng.uniform(cfg["u_lo"], cfg["u_hi"], size=(size, 2))
        bad = np.abs(u[:, 0] - u[:, 1]) < SIGN_MARGIN
        while np.any(bad):
            u[bad] = rng.uniform(cfg["u_lo"], cfg["u_hi"], size=(int(bad.sum()), 2))
            bad = np.abs(u[:, 0] - u[:, 1]) < SIGN_MARGIN
        return make_trial(u)

    def chart() -> InputChart:
        def u_fn(kappa, t):
            kappa = np.asarray(kappa, dtype=float)
            g1 = 1.0 if cfg["pulse1"][0] <= t <= cfg["pulse1"][1] else 0.0
            g2 = 1.0 if cfg["pulse2"][0] <= t <= cfg["pulse2"][1] else 0.0
            return (g1 * kappa[..., 0] + g2 * kappa[..., 1])[..., None]

        def du_fn(kappa, t):
            kappa = np.asarray(kappa, dtype=float)
            g1 = 1.0 if cfg["pulse1"][0] <= t <= cfg["pulse1"][1] else 0.0
            g2 = 1.0 if cfg["pulse2"][0] <= t <= cfg["pulse2"][1] else 0.0
            out = np.zeros(kappa.shape[:-1] + (1, 2))
            out[..., 0, 0] = g1
            out[..., 0, 1] = g2
            return out

        return InputChart(m=2, d=1, box=[[cfg["u_lo"], cfg["u_hi"]]] * 2,
                          u_fn=u_fn, du_fn=du_fn)

    task = TaskSpec(
        task_id="romo", kind="ode", n=n, d=1, out=2, m=2, dt=dt, t_end=t_end,
        hyper=cfg, init_params=init_params, sample_batch=sample_batch,
        chart=chart, field=lambda p: _rnn_field(p["W"], p["B"]),
        jac=lambda p: _rnn_jac(p["W"], p["B"]), x0=np.zeros(n), config=cfg,
    )
    task.make_trial = make_trial
    return task


# ---------------------------------------------------------------------------
# static circle classifier

STATIC_DEFAULTS = {
    "hidden": 3,
    "lr": 0.01,
    "iterations": 1000,
    "bins": 200,
    "input_noise_std": 0.05,
}


def static_circle_task(**overrides) -> TaskSpec:
    """Three-unit feedforward net classifying half-circles to +-1.

    y = tanh(D z), z = tanh(W x + b), x = [cos th, sin th] (+ training
    noise). The loss is the mean over 200 even angle bins.
    """
    cfg = dict(STATIC_DEFAULTS)
    _apply_overrides(cfg, overrides, "static_circle")
    hidden = cfg["hidden"]
    bins = cfg["bins"]
    thetas = np.arange(bins) * (2 * np.pi / bins)
    targets = np.where(thetas < np.pi, 1.0, -1.0)[:, None]

    def init_params(rng: Rng) -> dict:
        return {
            "W": rng.uniform(-0.5, 0.5, size=(hidden, 2)),
            "b": rng.uniform(-0.5, 0.5, size=hidden),
            "D": rng.uniform(-1.0 / 3.0, 1.0 / 3.0, size=(1, hidden)),
        }

    def training_inputs(rng: Optional[Rng]):
        x = np.column_stack([np.cos(thetas), np.sin(thetas)])
        if rng is not None and cfg["input_noise_std"] > 0:
            x = x + rng.normal(size=x.shape, std=cfg["input_noise_std"])
        return x, targets

    def chart() -> InputChart:
        def u_fn(kappa, t):
            kappa = np.asarray(kappa, dtype=float)
            return np.stack([np.cos(kappa[..., 0]), np.sin(kappa[..., 0])], axis=-1)

        def du_fn(kappa, t):
            kappa = np.asarray(kappa, dtype=float)
            return np.stack([-np.sin(kappa[..., 0]), np.cos(kappa[..., 0])],
                            axis=-1)[..., None]

        return InputChart(m=1, d=2, box=[[0.0, 2 * np.pi]], u_fn=u_fn,
                          du_fn=du_fn, periodic=(0,))

    task = TaskSpec(
        task_id="static_circle", kind="static", n=hidden, d=2, out=1, m=1,
        dt=0.0, t_end=0.0, hyper=cfg, init_params=init_params, chart=chart,
        config=cfg,
    )
    task.thetas = thetas
    task.targets = targets
    task.training_inputs = training_inputs
    return task


def static_hidden(params, theta):
    """Hidden activations z(theta) of the static net."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    x = np.column_stack([np.cos(theta), np.sin(theta)])
    return np.tanh(x @ params["W"].T + params["b"])


def static_metric(theta, params):
    """G_thth = |diag(phi'(Wx + b)) W dx/dth|^2, closed-form chain rule."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    x = np.column_stack([np.cos(theta), np.sin(theta)])
    dx = np.column_stack([-np.sin(theta), np.cos(theta)])
    pre = x @ params["W"].T + params["b"]
    dz = (1.0 - np.tanh(pre) ** 2) * (dx @ params["W"].T)
    g = np.sum(dz * dz, axis=-1)
    return g if g.shape[0] > 1 else float(g[0])


# ---------------------------------------------------------------------------
# E-I decision network (analysis only, no training)

EI_DEFAULTS = {
    "a": 0.9,
    "b": 0.3,
    "c": 1.2,
    "d": 0.6,
    "e": 0.4,
    "dt": 0.01,
    "t_end": 50.0,
    "u_points": 200,
    "t_points": 100,
}


@dataclass
class EIWeights:
    """Positive weights filling W = [[a,b,-c],[b,a,-c],[d,d,-e]].

    Construction verifies convergence to a stable fixed point for every
    u in [0, 1] by T = 50 (the line-attractor regime the analysis needs).
    """

    a: float
    b: float
    c: float
    d: float
    e: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "e"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"E-I weight {name} must be strictly positive")

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.a, self.b, -self.c],
            [self.b, self.a, -self.c],
            [self.d, self.d, -self.e],
        ])

    def validate(self, input_map, dt=0.01, t_end=50.0, u_points=50, tol=1e-6):
        W = self.matrix()
        u = np.linspace(0.0, 1.0, u_points)
        uv = np.column_stack([u, 1.0 - u])
        x = np.zeros((u_points, 3))
        steps = int(round(t_end / dt))
        forcing = uv @ input_map.T
        for _ in range(steps):
            k1 = np.tanh(x) @ W.T - x + forcing
            xp = x + dt * k1
            k2 = np.tanh(xp) @ W.T - xp + forcing
            x = x + 0.5 * dt * (k1 + k2)
        resid = np.abs(np.tanh(x) @ W.T - x + forcing).max()
        if resid > tol:
            raise ConfigError(
                f"E-I weights do not reach a fixed point by T={t_end} "
                f"(max |f| = {resid:.2e})")
        return x


def ei_decision_task(weights: Optional[EIWeights] = None, validate: bool = True,
                     **overrides) -> TaskSpec:
    """Fixed three-unit E-I network driven by the input line u -> [u, 1-u]."""
    cfg = dict(EI_DEFAULTS)
    _apply_overrides(cfg, overrides, "ei_decision")
    if weights is None:
        weights = EIWeights(cfg["a"], cfg["b"], cfg["c"], cfg["d"], cfg["e"])
    W = weights.matrix()
    input_map = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    if validate:
        weights.validate(input_map, dt=cfg["dt"], t_end=cfg["t_end"])
    params = {"W": W, "B": input_map, "D": np.zeros((1, 3))}

    def chart() -> InputChart:
        du = np.array([[1.0], [-1.0]])

        def u_fn(kappa, t):
            kappa = np.asarray(kappa, dtype=float)
            return np.stack([kappa[..., 0], 1.0 - kappa[..., 0]], axis=-1)

        return InputChart(m=1, d=2, box=[[0.0, 1.0]], u_fn=u_fn,
                          du_fn=lambda kappa, t: du)

    task = TaskSpec(
        task_id="ei_decision", kind="ode", n=3, d=2, out=1, m=1, dt=cfg["dt"],
        t_end=cfg["t_end"], hyper=cfg, init_params=lambda rng: {k: v.copy() for k, v in params.items()},
        chart=chart, field=lambda p: _rnn_field(p["W"], p["B"]),
        jac=lambda p: _rnn_jac(p["W"], p["B"]), x0=np.zeros(3), config=cfg,
    )
    task.weights = weights
    task.fixed_params = params
    return task


def ei_state_mesh(task: TaskSpec, u_points=None, t_points=None):
    """The u x time x units state mesh of the E-I analysis (200 x 100 x 3)."""
    cfg = task.config
    u_points = cfg["u_points"] if u_points is None else u_points
    t_points = cfg["t_points"] if t_points is None else t_points
    us = np.linspace(0.0, 1.0, u_points)
    t_save = np.round(np.linspace(task.dt, task.t_end, t_points)
                      / task.dt) * task.dt
    from .tangent import tangent_grid  # local import to avoid a cycle

    params = task.fixed_params
    times, xs, _, _ = tangent_grid(task.field(params), None, task.chart(),
                                   us[:, None], task.x0, t_save, task.dt)
    return us, times, np.transpose(xs, (1, 0, 2))  # (u, t, 3)


# ---------------------------------------------------------------------------
# registry + config validation

_BUILDERS = {
    "static_circle": static_circle_task,
    "ei_decision": ei_decision_task,
    "context": context_task,
    "wm2": lambda **kw: wm_task(items=2, **kw),
    "wm3": lambda **kw: wm_task(items=3, **kw),
    "romo": romo_task,
}

_DEFAULTS = {
    "static_circle": STATIC_DEFAULTS,
    "ei_decision": EI_DEFAULTS,
    "context": CONTEXT_DEFAULTS,
    "wm2": WM_DEFAULTS,
    "wm3": WM_DEFAULTS,
    "romo": ROMO_DEFAULTS,
}

CONFIG_SCHEMA_VERSION = 1


def _apply_overrides(cfg: dict, overrides: dict, task_id: str):
    for key, val in overrides.items():
        if key not in cfg:
            raise ConfigError(
                f"unknown config key {key!r} for task {task_id!r}; "
                f"valid keys: {sorted(cfg)}")
        cfg[key] = type(cfg[key])(val) if not isinstance(cfg[key], tuple) else tuple(val)


def make_task(task_id: str, overrides: Optional[dict] = None) -> TaskSpec:
    if task_id not in _BUILDERS:
        raise ConfigError(
            f"unknown task id {task_id!r}; valid ids: {', '.join(TASK_IDS)}")
    return _BUILDERS[task_id](**(overrides or {}))


def config_schema() -> dict:
    """JSON schema for task config documents (unknown keys are errors)."""
    per_task = {}
    for tid, defaults in _DEFAULTS.items():
        props = {}
        for key, val in defaults.items():
            if isinstance(val, bool):
                props[key] = {"type": "boolean"}
            elif isinstance(val, int):
                props[key] = {"type": "number"}
            elif isinstance(val, float):
                props[key] = {"type": "number"}
            elif isinstance(val, tuple):
                props[key] = {"type": "array", "items": {"type": "number"},
                              "minItems": 2, "maxItems": 2}
            else:
                props[key] = {}
        per_task[tid] = props
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "manifold-dyn task config",
        "type": "object",
        "properties": {
            "schema_version": {"const": CONFIG_SCHEMA_VERSION},
            "task_id": {"enum": list(TASK_IDS)},
            "overrides": {"type": "object"},
        },
        "required": ["schema_version", "task_id"],
        "additionalProperties": False,
        "per_task_override_keys": {t: sorted(p) for t, p in per_task.items()},
    }


def load_task_config(path) -> tuple[str, dict]:
    """Validate a task config JSON file; returns (task_id, overrides)."""
    import jsonschema

    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    schema = config_schema()
    extras = schema.pop("per_task_override_keys")
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config file {path} failed validation: {exc.message}")
    task_id = doc["task_id"]
    overrides = doc.get("overrides", {})
    for key in overrides:
        if key not in extras[task_id]:
            raise ConfigError(
                f"unknown override {key!r} for task {task_id!r}; "
                f"valid keys: {extras[task_id]}")
    return task_id, overrides
