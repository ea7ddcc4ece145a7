"""Reverse-mode gradients through the fixed-step solvers.

The recurrent tasks all share the drift f(x, t) = W phi(x) - x + B v(t)
with phi = tanh, optional additive noise, and quadratic readout losses
sum_k c_k |D phi(x_k) - y*_k|^2. One forward/backward pair below covers
them, exactly differentiating the discrete Heun update (the full forward
trajectory is stored). The static classifier has its own closed pair.

The warping-constrained loss needs gradients of metric entries, i.e. of
the sensitivity matrix A(T); `warp_forward_backward` differentiates
through the joint (x, A) Heun system for that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import TrainingDivergenceError

GUARD = 1e8


@dataclass
class NoiseBlock:
    """Additive-noise description for one trial batch.

    Input noise is per-neuron, gated by the input columns: the state noise
    per step is sigma_input * sum_q B[:, cols[q]] * dW_input[..., q, :]
    plus sigma_neuron * dW_neuron. All increments have variance dt.
    """

    cols: tuple  # indices of B columns that carry input noise
    sigma_input: float
    sigma_neuron: float
    dW_input: np.ndarray  # (steps, batch, len(cols), n)
    dW_neuron: Optional[np.ndarray]  # (steps, batch, n) or None


@dataclass
class TrialBatch:
    """A batch of trials on one time grid.

    v is (batch, d) for constant-in-time forcing or (steps+1, batch, d);
    c (steps+1, batch) holds loss weights, y (steps+1, batch, out) targets.
    """

    dt: float
    steps: int
    v: np.ndarray
    c: np.ndarray
    y: np.ndarray
    noise: Optional[NoiseBlock] = None
    meta: Optional[dict] = None

    @property
    def batch(self):
        return self.c.shape[1]

    def v_at(self, k):
        return self.v if self.v.ndim == 2 else self.v[k]


def _state_noise(params, trial):
    nb = trial.noise
    if nb is None:
        return None
    steps, bsz, n = trial.steps, trial.c.shape[1], params["W"].shape[0]
    if nb.sigma_neuron != 0.0 and nb.dW_neuron is not None:
        su = nb.sigma_neuron * nb.dW_neuron
    else:
        su = np.zeros((steps, bsz, n))
    if nb.sigma_input != 0.0 and len(nb.cols):
        bcols = params["B"][:, list(nb.cols)]  # (n, q)
        su += nb.sigma_input * np.einsum("kbqn,nq->kbn", nb.dW_input, bcols)
    return su


def rnn_forward(params, trial: TrialBatch, record: bool = False):
    """Heun forward pass; returns (loss, saved) where saved feeds the backward.

    loss is the batch mean of sum_k c_k |D phi(x_k) - y_k|^2.
    """
    W, B, D = params["W"], params["B"], params["D"]
    n = W.shape[0]
    bsz = trial.batch
    dt = trial.dt
    su_all = _state_noise(params, trial)
    const_v = trial.v.ndim == 2
    if const_v:
        forcing = trial.v @ B.T  # constant-in-time drive, computed once
    x = np.zeros((bsz, n))
    phis = np.empty((trial.steps + 1, bsz, n)) if record else None
    phips = np.empty((trial.steps, bsz, n)) if record else None
    active = np.flatnonzero(trial.c.any(axis=1))
    active_set = set(int(a) for a in active)
    phi = np.tanh(x)
    if record:
        phis[0] = phi
    loss = 0.0
    if 0 in active_set:
        e = phi @ D.T - trial.y[0]
        loss += float(np.sum(trial.c[0] * np.sum(e * e, axis=-1)))
    guard_every = 25
    for k in range(trial.steps):
        k1 = phi @ W.T - x + (forcing if const_v else trial.v[k] @ B.T)
        if su_all is not None:
            su = su_all[k]
            xp = x + dt * k1 + su
        else:
            xp = x + dt * k1
        phip = np.tanh(xp)
        k2 = phip @ W.T - xp + (forcing if const_v else trial.v[k + 1] @ B.T)
        x = x + (0.5 * dt) * (k1 + k2)
        if su_all is not None:
            x += su
        phi = np.tanh(x)
        if record:
            phips[k] = phip
            phis[k + 1] = phi
        if (k + 1) in active_set:
            e = phi @ D.T - trial.y[k + 1]
            loss += float(np.sum(trial.c[k + 1] * np.sum(e * e, axis=-1)))
        if (k + 1) % guard_every == 0 or k + 1 == trial.steps:
            if not np.isfinite(x).all() or np.abs(x).max() > GUARD:
                raise TrainingDivergenceError(
                    f"forward pass diverged near step {k + 1} (t={dt * (k + 1):.3g})")
    loss /= bsz
    saved = {"phis": phis, "phips": phips, "active": active_set}
    return loss, saved


def rnn_backward(params, trial: TrialBatch, saved):
    """Exact gradient of the discretized loss from a recorded forward pass."""
    W, B, D = params["W"], params["B"], params["D"]
    phis, phips = saved["phis"], saved["phips"]
    active_set = saved["active"]
    dt = trial.dt
    half_dt = 0.5 * dt
    bsz = trial.batch
    gW = np.zeros_like(W)
    gB = np.zeros_like(B)
    gD = np.zeros_like(D)
    nb = trial.noise
    const_v = trial.v.ndim == 2
    gv_acc = np.zeros((bsz, W.shape[0])) if const_v else None
    gsu_all = (np.empty((trial.steps, bsz, W.shape[0]))
               if nb is not None and nb.sigma_input != 0.0 and len(nb.cols) else None)

    def loss_grad(k, phi, lam):
        nonlocal gD
        if k not in active_set:
            return lam
        r = 2.0 * trial.c[k][:, None] * (phi @ D.T - trial.y[k])
        gD += r.T @ phi
        return lam + (r @ D) * (1.0 - phi * phi)

    lam = loss_grad(trial.steps, phis[trial.steps], np.zeros_like(phis[0]))
    for k in range(trial.steps - 1, -1, -1):
        phi = phis[k]
        phip = phips[k]

        g2 = half_dt * lam
        gW += g2.T @ phip
        gxp = (g2 @ W) * (1.0 - phip * phip) - g2

        g1 = half_dt * lam + dt * gxp
        lam_new = lam + gxp

        gW += g1.T @ phi
        g12 = g1 + g2
        if const_v:
            gv_acc += g12
        else:
            gB += g2.T @ trial.v[k + 1]
            gB += g1.T @ trial.v[k]
        lam_new = lam_new + (g1 @ W) * (1.0 - phi * phi) - g1

        if gsu_all is not None:
            gsu_all[k] = lam + gxp

        lam = loss_grad(k, phi, lam_new)

    if const_v:
        gB += gv_acc.T @ trial.v
    if gsu_all is not None:
        gB[:, list(nb.cols)] += nb.sigma_input * np.einsum(
            "kbn,kbqn->nq", gsu_all, nb.dW_input)

    return {"W": gW / bsz, "B": gB / bsz, "D": gD / bsz}


def rnn_loss_grads(params, trial: TrialBatch):
    loss, saved = rnn_forward(params, trial, record=True)
    return loss, rnn_backward(params, trial, saved)


def rnn_outputs(params, trial: TrialBatch, at_steps):
    """Forward-only readouts y = D phi(x) at the requested step indices."""
    W, B, D = params["W"], params["B"], params["D"]
    su_all = _state_noise(params, trial)
    x = np.zeros((trial.batch, W.shape[0]))
    dt = trial.dt
    want = {}
    for i, k in enumerate(at_steps):
        want.setdefault(int(k), []).append(i)
    out = np.empty((len(at_steps), trial.batch, D.shape[0]))
    for i in want.get(0, ()):
        out[i] = np.tanh(x) @ D.T
    for k in range(trial.steps):
        phi = np.tanh(x)
        k1 = phi @ W.T - x + trial.v_at(k) @ B.T
        su = su_all[k] if su_all is not None else 0.0
        xp = x + dt * k1 + su
        k2 = np.tanh(xp) @ W.T - xp + trial.v_at(k + 1) @ B.T
        x = x + (0.5 * dt) * (k1 + k2) + su
        for i in want.get(k + 1, ()):
            out[i] = np.tanh(x) @ D.T
    return out


# ---------------------------------------------------------------------------
# static two-layer classifier


def static_forward(params, x_in, targets):
    """loss, cache for y = tanh(D z), z = tanh(W x + b); mean over samples."""
    W, b, D = params["W"], params["b"], params["D"]
    pre1 = x_in @ W.T + b
    z = np.tanh(pre1)
    pre2 = z @ D.T
    y = np.tanh(pre2)
    e = y - targets
    loss = float(np.mean(np.sum(e * e, axis=-1)))
    return loss, (x_in, z, y, e)


def static_backward(params, cache):
    W, b, D = params["W"], params["b"], params["D"]
    x_in, z, y, e = cache
    bsz = x_in.shape[0]
    gy = 2.0 * e / bsz
    gpre2 = gy * (1.0 - y * y)
    gD = np.einsum("bo,bh->oh", gpre2, z)
    gz = gpre2 @ D
    gpre1 = gz * (1.0 - z * z)
    gW = np.einsum("bh,bi->hi", gpre1, x_in)
    gb = gpre1.sum(axis=0)
    return {"W": gW, "b": gb, "D": gD}


def static_loss_grads(params, x_in, targets):
    loss, cache = static_forward(params, x_in, targets)
    return loss, static_backward(params, cache)


# ---------------------------------------------------------------------------
# joint (x, A) system for the warping-constrained loss


def warp_forward(params, trial: TrialBatch, sens_cols, rel_idx, c_target):
    """Zero-noise joint forward; returns the warp penalty and recordings.

    sens_cols are the B-column indices whose sensitivities are tracked
    (evidence channels); rel_idx indexes the relevant one within sens_cols.
    The penalty is mean_b (c_target - G_rel/G_irr)^2 at the final step.
    """
    W, B = params["W"], params["B"]
    n = W.shape[0]
    bsz = trial.batch
    dt = trial.dt
    m = len(sens_cols)
    Bev = B[:, list(sens_cols)]
    x = np.zeros((bsz, n))
    A = np.zeros((bsz, n, m))
    xs = np.empty((trial.steps + 1, bsz, n))
    xps = np.empty((trial.steps, bsz, n))
    As = np.empty((trial.steps + 1, bsz, n, m))
    Aps = np.empty((trial.steps, bsz, n, m))
    xs[0] = x
    As[0] = A
    for k in range(trial.steps):
        vk = trial.v_at(k)
        vk1 = trial.v_at(k + 1)
        phi = np.tanh(x)
        dphi = 1.0 - phi * phi
        k1x = phi @ W.T - x + vk @ B.T
        k1A = np.einsum("ij,bjm->bim", W, dphi[:, :, None] * A) - A + Bev[None]
        xp = x + dt * k1x
        Ap = A + dt * k1A
        phip = np.tanh(xp)
        dphip = 1.0 - phip * phip
        k2x = phip @ W.T - xp + vk1 @ B.T
        k2A = np.einsum("ij,bjm->bim", W, dphip[:, :, None] * Ap) - Ap + Bev[None]
        x = x + (0.5 * dt) * (k1x + k2x)
        A = A + (0.5 * dt) * (k1A + k2A)
        xps[k] = xp
        Aps[k] = Ap
        xs[k + 1] = x
        As[k + 1] = A
        if not np.isfinite(x).all() or np.abs(x).max() > GUARD:
            raise TrainingDivergenceError(
                f"warp forward diverged at step {k + 1}")
    a_rel = A[:, :, rel_idx]
    irr_idx = 1 - rel_idx if m == 2 else [j for j in range(m) if j != rel_idx][0]
    a_irr = A[:, :, irr_idx]
    g_rel = np.sum(a_rel * a_rel, axis=-1)
    g_irr = np.sum(a_irr * a_irr, axis=-1)
    ratio = g_rel / np.maximum(g_irr, 1e-300)
    resid = c_target - ratio
    penalty = float(np.mean(resid * resid))
    saved = {"xs": xs, "xps": xps, "As": As, "Aps": Aps,
             "g_rel": g_rel, "g_irr": g_irr, "resid": resid,
             "rel_idx": rel_idx, "irr_idx": irr_idx}
    return penalty, saved


def warp_backward(params, trial: TrialBatch, sens_cols, saved):
    """Gradient of the warp penalty w.r.t. W and B through the joint system."""
    W, B = params["W"], params["B"]
    xs, xps, As, Aps = saved["xs"], saved["xps"], saved["As"], saved["Aps"]
    bsz = trial.batch
    dt = trial.dt
    m = len(sens_cols)
    cols = list(sens_cols)
    gW = np.zeros_like(W)
    gB = np.zeros_like(B)
    gBev = np.zeros((W.shape[0], m))

    # seed adjoints from the penalty at the final step
    rel, irr = saved["rel_idx"], saved["irr_idx"]
    g_irr = np.maximum(saved["g_irr"], 1e-300)
    dpen_dratio = (-2.0 * saved["resid"]) / bsz
    Lam = np.zeros_like(As[0])
    Lam[:, :, rel] = dpen_dratio[:, None] * 2.0 * As[-1][:, :, rel] / g_irr[:, None]
    Lam[:, :, irr] = dpen_dratio[:, None] * (
        -2.0 * saved["g_rel"][:, None] * As[-1][:, :, irr] / (g_irr**2)[:, None])
    lam = np.zeros_like(xs[0])

    for k in range(trial.steps - 1, -1, -1):
        x, xp = xs[k], xps[k]
        A, Ap = As[k], Aps[k]
        vk = trial.v_at(k)
        vk1 = trial.v_at(k + 1)
        phi = np.tanh(x)
        phip = np.tanh(xp)
        dphi = 1.0 - phi * phi
        dphip = 1.0 - phip * phip
        ddphi = -2.0 * phi * dphi
        ddphip = -2.0 * phip * dphip

        # x' = x + dt/2 (k1x + k2x); A' = A + dt/2 (k1A + k2A)
        G1A = (0.5 * dt) * Lam
        G2A = (0.5 * dt) * Lam
        g1 = (0.5 * dt) * lam
        g2 = (0.5 * dt) * lam
        lam_new = lam.copy()
        Lam_new = Lam.copy()

        # k2A = W (dphip . Ap) - Ap + Bev
        WtG2A = np.einsum("ji,bjm->bim", W, G2A)
        gW += np.einsum("bim,bjm->ij", G2A, dphip[:, :, None] * Ap)
        gBev += G2A.sum(axis=0)
        gAp = dphip[:, :, None] * WtG2A - G2A
        gxp_A = ddphip * np.einsum("bim,bim->bi", WtG2A, Ap)

        # k2x = W phip - xp + v B
        gW += np.einsum("bn,bm->nm", g2, phip)
        gB += np.einsum("bn,bd->nd", g2, vk1)
        gxp = (g2 @ W) * dphip - g2 + gxp_A

        # xp = x + dt k1x ; Ap = A + dt k1A
        lam_new += gxp
        g1 = g1 + dt * gxp
        Lam_new += gAp
        G1A = G1A + dt * gAp

        # k1A = W (dphi . A) - A + Bev
        WtG1A = np.einsum("ji,bjm->bim", W, G1A)
        gW += np.einsum("bim,bjm->ij", G1A, dphi[:, :, None] * A)
        gBev += G1A.sum(axis=0)
        Lam_new += dphi[:, :, None] * WtG1A - G1A
        lam_new += ddphi * np.einsum("bim,bim->bi", WtG1A, A)

        # k1x = W phi - x + v B
        gW += np.einsum("bn,bm->nm", g1, phi)
        gB += np.einsum("bn,bd->nd", g1, vk)
        lam_new += (g1 @ W) * dphi - g1

        lam = lam_new
        Lam = Lam_new

    gB[:, cols] += gBev
    return {"W": gW, "B": gB, "D": np.zeros_like(params["D"])}


def warp_loss_grads(params, trial: TrialBatch, sens_cols, rel_idx, c_target):
    penalty, saved = warp_forward(params, trial, sens_cols, rel_idx, c_target)
    return penalty, warp_backward(params, trial, sens_cols, saved)
