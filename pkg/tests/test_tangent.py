import numpy as np
import pytest

from manifold_dyn.dynamics import InputChart, VectorField, WienerPath
from manifold_dyn.errors import DegeneratePerturbationError, PsdViolationError
from manifold_dyn.numerics import Rng, sym_eig
from manifold_dyn.tangent import (JacobianRule, adjoint_tangent, assemble_metric,
                                  fd_tangent, metric_eigs, tangent_grid)


def linear_relax_system():
    """x' = -x + kappa: a(t) = 1 - exp(-t) in closed form."""
    field = VectorField(n=1, d=1, f=lambda x, u, t: -x + u)
    chart = InputChart(m=1, d=1, box=[[0.0, 2.0]],
                       u_fn=lambda k, t: np.asarray(k, dtype=float).copy())
    jac = JacobianRule(j_x=lambda x, u, t: -np.ones((1, 1)),
                       j_u=lambda x, u, t: np.ones((1, 1)),
                       apply_j_x=lambda x, u, t, a: -a)
    return field, chart, jac


def random_rnn(n=12, m=2, seed=0):
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(n, n)) * 0.5 / np.sqrt(n)
    B = rng.normal(size=(n, m)) * 0.7
    field = VectorField(n=n, d=m, f=lambda x, u, t: np.tanh(x) @ W.T - x + u @ B.T)
    chart = InputChart(m=m, d=m, box=[[-1.0, 1.0]] * m,
                       u_fn=lambda k, t: np.asarray(k, dtype=float).copy())
    eye = np.eye(n)
    jac = JacobianRule(
        j_x=lambda x, u, t: W * (1 - np.tanh(x) ** 2)[..., None, :] - eye,
        j_u=lambda x, u, t: B,
        apply_j_x=lambda x, u, t, a: np.einsum(
            "ij,...jm->...im", W, (1 - np.tanh(x) ** 2)[..., None] * a) - a)
    return field, chart, jac


class TestAdjointTangent:
    def test_linear_closed_form(self):
        field, chart, jac = linear_relax_system()
        for t in (0.5, 1.0, 2.0):
            tb = adjoint_tangent(field, jac, chart, [0.7], [0.0], [t], 1e-3)[0]
            assert abs(tb.A[0, 0] - (1 - np.exp(-t))) < 1e-4

    def test_A_zero_at_t0(self):
        field, chart, jac = random_rnn()
        tb = adjoint_tangent(field, jac, chart, [0.3, -0.2], np.zeros(12),
                             [0.0, 1.0], 0.01)[0]
        assert np.all(tb.A == 0.0)

    def test_agrees_with_fd_on_rnn(self):
        field, chart, jac = random_rnn(n=20, seed=3)
        kappa = np.array([0.4, -0.6])
        x0 = np.zeros(20)
        for t in (1.0, 3.0):
            tb_adj = adjoint_tangent(field, jac, chart, kappa, x0, [t], 1e-3)[0]
            tb_fd = fd_tangent(field, chart, kappa, x0, t, 1e-3, delta=1e-4)
            for i in range(2):
                rel = (np.linalg.norm(tb_adj.A[:, i] - tb_fd.A[:, i])
                       / np.linalg.norm(tb_fd.A[:, i]))
                assert rel <= 1e-3

    def test_sde_frozen_path_adjoint_matches_fd(self):
        field, chart, jac = random_rnn(n=10, seed=4)
        sig = np.random.default_rng(5).normal(size=(10, 3)) * 0.3
        diffusion = lambda x, u, t: sig
        path = WienerPath.sample(Rng(6), 3, 2.0, 1e-3)
        kappa = np.array([0.2, 0.5])
        x0 = np.zeros(10)
        tb_adj = adjoint_tangent(field, jac, chart, kappa, x0, [2.0], 1e-3,
                                 diffusion=diffusion, path=path)[0]
        tb_fd = fd_tangent(field, chart, kappa, x0, 2.0, 1e-3, delta=1e-4,
                           diffusion=diffusion, path=path)
        for i in range(2):
            rel = (np.linalg.norm(tb_adj.A[:, i] - tb_fd.A[:, i])
                   / np.linalg.norm(tb_fd.A[:, i]))
            assert rel <= 1e-3


class TestFdTangent:
    def test_linear_closed_form(self):
        field, chart, _ = linear_relax_system()
        tb = fd_tangent(field, chart, [0.7], [0.0], 1.0, 1e-3, delta=1e-4)
        assert abs(tb.A[0, 0] - (1 - np.exp(-1.0))) < 1e-3

    def test_kappa_independent_field(self):
        field = VectorField(n=3, d=1, f=lambda x, u, t: -x)
        chart = InputChart(m=1, d=1, box=[[0.0, 1.0]],
                           u_fn=lambda k, t: np.asarray(k, dtype=float).copy())
        tb = fd_tangent(field, chart, [0.5], [1.0, 2.0, 3.0], 1.0, 0.01)
        assert np.abs(tb.A).max() <= 1e-9

    def test_central_difference_order(self):
        # halving delta shrinks the delta^2 truncation term by ~4
        field = VectorField(n=1, d=1, f=lambda x, u, t: -x + u**3)
        chart = InputChart(m=1, d=1, box=[[0.0, 2.0]],
                           u_fn=lambda k, t: np.asarray(k, dtype=float).copy())
        exact = 3 * 0.9**2 * (1 - np.exp(-1.0))  # d/dk of k^3 (1 - e^-t)
        errs = []
        for delta in (1e-3, 5e-4):
            tb = fd_tangent(field, chart, [0.9], [0.0], 1.0, 1e-3, delta=delta)
            errs.append(abs(tb.A[0, 0] - exact))
        # both errors dominated by the shared dt-discretization floor;
        # their *difference* is the delta^2 term
        diff = abs(errs[0] - errs[1])
        assert diff < 1e-5

    def test_degenerate_perturbation(self):
        field, chart, _ = linear_relax_system()
        with pytest.raises(DegeneratePerturbationError):
            fd_tangent(field, chart, [0.7], [0.0], 1.0, 0.01, delta=1e-12)

    def test_one_sided_at_boundary(self):
        field, chart, _ = linear_relax_system()
        tb = fd_tangent(field, chart, [0.0], [0.0], 1.0, 1e-3, delta=1e-4)
        assert abs(tb.A[0, 0] - (1 - np.exp(-1.0))) < 1e-3


class TestAssembleMetric:
    def test_zero_A_single_nonzero_entry(self):
        from manifold_dyn.tangent import TangentBasis
        f = np.array([1.0, 2.0])
        tb = TangentBasis(f_vec=f, A=np.zeros((2, 2)), t=0.0,
                          kappa=np.zeros(2), x=np.zeros(2))
        g = assemble_metric(tb).G
        assert g[0, 0] == f @ f
        assert np.all(g[1:, :] == 0) and np.all(g[:, 1:] == 0)

    def test_zero_f_orthonormal_A(self):
        from manifold_dyn.tangent import TangentBasis
        A = np.eye(3)[:, :2]
        tb = TangentBasis(f_vec=np.zeros(3), A=A, t=1.0,
                          kappa=np.zeros(2), x=np.zeros(3))
        g = assemble_metric(tb).G
        assert np.allclose(g, np.diag([0.0, 1.0, 1.0]))

    def test_equals_gram_of_stacked_jacobian(self):
        from manifold_dyn.tangent import TangentBasis
        rng = np.random.default_rng(9)
        f = rng.normal(size=5)
        A = rng.normal(size=(5, 3))
        tb = TangentBasis(f_vec=f, A=A, t=1.0, kappa=np.zeros(3), x=np.zeros(5))
        g = assemble_metric(tb).G
        J = np.column_stack([f, A])
        assert np.allclose(g, J.T @ J, atol=1e-14)


class TestMetricEigs:
    def test_rank_deficient_t0(self):
        from manifold_dyn.tangent import TangentBasis
        tb = TangentBasis(f_vec=np.array([2.0, 0.0]), A=np.zeros((2, 2)),
                          t=0.0, kappa=np.zeros(2), x=np.zeros(2))
        vals = metric_eigs(assemble_metric(tb))
        assert np.isclose(vals[0], 4.0)
        assert np.all(np.abs(vals[1:]) < 1e-14)

    def test_identity(self):
        vals = metric_eigs(np.eye(3))
        assert np.allclose(vals, 1.0)

    def test_matches_sym_eig(self):
        rng = np.random.default_rng(10)
        J = rng.normal(size=(6, 3))
        g = J.T @ J
        assert np.allclose(metric_eigs(g), sym_eig(g)[0])

    def test_normalization(self):
        vals = metric_eigs(np.diag([4.0, 1.0]), normalize=True, reference=4.0)
        assert np.allclose(vals, [1.0, 0.25])

    def test_negative_rejected(self):
        with pytest.raises(PsdViolationError):
            metric_eigs(np.diag([1.0, -0.5]))


class TestPerTaskAdjointFdAgreement:
    @pytest.mark.parametrize("task_id,probes", [
        ("context", [(1.0, [0.1, -0.08]), (4.0, [-0.15, 0.12])]),
        ("wm2", [(1.5, [0.7, 2.2]), (4.0, [3.0, 5.5])]),
        ("wm3", [(4.5, [0.7, 2.2, 4.0])]),
        ("romo", [(1.0, [0.8, 0.6]), (5.0, [0.6, 0.9])]),
        ("ei_decision", [(2.0, [0.3]), (20.0, [0.7])]),
    ])
    def test_untrained_networks(self, task_id, probes):
        # the adjoint and finite-difference routes agree per task chart
        # (window gating, periodicity, cue channels all exercised)
        from manifold_dyn.tasks import make_task

        overrides = {} if task_id == "ei_decision" else {"n": 12}
        task = make_task(task_id, overrides)
        params = (task.fixed_params if task_id == "ei_decision"
                  else task.init_params(Rng(17)))
        field, jac = task.field(params), task.jac(params)
        chart = task.chart()
        for t, kappa in probes:
            tb = adjoint_tangent(field, jac, chart, kappa, task.x0, [t], 1e-3)[0]
            fd = fd_tangent(field, chart, np.asarray(kappa), task.x0, t, 1e-3,
                            delta=1e-4)
            for i in range(chart.m):
                denom = max(np.linalg.norm(fd.A[:, i]), 1e-12)
                rel = np.linalg.norm(tb.A[:, i] - fd.A[:, i]) / denom
                assert rel <= 1e-3, (task_id, t, i, rel)


class TestRankBound:
    def test_local_pca_rank_at_most_m_plus_one(self):
        # states sampled in a small (t, kappa) ball of a smooth system stay
        # within an (m+1)-dimensional patch at the 1e-3 threshold; probed
        # after the transient so second-order terms sit below threshold
        field, chart, jac = random_rnn(n=15, m=2, seed=12)
        rng = np.random.default_rng(13)
        t0, k0 = 4.0, np.array([0.1, -0.3])
        dt = 0.005
        pts = []
        for _ in range(60):
            t = round((t0 + rng.uniform(-0.05, 0.05)) / dt) * dt
            kap = k0 + rng.uniform(-0.02, 0.02, size=2)
            _, xs, _, _ = tangent_grid(field, None, chart, kap[None], np.zeros(15),
                                       [t], dt)
            pts.append(xs[0, 0])
        X = np.array(pts)
        X = X - X.mean(axis=0)
        svals = np.linalg.svd(X, compute_uv=False)
        assert np.sum(svals > 1e-3 * svals[0]) <= 3
