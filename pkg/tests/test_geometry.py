import numpy as np
import pytest

from manifold_dyn.dynamics import InputChart, VectorField
from manifold_dyn.errors import ConfigError, MeshError, MetricViolationError
from manifold_dyn.geometry import (SurfaceMesh, coordinate_arclength,
                                   curvature_extremum_patch, gaussian_curvature,
                                   geodesic_gridlines, mesh_surface)


def torus_mesh(gsize, R=2.0, r=1.0, rotate=None, n_extra=0):
    th = np.arange(gsize) * (2 * np.pi / gsize)
    U, V = np.meshgrid(th, th, indexing="ij")
    states = np.stack([(R + r * np.cos(V)) * np.cos(U),
                       (R + r * np.cos(V)) * np.sin(U),
                       r * np.sin(V)], axis=-1)
    if n_extra:
        states = np.concatenate(
            [states, np.zeros(states.shape[:2] + (n_extra,))], axis=-1)
    if rotate is not None:
        states = states @ rotate.T
    return SurfaceMesh(theta1=th, theta2=th, t=0.0, states=states), U, V


def torus_K(V, R=2.0, r=1.0):
    return np.cos(V) / (r * (R + r * np.cos(V)))


class TestGaussianCurvature:
    def test_analytic_torus(self):
        mesh, U, V = torus_mesh(200)
        curv = gaussian_curvature(mesh)
        K_true = torus_K(V)
        err = np.nanmax(np.abs(curv.K - K_true))
        assert err <= 0.05 * np.abs(K_true).max()
        assert np.isclose(curv.K[0, 0], 1.0 / 3.0, atol=0.02)  # outer equator
        mid = 100
        assert np.isclose(curv.K[0, mid], -1.0, atol=0.05)  # inner equator

    def test_gauss_bonnet(self):
        mesh, _, _ = torus_mesh(200)
        curv = gaussian_curvature(mesh)
        total, total_abs = curv.total_curvature()
        assert abs(total) <= 0.05 * total_abs

    def test_cylinder_flat(self):
        g = 128
        th = np.arange(g) * (2 * np.pi / g)
        h = np.arange(g) * (2 * np.pi / g)
        T, H = np.meshgrid(th, h, indexing="ij")
        states = np.stack([np.cos(T), np.sin(T), H], axis=-1)
        mesh = SurfaceMesh(theta1=th, theta2=h, t=0.0, states=states,
                           periodic=(True, False))
        curv = gaussian_curvature(mesh)
        assert np.nanmax(np.abs(curv.K[curv.valid])) <= 1e-3
        assert not curv.valid[:, -1].any()  # non-periodic trailing rows dropped

    def test_sphere_patch(self):
        # interior of a non-periodic parameter patch of a radius-2 sphere
        r = 2.0
        g = 320
        u = np.linspace(0.5, 2.0, g)  # polar angle, away from the poles
        v = np.linspace(0.0, 1.5, g)
        U, V = np.meshgrid(u, v, indexing="ij")
        states = np.stack([r * np.sin(U) * np.cos(V),
                           r * np.sin(U) * np.sin(V),
                           r * np.cos(U)], axis=-1)
        mesh = SurfaceMesh(theta1=u, theta2=v, t=0.0, states=states,
                           periodic=(False, False))
        curv = gaussian_curvature(mesh)
        K_in = curv.K[curv.valid]
        assert np.abs(K_in - 1 / r**2).max() <= 0.05 * (1 / r**2)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(0)
        q, _ = np.linalg.qr(rng.normal(size=(7, 7)))
        mesh, _, V = torus_mesh(100, n_extra=4)
        plain = gaussian_curvature(mesh)
        rotated, _, _ = torus_mesh(100, rotate=q, n_extra=4)
        rot = gaussian_curvature(rotated)
        diff = np.nanmax(np.abs(plain.K - rot.K))
        assert diff <= 1e-8 * np.nanmax(np.abs(plain.K))

    def test_spacing_guard(self):
        mesh, _, _ = torus_mesh(40)  # spacing 0.05 pi, too coarse
        with pytest.raises(MeshError):
            gaussian_curvature(mesh)

    def test_extremum_patch(self):
        mesh, _, V = torus_mesh(100)
        curv = gaussian_curvature(mesh)
        patch = curvature_extremum_patch(curv, "min")
        # minimum curvature sits on the inner equator theta2 = pi
        assert abs(patch["center"][1] - np.pi) < 0.1
        assert patch["states"].shape[0] == patch["K"].shape[0]


class TestArclength:
    def test_circle_radius_two(self):
        # G = 4 along the circle: length over [0, pi] is 2 pi
        arc = coordinate_arclength(lambda mu: 4.0 * np.ones_like(mu),
                                   [0.0, np.pi], 256)
        assert abs(arc.total - 2 * np.pi) < 1e-3

    def test_identity_metric_exact(self):
        arc = coordinate_arclength(lambda mu: np.ones_like(mu), [0.0, 1.0], 100)
        assert np.allclose(arc.sqrt_cum, arc.mu)

    def test_monotone_and_additive(self):
        sampler = lambda mu: 1.0 + np.sin(mu) ** 2
        arc = coordinate_arclength(sampler, [0.0, 2.0], 1000)
        assert np.all(np.diff(arc.sqrt_cum) >= 0)
        # additivity over subintervals (same grid alignment)
        a1 = coordinate_arclength(sampler, [0.0, 1.0], 500)
        a2 = coordinate_arclength(sampler, [1.0, 2.0], 500)
        assert abs((a1.total + a2.total) - arc.total) < 1e-10

    def test_refinement_oracle_static_net(self):
        from manifold_dyn import make_task, train
        from manifold_dyn.tasks import static_metric
        ck = train(make_task("static_circle"), seed=0, iterations=200)
        sampler = lambda mu: static_metric(mu, ck.final_params)
        coarse = coordinate_arclength(sampler, [0.0, 2 * np.pi], 200)
        fine = coordinate_arclength(sampler, [0.0, 2 * np.pi], 2000)
        assert abs(coarse.total - fine.total) / fine.total < 0.005

    def test_negative_metric_rejected(self):
        with pytest.raises(MetricViolationError):
            coordinate_arclength(lambda mu: -np.ones_like(mu), [0, 1], 100)

    def test_min_steps(self):
        with pytest.raises(ConfigError):
            coordinate_arclength(lambda mu: np.ones_like(mu), [0, 1], 4)


class TestGridlines:
    def test_flat_metric_linear(self):
        sampler = lambda kap, axis: np.ones(len(kap))
        tables = geodesic_gridlines(sampler, [0.0, 0.0],
                                    [[0, 1], [0, 1]], lines_per_axis=1)
        for tab in tables:
            assert np.allclose(tab.norm_sqrt, (tab.mu - tab.mu[0]))

    def test_constant_scaling(self):
        base = lambda kap, axis: 1.0 + kap[:, axis] ** 2
        scaled = lambda kap, axis: 4.0 * (1.0 + kap[:, axis] ** 2)
        t1 = geodesic_gridlines(base, [0.0, 0.0], [[0, 1], [0, 1]], 1)
        t2 = geodesic_gridlines(scaled, [0.0, 0.0], [[0, 1], [0, 1]], 1)
        for a, b in zip(t1, t2):
            assert np.allclose(a.norm_sqrt, b.norm_sqrt)
            assert np.allclose(2.0 * a.sqrt_cum, b.sqrt_cum)

    def test_lines_per_axis(self):
        sampler = lambda kap, axis: np.ones(len(kap))
        tables = geodesic_gridlines(sampler, [0.5, 0.5],
                                    [[0, 1], [0, 1]], lines_per_axis=3)
        assert len(tables) == 6  # 2 axes x 3 lines


class TestMeshSurface:
    def make_field_chart(self):
        rng = np.random.default_rng(1)
        n = 6
        W = rng.normal(size=(n, n)) * 0.4 / np.sqrt(n)
        B = rng.normal(size=(n, 2)) * 0.8

        field = VectorField(n=n, d=2,
                            f=lambda x, u, t: np.tanh(x) @ W.T - x + u @ B.T)

        def u_fn(kappa, t):
            kappa = np.asarray(kappa, dtype=float)
            return np.stack([np.cos(kappa[..., 0]) + np.cos(kappa[..., 1]),
                             np.sin(kappa[..., 0]) - np.sin(kappa[..., 1])],
                            axis=-1)

        chart = InputChart(m=2, d=2, box=[[0, 2 * np.pi]] * 2, u_fn=u_fn,
                           periodic=(0, 1))
        return field, chart

    def test_smoke_grid8(self):
        field, chart = self.make_field_chart()
        mesh = mesh_surface(field, chart, 8, 1.0, np.zeros(field.n), 0.01)
        assert mesh.states.shape == (8, 8, field.n)

    def test_t0_all_identical(self):
        field, chart = self.make_field_chart()
        mesh = mesh_surface(field, chart, 8, 0.0, np.zeros(field.n), 0.01)
        assert np.all(mesh.states == mesh.states[0, 0])

    def test_matches_single_trajectory(self):
        from manifold_dyn.dynamics import integrate_ode
        field, chart = self.make_field_chart()
        mesh = mesh_surface(field, chart, 8, 1.0, np.zeros(field.n), 0.01)
        i, j = 3, 5
        kappa = [mesh.theta1[i], mesh.theta2[j]]
        traj = integrate_ode(field, chart, kappa, np.zeros(field.n), 1.0, 0.01)
        assert np.allclose(mesh.states[i, j], traj.x[-1], atol=1e-12)

    def test_non_periodic_chart_rejected(self):
        field, _ = self.make_field_chart()
        chart = InputChart(m=2, d=2, box=[[0, 1]] * 2,
                           u_fn=lambda k, t: np.asarray(k, dtype=float).copy())
        with pytest.raises(MeshError):
            mesh_surface(field, chart, 8, 1.0, np.zeros(field.n), 0.01)
