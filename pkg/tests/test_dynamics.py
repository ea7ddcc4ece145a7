import numpy as np
import pytest

from manifold_dyn.dynamics import (InputChart, VectorField, WienerPath,
                                   integrate_ode, integrate_sde, time_grid)
from manifold_dyn.errors import ConfigError, DivergenceError
from manifold_dyn.numerics import Rng


def decay_field():
    return VectorField(n=1, d=1, f=lambda x, u, t: -x)


def const_chart(m=1, d=1):
    return InputChart(m=m, d=d, box=[[0.0, 1.0]] * m,
                      u_fn=lambda k, t: np.zeros(np.shape(k)[:-1] + (d,)))


class TestIntegrateOde:
    def test_exponential_decay_heun(self):
        traj = integrate_ode(decay_field(), const_chart(), [0.0], [1.0], 1.0,
                             1e-3, "heun")
        assert abs(traj.x[-1, 0] - np.exp(-1.0)) < 1e-5

    def test_zero_field_constant(self):
        field = VectorField(n=2, d=1, f=lambda x, u, t: np.zeros_like(x))
        traj = integrate_ode(field, const_chart(), [0.0], [1.5, -2.5], 1.0, 0.01)
        assert np.all(traj.x == np.array([1.5, -2.5]))

    def test_harmonic_heun_error_quarters_when_dt_halves(self):
        field = VectorField(n=2, d=1,
                            f=lambda x, u, t: np.stack([x[..., 1], -x[..., 0]], axis=-1))
        x0 = [1.0, 0.0]
        exact = np.array([np.cos(2.0), -np.sin(2.0)])
        errs = []
        for dt in (0.02, 0.01):
            traj = integrate_ode(field, const_chart(), [0.0], x0, 2.0, dt)
            errs.append(np.linalg.norm(traj.x[-1] - exact))
        ratio = errs[0] / errs[1]
        assert 4 * 0.8 <= ratio <= 4 * 1.2

    @pytest.mark.parametrize("method,order", [("euler", 1.0), ("heun", 2.0)])
    def test_convergence_slope(self, method, order):
        dts = np.array([0.04, 0.02, 0.01, 0.005])
        errs = []
        for dt in dts:
            traj = integrate_ode(decay_field(), const_chart(), [0.0], [1.0],
                                 1.0, dt, method)
            errs.append(abs(traj.x[-1, 0] - np.exp(-1.0)))
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert abs(slope - order) <= 0.2

    def test_final_time_within_dt(self):
        traj = integrate_ode(decay_field(), const_chart(), [0.0], [1.0], 1.0, 0.3)
        assert abs(traj.t[-1] - 1.0) <= 0.3

    def test_divergence_guard_names_time(self):
        field = VectorField(n=1, d=1, f=lambda x, u, t: x * x + 1.0)
        with pytest.raises(DivergenceError) as exc:
            integrate_ode(field, const_chart(), [0.0], [1.0], 10.0, 0.01)
        assert exc.value.time is not None

    def test_bad_method(self):
        with pytest.raises(ConfigError):
            integrate_ode(decay_field(), const_chart(), [0.0], [1.0], 1.0, 0.01,
                          "rk4")

    def test_trajectory_continuity_in_kappa(self):
        # |x(t; k+d) - x(t; k)| decreases monotonically as d -> 0
        chart = InputChart(m=1, d=1, box=[[0.0, 1.0]],
                           u_fn=lambda k, t: np.sin(3 * np.asarray(k)))
        field = VectorField(n=1, d=1, f=lambda x, u, t: -x + u)
        base = integrate_ode(field, chart, [0.5], [0.0], 2.0, 0.01).x[-1]
        gaps = []
        for d in (1e-2, 1e-3, 1e-4):
            pert = integrate_ode(field, chart, [0.5 + d], [0.0], 2.0, 0.01).x[-1]
            gaps.append(np.linalg.norm(pert - base))
        assert gaps[0] > gaps[1] > gaps[2]


class TestFieldSmoothness:
    def test_task_fields_differentiable_by_probe(self):
        # central-difference probes of f in x and u converge (smoothness)
        from manifold_dyn.numerics import Rng
        from manifold_dyn.tasks import make_task

        rng = np.random.default_rng(23)
        for task_id in ("context", "wm2", "romo", "ei_decision"):
            task = make_task(task_id, {} if task_id == "ei_decision" else {"n": 9})
            params = (task.fixed_params if task_id == "ei_decision"
                      else task.init_params(Rng(3)))
            field = task.field(params)
            x = rng.normal(size=field.n) * 0.3
            u = rng.normal(size=field.d) * 0.2
            for h in (1e-4, 1e-5):
                for i in range(field.n):
                    e = np.zeros(field.n)
                    e[i] = h
                    d2 = field(x + e, u, 1.0) - 2 * field(x, u, 1.0) + field(x - e, u, 1.0)
                    # second difference of a smooth field scales with h^2
                    assert np.abs(d2).max() < 10 * h
                e = np.zeros(field.d)
                e[0] = h
                du = (field(x, u + e, 1.0) - field(x, u - e, 1.0)) / (2 * h)
                assert np.all(np.isfinite(du))


class TestCharts:
    def test_analytic_derivative_matches_central_differences(self):
        # every shipped chart: 100 random (kappa, t) probes at 1e-6 relative
        from manifold_dyn.tasks import (context_task, ei_decision_task,
                                        romo_task, static_circle_task, wm_task)
        charts = [
            context_task().chart(1), context_task().chart(2),
            wm_task(2).chart(), wm_task(3).chart(),
            romo_task().chart(), ei_decision_task(validate=False).chart(),
            static_circle_task().chart(),
        ]
        rng = np.random.default_rng(11)
        for chart in charts:
            for _ in range(100):
                kappa = np.array([rng.uniform(lo, hi) for lo, hi in chart.box])
                t = rng.uniform(0.0, 8.0)
                ana = chart.du_dkappa(kappa, t)
                delta = 1e-6
                fd = np.zeros_like(ana)
                for i in range(chart.m):
                    e = np.zeros(chart.m)
                    e[i] = delta
                    fd[:, i] = (chart.u(kappa + e, t) - chart.u(kappa - e, t)) / (2 * delta)
                scale = max(np.abs(ana).max(), 1.0)
                assert np.abs(ana - fd).max() <= 1e-6 * scale


class TestIntegrateSde:
    def test_zero_diffusion_matches_ode_bitwise(self):
        rng = Rng(3)
        path = WienerPath.sample(rng, 1, 1.0, 0.01)
        field = VectorField(n=2, d=1, f=lambda x, u, t: -x)
        diffusion = lambda x, u, t: np.zeros((2, 1))
        sde = integrate_sde(field, diffusion, const_chart(), [0.0], [1.0, 0.3],
                            1.0, 0.01, path)
        ode = integrate_ode(field, const_chart(), [0.0], [1.0, 0.3], 1.0, 0.01)
        assert np.array_equal(sde.x, ode.x)

    def test_zero_path_matches_ode_bitwise(self):
        path = WienerPath.zeros(2, 1.0, 0.01)
        field = VectorField(n=2, d=1, f=lambda x, u, t: -x)
        diffusion = lambda x, u, t: np.eye(2)
        sde = integrate_sde(field, diffusion, const_chart(), [0.0], [1.0, 0.3],
                            1.0, 0.01, path)
        ode = integrate_ode(field, const_chart(), [0.0], [1.0, 0.3], 1.0, 0.01)
        assert np.array_equal(sde.x, ode.x)

    def test_pure_diffusion_monte_carlo_variance(self):
        # dx = sigma dW: Var[x(1)] = sigma^2; 10^4 paths within 5%
        sigma = 0.7
        field = VectorField(n=1, d=1, f=lambda x, u, t: np.zeros_like(x))
        diffusion = lambda x, u, t: np.array([[sigma]])
        rng = Rng(10)
        finals = []
        t_end, dt = 1.0, 0.02
        for i in range(10_000):
            path = WienerPath.sample(rng, 1, t_end, dt)
            # direct endpoint: x(1) = sigma * sum dW (cheap equivalent of the
            # stepping result for pure additive noise)
            finals.append(sigma * path.dW.sum())
        var = np.var(finals)
        assert abs(var - sigma**2) / sigma**2 < 0.05
        # and the solver agrees with the direct sum on one path
        path = WienerPath.sample(Rng(11), 1, t_end, dt)
        traj = integrate_sde(field, diffusion, const_chart(), [0.0], [0.0],
                             t_end, dt, path)
        assert np.isclose(traj.x[-1, 0], sigma * path.dW.sum())

    def test_same_seed_identical(self):
        field = VectorField(n=1, d=1, f=lambda x, u, t: -x)
        diffusion = lambda x, u, t: np.array([[0.5]])
        runs = []
        for _ in range(2):
            path = WienerPath.sample(Rng(5), 1, 1.0, 0.01)
            runs.append(integrate_sde(field, diffusion, const_chart(), [0.0],
                                      [1.0], 1.0, 0.01, path).x)
        assert np.array_equal(runs[0], runs[1])

    def test_grid_mismatch_rejected(self):
        field = VectorField(n=1, d=1, f=lambda x, u, t: -x)
        path = WienerPath.zeros(1, 2.0, 0.01)
        with pytest.raises(ConfigError):
            integrate_sde(field, lambda x, u, t: np.array([[1.0]]),
                          const_chart(), [0.0], [1.0], 1.0, 0.01, path)

    def test_wiener_increment_variance(self):
        path = WienerPath.sample(Rng(6), 3, 5.0, 0.01)
        assert path.dW.shape == (500, 3)
        assert abs(path.dW.var() - 0.01) < 0.002


class TestExports:
    def test_trajectory_csv_roundtrip(self, tmp_path):
        traj = integrate_ode(decay_field(), const_chart(), [0.0], [1.0], 0.5, 0.1)
        stem = tmp_path / "traj"
        csv_path = traj.to_csv(stem)
        lines = open(csv_path).read().strip().splitlines()
        assert lines[0] == "t,x_0"
        assert len(lines) == len(traj.t) + 1
        import json
        sidecar = json.load(open(str(stem) + ".json"))
        assert sidecar["method"] == "heun"
        assert sidecar["dt"] == 0.1

    def test_time_grid_validation(self):
        with pytest.raises(ConfigError):
            time_grid(1.0, -0.1)
        with pytest.raises(ConfigError):
            time_grid(0.005, 0.01)
