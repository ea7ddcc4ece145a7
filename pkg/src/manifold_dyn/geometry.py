"""Geometric diagnostics on sampled metrics and meshed surfaces.

Gaussian curvature follows the first-order forward-difference pipeline of
the intrinsic (Theorema-Egregium) formula: tangent vectors by differencing
the mesh, metric as their Gram matrix, then two more rounds of differences.
Arc lengths are trapezoidal integrals along coordinate lines, reported both
as proper lengths (sqrt integrand) and in the squared-integrand variant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dynamics import InputChart, VectorField
from .errors import ConfigError, MeshError, MetricViolationError
from .tangent import tangent_grid

DEGENERACY_FACTOR = 1e-12  # det G < factor * (tr G)^2 flags a point invalid


@dataclass
class SurfaceMesh:
    """States x(t, theta1, theta2) on a uniform 2-D parameter grid at fixed t."""

    theta1: np.ndarray  # (g1,)
    theta2: np.ndarray  # (g2,)
    t: float
    states: np.ndarray  # (g1, g2, n)
    periodic: tuple = (True, True)

    def __post_init__(self):
        for ax, grid in enumerate((self.theta1, self.theta2)):
            d = np.diff(grid)
            if len(d) and np.abs(d - d[0]).max() > 1e-9 * max(abs(d[0]), 1e-30):
                raise MeshError(f"axis {ax + 1} grid is not uniform")

    @property
    def spacing(self):
        return float(self.theta1[1] - self.theta1[0]), float(self.theta2[1] - self.theta2[0])


@dataclass
class CurvatureField:
    """Gaussian curvature per mesh point with an invalid-point mask."""

    K: np.ndarray  # (g1, g2)
    valid: np.ndarray  # (g1, g2) bool
    mesh: SurfaceMesh
    det_g: np.ndarray = None  # det of the forward-difference metric

    def total_curvature(self):
        """(integral of K dA, integral of |K| dA) over valid points."""
        d1, d2 = self.mesh.spacing
        area = np.sqrt(np.clip(self.det_g, 0.0, None)) * d1 * d2
        k = np.where(self.valid, self.K, 0.0)
        a = np.where(self.valid, area, 0.0)
        return float(np.sum(k * a)), float(np.sum(np.abs(k) * a))


def _forward_diff(arr, axis, spacing):
    return (np.roll(arr, -1, axis=axis) - arr) / spacing


def gaussian_curvature(mesh: SurfaceMesh) -> CurvatureField:
    """Gaussian curvature by forward differences of the intrinsic formula.

    k1 = (d2 G12 - d1 G22) / (2 sqrt(det G)),
    k2 = (d1 G12 - d2 G11) / (2 sqrt(det G)),
    K  = (d1 k1 + d2 k2) / sqrt(det G).

    Non-periodic axes lose their trailing rows to the three stacked forward
    differences; those points are flagged invalid, as are points where
    det G < 1e-12 (tr G)^2.
    """
    d1, d2 = mesh.spacing
    if max(d1, d2) > 0.02 * np.pi + 1e-12:
        raise MeshError(
            f"mesh spacing ({d1:.4f}, {d2:.4f}) exceeds 0.02*pi; refine the grid")
    x = mesh.states
    v1 = _forward_diff(x, 0, d1)
    v2 = _forward_diff(x, 1, d2)
    g11 = np.einsum("ijn,ijn->ij", v1, v1)
    g12 = np.einsum("ijn,ijn->ij", v1, v2)
    g22 = np.einsum("ijn,ijn->ij", v2, v2)
    det = g11 * g22 - g12**2
    tr = g11 + g22
    degenerate = det < DEGENERACY_FACTOR * tr**2
    sqrt_det = np.sqrt(np.where(degenerate, 1.0, det))

    dg12_d2 = _forward_diff(g12, 1, d2)
    dg22_d1 = _forward_diff(g22, 0, d1)
    dg12_d1 = _forward_diff(g12, 0, d1)
    dg11_d2 = _forward_diff(g11, 1, d2)
    k1 = (dg12_d2 - dg22_d1) / (2 * sqrt_det)
    k2 = (dg12_d1 - dg11_d2) / (2 * sqrt_det)
    dk1_d1 = _forward_diff(k1, 0, d1)
    dk2_d2 = _forward_diff(k2, 1, d2)
    K = (dk1_d1 + dk2_d2) / sqrt_det

    valid = ~degenerate
    # each forward-difference layer eats one more trailing row on a
    # non-periodic axis: x->V, G->dG, k->dk
    if not mesh.periodic[0]:
        valid[-3:, :] = False
    if not mesh.periodic[1]:
        valid[:, -3:] = False
    return CurvatureField(K=np.where(valid, K, np.nan), valid=valid, mesh=mesh,
                          det_g=np.where(degenerate, 0.0, det))


def mesh_surface(field: VectorField, chart: InputChart, grid_size, t, x0, dt,
                 method: str = "heun", diffusion=None, path=None,
                 theta_max=2 * np.pi) -> SurfaceMesh:
    """Integrate one trajectory per (theta1, theta2) grid point, sample at t.

    The chart must have two periodic coordinates; periodicity of the chart
    is verified (u at theta=0 equals u at theta=2pi) before integrating.
    """
    if chart.m != 2:
        raise MeshError(f"surface meshing needs a 2-angle chart, got m={chart.m}")
    g1, g2 = (grid_size, grid_size) if np.isscalar(grid_size) else grid_size
    th1 = np.arange(g1) * (theta_max / g1)
    th2 = np.arange(g2) * (theta_max / g2)
    for ts in np.linspace(0, t, 5):
        lo = chart.u(np.array([0.0, 0.0]), ts)
        hi = chart.u(np.array([theta_max, theta_max]), ts)
        if np.abs(np.asarray(lo) - np.asarray(hi)).max() > 1e-6:
            raise MeshError("chart is not 2*pi-periodic in its angles")
    T1, T2 = np.meshgrid(th1, th2, indexing="ij")
    kappas = np.column_stack([T1.ravel(), T2.ravel()])
    _, xs, _, _ = tangent_grid(field, None, chart, kappas, x0, [t], dt,
                               method, diffusion=diffusion, path=path)
    states = xs[0].reshape(g1, g2, field.n)
    return SurfaceMesh(theta1=th1, theta2=th2, t=float(t), states=states,
                       periodic=(True, True))


@dataclass
class ArcLength:
    """Cumulative coordinate-line length from the start of the range."""

    mu: np.ndarray  # (steps + 1,)
    sqrt_cum: np.ndarray  # trapezoid of sqrt(G_ii)
    sq_cum: np.ndarray  # trapezoid of G_ii (squared-integrand variant)

    @property
    def total(self):
        return float(self.sqrt_cum[-1])

    @property
    def total_sq(self):
        return float(self.sq_cum[-1])


def coordinate_arclength(sampler: Callable[[float], float], rng, steps: int) -> ArcLength:
    """Trapezoidal cumulative length of one coordinate line.

    `sampler(mu)` returns the diagonal metric entry G_ii at parameter mu
    (vectorized samplers may receive an array). Both the proper length
    (sqrt integrand) and the squared-integrand cumulative are returned.
    """
    if steps < 8:
        raise ConfigError(f"need at least 8 steps, got {steps}")
    a, b = float(rng[0]), float(rng[1])
    mu = np.linspace(a, b, steps + 1)
    try:
        g = np.asarray(sampler(mu), dtype=float)
        if g.shape != mu.shape:
            raise TypeError
    except TypeError:
        g = np.array([float(sampler(v)) for v in mu])
    if g.min() < -1e-8:
        raise MetricViolationError(f"negative metric entry {g.min():.3e} on the line")
    g = np.clip(g, 0.0, None)
    dmu = (b - a) / steps

    def cum(vals):
        seg = 0.5 * (vals[1:] + vals[:-1]) * dmu
        return np.concatenate([[0.0], np.cumsum(seg)])

    return ArcLength(mu=mu, sqrt_cum=cum(np.sqrt(g)), sq_cum=cum(g))


@dataclass
class GridlineTable:
    """Cumulative lengths of one coordinate gridline with normalization."""

    axis: int
    fixed: dict  # other-axis coordinate values held fixed
    mu: np.ndarray
    sqrt_cum: np.ndarray
    sq_cum: np.ndarray
    norm_sqrt: np.ndarray  # sqrt_cum / total, per the normalized-gridline figure
    norm_sq: np.ndarray
    reference: float


def geodesic_gridlines(sampler, reference, ranges, lines_per_axis: int,
                       steps: int = 200):
    """Coordinate gridlines under the metric: one table per line.

    `sampler(kappa_vector, axis)` returns G_{axis,axis} at the chart point;
    it may receive a batch (B, m) and return (B,). For each axis, the other
    coordinates sweep `lines_per_axis` evenly spaced values over their
    ranges (a single line through the reference when lines_per_axis == 1).
    """
    reference = np.asarray(reference, dtype=float)
    m = len(reference)
    ranges = np.asarray(ranges, dtype=float).reshape(m, 2)
    tables = []
    for axis in range(m):
        others = [j for j in range(m) if j != axis]
        if lines_per_axis == 1 or not others:
            fixed_sets = [tuple(reference[j] for j in others)]
        else:
            axes_vals = [np.linspace(*ranges[j], lines_per_axis) for j in others]
            mesh = np.meshgrid(*axes_vals, indexing="ij") if others else []
            fixed_sets = list(zip(*[g.ravel() for g in mesh]))
        for fixed in fixed_sets:
            def line_sampler(mu, _axis=axis, _fixed=fixed, _others=others):
                mu = np.atleast_1d(np.asarray(mu, dtype=float))
                kap = np.empty((len(mu), m))
                kap[:, _axis] = mu
                for j, val in zip(_others, _fixed):
                    kap[:, j] = val
                return sampler(kap, _axis)

            arc = coordinate_arclength(line_sampler, ranges[axis], steps)
            tot = arc.total if arc.total > 0 else 1.0
            tot_sq = arc.total_sq if arc.total_sq > 0 else 1.0
            tables.append(GridlineTable(
                axis=axis, fixed=dict(zip(others, fixed)), mu=arc.mu,
                sqrt_cum=arc.sqrt_cum, sq_cum=arc.sq_cum,
                norm_sqrt=arc.sqrt_cum / tot, norm_sq=arc.sq_cum / tot_sq,
                reference=float(reference[axis])))
    return tables


def curvature_extremum_patch(curv: CurvatureField, mode: str = "max",
                             half_width: float = 0.19 * np.pi):
    """Mesh indices of the +-0.19pi window around the curvature extremum."""
    K = np.where(curv.valid, curv.K, np.nan)
    flat = np.nanargmax(K) if mode == "max" else np.nanargmin(K)
    i0, j0 = np.unravel_index(flat, K.shape)
    d1, d2 = curv.mesh.spacing
    w1 = int(round(half_width / d1))
    w2 = int(round(half_width / d2))
    rows = (np.arange(i0 - w1, i0 + w1 + 1)) % K.shape[0]
    cols = (np.arange(j0 - w2, j0 + w2 + 1)) % K.shape[1]
    return {
        "center": (float(curv.mesh.theta1[i0]), float(curv.mesh.theta2[j0])),
        "rows": rows,
        "cols": cols,
        "states": curv.mesh.states[np.ix_(rows, cols)],
        "K": curv.K[np.ix_(rows, cols)],
    }


def export_mesh(path, mesh: SurfaceMesh, curv: Optional[CurvatureField] = None,
                pca_block: Optional[dict] = None, meta: Optional[dict] = None):
    """JSON export of a mesh (and optional curvature / PCA projections)."""
    doc = {
        "schema_version": 1,
        "theta1_grid": mesh.theta1.tolist(),
        "theta2_grid": mesh.theta2.tolist(),
        "t": mesh.t,
        "n": int(mesh.states.shape[-1]),
        "states": mesh.states.reshape(-1).tolist(),
        "periodic": list(mesh.periodic),
    }
    if curv is not None:
        doc["K"] = np.where(curv.valid, curv.K, 0.0).reshape(-1).tolist()
        doc["invalid_mask"] = (~curv.valid).reshape(-1).astype(int).tolist()
    if pca_block is not None:
        doc["pca"] = pca_block
    if meta:
        doc["meta"] = meta
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return path
