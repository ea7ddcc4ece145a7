"""Riemannian geometry of input-driven dynamical systems.

Pullback metrics via adjoint sensitivities, geodesic gridlines, Gaussian
curvature of state-manifold meshes, and from-scratch training of the task
networks the analyses run on.
"""

__version__ = "0.1.0"

from .numerics import Rng, pca, stable_rank, subspace_similarity, svd, sym_eig
from .dynamics import (InputChart, StateTrajectory, VectorField, WienerPath,
                       integrate_ode, integrate_sde)
from .tangent import (JacobianRule, MetricTensor, TangentBasis, adjoint_tangent,
                      assemble_metric, fd_tangent, metric_eigs)
from .geometry import (CurvatureField, SurfaceMesh, coordinate_arclength,
                       gaussian_curvature, geodesic_gridlines, mesh_surface)
from .adam import AdamState, adam_step
from .checkpoint import Checkpoint
from .tasks import (EIWeights, context_task, ei_decision_task, make_task,
                    romo_task, static_circle_task, static_metric, wm_task)
from .training import train, warping_constrained_train

__all__ = [
    "Rng", "pca", "stable_rank", "subspace_similarity", "svd", "sym_eig",
    "InputChart", "StateTrajectory", "VectorField", "WienerPath",
    "integrate_ode", "integrate_sde",
    "JacobianRule", "MetricTensor", "TangentBasis", "adjoint_tangent",
    "assemble_metric", "fd_tangent", "metric_eigs",
    "CurvatureField", "SurfaceMesh", "coordinate_arclength",
    "gaussian_curvature", "geodesic_gridlines", "mesh_surface",
    "AdamState", "adam_step", "Checkpoint",
    "EIWeights", "context_task", "ei_decision_task", "make_task", "romo_task",
    "static_circle_task", "static_metric", "wm_task",
    "train", "warping_constrained_train",
]
