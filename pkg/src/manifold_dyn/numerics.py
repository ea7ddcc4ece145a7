"""Dense linear-algebra primitives and the seedable random generator.

Everything here is a thin, contract-checked layer over numpy.linalg, sized
for the <= 200x200 matrices the rest of the package produces. All functions
are pure; `Rng` instances are single-owner.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionError,
    InvalidInputError,
    OrthonormalityError,
    PsdViolationError,
    SymmetryError,
)

RNG_ALGORITHM = "philox4x64"

SYM_TOL = 1e-10


class Rng:
    """Counter-based random generator with a fixed, named algorithm.

    Identical (seed, stream) pairs produce bit-identical streams on every
    platform. Child streams for parallel work come from `spawn`, never from
    jumping a shared instance.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self.algorithm = RNG_ALGORITHM
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def spawn(self, stream: int) -> "Rng":
        """Independent child stream; deterministic in (seed, stream)."""
        return Rng(self.seed, stream)

    def normal(self, size=None, std=1.0):
        return self._gen.standard_normal(size=size) * std

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size=size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix has non-finite entries")
    return m


def sym_eig(s) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues descending, eigenvectors as orthonormal columns),
    so s @ vecs[:, i] == vals[i] * vecs[:, i].
    """
    s = _as_matrix(s)
    if s.shape[0] != s.shape[1]:
        raise DimensionError(f"matrix is {s.shape}, not square")
    scale = max(np.abs(s).max(), 1.0)
    if np.abs(s - s.T).max() > SYM_TOL * scale:
        raise SymmetryError(
            f"matrix asymmetry {np.abs(s - s.T).max():.3e} exceeds {SYM_TOL:.0e} * scale"
        )
    vals, vecs = np.linalg.eigh(0.5 * (s + s.T))
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD, singular values descending.

    Returns (u, sigma, v) with m == u @ diag(sigma) @ v.T; u, v have
    orthonormal columns.
    """
    m = _as_matrix(m)
    u, sig, vt = np.linalg.svd(m, full_matrices=False)
    return u, sig, vt.T


def stable_rank(s) -> float:
    """Nuclear norm over spectral norm of a symmetric PSD matrix.

    0 for the zero matrix by convention.
    """
    s = _as_matrix(s)
    vals, _ = sym_eig(s)
    top = vals[0] if len(vals) else 0.0
    if top <= 0.0:
        if len(vals) and vals[-1] < -1e-8 * max(abs(vals[0]), 1.0):
            raise PsdViolationError(f"most negative eigenvalue {vals[-1]:.3e}")
        return 0.0
    if vals[-1] < -1e-8 * top:
        raise PsdViolationError(
            f"eigenvalue {vals[-1]:.3e} below -1e-8 * spectral norm {top:.3e}"
        )
    return float(np.sum(np.clip(vals, 0.0, None)) / top)


def pca(x, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """PCA after mean-centring.

    x is samples x features. Returns (components: k orthonormal rows =
    top-k right singular vectors of the centered data, projections:
    samples x k, explained variances: length k).
    """
    x = _as_matrix(x)
    n_samples, n_feat = x.shape
    if n_samples < 2:
        raise DimensionError("PCA needs at least 2 samples")
    if k > min(n_samples, n_feat):
        raise DimensionError(
            f"k={k} exceeds min(samples, features)={min(n_samples, n_feat)}"
        )
    centered = x - x.mean(axis=0)
    if n_samples >= n_feat:
        # Gram route: right singular vectors are eigenvectors of X^T X.
        vals, vecs = sym_eig(centered.T @ centered)
        components = vecs[:, :k].T
        variances = np.clip(vals[:k], 0.0, None) / (n_samples - 1)
    else:
        _, sig, v = svd(centered)
        components = v[:, :k].T
        variances = sig[:k] ** 2 / (n_samples - 1)
    projections = centered @ components.T
    return components, projections, variances


def subspace_similarity(v1, v2) -> float:
    """Nuclear norm of v1 @ v2.T divided by the subspace dimension.

    v1, v2 are k x n with orthonormal rows. 1 for identical subspaces,
    0 for orthogonal ones.
    """
    v1 = _as_matrix(v1)
    v2 = _as_matrix(v2)
    if v1.shape != v2.shape:
        raise DimensionError(f"subspace shapes differ: {v1.shape} vs {v2.shape}")
    k = v1.shape[0]
    for name, v in (("v1", v1), ("v2", v2)):
        gram = v @ v.T
        if np.abs(gram - np.eye(k)).max() > 1e-8:
            raise OrthonormalityError(
                f"{name} rows not orthonormal (max deviation "
                f"{np.abs(gram - np.eye(k)).max():.3e})"
            )
    sig = np.linalg.svd(v1 @ v2.T, compute_uv=False)
    return float(np.sum(sig) / k)


def participation_ratio(values) -> float:
    """(sum v)^2 / sum v^2 for a nonnegative spectrum; 0 for all-zero input."""
    v = np.asarray(values, dtype=float)
    denom = float(np.sum(v**2))
    if denom == 0.0:
        return 0.0
    return float(np.sum(v) ** 2 / denom)
