"""Exception taxonomy shared across the package.

The CLI maps these onto its exit-code contract: ConfigError -> 1,
DivergenceError -> 2, ThresholdError -> 3.
"""


class ManifoldDynError(Exception):
    """Base class for all package errors."""


class InvalidInputError(ManifoldDynError):
    """Non-finite or otherwise malformed numeric input."""


class SymmetryError(InvalidInputError):
    """Matrix expected symmetric is not, beyond tolerance."""


class PsdViolationError(InvalidInputError):
    """Matrix expected positive semi-definite has a significantly negative eigenvalue."""


class OrthonormalityError(InvalidInputError):
    """Rows expected orthonormal are not, beyond tolerance."""


class DimensionError(ManifoldDynError):
    """Incompatible shapes or out-of-range dimension request."""


class ConfigError(ManifoldDynError):
    """Bad configuration: unknown keys, missing files, schema violations, grid mismatches."""


class DivergenceError(ManifoldDynError):
    """State norm exceeded the overflow guard during integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class GradientBlowupError(ManifoldDynError):
    """Non-finite gradient encountered; carries the offending parameter name."""

    def __init__(self, message, param=None):
        super().__init__(message)
        self.param = param


class TrainingDivergenceError(ManifoldDynError):
    """Forward pass diverged during training; carries the partial checkpoint if any."""

    def __init__(self, message, checkpoint=None):
        super().__init__(message)
        self.checkpoint = checkpoint


class DegeneratePerturbationError(ManifoldDynError):
    """Finite-difference step too small to be meaningful."""


class MetricViolationError(ManifoldDynError):
    """Sampled metric entry violates positivity beyond tolerance."""


class MeshError(ManifoldDynError):
    """Surface mesh is malformed for the requested operation."""


class ThresholdError(ManifoldDynError):
    """A declared analysis threshold failed (CI gating)."""
