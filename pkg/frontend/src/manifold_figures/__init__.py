"""Figure rendering for exported manifold-dyn analyses (files in, PNGs out)."""

__version__ = "0.1.0"

from .loading import ExportError
from .recipes import RECIPES

__all__ = ["ExportError", "RECIPES"]
