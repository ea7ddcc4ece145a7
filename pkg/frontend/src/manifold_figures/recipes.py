"""Figure recipes: required export files and the renderer for each id.

A recipe never invokes the producing package; it only reads the files
listed in `required`, all relative to the export directory. Each renderer's
docstring names the panels it draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import render
from .loading import ExportError


@dataclass(frozen=True)
class FigureRecipe:
    figure_id: str
    required: tuple
    renderer: Callable

    def check(self, export_dir):
        for rel in self.required:
            path = Path(export_dir) / rel
            if not path.exists():
                raise ExportError(f"required export file missing: {path}")

    def render(self, export_dir, out_dir) -> str:
        self.check(export_dir)
        out_path = Path(out_dir) / f"{self.figure_id}.png"
        return self.renderer(export_dir, out_path)


RECIPES = {
    "fig2": FigureRecipe(
        "fig2",
        ("static/gridlines.json",),
        lambda d, o: render.render_static(d, o, variants=("trained",))),
    "figS2": FigureRecipe(
        "figS2",
        ("static/gridlines.json",),
        lambda d, o: render.render_static(d, o, variants=("untrained", "trained"))),
    "fig3": FigureRecipe(
        "fig3",
        ("ei/ei_mesh.json", "ei/ei_metric.json"),
        render.render_ei),
    "fig4": FigureRecipe(
        "fig4",
        ("context/output_sweep.json", "context/gridlines.json",
         "context/eigen_decay.json", "context/selection_alignment.json",
         "context/neuron_loadings.json"),
        render.render_context),
    "figS5": FigureRecipe(
        "figS5",
        ("context/weight_spectrum.json", "context/gridlines.json",
         "context/eigen_decay.json"),
        render.render_context_supplementary),
    "fig6": FigureRecipe(
        "fig6",
        ("wm2/mesh.json", "wm2/curvature.json", "wm2/metric_field.json",
         "wm2/warp_ratio.json", "wm2/decoder_alignment.json",
         "wm2/subspace_stability.json", "wm3/arclength_prism.json"),
        render.render_wm),
    "figS-wm": FigureRecipe(
        "figS-wm",
        ("wm2_t2/curvature.json", "wm2/gridlines.json",
         "wm2/subspace_stability.json"),
        render.render_wm_supplementary),
    "figS-romo": FigureRecipe(
        "figS-romo",
        ("romo/stable_rank_trace.json",),
        render.render_romo),
}
