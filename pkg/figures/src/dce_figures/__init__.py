"""Static reproductions of the study figures from dce-lab CSV outputs.

This package only reads the documented CSV schemas (stability sweeps and
trajectory files) and draws; every number it plots was computed by dce-lab.
"""

__version__ = "0.1.0"

from .render import FigureSpec, RenderSummary, SchemaError, render

__all__ = ["FigureSpec", "RenderSummary", "SchemaError", "render"]
