"""vecont-figs: chart renderer for vecont figure-data JSON."""

from .render import RenderJob, SchemaMismatch, UnknownKind, build_figure, render

__version__ = "0.1.0"

__all__ = ["RenderJob", "SchemaMismatch", "UnknownKind", "build_figure", "render", "__version__"]
