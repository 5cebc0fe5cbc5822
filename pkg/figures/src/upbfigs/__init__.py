"""Figure rendering for upbsim data files."""

from .render import FigureRequest, SchemaError, SidecarMissingError, render

__all__ = ["FigureRequest", "SchemaError", "SidecarMissingError", "render"]
__version__ = "0.1.0"
