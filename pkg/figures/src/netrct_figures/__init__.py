"""Figure regeneration for the netrct simulation study."""

from .io import InputError
from .render import build_figure, render
from .specs import REGISTRY, FigureSpec

__version__ = "0.1.0"

__all__ = ["REGISTRY", "FigureSpec", "InputError", "build_figure", "render"]
