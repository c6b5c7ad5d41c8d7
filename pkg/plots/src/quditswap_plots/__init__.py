"""Figure rendering for quditswap sweep CSVs."""

__version__ = "0.1.0"

from .render import FigureRequest, build_figure, render  # noqa: F401
