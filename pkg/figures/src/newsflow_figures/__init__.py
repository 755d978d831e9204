"""Publication figures rendered from newsflow report-bundle JSON artifacts."""

from .render import FigureSpec, build_figure, render
from .schema import SchemaMismatch, load_artifact

__version__ = "0.1.0"
