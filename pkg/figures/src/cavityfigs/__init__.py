"""Figure rendering for simulation result tables.

Consumes the CSV/JSON tables (and their metadata sidecars) written by the
``cavitydyn`` command-line interface and renders deterministic
publication-style figures.  No physics is recomputed here; images are pure
functions of the input tables.
"""

from .errors import EmptyTableError, FigureError, MissingColumnsError, TableFormatError
from .make import make_figure, produce_tables
from .render import SUPPORTED_FORMATS, render
from .spec import FIGURES, FigureSpec, build_figure_spec
from .tables import Table, load_table

__all__ = [
    "EmptyTableError",
    "FigureError",
    "MissingColumnsError",
    "TableFormatError",
    "FIGURES",
    "FigureSpec",
    "SUPPORTED_FORMATS",
    "Table",
    "build_figure_spec",
    "load_table",
    "make_figure",
    "produce_tables",
    "render",
]

__version__ = "0.1.0"
