"""Render the five standard figures from spinnet CSV output.

This package never recomputes physics: it consumes only the delimited
series files written by the ``spinnet`` command.
"""

from .figures import FIGURES, SchemaError, load_series, render

__version__ = "0.1.0"

__all__ = ["FIGURES", "SchemaError", "load_series", "render", "__version__"]
