"""Numerical laboratory for Orlicz maximal operators and mixed weak-type estimates
on dyadic grids."""
from .grid import DyadicCube, DyadicGrid, GridFunction
from .young import ParameterError, YoungFunction, make_canonical

__version__ = "0.1.0"

__all__ = ["DyadicCube", "DyadicGrid", "GridFunction", "ParameterError", "YoungFunction",
           "make_canonical", "__version__"]
