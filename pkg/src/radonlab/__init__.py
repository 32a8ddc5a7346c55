"""Numerical laboratory for discrete polynomial averages and Radon-type operators."""
from .averages import (FractionalOrder, MomentCurveAverage, PolynomialAverage, average, fractional,
                       maximal, multidim_average, multidim_fractional)
from .errors import RadonlabError
from .poly import IntPolynomial, decompose
from .signal import Signal, SparseSignal, lp_norm
from .weyl import ls_norm_estimate, mean_value_brute, mean_value_exact, weyl_sum

__all__ = [
    "FractionalOrder", "IntPolynomial", "MomentCurveAverage", "PolynomialAverage", "RadonlabError",
    "Signal", "SparseSignal", "average", "decompose", "fractional", "lp_norm", "ls_norm_estimate",
    "maximal", "mean_value_brute", "mean_value_exact", "multidim_average", "multidim_fractional",
    "weyl_sum",
]
__version__ = "0.1.0"
